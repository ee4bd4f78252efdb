"""Trajectory diagnostics: generalized center, position recovery, tail suprema,
energy drift and ring-state statistics."""

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import InputError
from .integrate import Trajectory
from .model import SwarmModel, SwarmState, accel, lienard_accel


def generalized_center(Q, r) -> np.ndarray:
    """Row k is ``sum_j Q[k, j] r_j``; leading batch axes on ``r`` allowed."""
    return np.einsum("kj,...jd->...kd", np.asarray(Q, float), np.asarray(r, float))


def center_matrix(model: SwarmModel) -> np.ndarray:
    """Kernel projection for linear coupling, the plain average otherwise."""
    if model.is_linear:
        return model.coupling.Q
    return np.full((model.n, model.n), 1.0 / model.n)


def position_residual(model: SwarmModel, s: SwarmState) -> np.ndarray:
    """``(r - Q r) - S^{-1}(-y - F(x))`` with ``(x, y) = (v, v')``; zero on true solutions."""
    c = model.require_linear()
    r, v = np.asarray(s.r, float), np.asarray(s.v, float)
    y = accel(model, r, v)
    recovered = c.S_inv @ (-y - model.flux(v))
    return (r - c.Q @ r) - recovered


@dataclass
class BoundsReport:
    tail_window: tuple
    sup_speed: float
    sup_accel: float
    sup_center_offset: float
    per_agent_speed: np.ndarray
    per_agent_accel: np.ndarray
    per_agent_center_offset: np.ndarray
    center_drift_slope: float

    def to_dict(self):
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, np.ndarray):
                d[k] = v.tolist()
        d["tail_window"] = list(self.tail_window)
        return d


def _window(traj: Trajectory, window_fraction: float) -> np.ndarray:
    if not 0 < window_fraction <= 1:
        raise InputError("window_fraction must be in (0, 1]")
    t0, t1 = traj.times[0], traj.times[-1]
    start = t1 - window_fraction * (t1 - t0)
    idx = np.nonzero(traj.times >= start - 1e-12)[0]
    if len(idx) < 2:
        raise InputError("tail window holds fewer than 2 samples")
    return idx


def _accelerations(model, traj, idx):
    if traj.system == "lienard":
        raise InputError("tail_bounds expects a position trajectory")
    return np.array([accel(model, traj.r[i], traj.v[i]) for i in idx])


def tail_bounds(model: SwarmModel, traj: Trajectory, window_fraction: float = 0.5,
                Q: Optional[np.ndarray] = None) -> BoundsReport:
    """Suprema of speed, acceleration and offset from the generalized center over the tail.

    Accelerations are recomputed from the right-hand side.  Also reports the
    least-squares slope of ``|mean position|`` over the window.
    """
    idx = _window(traj, window_fraction)
    Q = center_matrix(model) if Q is None else np.asarray(Q, float)
    r, v = traj.r[idx], traj.v[idx]
    speed = np.linalg.norm(v, axis=-1).max(axis=0)
    acc = np.linalg.norm(_accelerations(model, traj, idx), axis=-1).max(axis=0)
    offset = np.linalg.norm(r - generalized_center(Q, r), axis=-1).max(axis=0)
    mean_pos = np.linalg.norm(r.mean(axis=1), axis=-1)
    slope = float(np.polyfit(traj.times[idx], mean_pos, 1)[0])
    return BoundsReport(
        (float(traj.times[idx[0]]), float(traj.times[idx[-1]])),
        float(speed.max()), float(acc.max()), float(offset.max()),
        speed, acc, offset, slope,
    )


def energy_drift(model: SwarmModel, traj: Trajectory) -> float:
    """``max_{t, l} |E_l(t) - E_l(0)|``; position trajectories are mapped to ``(v, v')``."""
    c = model.require_linear()
    if traj.system == "lienard":
        x, y = traj.x, traj.y
    else:
        x = traj.v
        y = np.array([accel(model, r, v) for r, v in zip(traj.r, traj.v)])
    E = generalized_center(c.Q, y + model.flux(x))
    return float(np.abs(E - E[0]).max()) if len(E) > 1 else 0.0


def lienard_residual(model: SwarmModel, x, y, dy) -> np.ndarray:
    """Mismatch of a candidate ``y' `` against the Lienard right-hand side."""
    return np.asarray(dy, float) - lienard_accel(model, np.asarray(x, float), np.asarray(y, float))


@dataclass
class RingMetrics:
    mean_speed: np.ndarray
    mean_radius: np.ndarray
    radius_stddev: np.ndarray

    def to_dict(self):
        return {k: v.tolist() for k, v in asdict(self).items()}


def ring_metrics(traj: Trajectory, Q, window_fraction: float = 0.5) -> RingMetrics:
    """Per-agent mean speed and mean/stddev distance from the generalized center."""
    idx = _window(traj, window_fraction)
    r, v = traj.r[idx], traj.v[idx]
    speed = np.linalg.norm(v, axis=-1)
    radius = np.linalg.norm(r - generalized_center(Q, r), axis=-1)
    return RingMetrics(speed.mean(axis=0), radius.mean(axis=0), radius.std(axis=0))
