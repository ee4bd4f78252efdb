"""Explicit time integration: classical RK4 and Dormand-Prince 5(4).

States are numpy arrays of any shape (the swarm code uses ``(2, n, d)``).
Output is sampled on a uniform grid with cubic Hermite interpolation
between accepted steps.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BlowUpError, InputError, StepSizeError

RHS = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    sample_every: float
    method: str = "rk4"
    h: float = 1e-3
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    h_min: float = 1e-12
    h_max: float = 0.5
    max_steps: int = 50_000_000

    def __post_init__(self):
        if self.method not in ("rk4", "embedded45"):
            raise InputError(f"unknown method {self.method!r}")
        if self.sample_every <= 0:
            raise InputError("sample_every must be positive")
        if self.method == "rk4" and not self.h > 0:
            raise InputError("step h must be positive")
        if self.method == "embedded45":
            if not (self.abs_tol > 0 and self.rel_tol > 0):
                raise InputError("tolerances must be positive")
            if not 0 < self.h_min <= self.h_max:
                raise InputError("need 0 < h_min <= h_max")

    @classmethod
    def from_dict(cls, d: dict):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise InputError(f"unknown integrator keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (samples, *state_shape)
    accepted: int = 0
    rejected: int = 0
    system: str = "position"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    # position systems store (r, v); Lienard systems store (x, y)
    @property
    def r(self):
        return self.states[:, 0]

    @property
    def v(self):
        return self.states[:, 1]

    x = r
    y = v


def _check_finite(Y, t):
    if not np.all(np.isfinite(Y)):
        raise BlowUpError("non-finite state", t)


def _rk4(f: RHS, t: float, y: np.ndarray, h: float, k1: np.ndarray):
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    _check_finite(k2, t)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    _check_finite(k3, t)
    k4 = f(t + h, y + h * k3)
    _check_finite(k4, t)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(rhs: RHS, state, h: float, t: float = 0.0) -> np.ndarray:
    """One classical Runge-Kutta step of size ``h`` from ``(t, state)``."""
    if not h > 0:
        raise InputError("step h must be positive")
    y = np.asarray(state, dtype=float)
    k1 = rhs(t, y)
    _check_finite(k1, t)
    y1 = _rk4(rhs, t, y, h, k1)
    _check_finite(y1, t + h)
    return y1


# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dopri_step(f: RHS, t: float, y: np.ndarray, h: float, k1: np.ndarray):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks) if a != 0.0)
        ki = f(t + _C[i] * h, yi)
        _check_finite(ki, t)
        ks.append(ki)
    # FSAL: stage 7 is evaluated at the 5th-order solution
    y_new = y + h * sum(b * k for b, k in zip(_B5, ks) if b != 0.0)
    err = h * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
    return y_new, err, ks[6]


def _hermite(t0, y0, f0, t1, y1, f1, ts):
    h = t1 - t0
    out = []
    for t in ts:
        s = (t - t0) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        out.append(h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1)
    return out


def sample_times(t0: float, t_end: float, every: float) -> np.ndarray:
    span = t_end - t0
    if span <= 0:
        return np.array([t0])
    count = math.ceil(span / every - 1e-9)
    ts = t0 + every * np.arange(count + 1)
    ts[-1] = t_end
    return ts


@np.errstate(over="ignore", invalid="ignore")
def integrate(rhs: RHS, state0, cfg: IntegratorConfig, t0: float = 0.0, system: str = "position") -> Trajectory:
    """Integrate ``Y' = rhs(t, Y)`` from ``t0`` to ``cfg.t_end``."""
    y = np.array(state0, dtype=float)
    _check_finite(y, t0)
    ts = sample_times(t0, cfg.t_end, cfg.sample_every)
    out = [y.copy()]
    nxt = 1
    t = t0
    f0 = rhs(t, y)
    _check_finite(f0, t)
    accepted = rejected = 0
    tiny = 1e-12 * max(1.0, abs(cfg.t_end))

    if cfg.method == "rk4":
        h_nom = cfg.h
    else:
        h_nom = _initial_step(rhs, t, y, f0, cfg)

    h = h_nom
    while nxt < len(ts):
        if accepted + rejected >= cfg.max_steps:
            raise StepSizeError("step budget exhausted", t)
        last = cfg.t_end - t <= h * (1 + 1e-9)
        h_try = cfg.t_end - t if last else h
        if cfg.method == "rk4":
            y1 = _rk4(rhs, t, y, h_try, f0)
            ok = True
        else:
            y1, err, f1_fsal = _dopri_step(rhs, t, y, h_try, f0)
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y1))
            enorm = float(np.max(np.abs(err) / scale)) if err.size else 0.0
            ok = enorm <= 1.0
            fac = 5.0 if enorm == 0 else min(5.0, max(0.2, 0.9 * enorm ** (-0.2)))
            if not ok:
                rejected += 1
                h = h_try * fac
                if h < cfg.h_min:
                    raise StepSizeError(f"step size {h:.3e} below h_min", t)
                continue
        _check_finite(y1, t + h_try)
        t1 = cfg.t_end if last else t + h_try
        f1 = rhs(t1, y1) if cfg.method == "rk4" else f1_fsal
        _check_finite(f1, t1)
        stop = nxt
        while stop < len(ts) and ts[stop] <= t1 + tiny:
            stop += 1
        if stop > nxt:
            batch = ts[nxt:stop]
            vals = _hermite(t, y, f0, t1, y1, f1, batch)
            for tj, vj in zip(batch, vals):
                out.append(y1.copy() if abs(tj - t1) <= tiny else vj)
            nxt = stop
        t, y, f0 = t1, y1, f1
        accepted += 1
        if cfg.method == "embedded45":
            h = min(cfg.h_max, h_try * fac) if not last else h
    return Trajectory(ts, np.array(out), accepted, rejected, system)


def _initial_step(f, t, y, f0, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y)
    d0 = float(np.sqrt(np.mean((y / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, cfg.h_max)
    y1 = y + h0 * f0
    f1 = f(t + h0, y1)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return float(min(100 * h0, h1, cfg.h_max))
