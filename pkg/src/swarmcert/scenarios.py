"""Named, seeded scenario catalog."""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from .certify import dispersal_window
from .errors import CatalogError, InputError
from .model import (
    CustomBounded,
    LinearCoupling,
    MorseCoupling,
    Propulsion,
    SwarmModel,
    SwarmState,
)


@dataclass
class Scenario:
    name: str
    model: SwarmModel
    state0: SwarmState
    checks: list
    config: dict  # resolved parameters, echoed into run manifests
    integrator: dict = field(default_factory=dict)


def _rng(seed):
    return np.random.default_rng(seed)


def averaging_matrix(n: int) -> np.ndarray:
    return np.full((n, n), 1.0 / n)


def parabolic_matrix(n: int, lam: float = 1.0) -> np.ndarray:
    """``lam (I - J/n)``."""
    return lam * (np.eye(n) - averaging_matrix(n))


def ring_laplacian(n: int, w: float = 1.0) -> np.ndarray:
    """Weighted cycle-graph Laplacian (left and right neighbours)."""
    if n < 3:
        raise InputError("a ring needs at least 3 agents")
    L = 2.0 * np.eye(n)
    idx = np.arange(n)
    L[idx, (idx + 1) % n] -= 1.0
    L[idx, (idx - 1) % n] -= 1.0
    return w * L


def gram_schmidt(vectors) -> np.ndarray:
    """Orthonormal columns spanning ``vectors`` (given as rows)."""
    basis = []
    for v in np.asarray(vectors, float):
        w = v.copy()
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            for e in basis:
                w -= (e @ w) * e
        norm = np.linalg.norm(w)
        if norm > 1e-12 * max(1.0, np.linalg.norm(v)):
            basis.append(w / norm)
    return np.array(basis).T


def example2_projection(n: int) -> np.ndarray:
    """Projection onto span{(1,0,1,0,...), (1,2,...,n)/n}."""
    alt = np.array([1.0 if k % 2 == 0 else 0.0 for k in range(n)])
    ramp_vec = np.arange(1, n + 1) / n
    K = gram_schmidt([alt, ramp_vec])
    return K @ K.T


def helix_reference(a_speed: float, b_radius: float, lam: float, t: float) -> SwarmState:
    """Exact drifting-helix solution of the two-agent parabolic model in 3-D.

    Agent 1 follows ``(a t, b cos(sqrt(lam) t), b sin(sqrt(lam) t))`` and
    agent 2 its mirror image through the drift axis.  Needs
    ``a^2 + lam b^2 = 1`` so that both agents cruise at unit speed.
    """
    if abs(a_speed**2 + lam * b_radius**2 - 1.0) > 1e-12:
        raise InputError("helix needs a^2 + lam * b^2 = 1")
    w = np.sqrt(lam)
    c, s = np.cos(w * t), np.sin(w * t)
    r1 = np.array([a_speed * t, b_radius * c, b_radius * s])
    v1 = np.array([a_speed, -b_radius * w * s, b_radius * w * c])
    mirror = np.array([1.0, -1.0, -1.0])
    return SwarmState(t, np.stack([r1, r1 * mirror]), np.stack([v1, v1 * mirror]))


def helix_radius(a_speed: float, lam: float) -> float:
    return float(np.sqrt((1.0 - a_speed**2) / lam))


# ---------------------------------------------------------------------------
# catalog entries
# ---------------------------------------------------------------------------

def _vdp():
    return Propulsion.van_der_pol_radial()


def _uniform_state(rng, n, d, lo, hi, vscale):
    r = rng.uniform(lo, hi, size=(n, d))
    v = rng.uniform(-vscale, vscale, size=(n, d))
    return SwarmState(0.0, r, v)


def _mill_state(rng, n, d, radius, jitter):
    # agents on a circle, tangential unit velocities, small random perturbation
    if d != 2:
        raise InputError("milling initial condition needs d = 2")
    phi = 2 * np.pi * np.arange(n) / n + rng.uniform(-jitter, jitter, n)
    r = radius * np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    v = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
    return SwarmState(0.0, r + rng.uniform(-jitter, jitter, (n, 2)), v)


def _parabolic(n=5, lam=1.0, d=2, seed=0, spread=5.0, vscale=1.0, init="uniform"):
    model = SwarmModel(n, d, _vdp(), LinearCoupling.from_matrix(parabolic_matrix(n, lam)))
    rng = _rng(seed)
    if init == "mill":
        state = _mill_state(rng, n, d, 1.5 / np.sqrt(lam), 0.1)
    elif init == "uniform":
        state = _uniform_state(rng, n, d, -spread, spread, vscale)
    else:
        raise InputError(f"unknown init {init!r}")
    checks = [{"check": "energy_drift", "tol": 1e-6}, {"check": "tail_speed", "target": 1.0, "tol": 0.05}]
    if init == "mill":
        checks.append({"check": "ring_radius", "target": 1 / np.sqrt(lam), "tol": 0.02})
    integ = {"method": "embedded45", "abs_tol": 1e-8, "rel_tol": 1e-8, "t_end": 100.0, "sample_every": 0.1}
    return model, state, checks, integ


def _example2(n=30, d=2, seed=0):
    Q = example2_projection(n)
    model = SwarmModel(n, d, _vdp(), LinearCoupling.from_matrix(np.eye(n) - Q))
    state = SwarmState(0.0, _rng(seed).uniform(1.0, 5.0, size=(n, d)), np.zeros((n, d)))
    checks = [{"check": "kernel_dim", "value": 2}, {"check": "tail_speed", "target": 1.0, "tol": 0.01}]
    integ = {"method": "embedded45", "abs_tol": 1e-8, "rel_tol": 1e-8, "t_end": 200.0, "sample_every": 0.1}
    return model, state, checks, integ


def _ring(n=8, w=1.0, d=2, seed=0, spread=5.0, vscale=1.0):
    model = SwarmModel(n, d, _vdp(), LinearCoupling.from_matrix(ring_laplacian(n, w)))
    state = _uniform_state(_rng(seed), n, d, -spread, spread, vscale)
    checks = [{"check": "kernel_dim", "value": 1}, {"check": "energy_drift", "tol": 1e-6}]
    integ = {"method": "embedded45", "abs_tol": 1e-8, "rel_tol": 1e-8, "t_end": 100.0, "sample_every": 0.1}
    return model, state, checks, integ


def _morse(n=5, C_a=1.0, l_a=2.0, C_r=2.0, l_r=1.0, d=2, seed=0, spread=3.0, vscale=1.0):
    model = SwarmModel(n, d, _vdp(), MorseCoupling(C_a, l_a, C_r, l_r))
    state = _uniform_state(_rng(seed), n, d, -spread, spread, vscale)
    checks = [{"check": "tail_speed_below_M1"}]
    integ = {"method": "embedded45", "abs_tol": 1e-8, "rel_tol": 1e-8, "t_end": 100.0, "sample_every": 0.1}
    return model, state, checks, integ


def dispersal_force(strength: float) -> Callable:
    """Attractive pair force ``f = -strength * tanh(x1 - x2)`` on agent 1, ``-f`` on agent 2."""

    def force(r, v):
        f = -strength * np.tanh(r[0, 0] - r[1, 0])
        return np.array([[f], [-f]])

    return force


def _dispersal(M=10.0, eps=0.01, x0=None, v0=1.0):
    prop = _vdp()
    m, _, v_a, v_b = dispersal_window(prop)
    strength = 0.5 * m * (1.0 - eps)
    coupling = CustomBounded(dispersal_force(strength), strength, "dispersal_pair")
    model = SwarmModel(2, 1, prop, coupling)
    x0 = M + 1.0 if x0 is None else float(x0)
    if not x0 > M or not v_a < v0 < v_b:
        raise InputError("dispersal needs x0 > M and v_a < v0 < v_b")
    state = SwarmState(0.0, np.array([[x0], [-x0]]), np.array([[v0], [-v0]]))
    checks = [{"check": "dispersal", "M": M, "v_a": v_a, "v_b": v_b, "m": m}]
    integ = {"method": "embedded45", "abs_tol": 1e-10, "rel_tol": 1e-10, "t_end": 100.0, "sample_every": 0.1}
    return model, state, checks, integ


def _helix(lam=1.0, a=0.6, t0=0.0):
    b = helix_radius(a, lam)
    model = SwarmModel(2, 3, _vdp(), LinearCoupling.from_matrix(parabolic_matrix(2, lam)))
    state = helix_reference(a, b, lam, t0)
    checks = [{"check": "helix", "a": a, "b": b, "lam": lam}, {"check": "drift_slope", "value": a, "tol": 1e-4}]
    integ = {"method": "rk4", "h": 1e-3, "t_end": 50.0, "sample_every": 0.1}
    return model, state, checks, integ


CATALOG: Dict[str, Callable] = {
    "parabolic": _parabolic,
    "example2": _example2,
    "nearest_neighbor_ring": _ring,
    "morse_swarm": _morse,
    "dispersal_pair": _dispersal,
    "helix": _helix,
}

DESCRIPTIONS = {
    "parabolic": "all-to-all springs A = lam (I - J/n), van der Pol propulsion",
    "example2": "A = I - Q, Q projecting onto span{(1,0,1,...), (1,...,n)/n}; n=30, positions in [1,5]^2",
    "nearest_neighbor_ring": "cycle-graph Laplacian coupling, kernel spanned by (1,...,1)",
    "morse_swarm": "pairwise Morse potential (bounded coupling)",
    "dispersal_pair": "two agents on a line with a bounded attraction that still disperse",
    "helix": "exact drifting helix of the two-agent parabolic model (d = 3)",
}


def build_scenario(name: str, overrides: Optional[dict] = None) -> Scenario:
    """Resolve a catalog entry with parameter overrides into model, state and checks."""
    if name not in CATALOG:
        raise CatalogError(f"unknown scenario {name!r}; known: {', '.join(sorted(CATALOG))}")
    overrides = dict(overrides or {})
    try:
        model, state, checks, integ = CATALOG[name](**overrides)
    except TypeError as exc:
        raise InputError(f"bad overrides for {name}: {exc}") from None
    return Scenario(name, model, state, checks, {"scenario": name, "overrides": overrides}, integ)
