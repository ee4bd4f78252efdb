"""Lyapunov certificates of ultimate boundedness.

Linear coupling (velocity/acceleration coordinates ``(x, y)``):

    V = 1/2 sum_k |x_k|^2 + 1/2 sum_{k,m} Sinv[k,m] U_k . U_m,
    U_k = y_k + F_k(x_k) - delta W_k,   W_k = sum_l S[k,l] M(x_l / a),

with ``M`` the ramp function.  Parameters ``(a, delta, b)`` are chosen so
that ``dV/dt <= -1`` outside the box ``|x_k| <= a, |y_k| <= b`` on a fixed
energy manifold ``Q (y + F(x)) = E``; :func:`verify_decrease` checks that
pointwise on sampled states.

Bounded coupling: kinetic-energy argument, giving an ultimate speed bound
``M1`` from the coupling bound ``m``.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    CertificateFailure,
    CertificationError,
    InputError,
    NonsmoothPointError,
    UnsupportedPropulsionError,
)
from .linalg import inf_norm, spectral_decompose
from .model import (
    LienardState,
    SwarmModel,
    coupling_bound,
    poly_extrema,
    poly_last_crossing,
)

GUARD_BAND = 1e-9
NONSMOOTH_TOL = 1e-12
CHUNK = 512


# ---------------------------------------------------------------------------
# ramp function
# ---------------------------------------------------------------------------

def ramp(x) -> np.ndarray:
    """Identity inside the unit ball, radial normalization outside (row-wise)."""
    x = np.asarray(x, dtype=float)
    z = np.linalg.norm(x, axis=-1, keepdims=True)
    return np.where(z > 1.0, x / np.where(z > 1.0, z, 1.0), x)


def ramp_jacobian(x, with_flag: bool = False):
    """Jacobian of :func:`ramp` at a single vector.

    On ``|x| = 1`` the inside branch (identity) is returned; with
    ``with_flag=True`` the result is ``(J, on_boundary)``.
    """
    x = np.asarray(x, dtype=float)
    z = float(np.linalg.norm(x))
    d = x.size
    if z > 1.0:
        J = (z * z * np.eye(d) - np.outer(x, x)) / z**3
    else:
        J = np.eye(d)
    return (J, z == 1.0) if with_flag else J


def _ramp_jacobian_apply(u: np.ndarray, y: np.ndarray) -> np.ndarray:
    z = np.linalg.norm(u, axis=-1, keepdims=True)
    outside = z > 1.0
    zs = np.where(outside, z, 1.0)
    proj = np.einsum("...d,...d->...", u, y)[..., None]
    out = (zs * zs * y - u * proj) / zs**3
    return np.where(outside, out, y)


# ---------------------------------------------------------------------------
# energies and the Lyapunov function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyVector:
    E: np.ndarray  # (n, d); row l is E_l
    effective_rank: int


@dataclass(frozen=True)
class LyapunovParams:
    a: float
    delta: float
    b: float
    C1: float
    C2: float
    C3: float
    C4: float
    W_a: float
    K_a: float

    def to_dict(self):
        return asdict(self)


def _energy_array(E) -> np.ndarray:
    return E.E if isinstance(E, EnergyVector) else np.asarray(E, dtype=float)


def manifold_energies(model: SwarmModel, s: LienardState) -> EnergyVector:
    """``E_l = sum_k Q[l,k] (y_k + F_k(x_k))``; constant along the Lienard flow."""
    c = model.require_linear()
    E = c.Q @ (np.asarray(s.y, float) + model.flux(np.asarray(s.x, float)))
    return EnergyVector(E, c.proj.kernel_dim)


def _parts(model, a, delta, X, Y):
    c = model.coupling
    F = model.flux(X)
    W = np.einsum("kl,...ld->...kd", c.S, ramp(X / a))
    U = Y + F - delta * W
    return F, W, U


def _value_batch(model, a, delta, X, Y):
    _, _, U = _parts(model, a, delta, X, Y)
    SU = np.einsum("km,...md->...kd", model.coupling.S_inv, U)
    return 0.5 * np.sum(X * X, axis=(-2, -1)) + 0.5 * np.sum(U * SU, axis=(-2, -1))


def _vdot_batch(model, E, a, delta, X, Y):
    c = model.coupling
    F, W, U = _parts(model, a, delta, X, Y)
    QX = np.einsum("kl,...ld->...kd", c.Q, X)
    t_flux = -np.sum(F * X, axis=(-2, -1))
    t_energy = np.sum(E * X, axis=(-2, -1))
    t_center = -delta * np.sum(W * (QX - X), axis=(-2, -1))
    t_ramp = -(delta / a) * np.sum(U * _ramp_jacobian_apply(X / a, Y), axis=(-2, -1))
    return t_flux + t_energy + t_center + t_ramp


def lyapunov_value(model: SwarmModel, E, params: LyapunovParams, s: LienardState) -> float:
    model.require_linear()
    return float(_value_batch(model, params.a, params.delta, np.asarray(s.x, float), np.asarray(s.y, float)))


def lyapunov_values(model: SwarmModel, params: LyapunovParams, x, y) -> np.ndarray:
    """V over a batch of Lienard states with shape (..., n, d)."""
    model.require_linear()
    return _value_batch(model, params.a, params.delta, np.asarray(x, float), np.asarray(y, float))


def lyapunov_derivative(model: SwarmModel, E, params: LyapunovParams, s: LienardState) -> float:
    """Exact time derivative of V along the Lienard flow, off the set ``|x_k| = a``.

    Assumes ``s`` lies on the manifold with energies ``E``.
    """
    model.require_linear()
    x = np.asarray(s.x, float)
    z = np.linalg.norm(x, axis=-1)
    if np.any(np.abs(z - params.a) <= NONSMOOTH_TOL * max(1.0, params.a)):
        raise NonsmoothPointError("V is not differentiable where |x_k| = a")
    return float(_vdot_batch(model, _energy_array(E), params.a, params.delta, x, np.asarray(s.y, float)))


# ---------------------------------------------------------------------------
# constants and parameter selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constants:
    C1: float
    C2: float
    C3: float
    C4: float
    W_a: float
    K_a: float


def _require_pz_growth(model):
    for k, prop in enumerate(model.propulsion):
        if not prop.grows_pz:
            raise UnsupportedPropulsionError(
                f"agent {k}: p(z) z does not tend to infinity (leading coefficient {prop.poly[-1]:g})"
            )


def flux_sup(model: SwarmModel, radius: float) -> float:
    """``max_k sup_{|x| <= radius} |F_k(x)|`` from the critical points of ``z p_k(z)``."""
    best = 0.0
    for prop in model.propulsion:
        lo, _, hi, _ = poly_extrema(prop.times_power(1), 0.0, radius)
        best = max(best, abs(lo), abs(hi))
    return best


def _c3(model) -> float:
    total = 0.0
    for prop in model.propulsion:
        lo, _, _, _ = poly_extrema(prop.times_power(2), 0.0, np.inf)
        total += max(0.0, -lo)
    return total


def _base_constants(model, E):
    c = model.require_linear()
    _require_pz_growth(model)
    n = model.n
    s_norm = inf_norm(c.S)
    C1 = float(np.linalg.norm(E, axis=-1).sum()) + n * s_norm * (1.0 + inf_norm(c.Q))
    C2 = n * s_norm**2 / 4.0
    C3 = _c3(model)
    return s_norm, C1, C2, C3


def _choose_a_poly(prop, C1, const):
    # -p(z) z^2 + C1 z + const + 2, must stay negative beyond a
    g = -prop.times_power(2)
    g = np.pad(g, (0, max(0, 2 - g.size)))
    g[1] += C1
    g[0] += const + 2.0
    return g


def compute_constants(model: SwarmModel, E, a: float, delta: float) -> Constants:
    E = _energy_array(E)
    s_norm, C1, C2, C3 = _base_constants(model, E)
    if not a > 1:
        raise InputError("need a > 1")
    if not 0 < delta < min(1.0, 1.0 / s_norm):
        raise InputError("need 0 < delta < min(1, 1/||S||_inf)")
    f_sup = flux_sup(model, a)
    K_a = f_sup + delta * s_norm
    C4 = K_a**2 / 4.0
    w = -np.inf
    for prop in model.propulsion:
        g = -prop.times_power(2)
        g = np.pad(g, (0, max(0, 2 - g.size)))
        g[1] += C1
        _, _, hi, _ = poly_extrema(g, 0.0, a)
        w = max(w, hi)
    W_a = w + C3 + delta**3 * C2
    return Constants(C1, C2, C3, C4, W_a, K_a)


def _a_condition_holds(props, C1, const, a) -> bool:
    grid = np.linspace(a, 10 * a, 4001)
    for prop in props:
        g = _choose_a_poly(prop, C1, const)
        if g[-1] >= 0:
            return False
        _, _, hi, _ = poly_extrema(g, a, np.inf)
        if not hi < 0:
            return False
        if np.any(P.polyval(grid, g) >= 0):
            return False
    return True


def b_threshold(n, a, delta, W_a, K_a) -> float:
    """Larger root of ``(delta/a)(z^2 - K_a z) = 1 + W_a + delta (n-1) max(K_a, K_a^2) / (4a)``."""
    rhs = 1.0 + W_a + delta * (n - 1) * max(K_a, K_a**2) / (4.0 * a)
    return 0.5 * (K_a + math.sqrt(K_a**2 + 4.0 * rhs * a / delta))


def select_params(model: SwarmModel, E, safety: float = 1.05) -> LyapunovParams:
    """Choose ``(a, delta, b)`` satisfying the three decrease conditions."""
    E = _energy_array(E)
    s_norm, C1, C2, C3 = _base_constants(model, E)
    n = model.n
    delta = min(1.0, 1.0 / s_norm) / 2.0
    const = C3 + delta**3 * C2
    a = 2.0
    for _ in range(60):
        if _a_condition_holds(model.propulsion, C1, const, a):
            break
        a *= 2.0
    else:
        blocked = [k for k, prop in enumerate(model.propulsion) if not _a_condition_holds([prop], C1, const, a)]
        raise CertificationError(f"no admissible a after 60 doublings (agents {blocked})")
    for _ in range(200):
        cst = compute_constants(model, E, a, delta)
        if delta * n * cst.C4 / a < 1.0:
            break
        delta /= 2.0
    else:
        raise CertificationError("could not shrink delta enough")
    b = safety * b_threshold(n, a, delta, cst.W_a, cst.K_a)
    return LyapunovParams(a, delta, b, cst.C1, cst.C2, cst.C3, cst.C4, cst.W_a, cst.K_a)


def check_params(model: SwarmModel, params: LyapunovParams, grid_points: int = 20001) -> dict:
    """Re-evaluate the three defining inequalities on dense grids.

    Independent of the closed-form routines used by :func:`select_params`:
    everything here is brute-force sampling of the stated inequalities.
    """
    a, delta, b = params.a, params.delta, params.b
    n = model.n
    s_norm = inf_norm(model.coupling.S)
    zs = a * (1.0 + np.geomspace(1e-9, 1e4, grid_points))
    cond_a = True
    for prop in model.propulsion:
        vals = -prop.p(zs) * zs**2 + params.C1 * zs + params.C3 + delta**3 * params.C2
        cond_a &= bool(np.all(vals < -2.0))
    cond_delta = delta * n * params.C4 / a < 1.0
    yb = b * (1.0 + np.geomspace(1e-12, 1e6, grid_points))
    yb = np.concatenate([[b], yb])
    k2 = max(params.K_a, params.K_a**2)
    bvals = (delta / a) * (yb**2 - params.K_a * yb) - params.W_a - delta * (n - 1) * k2 / (4 * a)
    cond_b = bool(np.all(bvals > 1.0))
    shape = a > 1 and 0 < delta < min(1.0, 1.0 / s_norm) and b > params.K_a
    return {"a_condition": cond_a, "delta_condition": bool(cond_delta), "b_condition": cond_b, "shape": bool(shape)}


# ---------------------------------------------------------------------------
# sampling on the energy manifold
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """Sampling region for ``(x, y)``.

    Every ``x_k`` lies in the ball of radius ``x_max`` and every raw ``y_k``
    in the ball of radius ``y_max``.  ``x_focus=(lo, hi)`` forces one random
    agent to ``lo < |x_k| <= hi``; ``y_focus`` does the same for ``y`` (the
    manifold correction may move it; callers re-check).  Agents with
    ``||x_k| - avoid| < GUARD_BAND`` are redrawn.
    """

    x_max: float
    y_max: float
    x_focus: Optional[tuple] = None
    y_focus: Optional[tuple] = None
    avoid: Optional[float] = None

    def validate(self):
        if not (self.x_max > 0 and self.y_max > 0):
            raise InputError("region radii must be positive")
        for focus, cap in ((self.x_focus, self.x_max), (self.y_focus, self.y_max)):
            if focus is not None and not (0 <= focus[0] < focus[1] <= cap):
                raise InputError(f"empty focus shell {focus}")


def _ball(rng, shape, radius, d):
    """Uniform direction, radius uniform in ``[0, radius]``."""
    g = rng.standard_normal(shape + (d,))
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    return g * (radius * rng.random(shape))[..., None]


def _shell(rng, count, lo, hi, d):
    g = rng.standard_normal((count, d))
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    rad = hi - (hi - lo) * rng.random(count)  # in (lo, hi]
    return g * rad[:, None]


def _draw(model, E, region, rng, count):
    n, d = model.n, model.d
    X = _ball(rng, (count, n), region.x_max, d)
    Y = _ball(rng, (count, n), region.y_max, d)
    rows = np.arange(count)
    if region.x_focus is not None:
        X[rows, rng.integers(0, n, count)] = _shell(rng, count, *region.x_focus, d)
    if region.y_focus is not None:
        Y[rows, rng.integers(0, n, count)] = _shell(rng, count, *region.y_focus, d)
    if region.avoid is not None:
        for _ in range(100):
            bad = np.abs(np.linalg.norm(X, axis=-1) - region.avoid) < GUARD_BAND * max(1.0, region.avoid)
            if not bad.any():
                break
            X[bad] *= 1.0 + 4 * GUARD_BAND * np.sign(rng.standard_normal(int(bad.sum())))[:, None]
    Qc = model.coupling.Q
    Y = Y + E - np.einsum("kl,...ld->...kd", Qc, Y + model.flux(X))
    return X, Y


def sample_manifold_state(model: SwarmModel, E, region: Region, rng_seed: int) -> LienardState:
    """Random ``(x, y)`` in ``region`` projected onto the manifold ``Q(y + F(x)) = E``."""
    model.require_linear()
    region.validate()
    E = _energy_array(E)
    rng = np.random.default_rng(rng_seed)
    X, Y = _draw(model, E, region, rng, 1)
    s = LienardState(0.0, X[0], Y[0])
    resid = inf_norm(manifold_energies(model, s).E - E)
    if resid > 1e-9 * max(1.0, inf_norm(E)):
        raise InputError(f"manifold correction residual {resid:.2e}; E is not in the range of Q")
    return s


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class UltimateBounds:
    """Bounds implied by the sublevel set ``V <= max_box V``."""

    level: float
    speed: float
    accel: float
    center_offset: float
    note: str


@dataclass
class Certificate:
    params: LyapunovParams
    box: tuple
    samples_checked: int
    max_Vdot_outside_box: float
    status: str
    bounds: Optional[UltimateBounds] = None
    witness: Optional[dict] = None
    ultimate_bound_note: str = ""

    def to_dict(self) -> dict:
        out = {
            "kind": "linear",
            "a": self.params.a,
            "delta": self.params.delta,
            "b": self.params.b,
            "C1": self.params.C1,
            "C2": self.params.C2,
            "C3": self.params.C3,
            "C4": self.params.C4,
            "W_a": self.params.W_a,
            "K_a": self.params.K_a,
            "samples": self.samples_checked,
            "max_vdot": self.max_Vdot_outside_box,
            "status": self.status,
        }
        if self.bounds is not None:
            out["ultimate_bounds"] = asdict(self.bounds)
        if self.witness is not None:
            out["witness"] = self.witness
        out["ultimate_bound_note"] = self.ultimate_bound_note
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(jsonable(self.to_dict()), **kw)


def jsonable(obj):
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def ultimate_bounds(model: SwarmModel, params: LyapunovParams) -> UltimateBounds:
    """Speed, acceleration and center-offset bounds on the absorbing sublevel set."""
    c = model.coupling
    n = model.n
    a, delta, b = params.a, params.delta, params.b
    s_norm = inf_norm(c.S)
    eig_S = spectral_decompose(c.S).eigenvalues
    u_max = b + flux_sup(model, a) + delta * s_norm
    level = 0.5 * n * a * a + 0.5 * n * u_max**2 / eig_S[0]
    speed = math.sqrt(2.0 * level)
    f_sup = flux_sup(model, speed)
    accel = math.sqrt(2.0 * level * eig_S[-1]) + f_sup + delta * s_norm
    offset = inf_norm(c.S_inv) * (accel + f_sup)
    note = (
        "V decreases at rate >= 1 outside the box |x_k| <= a, |y_k| <= b, so every trajectory "
        f"ends in the sublevel set V <= {level:.6g} (an upper bound of V on the box). There "
        f"|x_k| <= sqrt(2 V) = {speed:.6g} and |y_k + F_k - delta W_k| <= sqrt(2 V lambda_max(S)), "
        f"giving |y_k| <= {accel:.6g}. For position-derived states (E = 0) the offset from the "
        "generalized center is r_k - (Q r)_k = sum_j Sinv[k,j] (-y_j - F_j(x_j)), bounded by "
        f"||Sinv||_inf (|y| + |F|) <= {offset:.6g}."
    )
    return UltimateBounds(level, speed, accel, offset, note)


def _check_chunk(model, E, params, seed, index, count):
    rng = np.random.default_rng([seed, index])
    a, b = params.a, params.b
    half = count // 2
    # some |x_k| in (a, 10a]
    rx = Region(10 * a, 10 * b, x_focus=(a, 10 * a), avoid=a)
    X1, Y1 = _draw(model, E, rx, rng, half)
    # all |x_k| <= a, some |y_k| in (b, 10b]
    ry = Region(a, 10 * b, y_focus=(b, 10 * b), avoid=a)
    X2, Y2 = _draw(model, E, ry, rng, count - half)
    keep = np.any(np.linalg.norm(Y2, axis=-1) > b, axis=-1)
    X = np.concatenate([X1, X2[keep]])
    Y = np.concatenate([Y1, Y2[keep]])
    if len(X) == 0:
        return 0, -np.inf, None
    vd = _vdot_batch(model, E, a, params.delta, X, Y)
    i = int(np.argmax(vd))
    return len(X), float(vd[i]), (X[i], Y[i])


def verify_decrease(model: SwarmModel, E, params: LyapunovParams, n_samples: int, rng_seed: int = 0,
                    workers: Optional[int] = None) -> Certificate:
    """Sample states outside the box on the manifold and check ``dV/dt <= -1``.

    Samples are drawn in fixed chunks from per-chunk streams keyed by
    ``(rng_seed, chunk)``, so results do not depend on ``workers``.
    Raises :class:`CertificateFailure` (carrying the worst witness) on violation.
    """
    model.require_linear()
    E = _energy_array(E)
    bounds = ultimate_bounds(model, params)
    if n_samples <= 0:
        return Certificate(params, (params.a, params.b), 0, -np.inf, "vacuous", bounds,
                           ultimate_bound_note=bounds.note)
    chunks = [(i, min(CHUNK, n_samples - i * CHUNK)) for i in range(math.ceil(n_samples / CHUNK))]

    def job(ic):
        return _check_chunk(model, E, params, rng_seed, *ic)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, chunks))
    else:
        results = [job(ic) for ic in chunks]
    checked = sum(r[0] for r in results)
    worst = max((r for r in results if r[2] is not None), key=lambda r: r[1], default=(0, -np.inf, None))
    max_vdot = worst[1]
    cert = Certificate(params, (params.a, params.b), checked, max_vdot, "pass", bounds,
                       ultimate_bound_note=bounds.note)
    if max_vdot > -1.0:
        x, y = worst[2]
        cert.status = "fail"
        cert.witness = {"x": x.tolist(), "y": y.tolist(), "vdot": max_vdot}
        raise CertificateFailure(
            f"dV/dt = {max_vdot:.6g} > -1 at a sampled state outside the box",
            LienardState(0.0, x, y), max_vdot, cert,
        )
    return cert


# ---------------------------------------------------------------------------
# bounded coupling
# ---------------------------------------------------------------------------

@dataclass
class VelocityBound:
    """Ultimate speed bound for bounded coupling.

    ``q[k] = min_{s>=0} s (p_k(s) - m)``, ``Qsum = -sum q``, and ``M1`` is
    (1% above) the smallest speed beyond which ``s (p_k(s) - m) >= Qsum + 1``
    for every agent.  ``M1_energy`` repeats the construction with the
    kinetic-energy rate ``s^2 p_k(s) - m s``; ``M1_certified`` is the larger.
    """

    m: float
    q: list
    Qsum: float
    M1: float
    M1_energy: float
    M1_certified: float
    argmin: list = field(default_factory=list)

    def to_dict(self):
        return {"kind": "bounded", **asdict(self), "status": "pass"}


def _speed_bound(props, m, power):
    q, arg = [], []
    polys = []
    for prop in props:
        c = prop.times_power(power).copy()
        c = np.pad(c, (0, max(0, 2 - c.size)))
        c[1] -= m
        lo, where, _, _ = poly_extrema(c, 0.0, np.inf)
        q.append(min(lo, 0.0))
        arg.append(where)
        polys.append(c)
    Qsum = -sum(q)
    M1 = max(poly_last_crossing(c, Qsum + 1.0) for c in polys) * 1.01
    return q, arg, Qsum, M1


def bounded_coupling_speed_bound(model: SwarmModel) -> VelocityBound:
    m = coupling_bound(model.coupling, model.n)
    for k, prop in enumerate(model.propulsion):
        if not prop.grows_p:
            raise UnsupportedPropulsionError(f"agent {k}: p(s) does not tend to infinity")
    q, arg, Qsum, M1 = _speed_bound(model.propulsion, m, 1)
    _, _, _, M1_e = _speed_bound(model.propulsion, m, 2)
    return VelocityBound(m, q, Qsum, M1, M1_e, max(M1, M1_e), arg)


def preimage_component(coeffs, lo: float, hi: float, containing: float):
    """Connected component of ``{s : lo <= poly(s) <= hi}`` containing ``containing``."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    v = P.polyval(containing, c)
    if not lo <= v <= hi:
        raise InputError("polynomial value at the anchor is outside [lo, hi]")
    cuts = []
    for level in (lo, hi):
        shifted = c.copy()
        shifted[0] -= level
        for root in P.polyroots(shifted):
            if abs(root.imag) <= 1e-9 * max(1.0, abs(root.real)):
                cuts.append(float(root.real))
    left = max((r for r in cuts if r <= containing), default=-np.inf)
    right = min((r for r in cuts if r >= containing), default=np.inf)
    return left, right


def dispersal_window(prop) -> tuple:
    """For the force ``s p(s)``: ``(m, s_min, v_a, v_b)``.

    ``-m`` is the minimum of ``s p(s)`` on ``s >= 0`` (attained at ``s_min``)
    and ``[v_a, v_b]`` is the component of the preimage of ``[-m/2, m/2]``
    containing the cruising speed (largest positive root of ``p``).
    """
    force = prop.times_power(1)
    lo, where, _, _ = poly_extrema(force, 0.0, np.inf)
    m = -lo
    roots = [r.real for r in P.polyroots(prop.poly) if abs(r.imag) < 1e-12 and r.real > 0]
    if not roots or m <= 0:
        raise UnsupportedPropulsionError("propulsion has no positive cruising speed")
    v_a, v_b = preimage_component(force, -m / 2, m / 2, max(roots))
    return m, where, v_a, v_b
