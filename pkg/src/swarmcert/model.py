"""Propulsion laws, couplings, and right-hand sides of the swarm systems.

Three systems share the state layout ``(n, d)`` per field:

* linear coupling, positions/velocities ``(r, v)``::

      r'' = -p(|r'|) r' - A r

* bounded coupling, positions/velocities ``(r, v)``::

      r'' = -p(|r'|) r' + c(r, r')

* the Lienard form of the linear system in velocity/acceleration
  coordinates ``(x, y) = (v, v')``::

      x' = y,   y' = -grad F(x) y - A x,   F(x) = p(|x|) x
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

from . import linalg
from .errors import InputError, UsageError


# ---------------------------------------------------------------------------
# polynomial helpers (all propulsion families are polynomials in z = |x|)
# ---------------------------------------------------------------------------

def _trim(c) -> np.ndarray:
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    return c if c.size else np.zeros(1)


def poly_extrema(coeffs, lo: float = 0.0, hi: float = np.inf):
    """Exact min and max of a polynomial on ``[lo, hi]`` from its critical points.

    Returns ``(min_value, argmin, max_value, argmax)``.  An infinite upper
    end contributes its limit (``+-inf``) when the polynomial is unbounded.
    """
    c = _trim(coeffs)
    cand = [lo]
    if np.isfinite(hi):
        cand.append(hi)
    if c.size > 2:
        for root in P.polyroots(P.polyder(c)):
            if abs(root.imag) <= 1e-12 * max(1.0, abs(root.real)) and lo <= root.real <= hi:
                cand.append(float(root.real))
    cand = np.array(cand)
    vals = P.polyval(cand, c)
    i_min, i_max = int(np.argmin(vals)), int(np.argmax(vals))
    vmin, amin = float(vals[i_min]), float(cand[i_min])
    vmax, amax = float(vals[i_max]), float(cand[i_max])
    if not np.isfinite(hi) and c.size > 1:
        if c[-1] > 0:
            vmax, amax = np.inf, np.inf
        else:
            vmin, amin = -np.inf, np.inf
    return vmin, amin, vmax, amax


def poly_last_crossing(coeffs, level: float, lo: float = 0.0) -> float:
    """Smallest ``s >= lo`` such that ``poly(z) >= level`` for every ``z >= s``.

    The polynomial must tend to ``+inf``.
    """
    c = _trim(coeffs).copy()
    if c[-1] <= 0 or c.size < 2:
        raise InputError("polynomial does not tend to +inf")
    c[0] -= level
    last = lo
    for root in P.polyroots(c):
        if abs(root.imag) <= 1e-9 * max(1.0, abs(root.real)) and root.real > last:
            last = float(root.real)
    # polish with bisection on a sign-certified bracket
    if last > lo:
        a, b = last * (1 - 1e-6) - 1e-12, last * (1 + 1e-6) + 1e-12
        a = max(a, lo)
        if P.polyval(a, c) < 0 <= P.polyval(b, c):
            for _ in range(200):
                mid = 0.5 * (a + b)
                if P.polyval(mid, c) >= 0:
                    b = mid
                else:
                    a = mid
            last = b
    return last


def _horner(c: np.ndarray, z):
    acc = c[-1] + 0.0 * z
    for ci in c[-2::-1]:
        acc = acc * z + ci
    return acc


# ---------------------------------------------------------------------------
# propulsion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Propulsion:
    """Self-propulsion law ``p(z)``, stored as polynomial coefficients in ``z``.

    Families: ``vanDerPolRadial`` (``z**2 - 1``), ``polynomialInZ``
    (arbitrary coefficients, lowest power first) and ``shiftedPolynomial``
    (``c * (z**k - v0**k)``).
    """

    kind: str
    coeffs: Tuple[float, ...]
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = _trim(self.coeffs)
        object.__setattr__(self, "_c", c)
        object.__setattr__(self, "_dc", P.polyder(c) if c.size > 1 else np.zeros(1))

    @classmethod
    def van_der_pol_radial(cls):
        return cls("vanDerPolRadial", (-1.0, 0.0, 1.0))

    @classmethod
    def polynomial(cls, coeffs):
        coeffs = tuple(float(c) for c in coeffs)
        if not coeffs:
            raise InputError("empty coefficient list")
        return cls("polynomialInZ", coeffs, {"coeffs": list(coeffs)})

    @classmethod
    def shifted_polynomial(cls, c: float, k: int, v0: float):
        if int(k) != k or k < 1:
            raise InputError("shiftedPolynomial power must be a positive integer")
        k = int(k)
        coeffs = [0.0] * (k + 1)
        coeffs[0] = -c * v0**k
        coeffs[k] = c
        return cls("shiftedPolynomial", tuple(coeffs), {"c": c, "k": k, "v0": v0})

    @classmethod
    def from_dict(cls, spec: dict):
        kind = spec.get("kind")
        if kind == "vanDerPolRadial":
            return cls.van_der_pol_radial()
        if kind == "polynomialInZ":
            return cls.polynomial(spec["coeffs"])
        if kind == "shiftedPolynomial":
            return cls.shifted_polynomial(float(spec["c"]), spec["k"], float(spec["v0"]))
        raise InputError(f"unknown propulsion kind {kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @property
    def poly(self) -> np.ndarray:
        return self._c

    def p(self, z):
        return _horner(self._c, z)

    def dp(self, z):
        return _horner(self._dc, z)

    @property
    def grows_pz(self) -> bool:
        """``z p(z) -> inf``: positive leading coefficient."""
        return bool(self.poly[-1] > 0)

    @property
    def grows_p(self) -> bool:
        """``p(z) -> inf``: positive leading coefficient of positive degree."""
        c = self.poly
        return bool(c.size > 1 and c[-1] > 0)

    # coefficient arrays of derived scalar functions
    def times_power(self, k: int) -> np.ndarray:
        """Coefficients of ``p(z) * z**k``."""
        return np.concatenate([np.zeros(k), self.poly])


PropulsionLike = Union[Propulsion, Sequence[Propulsion]]


def _agent(spec: PropulsionLike, k: int) -> Propulsion:
    if isinstance(spec, Propulsion):
        return spec
    return spec[k]


def propulsion_eval(spec: PropulsionLike, k: int, z: float):
    """Return ``(p_k(z), p_k'(z))``."""
    if z < 0:
        raise InputError("propulsion evaluated at negative speed")
    prop = _agent(spec, k)
    return float(prop.p(z)), float(prop.dp(z))


def flux_F(spec: PropulsionLike, k: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return _agent(spec, k).p(np.linalg.norm(x)) * x


def flux_jacobian(spec: PropulsionLike, k: int, x) -> np.ndarray:
    """``grad F(x) = p(|x|) I + p'(|x|)/|x| x x^T``; ``p(0) I`` at the origin."""
    x = np.asarray(x, dtype=float)
    prop = _agent(spec, k)
    z = np.linalg.norm(x)
    J = prop.p(z) * np.eye(x.size)
    if z > 0:
        J += (prop.dp(z) / z) * np.outer(x, x)
    return J


# ---------------------------------------------------------------------------
# couplings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearCoupling:
    A: np.ndarray
    proj: linalg.ProjectionPair

    @classmethod
    def from_matrix(cls, A, zero_tol: float = linalg.DEFAULT_ZERO_TOL):
        A = linalg.symmetrize(A)
        return cls(A, linalg.projection_pair(A, zero_tol))

    @property
    def Q(self):
        return self.proj.Q

    @property
    def S(self):
        return self.proj.S

    @property
    def S_inv(self):
        return self.proj.S_inv


@dataclass(frozen=True)
class MorseCoupling:
    """Pairwise Morse potential ``U(rho) = C_r exp(-rho/l_r) - C_a exp(-rho/l_a)``."""

    C_a: float
    l_a: float
    C_r: float
    l_r: float

    def __post_init__(self):
        if min(self.C_a, self.l_a, self.C_r, self.l_r) <= 0:
            raise InputError("Morse parameters must be positive")

    def dU(self, rho):
        return -self.C_r / self.l_r * np.exp(-rho / self.l_r) + self.C_a / self.l_a * np.exp(-rho / self.l_a)

    def U(self, rho):
        return self.C_r * np.exp(-rho / self.l_r) - self.C_a * np.exp(-rho / self.l_a)

    def pair_forces(self, r: np.ndarray) -> np.ndarray:
        """``(n, n, d)`` array; entry ``[k, m]`` is the force of agent m on agent k."""
        diff = r[:, None, :] - r[None, :, :]
        rho = np.linalg.norm(diff, axis=-1)
        safe = np.where(rho > 0, rho, 1.0)
        coef = np.where(rho > 0, -self.dU(rho) / safe, 0.0)
        return coef[..., None] * diff

    def force(self, r: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.pair_forces(r).sum(axis=1)

    def potential(self, r: np.ndarray) -> float:
        diff = r[:, None, :] - r[None, :, :]
        rho = np.linalg.norm(diff, axis=-1)
        iu = np.triu_indices(r.shape[0], 1)
        return float(self.U(rho[iu]).sum())


@dataclass(frozen=True)
class CustomBounded:
    """User coupling ``c(r, v) -> (n, d)`` with a declared bound on ``|c_k|``."""

    force_law: Callable[[np.ndarray, np.ndarray], np.ndarray]
    bound: float
    name: str = "custom"

    def force(self, r, v):
        return np.asarray(self.force_law(r, v), dtype=float)


Coupling = Union[LinearCoupling, MorseCoupling, CustomBounded]


def coupling_bound(coupling: Coupling, n: int) -> float:
    """Uniform bound ``m >= |c_k|`` for a bounded coupling."""
    if isinstance(coupling, MorseCoupling):
        return (n - 1) * (coupling.C_r / coupling.l_r + coupling.C_a / coupling.l_a)
    if isinstance(coupling, CustomBounded):
        return float(coupling.bound)
    raise UsageError("coupling_bound needs a bounded coupling (Morse or custom)")


# ---------------------------------------------------------------------------
# model and states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwarmModel:
    n: int
    d: int
    propulsion: Tuple[Propulsion, ...]
    coupling: Coupling

    def __post_init__(self):
        if isinstance(self.propulsion, Propulsion):
            object.__setattr__(self, "propulsion", (self.propulsion,) * self.n)
        else:
            object.__setattr__(self, "propulsion", tuple(self.propulsion))
        if len(self.propulsion) != self.n:
            raise InputError(f"need {self.n} propulsion laws, got {len(self.propulsion)}")
        if isinstance(self.coupling, LinearCoupling) and self.coupling.A.shape != (self.n, self.n):
            raise InputError(f"coupling matrix shape {self.coupling.A.shape} does not match n={self.n}")
        object.__setattr__(self, "_homogeneous", all(p == self.propulsion[0] for p in self.propulsion))

    @property
    def is_linear(self) -> bool:
        return isinstance(self.coupling, LinearCoupling)

    def require_linear(self) -> LinearCoupling:
        if not self.is_linear:
            raise UsageError("operation needs a linear coupling")
        return self.coupling

    @property
    def homogeneous(self) -> bool:
        return self._homogeneous

    def speeds_p(self, z: np.ndarray) -> np.ndarray:
        """``p_k`` applied along the last (agent) axis of ``z``."""
        if self._homogeneous:
            return self.propulsion[0].p(z)
        return np.stack([prop.p(z[..., k]) for k, prop in enumerate(self.propulsion)], axis=-1)

    def speeds_dp(self, z: np.ndarray) -> np.ndarray:
        if self._homogeneous:
            return self.propulsion[0].dp(z)
        return np.stack([prop.dp(z[..., k]) for k, prop in enumerate(self.propulsion)], axis=-1)

    def flux(self, x: np.ndarray) -> np.ndarray:
        """Row-wise ``F_k(x_k) = p_k(|x_k|) x_k``; leading batch axes allowed."""
        z = np.linalg.norm(x, axis=-1)
        return self.speeds_p(z)[..., None] * x

    def flux_jacobian_apply(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Row-wise ``grad F_k(x_k) . y_k``."""
        z = np.linalg.norm(x, axis=-1)
        p = self.speeds_p(z)
        dp = self.speeds_dp(z)
        coef = np.where(z > 0, dp / np.where(z > 0, z, 1.0), 0.0)
        return p[..., None] * y + (coef * np.einsum("...d,...d->...", x, y))[..., None] * x


@dataclass(frozen=True)
class SwarmState:
    t: float
    r: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class LienardState:
    t: float
    x: np.ndarray
    y: np.ndarray


def _check(model: SwarmModel, a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (model.n, model.d):
        raise InputError(f"{name} has shape {a.shape}, expected {(model.n, model.d)}")
    return a


def accel_linear(model: SwarmModel, r: np.ndarray, v: np.ndarray) -> np.ndarray:
    c = model.require_linear()
    return -model.flux(v) - c.A @ r


def accel_bounded(model: SwarmModel, r: np.ndarray, v: np.ndarray) -> np.ndarray:
    if model.is_linear:
        raise UsageError("rhs_bounded needs a Morse or custom coupling")
    return -model.flux(v) + model.coupling.force(r, v)


def accel(model: SwarmModel, r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Acceleration of the position system for either coupling variant."""
    return accel_linear(model, r, v) if model.is_linear else accel_bounded(model, r, v)


def lienard_accel(model: SwarmModel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    c = model.require_linear()
    return -model.flux_jacobian_apply(x, y) - c.A @ x


def rhs_linear(model: SwarmModel, s: SwarmState) -> SwarmState:
    r, v = _check(model, s.r, "r"), _check(model, s.v, "v")
    return SwarmState(s.t, v.copy(), accel_linear(model, r, v))


def rhs_bounded(model: SwarmModel, s: SwarmState) -> SwarmState:
    r, v = _check(model, s.r, "r"), _check(model, s.v, "v")
    return SwarmState(s.t, v.copy(), accel_bounded(model, r, v))


def rhs_lienard(model: SwarmModel, s: LienardState) -> LienardState:
    x, y = _check(model, s.x, "x"), _check(model, s.y, "y")
    return LienardState(s.t, y.copy(), lienard_accel(model, x, y))


def vector_field(model: SwarmModel, system: str = "position") -> Callable[[float, np.ndarray], np.ndarray]:
    """``f(t, Y)`` on stacked arrays ``Y`` of shape ``(2, n, d)`` for the integrator.

    ``system`` is ``"position"`` (linear or bounded, by coupling) or ``"lienard"``.
    """
    if system == "position":
        acc = accel_linear if model.is_linear else accel_bounded
    elif system == "lienard":
        model.require_linear()
        acc = lienard_accel
    else:
        raise InputError(f"unknown system {system!r}")

    def f(t, Y):
        out = np.empty_like(Y)
        out[0] = Y[1]
        out[1] = acc(model, Y[0], Y[1])
        return out

    return f


def to_lienard(model: SwarmModel, r: np.ndarray, v: np.ndarray, t: float = 0.0) -> LienardState:
    """Velocity/acceleration coordinates ``(x, y) = (v, v')`` of a position state."""
    return LienardState(t, np.array(v, dtype=float), accel(model, np.asarray(r, float), np.asarray(v, float)))


def make_model(n: int, d: int, coupling: Coupling, propulsion: Optional[PropulsionLike] = None) -> SwarmModel:
    if propulsion is None:
        propulsion = Propulsion.van_der_pol_radial()
    return SwarmModel(n, d, propulsion, coupling)
