"""Symmetric-matrix spectral tools.

Eigendecomposition by cyclic Jacobi rotations, the orthogonal projection
``Q`` onto ``ker(A)``, the shifted matrix ``S = A + Q`` and its inverse.
``S`` is positive definite whenever ``A`` is positive semidefinite, and
``S^{-1} A = I - Q``.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DecompositionError, InputError, NotPSDError

DEFAULT_ZERO_TOL = 1e-9
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T


@dataclass(frozen=True)
class ProjectionPair:
    """Kernel projection of a PSD matrix together with ``S = A + Q``.

    ``S`` and ``S_inv`` are ``None`` until :func:`shifted_inverse` fills them.
    """

    Q: np.ndarray
    kernel_dim: int
    kernel_basis: np.ndarray  # n x kernel_dim, the matrix K with Q = K K^T
    S: Optional[np.ndarray] = None
    S_inv: Optional[np.ndarray] = None
    identity_residual: Optional[float] = None
    condition: Optional[float] = None


def inf_norm(M) -> float:
    """Maximum absolute row sum."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return float(np.abs(M).sum(axis=1).max())


def symmetrize(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    return 0.5 * (M + M.T)


def _jacobi(a: np.ndarray, max_sweeps: int = 100):
    n = a.shape[0]
    a = a.copy()
    V = np.eye(n)
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        return np.diag(a).copy(), V
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= eps * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                v_p = V[:, p].copy()
                v_q = V[:, q]
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q
    return np.diag(a).copy(), V


def spectral_decompose(A) -> SpectralDecomposition:
    """Eigendecomposition of the symmetrized input, eigenvalues ascending."""
    A = symmetrize(A)
    lam, V = _jacobi(A)
    order = np.argsort(lam, kind="stable")
    return SpectralDecomposition(lam[order], V[:, order])


def kernel_projection(dec: SpectralDecomposition, zero_tol: float = DEFAULT_ZERO_TOL) -> ProjectionPair:
    """Projection onto the span of eigenvectors whose eigenvalue is numerically zero.

    An eigenvalue counts as zero when ``|lam| <= zero_tol * max(1, lam_max)``.
    Anything below ``-zero_tol * max(1, lam_max)`` raises :class:`NotPSDError`.
    """
    if zero_tol <= 0:
        raise InputError("zero_tol must be positive")
    lam = dec.eigenvalues
    thr = zero_tol * max(1.0, float(lam.max()))
    if lam.min() < -thr:
        raise NotPSDError(f"matrix is not positive semidefinite: min eigenvalue {lam.min():.3e}")
    mask = np.abs(lam) <= thr
    K = dec.eigenvectors[:, mask]
    Q = K @ K.T
    Q = 0.5 * (Q + Q.T)
    return ProjectionPair(Q=Q, kernel_dim=int(mask.sum()), kernel_basis=K)


def shifted_inverse(A, proj) -> ProjectionPair:
    """Form ``S = A + Q`` and ``S^{-1}``; record ``||S^{-1}A - (I - Q)||_inf``.

    ``proj`` is a :class:`ProjectionPair` from :func:`kernel_projection` or a
    bare projection matrix.
    """
    A = symmetrize(A)
    if not isinstance(proj, ProjectionPair):
        Q = symmetrize(proj)
        qdec = spectral_decompose(Q)
        K = qdec.eigenvectors[:, qdec.eigenvalues > 0.5]
        proj = ProjectionPair(Q=Q, kernel_dim=K.shape[1], kernel_basis=K)
    Q = proj.Q
    S = A + Q
    dec = spectral_decompose(S)
    lo, hi = float(dec.eigenvalues[0]), float(dec.eigenvalues[-1])
    if lo <= 0 or hi / lo > MAX_CONDITION:
        raise DecompositionError(f"S = A + Q is numerically singular (eigenvalues in [{lo:.3e}, {hi:.3e}])")
    V = dec.eigenvectors
    S_inv = (V / dec.eigenvalues) @ V.T
    S_inv = 0.5 * (S_inv + S_inv.T)
    n = A.shape[0]
    residual = inf_norm(S_inv @ A - (np.eye(n) - Q))
    return replace(proj, S=S, S_inv=S_inv, identity_residual=residual, condition=hi / lo)


def projection_pair(A, zero_tol: float = DEFAULT_ZERO_TOL) -> ProjectionPair:
    """Kernel projection plus shifted inverse in one call."""
    A = symmetrize(A)
    return shifted_inverse(A, kernel_projection(spectral_decompose(A), zero_tol))
