"""Exception types raised across the toolkit."""


class SwarmError(Exception):
    """Base class for all toolkit errors."""


class InputError(SwarmError, ValueError):
    """Malformed or out-of-domain input."""


class NotPSDError(InputError):
    """Coupling matrix has an eigenvalue below the negative tolerance."""


class DecompositionError(SwarmError):
    """Shifted matrix S = A + Q is numerically singular."""


class UsageError(SwarmError, TypeError):
    """Operation called with the wrong coupling variant."""


class UnsupportedPropulsionError(SwarmError):
    """Propulsion family lacks the analytic property a certifier needs."""


class BlowUpError(SwarmError, ArithmeticError):
    """Integration produced a non-finite state."""

    def __init__(self, message, t):
        super().__init__(f"{message} at t={t:.6g}")
        self.t = t


class StepSizeError(SwarmError, ArithmeticError):
    """Adaptive step fell below h_min (problem too stiff for an explicit method)."""

    def __init__(self, message, t):
        super().__init__(f"{message} at t={t:.6g}")
        self.t = t


class NonsmoothPointError(SwarmError, ValueError):
    """Lyapunov derivative requested on the set |x_k| = a."""


class CertificationError(SwarmError):
    """Parameter selection could not satisfy the decrease conditions."""


class CertificateFailure(SwarmError):
    """A sampled state violates the decrease condition; carries the witness."""

    def __init__(self, message, witness, vdot, certificate=None):
        super().__init__(message)
        self.witness = witness
        self.vdot = vdot
        self.certificate = certificate


class CatalogError(InputError, KeyError):
    """Unknown scenario name."""

    def __str__(self):
        return Exception.__str__(self)
