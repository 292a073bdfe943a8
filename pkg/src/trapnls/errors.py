"""Exception types shared across the package."""


class TrapNLSError(Exception):
    """Base class for all package-specific errors."""


class SingularTime(TrapNLSError):
    """Mehler kernel requested at a refocusing instant (sin t ~ 0)."""


class BoundaryMassExceeded(TrapNLSError):
    """Too much mass near the edge of the periodic box; it no longer
    emulates free space."""

    def __init__(self, t: float, fraction: float, tol: float):
        self.t = t
        self.fraction = fraction
        self.tol = tol
        super().__init__(
            f"boundary mass fraction {fraction:.3e} exceeds {tol:.3e} at t={t:.6g}"
        )


class NonFinite(TrapNLSError):
    """NaN/Inf detected in the solution (under-resolution or blow-up)."""


class AdmissibilityError(TrapNLSError):
    """Exponent pair fails the dispersive admissibility relation."""


class NoContraction(TrapNLSError):
    """Picard iteration for the wave operator is not contracting."""


class ConfigError(TrapNLSError):
    """Scenario configuration is syntactically or semantically invalid."""
