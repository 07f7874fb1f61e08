"""Exception types shared across the package."""


class KgmVortexError(Exception):
    """Base class for all package errors."""


class ZeroMass(KgmVortexError):
    """The matter amplitude has (numerically) vanished: integral of u^2 is zero
    or below the collapse threshold, so charge-constrained quantities are
    undefined."""


class NoConvergence(KgmVortexError):
    """An iterative linear solve stalled before reaching its tolerance."""

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"linear solve did not converge: residual {residual:.3e} "
            f"after {iterations} iterations"
        )


class MaxIterations(KgmVortexError):
    """Outer minimization hit its iteration cap.  Carries the report built so far."""

    def __init__(self, report):
        self.report = report
        super().__init__("minimization hit max_outer_iter before converging")


class EnergyNonFinite(KgmVortexError):
    """NaN or infinity encountered during minimization (step-size pathology)."""


class DomainTooSmall(KgmVortexError):
    """A trial construction does not fit inside the computational domain."""


class ConfigError(KgmVortexError):
    """Run configuration failed validation.  Message names the offending key."""


class FormatError(KgmVortexError):
    """Checkpoint header mismatch (version or shape)."""


class IoError(KgmVortexError):
    """File read/write failure wrapped in package terms."""
