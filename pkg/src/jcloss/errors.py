"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a special function or operation."""


class ConvergenceError(RuntimeError):
    """A series failed to converge within its iteration cap."""


class CutoffError(ValueError):
    """Requested state needs more excitations than the configured cutoff allows."""


class StepSizeError(ValueError):
    """Requested integrator step exceeds the stability bound."""
