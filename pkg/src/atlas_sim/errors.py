"""Exception types shared across the package.

Each error class maps onto one failure mode of the public API; the CLI
translates them into stable process exit codes (see ``atlas_sim.cli``).
"""


class AtlasSimError(Exception):
    """Base class for all package errors."""


class InvalidModelError(AtlasSimError):
    """Model parameters are structurally invalid (e.g. fewer than 2 particles)."""


class InvalidInputError(AtlasSimError):
    """An argument violates a documented precondition."""


class InvalidStepError(AtlasSimError):
    """A time step is non-positive or otherwise unusable."""


class NumericalFailureError(AtlasSimError):
    """An iterative numerical procedure failed to converge.

    Carries the final residual so callers can report how far the solve was
    from the requested tolerance.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = float(residual)


class InvalidBoundError(AtlasSimError):
    """A probability-bound formula was evaluated outside its hypotheses."""


class PlanInfeasibleError(AtlasSimError):
    """No truncation size in the search range satisfies every plan constraint.

    ``diagnostic`` describes which constraint binds (and per-constraint
    failure counts over the scanned range).
    """

    def __init__(self, message: str, diagnostic: dict):
        super().__init__(message)
        self.diagnostic = diagnostic
