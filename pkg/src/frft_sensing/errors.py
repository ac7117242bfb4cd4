"""Exception taxonomy shared by all modules.

Validation problems (bad parameter values, violated call contracts,
degenerate inputs) derive from :class:`ValidationError`; grids too coarse
for the requested computation raise :class:`ResolutionError`.  The CLI maps
the former to exit code 2 and the latter to exit code 3.
"""


class ValidationError(ValueError):
    """Base class for rejected inputs."""


class DomainError(ValidationError):
    """A parameter lies outside the mathematical domain of the operation."""


class ChirpThroughDCError(DomainError):
    """Instantaneous frequency of a chirped filter crosses zero inside the window."""


class ContractViolationError(ValidationError):
    """Arguments are individually valid but mutually inconsistent."""


class DegenerateInputError(ValidationError):
    """Input is structurally valid but carries no usable content."""


class ResolutionError(RuntimeError):
    """Sampling too coarse for the requested computation.

    The message names the largest admissible step so callers can rebuild
    their grid.
    """

    def __init__(self, message: str, required_dt: float | None = None):
        super().__init__(message)
        self.required_dt = required_dt
