"""Exception types shared across the package."""


class IllConditionedError(RuntimeError):
    """The conic solver stopped without a usable verdict or certificate."""


class ConvergenceError(RuntimeError):
    """An iterative method failed to converge within its iteration budget."""


class DegenerateCertificateError(ValueError):
    """A certificate has a zero diagonal weight where a positive one is required."""
