"""Exception types shared across the package."""


class MeshParseError(ValueError):
    """Raised when an MSH stream cannot be parsed.

    Carries the 1-based line number and the offending line text so callers
    can point at the exact location.
    """

    def __init__(self, message, lineno=None, line=None):
        self.lineno = lineno
        self.line = line
        if lineno is not None:
            message = f"{message} (line {lineno}: {line!r})"
        super().__init__(message)


class NotSPDError(RuntimeError):
    """A matrix expected to be symmetric positive definite is not.

    During LDLt factorization this signals a non-positive pivot; in this
    package that almost always means a bug in preconditioner assembly or a
    non-positive weighting parameter.
    """


class BreakdownError(RuntimeError):
    """Lanczos breakdown with a residual still above tolerance."""


class DenseSizeError(ValueError):
    """A dense computation was requested above the configured size cap."""
