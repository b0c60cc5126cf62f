"""Exception hierarchy shared across the package.

Every error that a CLI verb can surface carries a short machine-readable
``code`` and an optional ``witness`` payload (e.g. the violating word or
eigenvector) so batch users can post-process failures.
"""


class FreePoissonError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.message = message
        self.witness = witness

    def to_json(self):
        obj = {"code": self.code, "message": self.message}
        if self.witness is not None:
            obj["witness"] = self.witness
        return obj


class ValidationError(FreePoissonError):
    """Malformed or out-of-domain input."""

    code = "validation"


class DomainError(ValidationError):
    code = "domain"


class SizeLimitError(ValidationError):
    code = "size_limit"


class ShapeError(ValidationError):
    code = "shape"


class TruncationError(FreePoissonError):
    """Truncation level too small for the requested exact computation."""

    code = "truncation"


class OverflowError_(TruncationError):
    """Strict-mode creation past the top degree."""

    code = "overflow"


class NonConvergenceError(FreePoissonError):
    """Iterative numerics failed; ``witness`` holds the last iterate."""

    code = "non_convergence"


class NotPsdError(ValidationError):
    """A Gram/Hankel/Choi matrix failed its positivity check."""

    code = "not_psd"


class NotClosingError(ValidationError):
    """Word multiplication does not stabilize at the requested degree."""

    code = "not_closing"


class NotTracialError(ValidationError):
    """Operation requires a tracial (cyclic-symmetric) functional."""

    code = "not_tracial"
