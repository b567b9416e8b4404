"""
Exception types for the n-local analysis package.

Library code raises these; only the command-line front end turns them
into log records and exit codes.
"""
from typing import Optional


class NetworkAnalysisError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(NetworkAnalysisError, ValueError):
    """A matrix or vector has the wrong shape for the operation."""


class ValidationError(NetworkAnalysisError, ValueError):
    """An input violates a documented invariant."""


class UnphysicalStateError(ValidationError):
    """A density matrix (or Bloch form) is not positive semidefinite."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(f"{message} (minimum eigenvalue {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue


class UnsupportedSizeError(ValidationError):
    """A table or construction is not available for the requested size."""


class ResourceLimitError(NetworkAnalysisError):
    """The brute-force oracle would exceed its dense-dimension cap."""

    def __init__(self, message: str, cap: int):
        super().__init__(f"{message} (cap: n <= {cap})")
        self.cap = cap


class SpecFileError(NetworkAnalysisError, ValueError):
    """A network or sweep description file is malformed."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if field:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        suffix = f" [{', '.join(location)}]" if location else ""
        super().__init__(f"{message}{suffix}")
        self.message = message
        self.field = field
        self.line = line


class ConsistencyError(NetworkAnalysisError):
    """Two independent evaluations of the same quantity disagree.

    Raised when the brute-force oracle contradicts a closed form or a fast
    path contradicts the exact trace; the CLI maps it to exit code 2.
    """
