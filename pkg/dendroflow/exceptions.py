"""
Custom exceptions for the dendroflow package
"""


class DendroflowError(Exception):
    """Base exception class for dendroflow operations."""

    # Process exit status used by the management commands.
    exit_code = 1

    def __init__(self, message, error_code=None, detail=None):
        self.message = message
        self.error_code = error_code
        self.detail = detail
        super().__init__(self.message)


class DendroflowValidationError(DendroflowError):
    """Exception raised for invalid parameters or out-of-domain arguments."""
    pass


class DegenerateSeriesError(DendroflowValidationError):
    """Exception raised when a series has no internal local extremum."""

    def __init__(self, message="degenerate series: no internal local extremum", **kwargs):
        super().__init__(message, **kwargs)


class DendroflowConfigurationError(DendroflowError):
    """Exception raised for configuration-related errors."""

    exit_code = 2


class ExperimentConfigError(DendroflowConfigurationError):
    """Exception raised when an experiment config violates its schema."""

    def __init__(self, message=None, errors=None, **kwargs):
        self.errors = list(errors or [])
        if message is None:
            message = "invalid experiment config:\n" + "\n".join(
                f"  - {error}" for error in self.errors
            )
        super().__init__(message, **kwargs)

    @classmethod
    def from_errors(cls, errors, source=None):
        """Create exception from a list of field errors."""
        prefix = f"invalid experiment config {source}" if source else "invalid experiment config"
        message = prefix + ":\n" + "\n".join(f"  - {error}" for error in errors)
        return cls(message=message, errors=errors, detail={'source': source})


class SeriesParseError(DendroflowError):
    """Exception raised when a series file cannot be parsed."""

    exit_code = 2

    def __init__(self, message, line_number=None, **kwargs):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message, **kwargs)


class TreeConstructionError(DendroflowError):
    """Exception raised for malformed tree input."""

    def __init__(self, message, node=None, **kwargs):
        self.node = node
        if node is not None:
            message = f"{message} (node {node})"
        super().__init__(message, **kwargs)


class NonBinaryTreeError(DendroflowError):
    """Exception raised when a statistic requires a binary tree."""

    def __init__(self, message="tree is not binary", node=None, **kwargs):
        self.node = node
        if node is not None:
            message = f"{message}: node {node} has a non-binary child count"
        super().__init__(message, **kwargs)


class GenerationError(DendroflowError):
    """Exception raised when a random generator cannot produce its output."""
    pass


class EmbeddingError(GenerationError):
    """Exception raised when circulant embedding yields a negative eigenvalue."""
    pass


class ExcursionNotFoundError(DendroflowError):
    """Exception raised when a series holds no completed positive excursion."""

    def __init__(self, message="no completed excursion in series", **kwargs):
        super().__init__(message, **kwargs)


class SupercriticalExcursionWarning(UserWarning):
    """Warning issued when an excursion maps to a supercritical branching law."""
    pass
