"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError (and subclasses) -> 2,
InstanceTooLargeError -> 3, OSError -> 4.
"""


class ValidationError(ValueError):
    """Bad data or parameters: shape/id/range violations, malformed files."""


class ShapeError(ValidationError):
    """Array dimensions do not line up."""


class InvalidSplitError(ValidationError):
    """Split fractions cannot produce non-empty train and validation sets."""


class IncompleteInputError(ValidationError):
    """A query lacks both text and a precomputed feature vector."""


class DegenerateEnsembleError(ValidationError):
    """All ensemble weights are zero; the weighted mean is undefined."""


class InstanceTooLargeError(ValueError):
    """Exhaustive enumeration would exceed the configured cap."""
