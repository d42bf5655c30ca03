"""Shared exception types."""


class ValidationError(ValueError):
    """Input data violates a documented contract (bad record, unknown id,
    mismatched dimensions, ...). The CLI maps this to exit code 1."""
