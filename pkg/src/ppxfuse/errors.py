"""Exception hierarchy shared by all ppxfuse modules.

Every error raised by the library derives from PpxfuseError so the CLI can
map validation problems to exit code 2 and keep exit code 1 for genuine
internal failures.
"""

from __future__ import annotations


class PpxfuseError(Exception):
    """Base class for all ppxfuse errors."""


class SchemaError(PpxfuseError):
    """Structural mismatch: label spaces, vector lengths, model counts."""


class AlignmentError(PpxfuseError):
    """Bundles or matrices cannot be aligned on a common example-id set."""


class CoverageError(PpxfuseError):
    """Gold labels do not cover every example that needs one."""


class DomainError(PpxfuseError):
    """Numeric input outside the mathematical domain of an operation."""


class DegenerateWeightsError(DomainError):
    """Weight normalization impossible (e.g. all accuracies zero)."""


class ValidationError(PpxfuseError):
    """File content violates an invariant (duplicate ids, bad labels, ...)."""


class ParseError(ValidationError):
    """A line could not be parsed at all; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ManifestError(ValidationError):
    """Manifest metadata disagrees with the rows it describes."""


class ConfigError(PpxfuseError):
    """Invalid configuration (caps, simulator specs, CLI flag combinations)."""
