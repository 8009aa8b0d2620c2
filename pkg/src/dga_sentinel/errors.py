"""Exception taxonomy shared across the package.

DataError covers everything the CLI maps to exit code 2: unusable input
data, missing or corrupt model documents, and degenerate training sets.
Usage errors (bad flags) are argparse's job and exit with 64.
"""

from __future__ import annotations


class DataError(Exception):
    """Base for data/model problems (CLI exit code 2)."""


class SchemaVersionMismatchError(DataError):
    """Serialized document has an unsupported schema_version."""


class CorruptDocumentError(DataError):
    """Serialized document is missing fields or structurally wrong."""


class ModelMissingError(DataError):
    """A required model file is absent from the models directory."""


class DegenerateDataError(DataError):
    """Training data cannot support a model (single class, NaNs, ...)."""


class ShapeMismatchError(DataError):
    """Array sizes disagree with each other or with the trained model."""
