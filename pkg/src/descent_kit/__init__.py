"""Exact verification kit for Weil descent of marked curves and Galois Belyi maps."""

__version__ = "0.1.0"

from .errors import DescentKitError, SchemaError  # noqa: E402
from .fields import FieldAutomorphism, FieldElement, FieldMorphism, FieldTower, make_tower  # noqa: E402

__all__ = [
    "__version__",
    "DescentKitError",
    "SchemaError",
    "FieldTower",
    "FieldElement",
    "FieldMorphism",
    "FieldAutomorphism",
    "make_tower",
]
