"""Equality constraint languages: relations, operations, preservation, clone positions and CSPs."""
from .eqcore import OrbitRelation, Partition, builtin_relation, contains, enumerate_partitions
from .errors import ArityError, CrossValidationError, EqError, ParseError, ResourceError, ValidationError
from .patops import PatternOperation, builtin_operation
from .preserve import preserves_exact, preserves_sampled

__version__ = "0.1.0"

__all__ = [
    "ArityError", "CrossValidationError", "EqError", "OrbitRelation", "ParseError", "Partition",
    "PatternOperation", "ResourceError", "ValidationError", "builtin_operation", "builtin_relation",
    "contains", "enumerate_partitions", "preserves_exact", "preserves_sampled", "__version__",
]
