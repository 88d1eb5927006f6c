"""
Tree module for the CATS bandit tool.
"""

from .model_file import (
    ModelChecksumError,
    ModelFormatError,
    ModelTruncatedError,
    ModelVersionError,
    deserialize,
    load_model,
    save_model,
    serialize,
)
from .tree_policy import (
    ConstantRouter,
    DiscretizedAction,
    TreePolicy,
    build_tree,
    is_admissible,
    level_of,
    sharp_exponent,
)

__all__ = [
    'ConstantRouter',
    'DiscretizedAction',
    'ModelChecksumError',
    'ModelFormatError',
    'ModelTruncatedError',
    'ModelVersionError',
    'TreePolicy',
    'build_tree',
    'deserialize',
    'is_admissible',
    'level_of',
    'load_model',
    'save_model',
    'serialize',
    'sharp_exponent',
]
