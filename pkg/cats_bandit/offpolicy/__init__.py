"""
Off-policy module for the CATS bandit tool.
"""

from .cats_off import (
    CatsOffResult,
    GridPoint,
    IpsEstimate,
    LogDensityError,
    SrmConfig,
    admissible_bandwidth,
    cats_off,
    default_grid,
    draw_averaged_policy,
    ips_estimate,
    ips_value,
    penalty,
    resolve_grid,
)
from .tree_training import (
    FiniteBaseClass,
    FixedClassifier,
    ips_examples,
    partition_blocks,
    train_tree_full,
    train_tree_partitioned,
)

__all__ = [
    'CatsOffResult',
    'FiniteBaseClass',
    'FixedClassifier',
    'GridPoint',
    'IpsEstimate',
    'LogDensityError',
    'SrmConfig',
    'admissible_bandwidth',
    'cats_off',
    'default_grid',
    'draw_averaged_policy',
    'ips_estimate',
    'ips_examples',
    'ips_value',
    'partition_blocks',
    'penalty',
    'resolve_grid',
    'train_tree_full',
    'train_tree_partitioned',
]
