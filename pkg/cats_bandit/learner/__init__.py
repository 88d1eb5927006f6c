"""
Learner module for the CATS bandit tool.
"""

from .base_learner import (
    BaseLearner,
    BaseLearnerConfig,
    BinaryCostExample,
    Branch,
    CostRegressor,
    squared_loss,
    squared_loss_gradient,
)

__all__ = [
    'BaseLearner',
    'BaseLearnerConfig',
    'BinaryCostExample',
    'Branch',
    'CostRegressor',
    'squared_loss',
    'squared_loss_gradient',
]
