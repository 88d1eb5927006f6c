"""
Training module for the CATS bandit tool.
"""

from .online_trainer import (
    NodeUpdate,
    PiecewiseCost,
    UpdateTrace,
    brute_force_update_oracle,
    clamp_to_reachable,
    cost_at,
    make_ips_cost,
    online_train_tree,
    return_cost,
)

__all__ = [
    'NodeUpdate',
    'PiecewiseCost',
    'UpdateTrace',
    'brute_force_update_oracle',
    'clamp_to_reachable',
    'cost_at',
    'make_ips_cost',
    'online_train_tree',
    'return_cost',
]
