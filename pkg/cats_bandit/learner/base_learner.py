#!/usr/bin/env python3
"""
Base learner module for the CATS bandit tool.

Every internal tree node holds a binary cost-sensitive learner reduced to two
online least-squares cost regressors, one per branch. The node routes a context
to the branch with the lower predicted cost.
"""

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from sklearn.utils import check_scalar

UPDATE_RULES = ("fixed", "inverse_sqrt")


class Branch(IntEnum):
    """Routing decision of an internal node; the value is the child offset."""

    LEFT = 0
    RIGHT = 1


@dataclass(frozen=True)
class BaseLearnerConfig:
    """
    Configuration shared by every node learner of a tree.

    Args:
        feature_dim: context dimension (the affine term is appended internally)
        update_rule: "fixed" for a constant step, "inverse_sqrt" for learning_rate / sqrt(n + 1)
        learning_rate: base step size, > 0
        seed: stored with the model so a model file identifies its full configuration
    """

    feature_dim: int
    update_rule: str = "inverse_sqrt"
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        check_scalar(self.feature_dim, name="feature_dim", target_type=int, min_val=1)
        if self.update_rule not in UPDATE_RULES:
            raise ValueError(f"update_rule must be one of {UPDATE_RULES}, got {self.update_rule!r}")
        check_scalar(
            self.learning_rate,
            name="learning_rate",
            target_type=(int, float),
            min_val=0.0,
            include_boundaries="neither",
        )

    @classmethod
    def from_settings(cls, settings, feature_dim):
        learner = settings["learner"]
        return cls(
            feature_dim=feature_dim,
            update_rule=learner["update_rule"],
            learning_rate=float(learner["learning_rate"]),
            seed=int(settings["engine"]["seed"]),
        )


@dataclass(frozen=True)
class BinaryCostExample:
    """Context with the cost of going left and the cost of going right."""

    x: np.ndarray
    cost_left: float
    cost_right: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.cost_left) and math.isfinite(self.cost_right)):
            raise ValueError(f"costs must be finite, got ({self.cost_left}, {self.cost_right})")


def squared_loss(weights: np.ndarray, x: np.ndarray, cost: float) -> float:
    """(w·x̃ - cost)^2 with x̃ = [x, 1]."""
    residual = weights[:-1] @ x + weights[-1] - cost
    return float(residual * residual)


def squared_loss_gradient(weights: np.ndarray, x: np.ndarray, cost: float) -> np.ndarray:
    """Gradient 2 (w·x̃ - cost) x̃ of :func:`squared_loss` w.r.t. the weights."""
    residual = weights[:-1] @ x + weights[-1] - cost
    return 2.0 * residual * np.append(x, 1.0)


class CostRegressor:
    """Online linear least-squares regressor of a single cost."""

    def __init__(self, feature_dim):
        self.weights = np.zeros(feature_dim + 1)

    def predict(self, x):
        return float(self.weights[:-1] @ x + self.weights[-1])

    def step(self, x, cost, step_size):
        self.weights -= step_size * squared_loss_gradient(self.weights, x, cost)


@dataclass(eq=False)
class BaseLearner:
    """Two per-branch cost regressors and the classifier they induce."""

    config: BaseLearnerConfig
    left: CostRegressor = field(init=False)
    right: CostRegressor = field(init=False)
    update_count: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        self.left = CostRegressor(self.config.feature_dim)
        self.right = CostRegressor(self.config.feature_dim)

    @classmethod
    def reset(cls, config: BaseLearnerConfig) -> "BaseLearner":
        """Fresh learner: zero weights, no updates."""
        return cls(config)

    @property
    def weights_left(self) -> np.ndarray:
        return self.left.weights

    @property
    def weights_right(self) -> np.ndarray:
        return self.right.weights

    def _check_dim(self, x):
        if x.shape[0] != self.config.feature_dim:
            raise ValueError(
                f"context has dimension {x.shape[0]}, learner expects {self.config.feature_dim}"
            )

    def predicted_costs(self, x):
        self._check_dim(x)
        return self.left.predict(x), self.right.predict(x)

    def predict(self, x) -> Branch:
        """Branch with the lower predicted cost; ties go left."""
        self._check_dim(x)
        return Branch.LEFT if self.left.predict(x) <= self.right.predict(x) else Branch.RIGHT

    def step_size(self) -> float:
        if self.config.update_rule == "fixed":
            return self.config.learning_rate
        return self.config.learning_rate / math.sqrt(self.update_count + 1)

    def learn(self, example: BinaryCostExample) -> "BaseLearner":
        """One squared-loss gradient step on each branch regressor."""
        self._check_dim(example.x)
        step = self.step_size()
        self.left.step(example.x, example.cost_left, step)
        self.right.step(example.x, example.cost_right, step)
        self.update_count += 1
        return self
