#!/usr/bin/env python3
"""
Baseline learners sharing the engine's act/observe interface.

``DLinearBaseline`` plays discrete epsilon-greedy over the K grid actions with
one online cost regressor per action, trained on plain IPS costs, so every
round touches all K regressors. Its log records discrete probabilities and is
not valid input for off-policy smoothing.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from sklearn.utils import check_scalar

from cats_bandit.engine.cats_engine import (
    CatsEngine,
    EngineConfig,
    EngineProtocolError,
    InteractionRecord,
    NoPendingActionError,
)
from cats_bandit.learner.base_learner import BaseLearnerConfig, CostRegressor

BASELINE_KINDS = ("dlinear_ips", "dtree_zero_bandwidth")


@dataclass(frozen=True)
class BaselineConfig:
    kind: str
    K: int
    epsilon: float

    def __post_init__(self) -> None:
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"baseline kind must be one of {BASELINE_KINDS}, got {self.kind!r}")
        if self.K < 2 or self.K & (self.K - 1):
            raise ValueError(f"K must be a power of two >= 2, got {self.K}")
        check_scalar(self.epsilon, name="epsilon", target_type=(int, float), min_val=0.0, max_val=1.0,
                     include_boundaries="right")


def make_baseline(config: BaselineConfig, learner_config: BaseLearnerConfig, seed: int = 0):
    """dTree is the engine itself at h = 0; dLinear is the per-action regressor baseline."""
    if config.kind == "dtree_zero_bandwidth":
        depth = config.K.bit_length() - 1
        return CatsEngine(EngineConfig(config.epsilon, 0.0, depth, learner_config, seed))
    return DLinearBaseline(config.K, config.epsilon, learner_config, seed)


class DLinearBaseline:
    """One-versus-all cost regression over the grid actions {0, 1/K, ..., (K-1)/K}."""

    def __init__(self, K: int, epsilon: float, learner_config: BaseLearnerConfig, seed: int = 0):
        BaselineConfig("dlinear_ips", K, epsilon)
        self.K = K
        self.epsilon = epsilon
        self.learner_config = learner_config
        self.regressors = [CostRegressor(learner_config.feature_dim) for _ in range(K)]
        self.rng = np.random.default_rng(seed)
        self.logger = logging.getLogger("DLinearBaseline")

        self.round = 0
        self.total_loss = 0.0
        self.update_count = 0
        self.last_update_count = 0
        self.log: List[InteractionRecord] = []
        self._pending: Optional[Tuple[np.ndarray, int, float]] = None

    def step_size(self) -> float:
        rate = self.learner_config.learning_rate
        if self.learner_config.update_rule == "fixed":
            return rate
        return rate / np.sqrt(self.round + 1)

    def greedy_index(self, x) -> int:
        """Action with the lowest predicted cost; ties go to the smallest index."""
        best_index, best_cost = 0, None
        for index, regressor in enumerate(self.regressors):
            predicted = regressor.predict(x)
            if best_cost is None or predicted < best_cost:
                best_index, best_cost = index, predicted
        return best_index

    def act(self, x) -> Tuple[float, float]:
        if self._pending is not None:
            raise EngineProtocolError("act called twice without observe")
        x = np.asarray(x, dtype=np.float64)
        greedy = self.greedy_index(x)
        if self.rng.random() < self.epsilon:
            index = int(self.rng.integers(self.K))
        else:
            index = greedy
        p = (1.0 - self.epsilon) * (index == greedy) + self.epsilon / self.K
        self._pending = (x, index, p)
        return index / self.K, p

    def observe(self, loss: float) -> None:
        if self._pending is None:
            raise NoPendingActionError("observe called without a pending act")
        if not 0.0 <= loss <= 1.0:
            raise ValueError(f"loss must be in [0, 1], got {loss}")
        (x, taken, p), self._pending = self._pending, None

        self.log.append(InteractionRecord(x, taken / self.K, p, float(loss), self.round))
        step = self.step_size()
        ips = loss / p
        for index, regressor in enumerate(self.regressors):
            regressor.step(x, ips if index == taken else 0.0, step)
        self.last_update_count = self.K
        self.update_count += self.K

        self.round += 1
        self.total_loss += loss

    def progressive_loss(self) -> float:
        if self.round == 0:
            raise ValueError("no rounds observed yet")
        return self.total_loss / self.round

    def export_log(self) -> List[InteractionRecord]:
        return list(self.log)


class ConstantBaseline:
    """Always plays ``action`` with density 1; never learns."""

    def __init__(self, action: float):
        if not 0.0 <= action <= 1.0:
            raise ValueError(f"action must be in [0, 1], got {action}")
        self.action = float(action)
        self.round = 0
        self.total_loss = 0.0
        self.last_update_count = 0
        self._pending = False

    def act(self, x) -> Tuple[float, float]:
        if self._pending:
            raise EngineProtocolError("act called twice without observe")
        self._pending = True
        return self.action, 1.0

    def observe(self, loss: float) -> None:
        if not self._pending:
            raise NoPendingActionError("observe called without a pending act")
        self._pending = False
        self.round += 1
        self.total_loss += loss

    def progressive_loss(self) -> float:
        if self.round == 0:
            raise ValueError("no rounds observed yet")
        return self.total_loss / self.round
