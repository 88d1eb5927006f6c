#!/usr/bin/env python3
"""
Engine module for the CATS bandit tool.
Runs the online loop: smoothed epsilon-greedy action sampling with exact
mixture densities, interaction logging and one tree update per round.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from sklearn.utils import check_scalar

from cats_bandit.learner.base_learner import BaseLearnerConfig
from cats_bandit.training.online_trainer import UpdateTrace, make_ips_cost, online_train_tree
from cats_bandit.tree.tree_policy import build_tree, sharp_exponent


class EngineProtocolError(RuntimeError):
    """act/observe were called out of order."""


class NoPendingActionError(EngineProtocolError):
    """observe was called without a pending act."""


@dataclass(frozen=True)
class InteractionRecord:
    """One logged round: context, action taken, its density, observed loss."""

    x: np.ndarray
    a: float
    p: float
    loss: float
    round: int

    def __eq__(self, other):
        if not isinstance(other, InteractionRecord):
            return NotImplemented
        return (
            self.round == other.round
            and self.a == other.a
            and self.p == other.p
            and self.loss == other.loss
            and np.array_equal(self.x, other.x)
        )


@dataclass(frozen=True)
class EngineConfig:
    """Exploration and smoothing parameters of the online loop."""

    epsilon: float
    h: float
    depth: int
    learner: BaseLearnerConfig
    seed: int = 0

    def __post_init__(self) -> None:
        check_scalar(
            self.epsilon,
            name="epsilon",
            target_type=(int, float),
            min_val=0.0,
            max_val=1.0,
            include_boundaries="right",
        )
        sharp_exponent(self.depth, self.h)

    @classmethod
    def from_settings(cls, settings, feature_dim):
        engine = settings["engine"]
        return cls(
            epsilon=float(engine["epsilon"]),
            h=float(engine["bandwidth"]),
            depth=int(engine["depth"]),
            learner=BaseLearnerConfig.from_settings(settings, feature_dim),
            seed=int(engine["seed"]),
        )


@dataclass
class _PendingAction:
    x: np.ndarray
    a: float
    p: float


class CatsEngine:
    """
    Smoothed epsilon-greedy contextual bandit over a tree policy.

    With probability epsilon the action is uniform on [0, 1]; otherwise it is
    drawn from the kernel around the tree's action. For h = 0 the engine plays
    on the grid itself: uniform draws pick a grid index and the recorded
    probability is (1 - epsilon) 1[a = greedy] + epsilon / K.
    """

    def __init__(self, config: EngineConfig):
        self.config = config
        self.tree = build_tree(config.depth, config.h, config.learner)
        self.rng = np.random.default_rng(config.seed)
        self.logger = logging.getLogger("CatsEngine")

        self.round = 0
        self.total_loss = 0.0
        self.log: List[InteractionRecord] = []
        self.last_trace: Optional[UpdateTrace] = None
        self._pending: Optional[_PendingAction] = None

        self.logger.info(
            f"Engine ready: epsilon={config.epsilon}, h={config.h}, K={self.tree.K}, "
            f"reachable={self.tree.reachable_range()}"
        )

    def mixture_density(self, greedy: float, a: float) -> float:
        """Density of the exploration mixture at ``a`` when the tree picks ``greedy``."""
        epsilon = self.config.epsilon
        if self.tree.h == 0:
            K = self.tree.K
            hit = 1.0 if round(a * K) == round(greedy * K) else 0.0
            return (1.0 - epsilon) * hit + epsilon / K
        return (1.0 - epsilon) * self.tree.kernel.density(greedy, a) + epsilon

    def act(self, x) -> Tuple[float, float]:
        """
        Choose an action for context ``x``.

        Returns:
            tuple: (action, density of the action under the exploration mixture)
        """
        if self._pending is not None:
            raise EngineProtocolError("act called twice without observe")
        x = np.asarray(x, dtype=np.float64)
        tree = self.tree
        greedy_index = tree.get_action_index(x)
        greedy = greedy_index / tree.K
        explore = self.rng.random() < self.config.epsilon

        if tree.h == 0:
            index = int(self.rng.integers(tree.K)) if explore else greedy_index
            a = index / tree.K
        elif explore:
            a = float(self.rng.random())
        else:
            a = tree.kernel.sample(greedy, self.rng)
        p = self.mixture_density(greedy, a)

        self._pending = _PendingAction(x, a, p)
        return a, p

    def observe(self, loss: float) -> None:
        """Log the pending round with its loss and train the tree on it."""
        if self._pending is None:
            raise NoPendingActionError("observe called without a pending act")
        if not 0.0 <= loss <= 1.0:
            raise ValueError(f"loss must be in [0, 1], got {loss}")
        pending, self._pending = self._pending, None

        record = InteractionRecord(pending.x, pending.a, pending.p, float(loss), self.round)
        self.log.append(record)
        cost = make_ips_cost(self.tree, record.a, record.p, record.loss)
        self.last_trace = online_train_tree(self.tree, record.x, cost)

        self.round += 1
        self.total_loss += record.loss
        if self.logger.isEnabledFor(logging.DEBUG):
            self.logger.debug(
                f"Round {record.round}: a={record.a:.4f} p={record.p:.4f} loss={record.loss:.4f} "
                f"updates={self.last_trace.update_count}"
            )

    @property
    def last_update_count(self) -> int:
        return self.last_trace.update_count if self.last_trace is not None else 0

    def progressive_loss(self) -> float:
        """Mean observed loss over all rounds so far."""
        if self.round == 0:
            raise ValueError("no rounds observed yet")
        return self.total_loss / self.round

    def export_log(self) -> List[InteractionRecord]:
        return list(self.log)
