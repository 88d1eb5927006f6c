#!/usr/bin/env python3
"""
Runner module for the CATS bandit tool.
Streams a simulation's training split through a learner and evaluates
deployed policies on the test split.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import beta

from cats_bandit.harness.baselines import DLinearBaseline
from cats_bandit.harness.datasets import BanditSimulation, RegressionExample, absolute_loss
from cats_bandit.learner.base_learner import BaseLearnerConfig
from cats_bandit.tree.tree_policy import TreePolicy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunMetrics:
    algorithm: str
    rounds: int
    progressive_loss: float
    ns_per_example: float
    mean_updates: float
    max_updates: int

    def to_dict(self) -> Dict:
        return asdict(self)


class OnlineRunner:
    """Class to drive one learner through a stream of regression examples"""

    def __init__(self, learner, algorithm: str = "cats"):
        self.learner = learner
        self.algorithm = algorithm
        self.logger = logging.getLogger("OnlineRunner")

        # Run statistics
        self.rounds = 0
        self.total_loss = 0.0
        self.total_updates = 0
        self.max_updates = 0
        self.elapsed_ns = 0

    def run(self, stream: Sequence[RegressionExample], loss=absolute_loss) -> "OnlineRunner":
        """
        Play every example of ``stream`` once: act, reveal the loss of the
        played action, observe. Only act/observe are timed.
        """
        learner = self.learner
        self.logger.info(f"Running {self.algorithm} over {len(stream)} examples")
        for example in stream:
            start = time.perf_counter_ns()
            a, _ = learner.act(example.x)
            round_loss = loss(a, example.y)
            learner.observe(round_loss)
            self.elapsed_ns += time.perf_counter_ns() - start

            updates = learner.last_update_count
            self.rounds += 1
            self.total_loss += round_loss
            self.total_updates += updates
            if updates > self.max_updates:
                self.max_updates = updates
        self.logger.info(f"Finished {self.algorithm}: {self.get_run_stats()}")
        return self

    def get_run_stats(self) -> Dict:
        """Get current run statistics"""
        if self.rounds == 0:
            return {"rounds": 0, "progressive_loss": None, "mean_updates": None,
                    "max_updates": 0, "ns_per_example": None}
        return {
            "rounds": self.rounds,
            "progressive_loss": self.total_loss / self.rounds,
            "mean_updates": self.total_updates / self.rounds,
            "max_updates": self.max_updates,
            "ns_per_example": self.elapsed_ns / self.rounds,
        }

    def metrics(self) -> RunMetrics:
        if self.rounds == 0:
            raise ValueError("no examples were run")
        stats = self.get_run_stats()
        return RunMetrics(
            algorithm=self.algorithm,
            rounds=stats["rounds"],
            progressive_loss=stats["progressive_loss"],
            ns_per_example=stats["ns_per_example"],
            mean_updates=stats["mean_updates"],
            max_updates=stats["max_updates"],
        )


def run_online(sim: BanditSimulation, learner, algorithm: str = "cats") -> RunMetrics:
    """Stream the training split through ``learner``; progressive validation metrics."""
    if not sim.train:
        raise ValueError("training split is empty")
    return OnlineRunner(learner, algorithm).run(sim.train, sim.loss).metrics()


def run_baseline_dlinear(
    sim: BanditSimulation,
    K: int,
    epsilon: float,
    learner_config: Optional[BaseLearnerConfig] = None,
    seed: int = 0,
) -> RunMetrics:
    if learner_config is None:
        learner_config = BaseLearnerConfig(feature_dim=sim.feature_dim)
    return run_online(sim, DLinearBaseline(K, epsilon, learner_config, seed), algorithm="dlinear")


def clopper_pearson(successes: float, n: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    Exact binomial interval for a [0, 1]-loss total.

    A fractional total is bracketed: the lower end inverts floor(successes)
    and the upper end ceil(successes), so the interval always contains
    successes / n. Integer totals get the textbook interval.
    """
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    if not 0.0 <= successes <= n:
        raise ValueError(f"successes must be in [0, {n}], got {successes}")
    alpha = 1.0 - confidence
    k_lo = math.floor(successes)
    k_hi = min(math.ceil(successes), n)
    lower = 0.0 if k_lo == 0 else float(beta.ppf(alpha / 2, k_lo, n - k_lo + 1))
    upper = 1.0 if k_hi == n else float(beta.ppf(1 - alpha / 2, k_hi + 1, n - k_hi))
    return lower, upper


@dataclass(frozen=True)
class EvaluationResult:
    mean_loss: float
    interval: Tuple[float, float]
    n: int
    mean_loss_target_units: float

    def to_dict(self) -> Dict:
        return {
            "mean_loss": self.mean_loss,
            "clopper_pearson_95": list(self.interval),
            "n": self.n,
            "mean_loss_target_units": self.mean_loss_target_units,
        }


def evaluate_losses(losses: np.ndarray, span: float = 1.0) -> EvaluationResult:
    n = len(losses)
    if n == 0:
        raise ValueError("cannot evaluate on an empty split")
    total = float(np.sum(losses))
    mean = total / n
    return EvaluationResult(mean, clopper_pearson(min(total, n), n), n, mean * span)


def evaluate_test(tree: TreePolicy, sim: BanditSimulation, seed: int = 0) -> EvaluationResult:
    """Deploy the smoothed tree policy on the test split and average |a - y|."""
    if not sim.test:
        raise ValueError("test split is empty")
    rng = np.random.default_rng(seed)
    losses = np.array([sim.loss(tree.smoothed_action(e.x, rng), e.y) for e in sim.test])
    result = evaluate_losses(losses, sim.dataset.scaling.span)
    logger.info(f"Test loss {result.mean_loss:.5f} CP95 {result.interval} over {result.n} examples")
    return result
