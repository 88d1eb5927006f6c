#!/usr/bin/env python3
"""
Per-example training time of cats, dtree and dlinear as K and h vary.

Each measurement replays the same pre-materialized synthetic stream through a
fresh learner and keeps the median over repetitions. The table holds three
panels: cats time against h at the largest K, cats time against K, and all
algorithms against K.
"""

import logging
import statistics
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import pandas as pd

from cats_bandit.engine.cats_engine import CatsEngine, EngineConfig
from cats_bandit.harness.baselines import DLinearBaseline
from cats_bandit.harness.datasets import RegressionExample, synth_ds
from cats_bandit.harness.online_runner import OnlineRunner
from cats_bandit.learner.base_learner import BaseLearnerConfig
from cats_bandit.offpolicy.cats_off import admissible_bandwidth

logger = logging.getLogger(__name__)

ALGORITHMS = ("cats", "dtree", "dlinear")
PANELS = ("time_vs_h", "cats_vs_K", "all_vs_K")


@dataclass(frozen=True)
class BenchRow:
    panel: str
    algorithm: str
    K: int
    h: float
    ns_per_example: float
    mean_updates: float


def fixed_hk_policy(hk: int = 4) -> Callable[[int], float]:
    """Bandwidth h = hk / K, rounded down where the tree of size K needs it."""

    def policy(K: int) -> float:
        return admissible_bandwidth(K, hk / K)[0]

    return policy


def make_learner(algorithm: str, K: int, h: float, epsilon: float, learner_config: BaseLearnerConfig, seed: int):
    depth = K.bit_length() - 1
    if algorithm == "cats":
        return CatsEngine(EngineConfig(epsilon, h, depth, learner_config, seed))
    if algorithm == "dtree":
        return CatsEngine(EngineConfig(epsilon, 0.0, depth, learner_config, seed))
    if algorithm == "dlinear":
        return DLinearBaseline(K, epsilon, learner_config, seed)
    raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")


def time_learner(
    algorithm: str,
    K: int,
    h: float,
    stream: Sequence[RegressionExample],
    reps: int,
    epsilon: float = 0.05,
    seed: int = 0,
) -> BenchRow:
    """Median ns per example over ``reps`` fresh runs, after one untimed warm-up run."""
    learner_config = BaseLearnerConfig(feature_dim=stream[0].x.shape[0], seed=seed)
    warmup = stream[: max(1, len(stream) // 10)]
    OnlineRunner(make_learner(algorithm, K, h, epsilon, learner_config, seed), algorithm).run(warmup)

    timings, updates = [], []
    for rep in range(reps):
        runner = OnlineRunner(make_learner(algorithm, K, h, epsilon, learner_config, seed + rep), algorithm)
        stats = runner.run(stream).get_run_stats()
        timings.append(stats["ns_per_example"])
        updates.append(stats["mean_updates"])
    return BenchRow("", algorithm, K, 0.0 if algorithm == "dtree" else h,
                    statistics.median(timings), statistics.mean(updates))


@dataclass
class BenchTable:
    rows: List[BenchRow]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(row) for row in self.rows], columns=list(BenchRow.__dataclass_fields__))

    def panel(self, name: str, algorithm: Optional[str] = None) -> pd.DataFrame:
        frame = self.to_frame()
        frame = frame[frame["panel"] == name]
        if algorithm is not None:
            frame = frame[frame["algorithm"] == algorithm]
        return frame.reset_index(drop=True)

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_json(path, orient="records", indent=4)
        logger.info(f"Wrote {len(self.rows)} benchmark rows to {path}")
        return path


def bench_timing(
    depths: Sequence[int],
    algos: Sequence[str] = ALGORITHMS,
    reps: int = 5,
    h_policy: Optional[Callable[[int], float]] = None,
    bandwidths: Optional[Sequence[float]] = None,
    stream: Optional[Sequence[RegressionExample]] = None,
    stream_length: int = 2000,
    dim: int = 10,
    epsilon: float = 0.05,
    seed: int = 0,
) -> BenchTable:
    """
    Time each algorithm across K = 2^D for D in ``depths``.

    Args:
        depths: tree depths; the largest one is the fixed K of the h panel
        algos: subset of ("cats", "dtree", "dlinear")
        reps: repetitions per cell, >= 1; the median is reported
        h_policy: K -> h for the K panels, defaults to h = 4 / K
        bandwidths: h values of the h panel, defaults to 2^-i admissible at the largest K
        stream: examples to replay, defaults to a synthetic stream of ``stream_length``

    Returns:
        BenchTable: one row per (panel, algorithm, K, h)
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    for algorithm in algos:
        if algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    if stream is None:
        stream = synth_ds(stream_length, dim, 0.1, seed).examples
    h_policy = h_policy or fixed_hk_policy()

    rows = []
    top = max(depths)
    K_top = 2 ** top
    if "cats" in algos:
        if bandwidths is None:
            bandwidths = [2.0 ** -i for i in range(1, top + 1) if 1 <= K_top * 2.0 ** -i <= K_top // 4]
        for h in bandwidths:
            row = time_learner("cats", K_top, h, stream, reps, epsilon, seed)
            rows.append(_in_panel(row, "time_vs_h"))
            logger.info(f"time_vs_h K={K_top} h={h:g}: {row.ns_per_example:.0f} ns/example")

    for depth in sorted(depths):
        K = 2 ** depth
        h = h_policy(K)
        for algorithm in algos:
            row = time_learner(algorithm, K, h, stream, reps, epsilon, seed)
            rows.append(_in_panel(row, "all_vs_K"))
            if algorithm == "cats":
                rows.append(_in_panel(row, "cats_vs_K"))
            logger.info(f"{algorithm} K={K}: {row.ns_per_example:.0f} ns/example")
    return BenchTable(rows)


def _in_panel(row: BenchRow, panel: str) -> BenchRow:
    return BenchRow(panel, row.algorithm, row.K, row.h, row.ns_per_example, row.mean_updates)
