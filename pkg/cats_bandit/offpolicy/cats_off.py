#!/usr/bin/env python3
"""
Off-policy evaluation and model selection for tree policies.

``cats_off`` replays a logged interaction stream once per (bandwidth,
discretization) grid point, scoring each round with the current tree before
training on it, and picks the grid point minimizing progressive IPS loss plus
the deviation penalty sqrt(g * sigma) + sigma, sigma = scale / (T p_min h).
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from sklearn.utils import check_scalar

from cats_bandit.engine.cats_engine import InteractionRecord
from cats_bandit.learner.base_learner import BaseLearnerConfig
from cats_bandit.training.online_trainer import clamp_to_reachable, make_ips_cost, online_train_tree
from cats_bandit.tree.model_file import deserialize, serialize
from cats_bandit.tree.tree_policy import TreePolicy, build_tree, is_admissible

logger = logging.getLogger("CatsOff")


class LogDensityError(ValueError):
    """A logged density is below the configured p_min."""

    def __init__(self, round_index, density, p_min):
        super().__init__(f"round {round_index} has density {density} below p_min={p_min}")
        self.round_index = round_index


@dataclass(frozen=True)
class SrmConfig:
    """
    Structural risk minimization settings.

    ``penalty_scale`` None means the theoretical 64 ln(4 T |J| / delta);
    1.0 reproduces the usual experimental substitution.
    """

    p_min: float
    delta: float = 0.05
    penalty_scale: Optional[float] = None

    def __post_init__(self) -> None:
        check_scalar(self.p_min, name="p_min", target_type=(int, float), min_val=0.0,
                     include_boundaries="right", max_val=float("inf"))
        check_scalar(self.delta, name="delta", target_type=(int, float), min_val=0.0, max_val=1.0,
                     include_boundaries="neither")
        if self.penalty_scale is not None:
            check_scalar(self.penalty_scale, name="penalty_scale", target_type=(int, float), min_val=0.0)

    @classmethod
    def from_settings(cls, settings):
        offline = settings["offline"]
        scale = offline.get("penalty_scale")
        return cls(
            p_min=float(offline["p_min"]),
            delta=float(offline["delta"]),
            penalty_scale=None if scale is None else float(scale),
        )

    def resolve_scale(self, T: int, grid_size: int) -> float:
        if self.penalty_scale is not None:
            return self.penalty_scale
        return 64.0 * math.log(4.0 * T * grid_size / self.delta)


@dataclass
class GridPoint:
    """One (h, K) hypothesis with its progressive loss, penalty and final tree."""

    h: float
    K: int
    requested_h: float
    g_hat: float = 0.0
    penalty: float = 0.0
    selected: bool = False
    note: Optional[str] = None
    tree: Optional[TreePolicy] = field(default=None, repr=False)
    snapshots: List[bytes] = field(default_factory=list, repr=False)

    @property
    def objective(self) -> float:
        return self.g_hat + self.penalty

    def to_dict(self) -> Dict:
        return {
            "h": self.h,
            "K": self.K,
            "requested_h": self.requested_h,
            "g_hat": self.g_hat,
            "penalty": self.penalty,
            "selected": self.selected,
            "note": self.note,
        }


@dataclass
class CatsOffResult:
    h_hat: float
    K_hat: int
    tree: TreePolicy
    grid: List[GridPoint]
    T: int
    p_min: float
    penalty_scale: float

    @property
    def selected(self) -> GridPoint:
        return next(point for point in self.grid if point.selected)

    def to_report(self, model_path=None) -> Dict:
        return {
            "T": self.T,
            "p_min": self.p_min,
            "penalty_scale": self.penalty_scale,
            "h_hat": self.h_hat,
            "K_hat": self.K_hat,
            "grid": [point.to_dict() for point in self.grid],
            "model_path": str(model_path) if model_path else None,
        }

    def write_report(self, path, model_path=None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.to_report(model_path), f, indent=4)
        logger.info(f"Wrote model selection report to {path}")
        return path


@dataclass(frozen=True)
class IpsEstimate:
    value: float
    std_error: float
    n: int


def default_grid(max_depth: int = 13, min_bandwidth: float = 2.0 ** -13) -> List[Tuple[float, int]]:
    """
    (h, K) pairs with h in {2^-13, ..., 2^-1}, K in {2^2, ..., 2^13} and
    h K in {2^0, ..., 2^11}, optionally cut to K <= 2^max_depth and h >= min_bandwidth.
    """
    grid = []
    for depth in range(2, min(max_depth, 13) + 1):
        for i in range(1, 14):
            h = 2.0 ** -i
            if h < min_bandwidth:
                continue
            if 1 <= h * 2 ** depth <= 2 ** 11:
                grid.append((h, 2 ** depth))
    return grid


def admissible_bandwidth(K: int, h: float) -> Tuple[float, Optional[str]]:
    """
    Round ``h`` down to the largest bandwidth the tree of size K accepts.

    Returns the bandwidth and a note when rounding happened.
    """
    depth = K.bit_length() - 1
    if is_admissible(depth, h):
        return h, None
    if h * K < 1 or depth < 2:
        raise ValueError(f"no admissible bandwidth <= {h} for K={K}")
    m_sharp = min(int(math.floor(math.log2(h * K))), depth - 2)
    rounded = 2.0 ** m_sharp / K
    return rounded, f"h rounded down from {h} to {rounded}"


def resolve_grid(grid: Sequence[Tuple[float, int]]) -> List[GridPoint]:
    """
    Round every (h, K) to an admissible pair and drop repeats.

    The first occurrence of a pair survives. When a later occurrence was
    rounded and the survivor was not, the survivor takes its note.
    """
    points: Dict[Tuple[float, int], GridPoint] = {}
    for requested_h, K in grid:
        if requested_h <= 0:
            raise ValueError(f"grid bandwidths must be > 0, got h={requested_h} for K={K}")
        h, note = admissible_bandwidth(K, requested_h)
        if note:
            logger.warning(f"K={K}: {note}")
        survivor = points.get((h, K))
        if survivor is None:
            points[(h, K)] = GridPoint(h=h, K=K, requested_h=requested_h, note=note)
        elif note and not survivor.note:
            survivor.note = note
    if len(points) < len(grid):
        logger.info(f"Dropped {len(grid) - len(points)} repeated grid points after rounding")
    return list(points.values())


def validate_log(log: Sequence[InteractionRecord], p_min: float) -> None:
    for index, record in enumerate(log):
        if record.p < p_min:
            raise LogDensityError(index, record.p, p_min)


def penalty(g_hat: float, sigma: float) -> float:
    """sqrt(g_hat sigma) + sigma."""
    return math.sqrt(g_hat * sigma) + sigma


def target_density(tree: TreePolicy, greedy_index: int, a: float) -> float:
    """Density at ``a`` of the smoothed tree policy whose greedy action index is ``greedy_index``."""
    if tree.h == 0:
        return 1.0 if round(a * tree.K) == greedy_index else 0.0
    return tree.kernel.density(greedy_index / tree.K, a)


def ips_estimate(log: Sequence[InteractionRecord], tree: TreePolicy) -> IpsEstimate:
    """IPS estimate of the smoothed loss of ``tree`` with its standard error."""
    if len(log) == 0:
        raise ValueError("cannot evaluate on an empty log")
    terms = np.array([
        target_density(tree, tree.get_action_index(r.x), r.a) / r.p * r.loss
        for r in log
    ])
    std_error = float(terms.std(ddof=1) / math.sqrt(len(terms))) if len(terms) > 1 else 0.0
    return IpsEstimate(float(terms.mean()), std_error, len(terms))


def ips_value(log: Sequence[InteractionRecord], tree: TreePolicy) -> float:
    return ips_estimate(log, tree).value


def replay_grid_point(
    log: Sequence[InteractionRecord],
    h: float,
    K: int,
    learner_config: BaseLearnerConfig,
    snapshot_every: int = 0,
) -> Tuple[float, TreePolicy, List[bytes]]:
    """
    Progressive validation of one grid point: score round t with the tree
    trained on rounds before t, then train on round t.
    """
    tree = build_tree(K.bit_length() - 1, h, learner_config)
    snapshots = []
    total = 0.0
    for t, record in enumerate(log):
        if snapshot_every and t % snapshot_every == 0:
            snapshots.append(serialize(tree))
        cost = make_ips_cost(tree, record.a, record.p, record.loss)
        scored, _ = clamp_to_reachable(tree, cost)
        total += scored.cost_at(tree.get_action_index(record.x), K)
        online_train_tree(tree, record.x, cost)
    return total / len(log), tree, snapshots


def cats_off(
    log: Sequence[InteractionRecord],
    grid: Sequence[Tuple[float, int]],
    srm: SrmConfig,
    learner_config: BaseLearnerConfig,
    n_jobs: int = 1,
    snapshot_every: int = 0,
) -> CatsOffResult:
    """
    Train one tree per grid point on the log and select one by penalized
    progressive loss.

    Args:
        log: logged rounds, every density >= srm.p_min
        grid: (h, K) pairs; inadmissible h are rounded down per K
        srm: selection settings
        learner_config: node learner configuration for every tree
        n_jobs: joblib workers; grid points are independent
        snapshot_every: when > 0, keep a serialized tree every that many rounds
            so the averaged policy can be drawn afterwards

    Returns:
        CatsOffResult: selected (h, K), its final tree and the per-point report
    """
    if len(grid) == 0:
        raise ValueError("the grid is empty")
    if len(log) == 0:
        raise ValueError("the log is empty")
    validate_log(log, srm.p_min)

    T = len(log)
    points = resolve_grid(grid)
    scale = srm.resolve_scale(T, len(points))

    logger.info(f"Replaying {T} rounds over {len(points)} grid points (n_jobs={n_jobs})")
    results = Parallel(n_jobs=n_jobs)(
        delayed(replay_grid_point)(log, point.h, point.K, learner_config, snapshot_every)
        for point in points
    )

    for point, (g_hat, tree, snapshots) in zip(points, results):
        point.g_hat = g_hat
        point.penalty = penalty(g_hat, scale / (T * srm.p_min * point.h))
        point.tree = tree
        point.snapshots = snapshots
        logger.info(f"h={point.h:g} K={point.K}: g_hat={g_hat:.5f} penalty={point.penalty:.5f}")

    best = min(range(len(points)), key=lambda i: points[i].objective)
    points[best].selected = True
    chosen = points[best]
    logger.info(f"Selected h={chosen.h:g} K={chosen.K} (objective {chosen.objective:.5f})")
    return CatsOffResult(
        h_hat=chosen.h,
        K_hat=chosen.K,
        tree=chosen.tree,
        grid=points,
        T=T,
        p_min=srm.p_min,
        penalty_scale=scale,
    )


def draw_averaged_policy(result: CatsOffResult, rng: np.random.Generator) -> TreePolicy:
    """Draw a tree uniformly from the selected grid point's snapshots."""
    snapshots = result.selected.snapshots
    if not snapshots:
        raise ValueError("no snapshots kept; run cats_off with snapshot_every > 0")
    return deserialize(snapshots[int(rng.integers(len(snapshots)))])
