#!/usr/bin/env python3
"""
Training module for the CATS bandit tool.

Incremental O(log K) tree update from a single IPS cost-sensitive example.

The IPS cost of a logged round is constant (c*) on the grid indices
[a_min, a_max] and zero elsewhere, at least on the reachable band of the tree,
so only nodes on the root paths of the two boundary leaves can see different
costs on their two sides. The update climbs those two paths bottom-up, reading
the sibling's subtree cost in constant time from the id ordering.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from cats_bandit.learner.base_learner import BinaryCostExample, Branch
from cats_bandit.tree.tree_policy import TreePolicy, child_of, level_of, parent_of, sibling_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PiecewiseCost:
    """Implicit IPS cost vector: c_star on [a_min_index, a_max_index], 0 elsewhere."""

    a_min_index: int
    a_max_index: int
    c_star: float

    def __post_init__(self) -> None:
        if self.a_min_index > self.a_max_index:
            raise ValueError(f"a_min_index {self.a_min_index} > a_max_index {self.a_max_index}")
        if not (math.isfinite(self.c_star) and self.c_star >= 0):
            raise ValueError(f"c_star must be finite and non-negative, got {self.c_star}")

    def cost_at(self, index: int, K: int) -> float:
        """Cost of grid action index/K."""
        if not 0 <= index < K:
            raise ValueError(f"index {index} outside [0, {K})")
        if self.a_min_index <= index <= self.a_max_index:
            return self.c_star
        return 0.0

    def to_vector(self, K: int) -> np.ndarray:
        vector = np.zeros(K)
        vector[self.a_min_index:self.a_max_index + 1] = self.c_star
        return vector


def cost_at(c: PiecewiseCost, index: int, K: int) -> float:
    return c.cost_at(index, K)


def make_ips_cost(tree: TreePolicy, a_taken: float, density_p: float, loss: float) -> PiecewiseCost:
    """
    Build the IPS cost of a logged round (a_taken, density_p, loss) on the tree's grid.

    For h > 0: c* = loss / (2 h p), a_min = max(0, ceil(K (a - h))),
    a_max = min(K - 1, floor(K (a + h))). For h = 0 the cost loss / p sits on the
    single index round(K a), clamped to [0, K - 1].
    """
    if not density_p > 0:
        raise ValueError(f"density must be positive, got {density_p}")
    if not 0.0 <= loss <= 1.0:
        raise ValueError(f"loss must be in [0, 1], got {loss}")
    if not 0.0 <= a_taken <= 1.0:
        raise ValueError(f"action must be in [0, 1], got {a_taken}")
    K, h = tree.K, tree.h
    if h == 0:
        index = min(max(int(round(K * a_taken)), 0), K - 1)
        return PiecewiseCost(index, index, loss / density_p)
    a_min = max(0, math.ceil(K * (a_taken - h)))
    a_max = min(K - 1, math.floor(K * (a_taken + h)))
    return PiecewiseCost(a_min, a_max, loss / (2.0 * h * density_p))


def clamp_to_reachable(tree: TreePolicy, c: PiecewiseCost) -> Tuple[PiecewiseCost, bool]:
    """
    Restrict a cost to the tree's reachable leaf band.

    Returns the restricted cost and whether anything was cut. A window that
    misses the band entirely becomes the zero cost.
    """
    lo, hi = tree.reachable_range()
    if lo <= c.a_min_index and c.a_max_index <= hi:
        return c, False
    a_min = max(c.a_min_index, lo)
    a_max = min(c.a_max_index, hi)
    if a_min > a_max:
        edge = lo if c.a_max_index < lo else hi
        return PiecewiseCost(edge, edge, 0.0), True
    return PiecewiseCost(a_min, a_max, c.c_star), True


def return_cost(
    c: PiecewiseCost,
    w: int,
    alpha_d: int,
    beta_d: int,
    alpha_cost: float,
    beta_cost: float,
) -> float:
    """
    Subtree cost of node ``w`` given the boundary ancestors at its level.

    Nodes left of ``alpha_d`` or right of ``beta_d`` cover only zero-cost
    actions, nodes strictly between cover only c* actions, and the two
    boundary nodes report their stored cost.
    """
    level = level_of(w)
    if level_of(alpha_d) != level or level_of(beta_d) != level:
        raise ValueError(f"nodes {w}, {alpha_d}, {beta_d} are not on the same level")
    if w < alpha_d or w > beta_d:
        return 0.0
    if alpha_d < w < beta_d:
        return c.c_star
    if w == alpha_d:
        return alpha_cost
    return beta_cost


@dataclass(frozen=True)
class NodeUpdate:
    level: int
    node_id: int
    cost_left: float
    cost_right: float


@dataclass
class UpdateTrace:
    """Which nodes one example trained, with the binary costs they received."""

    updates: List[NodeUpdate] = field(default_factory=list)
    skipped_sentinels: List[int] = field(default_factory=list)
    clamped: bool = False

    @property
    def update_count(self) -> int:
        return len(self.updates)

    def node_costs(self) -> Dict[int, Tuple[float, float]]:
        return {u.node_id: (u.cost_left, u.cost_right) for u in self.updates}

    def to_text(self) -> str:
        """One ``level node_id cost_left cost_right`` line per update."""
        return "".join(
            f"{u.level}\t{u.node_id}\t{u.cost_left!r}\t{u.cost_right!r}\n" for u in self.updates
        )


def online_train_tree(tree: TreePolicy, x: np.ndarray, c: PiecewiseCost) -> UpdateTrace:
    """
    Update ``tree`` in place with the cost-sensitive example (x, c).

    At most two nodes per level are visited, so at most 2 D learners are
    trained. Sentinel nodes are never trained; nodes whose two binary costs
    agree are not trained either. Every visited node stores the cost of the
    action its subtree now picks for ``x``.
    """
    trace = UpdateTrace()
    c, trace.clamped = clamp_to_reachable(tree, c)
    if trace.clamped and logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"Clamped cost to reachable band {tree.reachable_range()}: {c}")

    costs = tree.node_costs
    routers = tree.routers
    alpha = tree.leaf_id(c.a_min_index)
    beta = tree.leaf_id(c.a_max_index)
    costs[alpha] = c.c_star
    costs[beta] = c.c_star

    for level in range(tree.depth, 0, -1):
        if parent_of(alpha) != parent_of(beta):
            frontier = (alpha, beta)
        else:
            frontier = (alpha,)
        for v in frontier:
            u = parent_of(v)
            w = sibling_of(v)
            costs[w] = return_cost(c, w, alpha, beta, costs[alpha], costs[beta])
            if v < w:
                cost_left, cost_right = costs[v], costs[w]
            else:
                cost_left, cost_right = costs[w], costs[v]

            if tree.is_sentinel(u):
                trace.skipped_sentinels.append(u)
                branch = routers[u].predict(x)
            else:
                if cost_left != cost_right:
                    routers[u].learn(BinaryCostExample(x, float(cost_left), float(cost_right)))
                    trace.updates.append(NodeUpdate(level - 1, u, float(cost_left), float(cost_right)))
                branch = routers[u].predict(x)
            costs[u] = cost_right if branch == Branch.RIGHT else cost_left
        alpha = parent_of(alpha)
        beta = parent_of(beta)
    return trace


def brute_force_update_oracle(
    tree: TreePolicy, x: np.ndarray, c: PiecewiseCost
) -> Tuple[Dict[int, Tuple[float, float]], List[int]]:
    """
    Reference computation of every internal node's binary costs.

    Materializes the full cost vector (after the same reachable-band
    restriction the online update applies) and evaluates
    c^v(left) = c(T^{v.left}(x)), c^v(right) = c(T^{v.right}(x)) for every
    internal node, reading the tree as it currently stands. Returns the costs
    of all nodes and the sorted ids of non-sentinel nodes whose two costs
    differ. O(K log K); meant for small test trees.
    """
    if tree.K > 2 ** 8:
        raise ValueError(f"oracle is limited to K <= 256, got K={tree.K}")
    c, _ = clamp_to_reachable(tree, c)
    vector = c.to_vector(tree.K)
    costs = {}
    for node_id in range(tree.K - 1):
        left = vector[tree.subtree_action(child_of(node_id, Branch.LEFT), x).index]
        right = vector[tree.subtree_action(child_of(node_id, Branch.RIGHT), x).index]
        costs[node_id] = (float(left), float(right))
    update_set = sorted(
        node_id
        for node_id, (left, right) in costs.items()
        if left != right and not tree.is_sentinel(node_id)
    )
    return costs, update_set
