#!/usr/bin/env python3
"""
Tree module for the CATS bandit tool.

A tree policy is a complete binary tree of depth D over the action grid
{0, 1/K, ..., (K-1)/K}, K = 2^D. Nodes live in a flat array in heap order:
the root is 0 and node v has children 2v + 1 and 2v + 2, so the leaf of
action index i is node K - 1 + i. Every internal node holds a router that
sends a context left or right.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from cats_bandit.learner.base_learner import BaseLearner, BaseLearnerConfig, Branch
from cats_bandit.smoothing.smoothing_kernel import SmoothingKernel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiscretizedAction:
    """Grid action index/K; the index is canonical."""

    index: int
    K: int

    @property
    def value(self) -> float:
        return self.index / self.K


class ConstantRouter:
    """Read-only router that always takes the same branch (sentinel nodes)."""

    read_only = True

    def __init__(self, branch):
        self.branch = Branch(branch)

    def predict(self, x):
        return self.branch

    def __repr__(self):
        return f"ConstantRouter({self.branch.name})"


def level_of(node_id: int) -> int:
    """Depth of a node id in heap order (root is level 0)."""
    return (node_id + 1).bit_length() - 1


def parent_of(node_id: int) -> int:
    return (node_id - 1) // 2


def sibling_of(node_id: int) -> int:
    return node_id + 1 if node_id % 2 == 1 else node_id - 1


def child_of(node_id: int, branch: Branch) -> int:
    return 2 * node_id + 1 + int(branch)


def sharp_exponent(depth: int, h: float) -> Optional[int]:
    """
    Return m = log2(K h) for an admissible (depth, h), or None when h = 0.

    Returns:
        int or None: the exponent m

    Raises:
        ValueError: if K h is not a power of two >= 1, or if m > depth - 2
            (the sentinel nodes would leave fewer than two reachable leaves)
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    SmoothingKernel(h)
    if h == 0:
        return None
    K = 2 ** depth
    scaled = K * h
    if scaled < 1 or not float(scaled).is_integer() or int(scaled) & (int(scaled) - 1):
        raise ValueError(f"K*h must be a power of two >= 1, got K={K}, h={h}")
    m_sharp = int(scaled).bit_length() - 1
    if m_sharp > depth - 2:
        raise ValueError(
            f"bandwidth h={h} leaves no reachable action at depth {depth} "
            f"(m={m_sharp}, need m <= {depth - 2})"
        )
    return m_sharp


def is_admissible(depth: int, h: float) -> bool:
    try:
        sharp_exponent(depth, h)
    except ValueError:
        return False
    return True


class TreePolicy:
    """Complete binary tree policy with sentinel nodes guarding the boundary leaves."""

    def __init__(self, depth, h, learner_config, routers, m_sharp):
        self.depth = depth
        self.K = 2 ** depth
        self.h = float(h)
        self.kernel = SmoothingKernel(self.h)
        self.m_sharp = m_sharp
        self.learner_config = learner_config
        self.routers = routers
        # Subtree cost of every node (leaves included) for the last processed example.
        self.node_costs = np.zeros(2 * self.K - 1)

        if m_sharp is None:
            self.only_right_id = None
            self.only_left_id = None
        else:
            self.only_right_id = 2 ** (depth - m_sharp - 1) - 1
            self.only_left_id = 2 ** (depth - m_sharp) - 2

    def is_leaf(self, node_id: int) -> bool:
        return node_id >= self.K - 1

    def is_sentinel(self, node_id: int) -> bool:
        return node_id == self.only_right_id or node_id == self.only_left_id

    def leaf_id(self, index: int) -> int:
        return self.K - 1 + index

    def leaf_index(self, node_id: int) -> int:
        return node_id - (self.K - 1)

    def label(self, node_id: int) -> float:
        """Action label of a leaf: (id - (2^D - 1)) / K."""
        return self.leaf_index(node_id) / self.K

    def reachable_range(self) -> Tuple[int, int]:
        """Inclusive range of leaf indices routing can return."""
        if self.m_sharp is None:
            return 0, self.K - 1
        edge = 2 ** self.m_sharp
        return edge, self.K - edge - 1

    def route(self, node_id: int, x) -> int:
        """Descend from ``node_id`` to a leaf and return the leaf id."""
        K1 = self.K - 1
        routers = self.routers
        while node_id < K1:
            node_id = 2 * node_id + 1 + routers[node_id].predict(x)
        return node_id

    def get_action_index(self, x) -> int:
        return self.route(0, x) - (self.K - 1)

    def get_action(self, x) -> DiscretizedAction:
        """Route ``x`` from the root; exactly D router calls."""
        return DiscretizedAction(self.get_action_index(x), self.K)

    def subtree_action(self, node_id: int, x) -> DiscretizedAction:
        """Action chosen by the subtree rooted at ``node_id`` (a leaf returns its label)."""
        if not 0 <= node_id < 2 * self.K - 1:
            raise ValueError(f"node id {node_id} outside tree with K={self.K}")
        return DiscretizedAction(self.leaf_index(self.route(node_id, x)), self.K)

    def smoothed_action(self, x, rng: np.random.Generator) -> float:
        """Deploy the smoothed policy: sample around the greedy action for ``x``."""
        return self.kernel.sample(self.get_action(x).value, rng)

    def learners(self):
        """(node id, learner) pairs for every trainable internal node."""
        return [
            (node_id, router)
            for node_id, router in enumerate(self.routers)
            if not getattr(router, "read_only", False)
        ]

    def __repr__(self):
        return f"TreePolicy(D={self.depth}, K={self.K}, h={self.h}, m={self.m_sharp})"


def build_tree(
    depth: int,
    h: float,
    learner_config: Optional[BaseLearnerConfig],
    router_factory: Optional[Callable[[int], object]] = None,
) -> TreePolicy:
    """
    Build an untrained tree policy.

    Args:
        depth: tree depth D >= 1, K = 2^D leaves
        h: bandwidth; 0 or K*h a power of two with log2(K h) <= D - 2
        learner_config: configuration of the node learners
        router_factory: optional callable node_id -> router replacing the
            default ``BaseLearner`` (used by exact-ERM training)

    Returns:
        TreePolicy: leaves labelled 0/K .. (K-1)/K, sentinels installed when h > 0
    """
    m_sharp = sharp_exponent(depth, h)
    K = 2 ** depth
    if router_factory is None:
        if learner_config is None:
            raise ValueError("learner_config is required when no router_factory is given")
        router_factory = lambda node_id: BaseLearner.reset(learner_config)  # noqa: E731

    routers: List[object] = [router_factory(node_id) for node_id in range(K - 1)]
    tree = TreePolicy(depth, h, learner_config, routers, m_sharp)
    if m_sharp is not None:
        routers[tree.only_right_id] = ConstantRouter(Branch.RIGHT)
        routers[tree.only_left_id] = ConstantRouter(Branch.LEFT)
        logger.debug(
            f"Built tree D={depth} h={h}: sentinels only_right={tree.only_right_id}, "
            f"only_left={tree.only_left_id}, reachable={tree.reachable_range()}"
        )
    return tree
