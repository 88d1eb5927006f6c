#!/usr/bin/env python3
"""
Batch tree training from cost-sensitive examples.

Two paths:
  * ``train_tree_partitioned`` trains level d only on its own block of the
    data with an exact ERM over an enumerated classifier class, bottom-up.
  * ``train_tree_full`` streams every example through the online update at
    all levels, once per pass; replaying an engine's log this way rebuilds the
    engine's tree.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from cats_bandit.engine.cats_engine import InteractionRecord
from cats_bandit.learner.base_learner import BaseLearnerConfig, Branch
from cats_bandit.training.online_trainer import PiecewiseCost, make_ips_cost, online_train_tree
from cats_bandit.tree.tree_policy import TreePolicy, build_tree, child_of

logger = logging.getLogger(__name__)

CostExample = Tuple[np.ndarray, PiecewiseCost]


@dataclass(frozen=True)
class FiniteBaseClass:
    """Enumerated set of binary classifiers (context -> Branch) for exact ERM."""

    classifiers: Tuple[Callable[[np.ndarray], Branch], ...]

    def __post_init__(self) -> None:
        if len(self.classifiers) == 0:
            raise ValueError("the base class must contain at least one classifier")

    def __len__(self):
        return len(self.classifiers)

    def empirical_cost(self, index: int, examples: Sequence[Tuple[np.ndarray, float, float]]) -> float:
        f = self.classifiers[index]
        return sum(right if f(x) == Branch.RIGHT else left for x, left, right in examples)

    def erm(self, examples: Sequence[Tuple[np.ndarray, float, float]]) -> int:
        """Index of the classifier with the least total cost; ties and empty data pick the first."""
        best_index, best_cost = 0, None
        for index in range(len(self.classifiers)):
            total = self.empirical_cost(index, examples)
            if best_cost is None or total < best_cost:
                best_index, best_cost = index, total
        return best_index


class FixedClassifier:
    """Router backed by one member of a finite base class."""

    read_only = False

    def __init__(self, base_class: FiniteBaseClass, index: int):
        self.base_class = base_class
        self.index = index

    def predict(self, x):
        return Branch(self.base_class.classifiers[self.index](x))

    def __repr__(self):
        return f"FixedClassifier({self.index})"


def tree_depth(K: int) -> int:
    if K < 2 or K & (K - 1):
        raise ValueError(f"K must be a power of two >= 2, got {K}")
    return K.bit_length() - 1


def partition_blocks(n: int, depth: int) -> List[range]:
    """
    Example blocks per level: level d gets indices [(D - d - 1) n', (D - d) n')
    with n' = n // D, so the deepest level trains on the first block and the
    root on the last. Examples past D n' are unused.
    """
    if n < depth:
        raise ValueError(f"need at least one example per level: n={n} < D={depth}")
    block = n // depth
    return [range((depth - d - 1) * block, (depth - d) * block) for d in range(depth)]


def binary_costs(tree: TreePolicy, node_id: int, x: np.ndarray, cost_vector: np.ndarray) -> Tuple[float, float]:
    left = cost_vector[tree.subtree_action(child_of(node_id, Branch.LEFT), x).index]
    right = cost_vector[tree.subtree_action(child_of(node_id, Branch.RIGHT), x).index]
    return float(left), float(right)


def train_tree_partitioned(
    K: int,
    h: float,
    examples: Sequence[CostExample],
    base_class: FiniteBaseClass,
) -> TreePolicy:
    """
    Level-partitioned training with exact ERM at every node.

    Nodes are trained bottom-up; a node only sees examples of its level's
    block whose two binary costs differ. Sentinel nodes keep their constant
    routing; a node with no such examples keeps the class's first classifier.
    """
    depth = tree_depth(K)
    blocks = partition_blocks(len(examples), depth)
    tree = build_tree(depth, h, None, router_factory=lambda node_id: FixedClassifier(base_class, 0))
    vectors = [c.to_vector(K) for _, c in examples]

    for level in range(depth - 1, -1, -1):
        block = blocks[level]
        for node_id in range(2 ** level - 1, 2 ** (level + 1) - 1):
            if tree.is_sentinel(node_id):
                continue
            filtered = []
            for s in block:
                x = examples[s][0]
                left, right = binary_costs(tree, node_id, x, vectors[s])
                if left != right:
                    filtered.append((x, left, right))
            tree.routers[node_id] = FixedClassifier(base_class, base_class.erm(filtered))
        logger.debug(f"Trained level {level} on examples {block.start}..{block.stop - 1}")
    return tree


def ips_examples(log: Sequence[InteractionRecord], tree: TreePolicy) -> List[CostExample]:
    """IPS cost-sensitive examples of a log on the grid and bandwidth of ``tree``."""
    return [(r.x, make_ips_cost(tree, r.a, r.p, r.loss)) for r in log]


def train_tree_full(
    K: int,
    h: float,
    examples: Sequence[CostExample],
    learner_config: BaseLearnerConfig,
    passes: int = 1,
) -> TreePolicy:
    """Train every level on every example with the online update, ``passes`` times."""
    if passes < 0:
        raise ValueError(f"passes must be >= 0, got {passes}")
    tree = build_tree(tree_depth(K), h, learner_config)
    for pass_number in range(passes):
        updates = 0
        for x, cost in examples:
            updates += online_train_tree(tree, x, cost).update_count
        logger.info(f"Pass {pass_number + 1}/{passes}: {len(examples)} examples, {updates} node updates")
    return tree
