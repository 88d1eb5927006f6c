"""
Shared fixtures for the CATS bandit test suite.
"""

import numpy as np
import pytest

from cats_bandit.learner.base_learner import BaseLearner, BaseLearnerConfig, Branch


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow sweeps")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte-Carlo and timing sweeps (run with --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def learner_config():
    return BaseLearnerConfig(feature_dim=2)


def force_branch(learner: BaseLearner, branch: Branch) -> None:
    """Set a learner's weights so it predicts ``branch`` for every context."""
    learner.left.weights[:] = 0.0
    learner.right.weights[:] = 0.0
    if branch == Branch.RIGHT:
        learner.left.weights[-1] = 1.0
    else:
        learner.right.weights[-1] = 1.0


def randomize_tree(tree, rng, scale=1.0):
    """Random weights on every trainable node."""
    for _, learner in tree.learners():
        learner.left.weights[:] = rng.normal(scale=scale, size=learner.left.weights.shape)
        learner.right.weights[:] = rng.normal(scale=scale, size=learner.right.weights.shape)
