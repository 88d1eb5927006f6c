import numpy as np
import pytest

from cats_bandit.learner.base_learner import BaseLearnerConfig, Branch
from cats_bandit.tree.model_file import (
    VERSION_OFFSET,
    ModelChecksumError,
    ModelFormatError,
    ModelTruncatedError,
    ModelVersionError,
    deserialize,
    load_model,
    save_model,
    serialize,
)
from cats_bandit.tree.tree_policy import build_tree, child_of, is_admissible, level_of, sharp_exponent

from conftest import force_branch, randomize_tree


def test_zero_bandwidth_tree_labels(learner_config):
    tree = build_tree(2, 0.0, learner_config)
    assert [tree.label(v) for v in (3, 4, 5, 6)] == [0.0, 0.25, 0.5, 0.75]
    assert tree.only_right_id is None and tree.only_left_id is None
    assert tree.reachable_range() == (0, 3)


def test_sentinel_ids(learner_config):
    tree = build_tree(3, 0.25, learner_config)
    assert tree.m_sharp == 1
    assert tree.only_right_id == 1
    assert tree.only_left_id == 2
    assert tree.reachable_range() == (2, 5)
    assert {node_id for node_id, _ in tree.learners()} == {0, 3, 4, 5, 6}


@pytest.mark.parametrize("depth,h", [(2, 0.5), (1, 0.5), (3, 0.3), (3, 1 / 16), (0, 0.0)])
def test_inadmissible_configurations(learner_config, depth, h):
    assert not is_admissible(depth, h)
    with pytest.raises(ValueError):
        build_tree(depth, h, learner_config)


def test_largest_admissible_bandwidth():
    assert sharp_exponent(4, 0.25) == 2
    assert sharp_exponent(2, 0.25) == 0
    assert sharp_exponent(5, 0.0) is None


def test_single_node_routing_right():
    tree = build_tree(1, 0.0, BaseLearnerConfig(feature_dim=1))
    force_branch(tree.routers[0], Branch.RIGHT)
    assert tree.get_action(np.array([0.7])).value == 0.5


def test_sentinel_forces_reachable_action(learner_config):
    tree = build_tree(3, 0.25, learner_config)
    action = tree.get_action(np.array([0.2, -0.4]))
    assert action.index == 2 and action.value == 0.25


def test_subtree_action(learner_config):
    tree = build_tree(2, 0.0, learner_config)
    x = np.array([1.0, 2.0])
    assert tree.subtree_action(5, x).value == 0.5
    assert tree.subtree_action(1, x).value == 0.0
    assert tree.subtree_action(0, x) == tree.get_action(x)
    with pytest.raises(ValueError):
        tree.subtree_action(7, x)


def test_reachability_under_random_states(rng):
    config = BaseLearnerConfig(feature_dim=3)
    for depth, h in [(4, 1 / 16), (5, 1 / 8), (6, 1 / 16)]:
        tree = build_tree(depth, h, config)
        lo, hi = tree.reachable_range()
        for _ in range(50):
            randomize_tree(tree, rng)
            for _ in range(40):
                index = tree.get_action_index(rng.normal(size=3))
                assert lo <= index <= hi
                assert 2 ** tree.m_sharp <= index < tree.K - 2 ** tree.m_sharp


def test_left_subtree_covers_lower_half(learner_config):
    for depth in range(1, 7):
        tree = build_tree(depth, 0.0, learner_config)
        K = tree.K

        def leaf_range(start):
            v = start
            while not tree.is_leaf(v):
                v = child_of(v, Branch.LEFT)
            lo = tree.leaf_index(v)
            return lo, lo + 2 ** (depth - level_of(start)) - 1

        for node in range(K - 1):
            lo, hi = leaf_range(node)
            left_lo, left_hi = leaf_range(child_of(node, Branch.LEFT))
            assert (left_lo, left_hi) == (lo, (lo + hi) // 2)
            span = 2 ** (depth - level_of(node))
            index_in_level = node - (2 ** level_of(node) - 1)
            assert lo == index_in_level * span


def test_routing_visits_depth_nodes(learner_config, rng):
    tree = build_tree(5, 1 / 8, learner_config)
    randomize_tree(tree, rng)
    calls = []
    for router in tree.routers:
        original = router.predict
        router.predict = lambda x, original=original: calls.append(1) or original(x)
    tree.get_action(rng.normal(size=2))
    assert len(calls) == 5


def test_serialize_roundtrip(rng):
    config = BaseLearnerConfig(feature_dim=3, update_rule="fixed", learning_rate=0.05, seed=7)
    tree = build_tree(4, 0.25, config)
    randomize_tree(tree, rng)
    tree.routers[0].update_count = 11
    restored = deserialize(serialize(tree))
    assert (restored.depth, restored.h, restored.m_sharp) == (4, 0.25, 2)
    assert restored.learner_config == config
    for (node_id, a), (_, b) in zip(tree.learners(), restored.learners()):
        np.testing.assert_array_equal(a.weights_left, b.weights_left)
        np.testing.assert_array_equal(a.weights_right, b.weights_right)
        assert a.update_count == b.update_count
    x = rng.normal(size=3)
    assert restored.get_action(x) == tree.get_action(x)


def test_fresh_tree_roundtrip_bytes(learner_config):
    data = serialize(build_tree(4, 0.0, learner_config))
    assert serialize(deserialize(data)) == data


def test_save_and_load(tmp_path, learner_config):
    tree = build_tree(3, 0.25, learner_config)
    path = save_model(tree, tmp_path / "models" / "tree.cats")
    assert serialize(load_model(path)) == serialize(tree)


def test_deserialize_errors(learner_config):
    data = serialize(build_tree(3, 0.0, learner_config))
    with pytest.raises(ModelTruncatedError):
        deserialize(b"")
    with pytest.raises(ModelTruncatedError):
        deserialize(data[:-5])

    bumped = bytearray(data)
    bumped[VERSION_OFFSET] += 1
    with pytest.raises(ModelVersionError):
        deserialize(bytes(bumped))

    corrupted = bytearray(data)
    corrupted[-10] ^= 0xFF
    with pytest.raises(ModelChecksumError):
        deserialize(bytes(corrupted))

    with pytest.raises(ModelFormatError):
        deserialize(b"XXXX" + data[4:])
    with pytest.raises(ModelFormatError):
        deserialize(data + b"\x00")
