import numpy as np
import pytest

from cats_bandit.harness.benchmark import BenchTable, bench_timing, fixed_hk_policy
from cats_bandit.harness.datasets import synth_ds
from cats_bandit.learner.base_learner import BaseLearnerConfig
from cats_bandit.training.online_trainer import make_ips_cost, online_train_tree
from cats_bandit.tree.tree_policy import build_tree


def tree_update(benchmark, depth):
    tree = build_tree(depth, fixed_hk_policy()(2 ** depth), BaseLearnerConfig(feature_dim=10))
    rng = np.random.default_rng(0)
    x = rng.normal(size=10)
    cost = make_ips_cost(tree, 0.5, 0.8, 0.4)
    benchmark.pedantic(online_train_tree, args=(tree, x, cost), iterations=100, rounds=20)


@pytest.mark.benchmark(group="tree_update")
def test_tree_update_depth_4(benchmark):
    tree_update(benchmark, 4)


@pytest.mark.benchmark(group="tree_update")
def test_tree_update_depth_8(benchmark):
    tree_update(benchmark, 8)


@pytest.mark.benchmark(group="tree_update")
def test_tree_update_depth_13(benchmark):
    tree_update(benchmark, 13)


def test_fixed_hk_policy_rounds_small_trees():
    policy = fixed_hk_policy(4)
    assert policy(64) == 4 / 64
    # K = 4 only admits h K = 1
    assert policy(4) == 0.25


def test_bench_timing_panels():
    stream = synth_ds(60, 3, 0.1, seed=1).examples
    table = bench_timing([3, 4], reps=1, stream=stream)
    frame = table.to_frame()
    assert set(frame["panel"]) == {"time_vs_h", "cats_vs_K", "all_vs_K"}

    by_h = table.panel("time_vs_h", "cats")
    assert list(by_h["K"]) == [16, 16, 16]
    assert list(by_h["h"]) == [0.25, 0.125, 0.0625]

    all_vs_K = table.panel("all_vs_K")
    assert len(all_vs_K) == 6
    assert list(table.panel("all_vs_K", "dlinear")["mean_updates"]) == [8, 16]
    assert (table.panel("all_vs_K", "dtree")["h"] == 0.0).all()
    assert (frame["ns_per_example"] > 0).all()
    cats = table.panel("cats_vs_K")
    assert (cats["mean_updates"] <= 2 * np.log2(cats["K"])).all()


def test_bench_timing_rejects_bad_arguments():
    with pytest.raises(ValueError):
        bench_timing([3], reps=0, stream_length=10)
    with pytest.raises(ValueError):
        bench_timing([3], algos=["forest"], stream_length=10)


def test_bench_table_written_as_json(tmp_path):
    table = bench_timing([3], algos=["dtree"], reps=1, stream=synth_ds(20, 2, 0.1, seed=0).examples)
    path = table.write(tmp_path / "out" / "bench.json")
    assert BenchTable(table.rows).to_frame().shape[0] == 1
    assert path.read_text().lstrip().startswith("[")
