import json
import math

import numpy as np
import pytest

from cats_bandit.config import DEFAULT_SETTINGS
from cats_bandit.engine.cats_engine import CatsEngine, EngineConfig, InteractionRecord
from cats_bandit.learner.base_learner import BaseLearnerConfig, Branch
from cats_bandit.offpolicy.cats_off import (
    LogDensityError,
    SrmConfig,
    admissible_bandwidth,
    cats_off,
    default_grid,
    draw_averaged_policy,
    ips_estimate,
    ips_value,
    penalty,
    resolve_grid,
)
from cats_bandit.offpolicy.tree_training import (
    FiniteBaseClass,
    binary_costs,
    partition_blocks,
    train_tree_full,
    train_tree_partitioned,
)
from cats_bandit.smoothing.smoothing_kernel import SmoothingKernel
from cats_bandit.training.online_trainer import PiecewiseCost, clamp_to_reachable, make_ips_cost, online_train_tree
from cats_bandit.tree.tree_policy import build_tree


def threshold_class(thresholds):
    return FiniteBaseClass(tuple(
        (lambda x, t=t: Branch.RIGHT if x[0] >= t else Branch.LEFT) for t in thresholds
    ))


def engine_log(rounds, epsilon=0.1, h=0.25, depth=3, seed=0, loss_scale=1.0):
    rng = np.random.default_rng(seed)
    engine = CatsEngine(EngineConfig(epsilon, h, depth, BaseLearnerConfig(feature_dim=2), seed))
    for _ in range(rounds):
        x = rng.normal(size=2)
        a, _ = engine.act(x)
        engine.observe(loss_scale * min(1.0, abs(a - 0.5 - 0.1 * x[0])))
    return engine.export_log()


def test_partition_block_examples():
    assert partition_blocks(10, 2) == [range(5, 10), range(0, 5)]
    assert partition_blocks(4, 1) == [range(0, 4)]
    with pytest.raises(ValueError):
        partition_blocks(2, 3)


def test_partition_blocks_are_disjoint_and_cover_prefix(rng):
    for _ in range(50):
        depth = int(rng.integers(1, 14))
        n = int(rng.integers(depth, 500))
        blocks = partition_blocks(n, depth)
        block = n // depth
        indices = [i for b in blocks for i in b]
        assert len(indices) == len(set(indices))
        assert sorted(indices) == list(range(depth * block))
        for level, b in enumerate(blocks):
            assert b == range((depth - level - 1) * block, (depth - level) * block)


def test_single_level_trains_on_whole_block():
    base_class = threshold_class([0.0, 0.5, 2.0])
    examples = [(np.array([v]), PiecewiseCost(1, 1, 1.0)) for v in (0.1, 0.2, 0.7, 0.9)]
    tree = train_tree_partitioned(2, 0.0, examples, base_class)
    # routing right lands on the costly index 1; the never-right classifier is the ERM
    assert tree.routers[0].index == 2


def test_empty_filtered_node_keeps_first_classifier():
    base_class = threshold_class([0.3, 0.6])
    examples = [(np.array([v]), PiecewiseCost(0, 7, 0.5)) for v in np.linspace(0, 1, 30)]
    tree = train_tree_partitioned(8, 0.0, examples, base_class)
    assert all(router.index == 0 for router in tree.routers)


def test_partitioned_training_is_exact_erm(rng):
    for _ in range(50):
        depth = int(rng.integers(1, 4))
        K = 2 ** depth
        h = 0.0 if depth < 3 or rng.random() < 0.5 else 1 / 8
        base_class = threshold_class(sorted(rng.uniform(-1.5, 1.5, size=int(rng.integers(1, 33)))))
        n = int(rng.integers(depth, 201))
        examples = []
        for _ in range(n):
            lo, hi = sorted(int(i) for i in rng.integers(0, K, size=2))
            examples.append((rng.normal(size=1), PiecewiseCost(lo, hi, float(rng.uniform(0, 3)))))

        tree = train_tree_partitioned(K, h, examples, base_class)
        blocks = partition_blocks(n, depth)
        for node_id in range(K - 1):
            if tree.is_sentinel(node_id):
                continue
            level = int(math.log2(node_id + 1))
            filtered = []
            for s in blocks[level]:
                x, cost = examples[s]
                left, right = binary_costs(tree, node_id, x, cost.to_vector(K))
                if left != right:
                    filtered.append((x, left, right))
            costs = [base_class.empirical_cost(i, filtered) for i in range(len(base_class))]
            assert costs[tree.routers[node_id].index] == min(costs)


def test_partitioned_training_recovers_threshold_policy():
    rng = np.random.default_rng(3)
    K, h = 8, 1 / 8
    tree = build_tree(3, h, BaseLearnerConfig(feature_dim=1))
    examples = []
    for _ in range(10000):
        x = rng.uniform(size=1)
        y = 0.3 if x[0] < 0.5 else 0.7
        a = float(rng.uniform())
        examples.append((x, make_ips_cost(tree, a, 1.0, abs(a - y))))
    trained = train_tree_partitioned(K, h, examples, threshold_class(np.linspace(0, 1, 11)))

    kernel = SmoothingKernel(h)
    lo, hi = trained.reachable_range()

    def smoothed(center, y):
        return kernel.smoothed_loss(lambda u: abs(u - y), center, 512)

    best = np.mean([min(smoothed(i / K, y) for i in range(lo, hi + 1)) for y in (0.3, 0.7)])
    grid = np.linspace(0.0005, 0.9995, 1000)
    achieved = np.mean([
        smoothed(trained.get_action(np.array([x])).value, 0.3 if x < 0.5 else 0.7) for x in grid
    ])
    assert achieved - best <= 0.05


def test_train_tree_full_without_passes_is_untrained():
    examples = [(np.ones(2), PiecewiseCost(1, 2, 1.0))]
    tree = train_tree_full(8, 0.0, examples, BaseLearnerConfig(feature_dim=2), passes=0)
    assert all(learner.update_count == 0 for _, learner in tree.learners())


def test_default_grid_membership():
    grid = set(default_grid())
    assert (2.0 ** -3, 2 ** 4) in grid
    assert (2.0 ** -1, 2 ** 2) in grid
    assert (2.0 ** -13, 2 ** 2) not in grid
    assert all(1 <= h * K <= 2 ** 11 for h, K in grid)
    assert {K for _, K in grid} == {2 ** d for d in range(2, 14)}
    small = default_grid(max_depth=8, min_bandwidth=2.0 ** -8)
    assert max(K for _, K in small) == 256 and min(h for h, _ in small) == 2.0 ** -8


def test_admissible_bandwidth():
    assert admissible_bandwidth(16, 0.125) == (0.125, None)
    h, note = admissible_bandwidth(8, 0.5)
    assert h == 0.25 and "rounded" in note
    assert admissible_bandwidth(16, 3 / 16)[0] == 0.125
    with pytest.raises(ValueError):
        admissible_bandwidth(4, 1 / 16)


def test_penalty_formula():
    assert penalty(0.0, 0.37) == 0.37
    for g, sigma in [(0.2, 0.01), (1.5, 0.3), (0.04, 2.0)]:
        assert abs(penalty(g, sigma) - (math.sqrt(g * sigma) + sigma)) <= 1e-12
    assert penalty(0.2, 0.01) == pytest.approx(0.054721359549995794, abs=1e-12)


def test_srm_config():
    srm = SrmConfig(p_min=0.05)
    assert srm.resolve_scale(1000, 35) == pytest.approx(64 * math.log(4 * 1000 * 35 / 0.05))
    assert SrmConfig(p_min=0.05, penalty_scale=1.0).resolve_scale(1000, 35) == 1.0
    assert SrmConfig.from_settings(DEFAULT_SETTINGS).penalty_scale is None
    with pytest.raises(ValueError):
        SrmConfig(p_min=0.0)


def test_zero_loss_point_has_penalty_sigma():
    log = engine_log(200, loss_scale=0.0)
    srm = SrmConfig(p_min=0.1, penalty_scale=1.0)
    result = cats_off(log, [(0.25, 8), (0.125, 16)], srm, BaseLearnerConfig(feature_dim=2))
    for point in result.grid:
        assert point.g_hat == 0.0
        assert point.penalty == 1.0 / (200 * 0.1 * point.h)
    assert (result.h_hat, result.K_hat) == (0.25, 8)


def test_single_point_grid_is_selected():
    log = engine_log(100)
    result = cats_off(log, [(0.125, 16)], SrmConfig(p_min=0.1), BaseLearnerConfig(feature_dim=2))
    assert (result.h_hat, result.K_hat) == (0.125, 16)
    assert result.grid[0].selected and result.tree.K == 16


def test_cats_off_rejects_bad_inputs():
    log = engine_log(300)
    config = BaseLearnerConfig(feature_dim=2)
    with pytest.raises(ValueError):
        cats_off(log, [], SrmConfig(p_min=0.1), config)
    with pytest.raises(LogDensityError) as error:
        cats_off(log, [(0.25, 8)], SrmConfig(p_min=0.5), config)
    assert log[error.value.round_index].p < 0.5


def test_rounded_grid_points_carry_a_note():
    result = cats_off(engine_log(50), [(0.5, 8)], SrmConfig(p_min=0.1), BaseLearnerConfig(feature_dim=2))
    point = result.grid[0]
    assert point.h == 0.25 and point.requested_h == 0.5 and point.note


def test_rounded_repeats_are_replayed_once():
    log = engine_log(100)
    result = cats_off(log, [(0.5, 8), (0.25, 8), (0.125, 16)], SrmConfig(p_min=0.1), BaseLearnerConfig(feature_dim=2))
    assert [(p.h, p.K) for p in result.grid] == [(0.25, 8), (0.125, 16)]
    assert "rounded" in result.grid[0].note
    assert result.penalty_scale == pytest.approx(64 * math.log(4 * 100 * 2 / 0.05))


def test_default_grid_resolves_to_distinct_points():
    points = resolve_grid(default_grid())
    pairs = [(p.h, p.K) for p in points]
    assert len(pairs) == len(set(pairs)) == 78
    assert all(p.note for p in points if p.requested_h == 0.5)


def test_grid_points_independent_of_parallelism():
    log = engine_log(300)
    grid = [(0.25, 8), (0.125, 16), (1 / 16, 16), (0.25, 32)]
    config = BaseLearnerConfig(feature_dim=2)
    sequential = cats_off(log, grid, SrmConfig(p_min=0.1), config, n_jobs=1)
    parallel = cats_off(log, grid, SrmConfig(p_min=0.1), config, n_jobs=2)
    assert [p.g_hat for p in sequential.grid] == [p.g_hat for p in parallel.grid]
    assert [p.selected for p in sequential.grid] == [p.selected for p in parallel.grid]


def test_g_hat_scores_each_round_before_training_on_it():
    log = engine_log(200)
    config = BaseLearnerConfig(feature_dim=2)
    result = cats_off(log, [(0.125, 16)], SrmConfig(p_min=0.1), config)

    def replay(score_first):
        tree = build_tree(4, 0.125, config)
        total = 0.0
        for record in log:
            cost = make_ips_cost(tree, record.a, record.p, record.loss)
            if not score_first:
                online_train_tree(tree, record.x, cost)
            scored, _ = clamp_to_reachable(tree, cost)
            total += scored.cost_at(tree.get_action_index(record.x), 16)
            if score_first:
                online_train_tree(tree, record.x, cost)
        return total / len(log)

    assert result.grid[0].g_hat == replay(score_first=True)
    assert result.grid[0].g_hat != replay(score_first=False)


def test_report(tmp_path):
    result = cats_off(engine_log(100), [(0.25, 8), (0.125, 16)], SrmConfig(p_min=0.1, penalty_scale=1.0),
                      BaseLearnerConfig(feature_dim=2))
    path = result.write_report(tmp_path / "report.json", model_path=tmp_path / "model.cats")
    report = json.loads(path.read_text())
    assert [p["K"] for p in report["grid"]] == [8, 16]
    assert sum(p["selected"] for p in report["grid"]) == 1
    assert report["model_path"].endswith("model.cats")
    assert all(p["g_hat"] >= 0 and p["penalty"] >= 0 for p in report["grid"])


def test_averaged_policy_snapshots(rng):
    log = engine_log(100)
    config = BaseLearnerConfig(feature_dim=2)
    result = cats_off(log, [(0.25, 8)], SrmConfig(p_min=0.1), config, snapshot_every=10)
    assert len(result.selected.snapshots) == 10
    assert draw_averaged_policy(result, rng).K == 8
    bare = cats_off(log, [(0.25, 8)], SrmConfig(p_min=0.1), config)
    with pytest.raises(ValueError):
        draw_averaged_policy(bare, rng)


def test_ips_value_basics():
    log = engine_log(200)
    tree = build_tree(3, 0.25, BaseLearnerConfig(feature_dim=2))
    zero = [InteractionRecord(r.x, r.a, r.p, 0.0, r.round) for r in log]
    assert ips_value(zero, tree) == 0.0
    half = [InteractionRecord(r.x, r.a, r.p, 0.5 * r.loss, r.round) for r in log]
    assert ips_value(half, tree) == pytest.approx(0.5 * ips_value(log, tree), rel=1e-12)
    estimate = ips_estimate(log, tree)
    assert estimate.n == 200 and estimate.std_error > 0
    with pytest.raises(ValueError):
        ips_value([], tree)
