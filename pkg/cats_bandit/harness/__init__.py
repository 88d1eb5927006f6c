"""
Harness module for the CATS bandit tool.
"""

from .baselines import BaselineConfig, ConstantBaseline, DLinearBaseline, make_baseline
from .benchmark import BenchRow, BenchTable, bench_timing
from .datasets import (
    BanditSimulation,
    RegressionDataset,
    RegressionExample,
    TargetScaling,
    ingest_csv,
    synth_ds,
)
from .online_runner import (
    EvaluationResult,
    OnlineRunner,
    RunMetrics,
    clopper_pearson,
    evaluate_test,
    run_baseline_dlinear,
    run_online,
)

__all__ = [
    'BanditSimulation',
    'BaselineConfig',
    'BenchRow',
    'BenchTable',
    'ConstantBaseline',
    'DLinearBaseline',
    'EvaluationResult',
    'OnlineRunner',
    'RegressionDataset',
    'RegressionExample',
    'RunMetrics',
    'TargetScaling',
    'bench_timing',
    'clopper_pearson',
    'evaluate_test',
    'ingest_csv',
    'make_baseline',
    'run_baseline_dlinear',
    'run_online',
    'synth_ds',
]
