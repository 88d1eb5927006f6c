#!/usr/bin/env python3
"""
CATS bandit tool - command line entry point

Subcommands:
  train-online   run the smoothed epsilon-greedy engine over a dataset
  train-offline  select (h, K) and train a tree from a logged interaction stream
  evaluate       deploy a saved model on a test split
  bench          per-example timing of cats, dtree and dlinear
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from cats_bandit.config import load_settings, merge_settings, setup_logging
from cats_bandit.engine.cats_engine import CatsEngine, EngineConfig
from cats_bandit.engine.interaction_log import read_log, write_log
from cats_bandit.harness.benchmark import ALGORITHMS, bench_timing
from cats_bandit.harness.datasets import BanditSimulation, ingest_csv, synth_ds
from cats_bandit.harness.online_runner import evaluate_test, run_online
from cats_bandit.learner.base_learner import BaseLearnerConfig
from cats_bandit.offpolicy.cats_off import SrmConfig, cats_off, default_grid
from cats_bandit.tree.model_file import load_model, save_model

logger = logging.getLogger("Main")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cats_bandit", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--settings", type=Path, default=None, help="settings JSON file")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_args(p):
        p.add_argument("--data", type=Path, help="numeric CSV file with a header row")
        p.add_argument("--target", default="target", help="target column of --data")
        p.add_argument("--synth", action="store_true", help="use the synthetic linear dataset")
        p.add_argument("--split-seed", type=int, default=None)
        p.add_argument("--data-seed", type=int, default=None, help="seed of the synthetic dataset")

    online = sub.add_parser("train-online", help="run the online engine")
    add_data_args(online)
    online.add_argument("--epsilon", type=float)
    online.add_argument("--bandwidth", type=float)
    online.add_argument("--depth", type=int)
    online.add_argument("--seed", type=int)
    online.add_argument("--model-out", type=Path)
    online.add_argument("--log-out", type=Path)

    offline = sub.add_parser("train-offline", help="model selection over a logged stream")
    offline.add_argument("--log", type=Path, required=True)
    offline.add_argument("--grid", default="default", help='"default" or a JSON file of [h, K] pairs')
    offline.add_argument("--pmin", type=float)
    offline.add_argument("--penalty-scale", type=float)
    offline.add_argument("--n-jobs", type=int)
    offline.add_argument("--model-out", type=Path)
    offline.add_argument("--report-out", type=Path)

    evaluate = sub.add_parser("evaluate", help="evaluate a saved model on the test split")
    add_data_args(evaluate)
    evaluate.add_argument("--model", type=Path, required=True)
    evaluate.add_argument("--seed", type=int, default=0)

    bench = sub.add_parser("bench", help="per-example timing")
    bench.add_argument("--depths", default="4,6,8,10,13", help="comma separated tree depths")
    bench.add_argument("--algos", default=",".join(ALGORITHMS))
    bench.add_argument("--reps", type=int)
    bench.add_argument("--stream-length", type=int)
    bench.add_argument("--out", type=Path)
    return parser


def apply_overrides(settings, args):
    """CLI flags win over the settings file."""
    overrides = {
        "engine": {"epsilon": getattr(args, "epsilon", None), "bandwidth": getattr(args, "bandwidth", None),
                   "depth": getattr(args, "depth", None), "seed": getattr(args, "seed", None)},
        "offline": {"p_min": getattr(args, "pmin", None), "penalty_scale": getattr(args, "penalty_scale", None),
                    "n_jobs": getattr(args, "n_jobs", None)},
        "harness": {"split_seed": getattr(args, "split_seed", None), "synth_seed": getattr(args, "data_seed", None),
                    "bench_reps": getattr(args, "reps", None),
                    "bench_stream_length": getattr(args, "stream_length", None)},
    }
    overrides = {section: {k: v for k, v in values.items() if v is not None}
                 for section, values in overrides.items()}
    if getattr(args, "command", None) == "evaluate":
        overrides["engine"].pop("seed", None)
    return merge_settings(settings, overrides)


def load_simulation(args, settings) -> BanditSimulation:
    if args.data is not None:
        dataset = ingest_csv(args.data, args.target)
    elif args.synth:
        harness = settings["harness"]
        dataset = synth_ds(int(harness["synth_n"]), int(harness["synth_dim"]), float(harness["noise_sd"]),
                           int(harness["synth_seed"]))
    else:
        raise ValueError("give --data or --synth")
    return BanditSimulation.from_settings(dataset, settings)


def output_path(settings, given, name) -> Path:
    return given if given is not None else Path(settings["output_directory"]) / name


def cmd_train_online(args, settings):
    sim = load_simulation(args, settings)
    engine = CatsEngine(EngineConfig.from_settings(settings, sim.feature_dim))
    metrics = run_online(sim, engine)
    model_path = save_model(engine.tree, output_path(settings, args.model_out, "online_model.cats"))
    log_path = write_log(engine.export_log(), output_path(settings, args.log_out, "interactions.log"))
    return {**metrics.to_dict(), "model_path": str(model_path), "log_path": str(log_path)}


def load_grid(source):
    if source == "default":
        return None
    with open(source, "r") as f:
        return [(float(h), int(K)) for h, K in json.load(f)]


def cmd_train_offline(args, settings):
    log = read_log(args.log)
    if not log:
        raise ValueError(f"no usable records in {args.log}")
    offline = settings["offline"]
    grid = load_grid(args.grid) or default_grid(int(offline["max_depth"]), float(offline["min_bandwidth"]))
    learner_config = BaseLearnerConfig.from_settings(settings, log[0].x.shape[0])
    result = cats_off(log, grid, SrmConfig.from_settings(settings), learner_config, n_jobs=int(offline["n_jobs"]))
    model_path = save_model(result.tree, output_path(settings, args.model_out, "offline_model.cats"))
    report_path = result.write_report(output_path(settings, args.report_out, "offline_report.json"), model_path)
    return {"h_hat": result.h_hat, "K_hat": result.K_hat, "model_path": str(model_path),
            "report_path": str(report_path)}


def cmd_evaluate(args, settings):
    tree = load_model(args.model)
    sim = load_simulation(args, settings)
    return {"model": str(args.model), **evaluate_test(tree, sim, seed=args.seed).to_dict()}


def cmd_bench(args, settings):
    harness = settings["harness"]
    table = bench_timing(
        depths=[int(d) for d in args.depths.split(",")],
        algos=[a.strip() for a in args.algos.split(",")],
        reps=int(harness["bench_reps"]),
        stream_length=int(harness["bench_stream_length"]),
        seed=int(settings["engine"]["seed"]),
    )
    if args.out is not None:
        table.write(args.out)
    return table.to_frame().to_dict(orient="records")


COMMANDS = {
    "train-online": cmd_train_online,
    "train-offline": cmd_train_offline,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
}


def main(argv=None):
    """Main application entry point"""
    args = build_parser().parse_args(argv)

    # Setup logging
    setup_logging(logging.DEBUG if args.verbose else logging.INFO)

    settings = apply_overrides(load_settings(args.settings), args)
    try:
        result = COMMANDS[args.command](args, settings)
    except (ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1
    print(json.dumps(result, indent=4))
    return 0


if __name__ == "__main__":
    sys.exit(main())
