#!/usr/bin/env python3
"""
Config module for the CATS bandit tool.
"""

import copy
import json
import logging
from pathlib import Path

# Default application settings
DEFAULT_SETTINGS = {
    "output_directory": str(Path.home() / "cats_runs"),
    "engine": {
        "epsilon": 0.05,
        "bandwidth": 0.25,
        "depth": 2,       # K = 2 ** depth
        "seed": 0,
    },
    "learner": {
        "update_rule": "inverse_sqrt",  # "fixed" or "inverse_sqrt"
        "learning_rate": 0.1,
    },
    "offline": {
        "p_min": 0.05,
        "delta": 0.05,
        "penalty_scale": None,  # None -> 64 ln(4T|J|/delta)
        "n_jobs": 1,
        "max_depth": 13,
        "min_bandwidth": 2.0 ** -13,
    },
    "harness": {
        "train_fraction": 0.8,
        "split_seed": 0,
        "synth_n": 100000,
        "synth_dim": 10,
        "synth_seed": 0,
        "noise_sd": 0.1,
        "bench_reps": 5,
        "bench_stream_length": 2000,
    },
}

CONFIG_PATH = Path.home() / ".config" / "cats_bandit"
SETTINGS_FILE = CONFIG_PATH / "settings.json"


def setup_logging(level=logging.INFO):
    """Configure logging for the application"""
    log_path = CONFIG_PATH / "logs"
    log_path.mkdir(parents=True, exist_ok=True)

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_path / "app.log"),
            logging.StreamHandler()
        ]
    )


def merge_settings(base, overrides):
    """
    Deep-merge ``overrides`` into a copy of ``base``.

    Nested dictionaries merge key by key; any other value replaces the base value.
    """
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if key in merged and isinstance(value, dict) and isinstance(merged[key], dict):
            merged[key] = merge_settings(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_settings(path=None):
    """Load settings from file or create default if doesn't exist"""
    settings_file = Path(path) if path else SETTINGS_FILE
    try:
        if settings_file.exists():
            with open(settings_file, 'r') as f:
                settings = json.load(f)
            return merge_settings(DEFAULT_SETTINGS, settings)
        else:
            save_settings(DEFAULT_SETTINGS, settings_file)
            return copy.deepcopy(DEFAULT_SETTINGS)
    except Exception as e:
        logging.error(f"Error loading settings: {e}")
        return copy.deepcopy(DEFAULT_SETTINGS)


def save_settings(settings, path=None):
    """Save settings to file"""
    settings_file = Path(path) if path else SETTINGS_FILE
    try:
        settings_file.parent.mkdir(parents=True, exist_ok=True)
        with open(settings_file, 'w') as f:
            json.dump(settings, f, indent=4)
        return True
    except Exception as e:
        logging.error(f"Error saving settings: {e}")
        return False
