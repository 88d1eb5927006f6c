#!/usr/bin/env python3
"""
Datasets module for the CATS bandit tool.
Loads regression data, generates synthetic streams and turns them into
bandit simulations with loss |a - y|.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
from sklearn.model_selection import train_test_split
from sklearn.utils import check_scalar

logger = logging.getLogger(__name__)

SCALING_KINDS = ("minmax", "fixed")


@dataclass(frozen=True)
class RegressionExample:
    x: np.ndarray
    y: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.y <= 1.0:
            raise ValueError(f"target must be scaled to [0, 1], got {self.y}")


@dataclass(frozen=True)
class TargetScaling:
    """Affine map from raw targets to [0, 1] and back."""

    kind: str
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.kind not in SCALING_KINDS:
            raise ValueError(f"scaling must be one of {SCALING_KINDS}, got {self.kind!r}")
        if self.hi < self.lo:
            raise ValueError(f"scaling range is empty: ({self.lo}, {self.hi})")

    @classmethod
    def minmax(cls, y: np.ndarray) -> "TargetScaling":
        return cls("minmax", float(np.min(y)), float(np.max(y)))

    @classmethod
    def fixed(cls, lo: float, hi: float) -> "TargetScaling":
        return cls("fixed", float(lo), float(hi))

    @property
    def span(self) -> float:
        return self.hi - self.lo

    def apply(self, y: np.ndarray) -> np.ndarray:
        """Scale raw targets; a zero range maps everything to 0.5, fixed ranges clip."""
        y = np.asarray(y, dtype=np.float64)
        if self.span == 0:
            return np.full_like(y, 0.5)
        return np.clip((y - self.lo) / self.span, 0.0, 1.0)

    def inverse(self, a):
        """Map actions in [0, 1] back to target units."""
        return self.lo + np.asarray(a, dtype=np.float64) * self.span


@dataclass
class RegressionDataset:
    """Scaled regression examples plus the scaling used to produce them."""

    examples: List[RegressionExample]
    scaling: TargetScaling
    skipped_rows: int = 0

    def __len__(self):
        return len(self.examples)

    def __getitem__(self, index):
        return self.examples[index]

    def __iter__(self) -> Iterator[RegressionExample]:
        return iter(self.examples)

    @property
    def feature_dim(self) -> int:
        return self.examples[0].x.shape[0] if self.examples else 0

    @classmethod
    def from_arrays(cls, X: np.ndarray, y_raw: np.ndarray, scaling: TargetScaling, skipped_rows=0):
        y = scaling.apply(y_raw)
        X = np.asarray(X, dtype=np.float64)
        return cls([RegressionExample(X[i], float(y[i])) for i in range(X.shape[0])], scaling, skipped_rows)


def ingest_csv(
    path,
    target_column: str,
    scaling: str = "minmax",
    fixed_range: Optional[Tuple[float, float]] = None,
) -> RegressionDataset:
    """
    Load a numeric CSV as a regression dataset.

    Args:
        path: CSV file with a header row
        target_column: name of the target column; every other column is a feature
        scaling: "minmax" over the usable rows or "fixed" with ``fixed_range``
        fixed_range: (min, max) in target units for fixed scaling

    Returns:
        RegressionDataset: rows with a missing target or a non-numeric value are skipped and counted
    """
    path = Path(path)
    frame = pd.read_csv(path)
    if target_column not in frame.columns:
        raise ValueError(f"target column {target_column!r} not found in {path}")

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    usable = numeric.notna().all(axis=1)
    skipped = int((~usable).sum())
    if skipped:
        logger.warning(f"Skipped {skipped} rows with missing or non-numeric values in {path}")
    numeric = numeric[usable]
    if numeric.empty:
        raise ValueError(f"no usable rows in {path}")

    y_raw = numeric[target_column].to_numpy(dtype=np.float64)
    X = numeric.drop(columns=[target_column]).to_numpy(dtype=np.float64)
    if scaling == "minmax":
        target_scaling = TargetScaling.minmax(y_raw)
    elif scaling == "fixed":
        if fixed_range is None:
            raise ValueError("fixed scaling needs fixed_range=(min, max)")
        target_scaling = TargetScaling.fixed(*fixed_range)
    else:
        raise ValueError(f"scaling must be one of {SCALING_KINDS}, got {scaling!r}")

    logger.info(f"Loaded {len(y_raw)} examples with {X.shape[1]} features from {path}")
    return RegressionDataset.from_arrays(X, y_raw, target_scaling, skipped)


def synth_ds(n: int, dim: int, noise_sd: float, seed: int) -> RegressionDataset:
    """
    Linear regression of standard gaussian features with additive noise.

    The weight vector, the features and the noise all come from one generator
    seeded with ``seed``; targets are min-max scaled over the batch.
    """
    check_scalar(n, name="n", target_type=int, min_val=1)
    check_scalar(dim, name="dim", target_type=int, min_val=1)
    check_scalar(noise_sd, name="noise_sd", target_type=(int, float), min_val=0.0)

    rng = np.random.default_rng(seed)
    w = rng.standard_normal(dim)
    X = rng.standard_normal((n, dim))
    noise = rng.standard_normal(n)
    y_raw = X @ w + noise_sd * noise
    return RegressionDataset.from_arrays(X, y_raw, TargetScaling.minmax(y_raw))


def absolute_loss(a: float, y: float) -> float:
    return abs(a - y)


@dataclass
class BanditSimulation:
    """Regression data replayed as bandit feedback: only |a - y| of the played action is revealed."""

    dataset: RegressionDataset
    train: List[RegressionExample]
    test: List[RegressionExample]
    train_fraction: float = 0.8
    seed: int = 0
    loss = staticmethod(absolute_loss)

    @classmethod
    def split(cls, dataset: RegressionDataset, train_fraction: float = 0.8, seed: int = 0) -> "BanditSimulation":
        """Deterministic shuffled train/test split under ``seed``."""
        check_scalar(train_fraction, name="train_fraction", target_type=float, min_val=0.0, max_val=1.0,
                     include_boundaries="neither")
        if len(dataset) < 2:
            raise ValueError(f"need at least two examples to split, got {len(dataset)}")
        train_idx, test_idx = train_test_split(
            np.arange(len(dataset)), train_size=train_fraction, random_state=seed
        )
        return cls(
            dataset=dataset,
            train=[dataset[i] for i in train_idx],
            test=[dataset[i] for i in test_idx],
            train_fraction=train_fraction,
            seed=seed,
        )

    @classmethod
    def from_settings(cls, dataset: RegressionDataset, settings) -> "BanditSimulation":
        harness = settings["harness"]
        return cls.split(dataset, float(harness["train_fraction"]), int(harness["split_seed"]))

    @property
    def feature_dim(self) -> int:
        return self.dataset.feature_dim
