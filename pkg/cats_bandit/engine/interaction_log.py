#!/usr/bin/env python3
"""
Interaction log file format.

One record per line, tab separated: round, action, density, loss, then the
context as space separated ``index:value`` pairs. Reals are written with 17
significant digits so a written log reads back bit-exactly.
"""

import logging
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np

from cats_bandit.engine.cats_engine import InteractionRecord

logger = logging.getLogger("InteractionLog")


def format_record(record: InteractionRecord) -> str:
    features = " ".join(f"{i}:{v:.17g}" for i, v in enumerate(record.x))
    return f"{record.round}\t{record.a:.17g}\t{record.p:.17g}\t{record.loss:.17g}\t{features}"


def parse_features(text: str, feature_dim: Optional[int] = None) -> np.ndarray:
    """Parse ``index:value`` pairs into a dense vector; missing indices are zero."""
    pairs = []
    for token in text.split():
        index, value = token.split(":", 1)
        pairs.append((int(index), float(value)))
    size = feature_dim if feature_dim is not None else max((i for i, _ in pairs), default=-1) + 1
    x = np.zeros(size)
    for index, value in pairs:
        x[index] = value
    return x


def parse_record(line: str, feature_dim: Optional[int] = None) -> InteractionRecord:
    fields = line.rstrip("\n").split("\t")
    if len(fields) not in (4, 5):
        raise ValueError(f"expected 5 tab separated fields, got {len(fields)}")
    features = fields[4] if len(fields) == 5 else ""
    return InteractionRecord(
        x=parse_features(features, feature_dim),
        a=float(fields[1]),
        p=float(fields[2]),
        loss=float(fields[3]),
        round=int(fields[0]),
    )


def write_log(records: Iterable[InteractionRecord], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w") as f:
        for record in records:
            f.write(format_record(record) + "\n")
            count += 1
    logger.info(f"Wrote {count} interaction records to {path}")
    return path


def read_log(path, feature_dim: Optional[int] = None) -> List[InteractionRecord]:
    """
    Read a log file, skipping malformed lines.

    When ``feature_dim`` is not given every context is padded to the largest
    feature index seen in the file.
    """
    records = []
    skipped = 0
    with open(path, "r") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(parse_record(line, feature_dim))
            except (ValueError, IndexError) as e:
                skipped += 1
                logger.debug(f"Skipping line {line_number}: {e}")

    if skipped:
        logger.warning(f"Skipped {skipped} malformed lines in {path}")
    if feature_dim is None and records:
        width = max(r.x.shape[0] for r in records)
        records = [
            r if r.x.shape[0] == width
            else InteractionRecord(np.pad(r.x, (0, width - r.x.shape[0])), r.a, r.p, r.loss, r.round)
            for r in records
        ]
    logger.info(f"Read {len(records)} interaction records from {path}")
    return records
