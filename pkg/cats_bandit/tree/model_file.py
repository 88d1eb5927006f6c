#!/usr/bin/env python3
"""
Model file format for tree policies.

Little-endian layout:
    header   magic "CATS", format version (u8), depth (u32), h (f64),
             feature_dim (u32), update rule (u8), learning rate (f64), seed (i64)
    blocks   one per internal node in id order: weights_left, weights_right
             (feature_dim + 1 doubles each), update_count (u64); sentinel
             blocks are written as zeros
    trailer  CRC-32 of everything before it (u32)
"""

import logging
import struct
import zlib
from pathlib import Path

import numpy as np

from cats_bandit.learner.base_learner import UPDATE_RULES, BaseLearner, BaseLearnerConfig
from cats_bandit.tree.tree_policy import TreePolicy, build_tree

logger = logging.getLogger(__name__)

MAGIC = b"CATS"
FORMAT_VERSION = 1
VERSION_OFFSET = len(MAGIC)

_HEADER = struct.Struct("<4sBIdIBdq")
_COUNT = struct.Struct("<Q")
_CRC = struct.Struct("<I")


class ModelFormatError(ValueError):
    """The byte sequence is not a valid model file."""


class ModelTruncatedError(ModelFormatError):
    """The byte sequence ends before the model does."""


class ModelVersionError(ModelFormatError):
    """The model was written with an unsupported format version."""


class ModelChecksumError(ModelFormatError):
    """The stored checksum does not match the content."""


def _block_size(feature_dim):
    return 2 * (feature_dim + 1) * 8 + _COUNT.size


def serialize(tree: TreePolicy) -> bytes:
    """Encode a tree of ``BaseLearner`` nodes into the versioned model format."""
    config = tree.learner_config
    if config is None:
        raise ValueError("only trees of online base learners can be serialized")
    parts = [
        _HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            tree.depth,
            tree.h,
            config.feature_dim,
            UPDATE_RULES.index(config.update_rule),
            config.learning_rate,
            config.seed,
        )
    ]
    zeros = np.zeros(config.feature_dim + 1, dtype="<f8").tobytes()
    for node_id, router in enumerate(tree.routers):
        if tree.is_sentinel(node_id):
            parts.extend([zeros, zeros, _COUNT.pack(0)])
            continue
        if not isinstance(router, BaseLearner):
            raise ValueError(f"node {node_id} holds {type(router).__name__}, not a BaseLearner")
        parts.append(router.weights_left.astype("<f8").tobytes())
        parts.append(router.weights_right.astype("<f8").tobytes())
        parts.append(_COUNT.pack(router.update_count))
    body = b"".join(parts)
    return body + _CRC.pack(zlib.crc32(body))


def deserialize(data: bytes) -> TreePolicy:
    """
    Decode a model produced by :func:`serialize`.

    Args:
        data: bytes of a model file

    Returns:
        TreePolicy: the decoded tree

    Raises:
        ModelTruncatedError: if the data ends before the declared layout
        ModelVersionError: if the format version is not supported
        ModelChecksumError: if the trailing CRC32 does not match
        ModelFormatError: on a bad magic, an unknown header field or trailing bytes
    """
    if len(data) < _HEADER.size:
        raise ModelTruncatedError(f"model has {len(data)} bytes, header needs {_HEADER.size}")
    magic, version, depth, h, feature_dim, rule, learning_rate, seed = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model format version {version}, expected {FORMAT_VERSION}")

    K = 2 ** depth
    block = _block_size(feature_dim)
    expected = _HEADER.size + (K - 1) * block + _CRC.size
    if len(data) < expected:
        raise ModelTruncatedError(f"model has {len(data)} bytes, expected {expected}")
    if len(data) > expected:
        raise ModelFormatError(f"model has {len(data) - expected} trailing bytes")
    (stored_crc,) = _CRC.unpack_from(data, expected - _CRC.size)
    if zlib.crc32(data[: expected - _CRC.size]) != stored_crc:
        raise ModelChecksumError("model checksum mismatch")
    if rule >= len(UPDATE_RULES):
        raise ModelFormatError(f"unknown update rule code {rule}")

    config = BaseLearnerConfig(
        feature_dim=feature_dim,
        update_rule=UPDATE_RULES[rule],
        learning_rate=learning_rate,
        seed=seed,
    )
    tree = build_tree(depth, h, config)
    n_weights = feature_dim + 1
    offset = _HEADER.size
    for node_id in range(K - 1):
        if not tree.is_sentinel(node_id):
            learner = tree.routers[node_id]
            learner.left.weights = np.frombuffer(data, "<f8", n_weights, offset).astype(np.float64)
            learner.right.weights = np.frombuffer(
                data, "<f8", n_weights, offset + 8 * n_weights
            ).astype(np.float64)
            (learner.update_count,) = _COUNT.unpack_from(data, offset + 16 * n_weights)
        offset += block
    return tree


def save_model(tree: TreePolicy, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize(tree))
    logger.info(f"Saved model {tree!r} to {path}")
    return path


def load_model(path) -> TreePolicy:
    return deserialize(Path(path).read_bytes())
