"""Labeled-sample container and its binary file format.

A dataset row is one channel realization: the flattened real feature
vector, the codeword index an exhaustive search over the codebook picked,
and the rate that codeword achieved. Files are little-endian and
seekable: fixed header, then fixed-size records (features as float32,
label as uint32, rate as float32), so write -> read -> write round-trips
byte for byte.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

_MAGIC = b"RISD"
_VERSION = 1
_HEADER_FMT = "<4sHIIIIBQIQ"  # magic, version, n_tx, n_rx, n_h, n_v, mode, count, feat_len, config_hash
_MODE_CODES = {"ideal": 0, "practical": 1}
_MODE_NAMES = {v: k for k, v in _MODE_CODES.items()}


@dataclass(frozen=True)
class LabeledSample:
    features: np.ndarray
    label: int
    es_rate: float


@dataclass
class Dataset:
    """Column-oriented view of all samples plus generation metadata."""

    features: np.ndarray  # (n, feature_len) float32
    labels: np.ndarray  # (n,) uint32
    es_rates: np.ndarray  # (n,) float32
    n_tx: int
    n_rx: int
    n_h: int
    n_v: int
    codebook_mode: str
    config_hash: int = 0

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def feature_length(self) -> int:
        return self.features.shape[1]

    def sample(self, i: int) -> LabeledSample:
        return LabeledSample(
            features=self.features[i], label=int(self.labels[i]), es_rate=float(self.es_rates[i])
        )


def write_dataset(dataset: Dataset, path) -> None:
    n = len(dataset)
    feat_len = dataset.feature_length
    header = struct.pack(
        _HEADER_FMT,
        _MAGIC,
        _VERSION,
        dataset.n_tx,
        dataset.n_rx,
        dataset.n_h,
        dataset.n_v,
        _MODE_CODES[dataset.codebook_mode],
        n,
        feat_len,
        dataset.config_hash,
    )
    records = np.zeros(n, dtype=_record_dtype(feat_len))
    records["features"] = dataset.features.astype("<f4", copy=False)
    records["label"] = dataset.labels
    records["es_rate"] = dataset.es_rates
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(records.tobytes())


def read_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        raw = fh.read()
    header_size = struct.calcsize(_HEADER_FMT)
    if len(raw) < header_size:
        raise ValueError(f"{path}: truncated dataset header")
    magic, version, n_tx, n_rx, n_h, n_v, mode_code, count, feat_len, config_hash = struct.unpack_from(
        _HEADER_FMT, raw, 0
    )
    if magic != _MAGIC:
        raise ValueError(f"{path}: not a dataset file (bad magic)")
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported dataset version {version}")
    if mode_code not in _MODE_NAMES:
        raise ValueError(f"{path}: unknown codebook mode code {mode_code}")
    records = np.frombuffer(raw, dtype=_record_dtype(feat_len), count=count, offset=header_size)
    if len(records) != count:
        raise ValueError(f"{path}: expected {count} records, found {len(records)}")
    return Dataset(
        features=records["features"].copy(),
        labels=records["label"].copy(),
        es_rates=records["es_rate"].copy(),
        n_tx=n_tx,
        n_rx=n_rx,
        n_h=n_h,
        n_v=n_v,
        codebook_mode=_MODE_NAMES[mode_code],
        config_hash=config_hash,
    )


def _record_dtype(feat_len: int) -> np.dtype:
    return np.dtype([("features", "<f4", (feat_len,)), ("label", "<u4"), ("es_rate", "<f4")])
