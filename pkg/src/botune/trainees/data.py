"""Desk-scale datasets: Gaussian blobs and IDX container ingestion."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import FormatError

_IDX_UBYTE = 0x08
_CENTER_SCALE = 3.0


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (n_samples, n_features)
    labels: np.ndarray    # (n_samples,) ints in [0, n_classes)
    train_idx: np.ndarray
    val_idx: np.ndarray

    def __post_init__(self):
        train = set(self.train_idx.tolist())
        val = set(self.val_idx.tolist())
        if train & val:
            raise ValueError("train/validation split overlaps")
        if train | val != set(range(len(self.labels))):
            raise ValueError("split does not cover all samples")
        if not train or not val:
            raise ValueError("both split parts must be non-empty")

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1


def make_blobs(n_per_class: int, n_classes: int, n_features: int,
               spread: float, seed: int) -> Dataset:
    """Isotropic Gaussian clusters at seeded random centers, split 80/20 per class."""
    if min(n_per_class, n_classes, n_features) < 1:
        raise ValueError("all counts must be >= 1")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, _CENTER_SCALE, (n_classes, n_features))
    features = np.concatenate(
        [centers[c] + rng.normal(0.0, spread, (n_per_class, n_features))
         for c in range(n_classes)]
    )
    labels = np.repeat(np.arange(n_classes), n_per_class)

    train_parts, val_parts = [], []
    for c in range(n_classes):
        idx = np.flatnonzero(labels == c)
        idx = rng.permutation(idx)
        n_val = max(1, n_per_class // 5) if n_per_class >= 2 else 0
        val_parts.append(idx[:n_val])
        train_parts.append(idx[n_val:])
    return Dataset(
        features,
        labels,
        np.sort(np.concatenate(train_parts)),
        np.sort(np.concatenate(val_parts)),
    )


def parse_idx(path) -> tuple[tuple[int, ...], np.ndarray]:
    """Parse an IDX container (unsigned-byte payload) into (dims, flat data)."""
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise FormatError(f"file too short for an IDX header: {len(raw)} bytes")
    zero0, zero1, type_code, rank = raw[0], raw[1], raw[2], raw[3]
    if zero0 != 0 or zero1 != 0:
        raise FormatError(f"bad magic bytes ({zero0:#x}, {zero1:#x})")
    if type_code != _IDX_UBYTE:
        raise FormatError(f"unsupported type code {type_code:#x} (only unsigned byte)")
    header_end = 4 + 4 * rank
    if len(raw) < header_end:
        raise FormatError(f"truncated header: need {header_end} bytes, have {len(raw)}")
    dims = struct.unpack(f">{rank}I", raw[4:header_end])
    expected = int(np.prod(dims, dtype=np.int64)) if rank else 0
    payload = raw[header_end:]
    if len(payload) != expected:
        raise FormatError(
            f"payload size mismatch: expected {expected} bytes, got {len(payload)}"
        )
    return tuple(int(d) for d in dims), np.frombuffer(payload, dtype=np.uint8).copy()


def dataset_from_idx(images_path, labels_path, limit: int | None = None,
                     val_fraction: float = 0.2, seed: int = 0) -> Dataset:
    """Build a Dataset from an IDX image/label pair (e.g. an MNIST subset)."""
    img_dims, img_data = parse_idx(images_path)
    lbl_dims, lbl_data = parse_idx(labels_path)
    if len(img_dims) < 2 or len(lbl_dims) != 1 or img_dims[0] != lbl_dims[0]:
        raise FormatError(f"incompatible image/label shapes {img_dims} vs {lbl_dims}")
    n = img_dims[0] if limit is None else min(limit, img_dims[0])
    per_image = int(np.prod(img_dims[1:]))
    features = img_data.reshape(img_dims[0], per_image)[:n].astype(float) / 255.0
    labels = lbl_data[:n].astype(int)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_val = max(1, int(n * val_fraction))
    return Dataset(features, labels, np.sort(order[n_val:]), np.sort(order[:n_val]))
