"""Windowing, decimation, per-lead normalization, and slice-set storage.

Records are cut into non-overlapping 3-second windows (1500 raw samples at
500 Hz) with any trailing remainder dropped, then decimated by stride 5 to
300 samples. Decimation keeps every 5th raw sample with no anti-alias
filter, a documented trade-off of the protocol.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .records import ECGRecord, N_CLASSES, RecordFormatError

RAW_WINDOW = 1500
DECIMATION = 5
SLICE_LEN = RAW_WINDOW // DECIMATION  # 300
STD_FLOOR = 1e-8


@dataclass
class Slice:
    """One fixed-length window inheriting its source record's labels."""

    record_id: str
    window_index: int
    x: np.ndarray  # (n_leads, SLICE_LEN) float32
    y: np.ndarray  # (N_CLASSES,) uint8


def downsample(window: np.ndarray) -> np.ndarray:
    """Keep raw indices 0, 5, 10, ..., 1495 of a 1500-sample window."""
    window = np.asarray(window)
    if window.ndim != 2 or window.shape[1] != RAW_WINDOW:
        raise ValueError(
            f"downsample expects (n_leads, {RAW_WINDOW}), got {window.shape}"
        )
    return np.ascontiguousarray(window[:, ::DECIMATION])


def slice_record(record: ECGRecord) -> list[Slice]:
    """Non-overlapping windows; floor(T / 1500) slices, remainder dropped."""
    n_windows = record.samples.shape[1] // RAW_WINDOW
    out = []
    for i in range(n_windows):
        window = record.samples[:, i * RAW_WINDOW : (i + 1) * RAW_WINDOW]
        out.append(
            Slice(
                record_id=record.record_id,
                window_index=i,
                x=downsample(window).astype(np.float32),
                y=record.labels.copy(),
            )
        )
    return out


@dataclass
class LeadNormalizer:
    """Per-lead z-score statistics fitted within a single partition."""

    mean: np.ndarray  # (n_leads,)
    std: np.ndarray  # (n_leads,)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Normalize (..., n_leads, SLICE_LEN) arrays lead by lead."""
        mean = self.mean.astype(x.dtype)[..., :, None]
        std = self.std.astype(x.dtype)[..., :, None]
        return (x - mean) / std

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LeadNormalizer":
        return cls(
            mean=np.asarray(d["mean"], dtype=np.float64),
            std=np.asarray(d["std"], dtype=np.float64),
        )


class SliceSet:
    """All slices of one partition, stacked for batch access.

    ``X`` stays raw; the partition's normalizer is applied at batch time so
    the stored arrays and the statistics remain separately inspectable.
    """

    def __init__(self, partition: str, X: np.ndarray, Y: np.ndarray, record_ids, window_indices):
        self.partition = partition
        self.X = np.asarray(X, dtype=np.float32)
        self.Y = np.asarray(Y, dtype=np.uint8)
        self.record_ids = list(record_ids)
        self.window_indices = np.asarray(window_indices, dtype=np.int64)
        if self.X.shape[0] != self.Y.shape[0]:
            raise ValueError(
                f"slice/label count mismatch: {self.X.shape[0]} vs {self.Y.shape[0]}"
            )

    @classmethod
    def from_slices(cls, partition: str, slices) -> "SliceSet":
        slices = list(slices)
        if not slices:
            n_leads = 12
            return cls(
                partition,
                np.zeros((0, n_leads, SLICE_LEN), dtype=np.float32),
                np.zeros((0, N_CLASSES), dtype=np.uint8),
                [],
                np.zeros(0, dtype=np.int64),
            )
        X = np.stack([s.x for s in slices])
        Y = np.stack([s.y for s in slices])
        return cls(
            partition,
            X,
            Y,
            [s.record_id for s in slices],
            [s.window_index for s in slices],
        )

    @property
    def n_slices(self) -> int:
        return self.X.shape[0]

    @property
    def n_leads(self) -> int:
        return self.X.shape[1]

    def positives_per_class(self) -> np.ndarray:
        return self.Y.sum(axis=0).astype(np.int64)

    def save(self, path, provenance: dict | None = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = {
            "format": "pecgbench-slices/1",
            "partition": self.partition,
            "n_slices": int(self.n_slices),
            "n_leads": int(self.X.shape[1]) if self.n_slices else 0,
            "slice_len": SLICE_LEN,
            "n_classes": N_CLASSES,
            "record_ids": self.record_ids,
            "window_indices": self.window_indices.tolist(),
        }
        if provenance:
            header["provenance"] = provenance
        blob = json.dumps(header, sort_keys=True).encode("utf-8")
        payload = (
            np.ascontiguousarray(self.X, dtype="<f4").tobytes()
            + np.ascontiguousarray(self.Y, dtype=np.uint8).tobytes()
        )
        path.write_bytes(struct.pack("<I", len(blob)) + blob + payload)
        return path


def load_sliceset(path) -> SliceSet:
    path = Path(path)
    if not path.exists():
        raise RecordFormatError(f"slice-set file not found: {path}")
    blob = path.read_bytes()
    (header_len,) = struct.unpack("<I", blob[:4])
    header = json.loads(blob[4 : 4 + header_len].decode("utf-8"))
    if header.get("format") != "pecgbench-slices/1":
        raise RecordFormatError(f"{path}: not a pecgbench slice-set file")
    n = header["n_slices"]
    n_leads = header["n_leads"]
    x_bytes = n * n_leads * header["slice_len"] * 4
    y_bytes = n * header["n_classes"]
    payload = blob[4 + header_len :]
    if len(payload) != x_bytes + y_bytes:
        raise RecordFormatError(
            f"{path}: payload has {len(payload)} bytes, expected {x_bytes + y_bytes}"
        )
    X = np.frombuffer(payload[:x_bytes], dtype="<f4").reshape(
        n, n_leads, header["slice_len"]
    )
    Y = np.frombuffer(payload[x_bytes:], dtype=np.uint8).reshape(
        n, header["n_classes"]
    )
    return SliceSet(
        header["partition"],
        X.copy(),
        Y.copy(),
        header["record_ids"],
        header["window_indices"],
    )


def fit_normalizer(sliceset: SliceSet) -> LeadNormalizer:
    """Population mean/std per lead over all slices and time points."""
    if sliceset.n_slices == 0:
        raise ValueError(
            f"cannot fit a normalizer on empty partition {sliceset.partition!r}"
        )
    x = sliceset.X.astype(np.float64)
    mean = x.mean(axis=(0, 2))
    std = x.std(axis=(0, 2))
    return LeadNormalizer(mean=mean, std=np.maximum(std, STD_FLOOR))
