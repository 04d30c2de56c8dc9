"""Multi-lead ECG records: the label space, validation, and file formats.

A record on disk is a UTF-8 ``key=value`` header plus a payload of
``n_leads x n_samples`` little-endian float32 values in lead-major order.
The two parts live either in sibling ``.hdr``/``.f32`` files or in a single
container file whose first 4 bytes give the header length (little-endian
uint32). A dataset manifest lists record paths one per line; ``#`` lines
carry provenance and are ignored by the reader.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SAMPLING_RATE = 500
VALID_LEAD_COUNTS = (9, 12)
MIN_DURATION_S = 5.0
MAX_DURATION_S = 120.0
N_CLASSES = 19

# 1-based class index -> (disease name, ICD-10 code). Indices are the only
# semantics the toolkit relies on; names and codes are carried for reports.
CLASS_LABELS = (
    (1, "Fulminant myocarditis", "(F) I40.0"),
    (2, "Viral myocarditis", "(V) I40.0"),
    (3, "Acute myocarditis", "I40.9"),
    (4, "Myocarditis", "I51.4"),
    (5, "Dilated cardiomyopathy", "I42.0"),
    (6, "Hypertrophic cardiomyopathy", "I42.2"),
    (7, "Cardiomyopathy", "I42.9"),
    (8, "Noncompaction of ventricular myocardium", "Q24.8"),
    (9, "Kawasaki disease", "M30.3"),
    (10, "Ventricular septal defect", "Q21.0"),
    (11, "Atrial septal defect", "Q21.1"),
    (12, "ASD (Foramen ovale)", "(FO) Q21.1"),
    (13, "ASD (Ostium secundum defect)", "(OSD) Q21.1"),
    (14, "Atrioventricular septal defect", "Q21.2"),
    (15, "Tetralogy of Fallot", "Q21.3"),
    (16, "Stenosis of RV outflow tract", "Q22.1"),
    (17, "Patent ductus arteriosus", "Q25.0"),
    (18, "Stenosis of pulmonary artery", "Q25.6"),
    (19, "Pulmonary valve stenosis", "I37.0"),
)

assert len(CLASS_LABELS) == N_CLASSES


def label_names() -> list[str]:
    return [name for _, name, _ in CLASS_LABELS]


class RecordFormatError(ValueError):
    """A record file or manifest violates the documented format."""


def multi_hot(indices) -> np.ndarray:
    """Multi-hot vector from 1-based class indices."""
    y = np.zeros(N_CLASSES, dtype=np.uint8)
    for idx in indices:
        if not 1 <= int(idx) <= N_CLASSES:
            raise RecordFormatError(
                f"unknown label index {idx}; valid range is 1..{N_CLASSES}"
            )
        y[int(idx) - 1] = 1
    return y


@dataclass
class ECGRecord:
    """One multi-lead recording with its multi-hot disease labels."""

    record_id: str
    fs: int
    samples: np.ndarray  # (n_leads, n_samples) float32
    labels: np.ndarray  # (N_CLASSES,) uint8 multi-hot
    n_leads: int = field(init=False)
    duration: float = field(init=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        self.n_leads = int(self.samples.shape[0])
        self.duration = self.samples.shape[1] / float(self.fs)
        self.validate()

    def validate(self):
        if self.fs != SAMPLING_RATE:
            raise RecordFormatError(
                f"record {self.record_id}: fs must be {SAMPLING_RATE}, got {self.fs}"
            )
        if self.n_leads not in VALID_LEAD_COUNTS:
            raise RecordFormatError(
                f"record {self.record_id}: n_leads must be one of "
                f"{VALID_LEAD_COUNTS}, got {self.n_leads}"
            )
        if not MIN_DURATION_S <= self.duration <= MAX_DURATION_S:
            raise RecordFormatError(
                f"record {self.record_id}: duration {self.duration:.3f}s outside "
                f"[{MIN_DURATION_S}, {MAX_DURATION_S}]s"
            )
        if self.labels.shape != (N_CLASSES,):
            raise RecordFormatError(
                f"record {self.record_id}: labels must have shape ({N_CLASSES},)"
            )
        if int(self.labels.sum()) < 1:
            raise RecordFormatError(
                f"record {self.record_id}: at least one positive label required"
            )
        if not np.isfinite(self.samples).all():
            raise RecordFormatError(
                f"record {self.record_id}: non-finite sample values"
            )

    def label_indices(self) -> list[int]:
        return [i + 1 for i in np.flatnonzero(self.labels)]


_REQUIRED_KEYS = ("record_id", "fs", "n_leads", "n_samples", "labels")


def _format_header(record: ECGRecord) -> str:
    labels = ",".join(str(i) for i in record.label_indices())
    lines = [
        f"record_id={record.record_id}",
        f"fs={record.fs}",
        f"n_leads={record.n_leads}",
        f"n_samples={record.samples.shape[1]}",
        f"labels={labels}",
    ]
    return "\n".join(lines) + "\n"


def _parse_header(text: str, source: str) -> dict:
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise RecordFormatError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key not in _REQUIRED_KEYS:
            raise RecordFormatError(f"{source}:{lineno}: unknown header key {key!r}")
        if key in fields:
            raise RecordFormatError(f"{source}:{lineno}: duplicate header key {key!r}")
        fields[key] = value.strip()
    missing = [k for k in _REQUIRED_KEYS if k not in fields]
    if missing:
        raise RecordFormatError(f"{source}: missing header keys {missing}")
    return fields


def _decode_payload(header: dict, payload: bytes, source: str) -> ECGRecord:
    try:
        fs = int(header["fs"])
        n_leads = int(header["n_leads"])
        n_samples = int(header["n_samples"])
    except ValueError as err:
        raise RecordFormatError(f"{source}: non-integer header field ({err})") from None
    expected = n_leads * n_samples * 4
    if len(payload) != expected:
        raise RecordFormatError(
            f"{source}: payload has {len(payload)} bytes, expected {expected} "
            f"({n_leads} leads x {n_samples} samples x 4 bytes)"
        )
    samples = (
        np.frombuffer(payload, dtype="<f4").reshape(n_leads, n_samples).copy()
    )
    labels_field = header["labels"].strip()
    indices = [s for s in labels_field.split(",") if s.strip()]
    try:
        indices = [int(s) for s in indices]
    except ValueError:
        raise RecordFormatError(
            f"{source}: labels must be comma-separated integers, got "
            f"{labels_field!r}"
        ) from None
    return ECGRecord(
        record_id=header["record_id"],
        fs=fs,
        samples=samples,
        labels=multi_hot(indices),
    )


def load_record(path) -> ECGRecord:
    """Read one record from a container file or a ``.hdr``/``.f32`` pair."""
    path = Path(path)
    if not path.exists():
        raise RecordFormatError(f"record file not found: {path}")
    if path.suffix == ".hdr":
        header = _parse_header(path.read_text("utf-8"), str(path))
        payload_path = path.with_suffix(".f32")
        if not payload_path.exists():
            raise RecordFormatError(f"payload file not found: {payload_path}")
        return _decode_payload(header, payload_path.read_bytes(), str(path))
    blob = path.read_bytes()
    if len(blob) < 4:
        raise RecordFormatError(f"{path}: too short for a container header")
    (header_len,) = struct.unpack("<I", blob[:4])
    if 4 + header_len > len(blob):
        raise RecordFormatError(
            f"{path}: header length {header_len} exceeds file size {len(blob)}"
        )
    header = _parse_header(blob[4 : 4 + header_len].decode("utf-8"), str(path))
    return _decode_payload(header, blob[4 + header_len :], str(path))


def save_record(record: ECGRecord, path, pair: bool = False) -> Path:
    """Write a record; returns the path to pass to ``load_record``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _format_header(record).encode("utf-8")
    payload = np.ascontiguousarray(record.samples, dtype="<f4").tobytes()
    if pair:
        hdr_path = path.with_suffix(".hdr")
        hdr_path.write_bytes(header)
        path.with_suffix(".f32").write_bytes(payload)
        return hdr_path
    path.write_bytes(struct.pack("<I", len(header)) + header + payload)
    return path


def write_manifest(paths, manifest_path, header: dict | None = None) -> Path:
    """List record paths one per line, relative to the manifest directory."""
    manifest_path = Path(manifest_path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for key, value in (header or {}).items():
        lines.append(f"# {key}={value}")
    base = manifest_path.parent.resolve()
    for p in paths:
        p = Path(p).resolve()
        try:
            lines.append(str(p.relative_to(base)))
        except ValueError:
            lines.append(str(p))
    manifest_path.write_text("\n".join(lines) + "\n", "utf-8")
    return manifest_path


def read_manifest(manifest_path) -> tuple[list[Path], dict]:
    """Record paths (resolved against the manifest dir) and header fields."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise RecordFormatError(f"manifest not found: {manifest_path}")
    base = manifest_path.parent
    paths = []
    header = {}
    for raw in manifest_path.read_text("utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if "=" in body:
                key, value = body.split("=", 1)
                header[key.strip()] = value.strip()
            continue
        p = Path(line)
        paths.append(p if p.is_absolute() else base / p)
    return paths, header
