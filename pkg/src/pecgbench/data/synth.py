"""Synthetic surrogate records for desk-scale verification.

Each class carries a fixed signature: a class-specific sinusoid plus a
class-specific Gaussian pulse train, both below the post-decimation Nyquist
frequency so the identity survives the stride-5 downsampling. A record is
the per-lead weighted sum of the signatures of its positive labels, with a
random phase per record and optional white noise. Real datasets are
ingested through the same record format, so everything downstream is
agnostic to the surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .records import (
    ECGRecord,
    MAX_DURATION_S,
    MIN_DURATION_S,
    N_CLASSES,
    SAMPLING_RATE,
    VALID_LEAD_COUNTS,
    multi_hot,
)
from ..seeding import substream


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings; ``classes`` are 1-based label indices."""

    classes: tuple
    records_per_class: int = 60
    duration_s: float = 10.0
    n_leads: int = 12
    co_rate: float = 0.0
    noise: float = 0.05

    def __post_init__(self):
        classes = tuple(int(c) for c in self.classes)
        object.__setattr__(self, "classes", classes)
        if not classes:
            raise ValueError("at least one class required")
        if len(set(classes)) != len(classes):
            raise ValueError(f"duplicate class indices in {classes}")
        bad = [c for c in classes if not 1 <= c <= N_CLASSES]
        if bad or len(classes) > N_CLASSES:
            raise ValueError(
                f"class indices must be distinct values in 1..{N_CLASSES}, got {classes}"
            )
        if self.records_per_class < 1:
            raise ValueError("records_per_class must be positive")
        if not MIN_DURATION_S <= self.duration_s <= MAX_DURATION_S:
            raise ValueError(
                f"duration_s must lie in [{MIN_DURATION_S}, {MAX_DURATION_S}]"
            )
        if self.n_leads not in VALID_LEAD_COUNTS:
            raise ValueError(f"n_leads must be one of {VALID_LEAD_COUNTS}")
        if not 0.0 <= self.co_rate <= 1.0:
            raise ValueError("co_rate must lie in [0, 1]")
        if self.noise < 0.0:
            raise ValueError("noise must be non-negative")

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "records_per_class": self.records_per_class,
            "duration_s": self.duration_s,
            "n_leads": self.n_leads,
            "co_rate": self.co_rate,
            "noise": self.noise,
        }


def signature_frequency(k: int) -> float:
    """Sinusoid frequency of class k; distinct and below 46 Hz."""
    return 3.0 + 2.37 * (k - 1)


def _pulse_rate(k: int) -> float:
    return 1.0 + 0.35 * ((k * 5) % 9)


def _pulse_width(k: int) -> float:
    return 0.03 + 0.01 * (k % 5)


def _lead_gains(k: int, n_leads: int) -> np.ndarray:
    leads = np.arange(n_leads)
    return 0.55 + 0.45 * np.cos(2.0 * np.pi * leads * (k + 2) / n_leads + 0.7 * k)


def class_signature(k: int, t: np.ndarray, phase_sin: float, phase_pulse: float) -> np.ndarray:
    f = signature_frequency(k)
    rate = _pulse_rate(k)
    width = _pulse_width(k) * rate  # width in phase units
    base = 0.7 * np.sin(2.0 * np.pi * (f * t + phase_sin))
    pulse_phase = (t * rate + phase_pulse) % 1.0
    pulse = np.exp(-0.5 * ((pulse_phase - 0.5) / width) ** 2)
    return base + pulse


def synth_generate(config: SynthConfig, seed: int) -> list[ECGRecord]:
    """Deterministic record list for (config, seed)."""
    rng = substream(seed, "synth")
    n_samples = int(round(config.duration_s * SAMPLING_RATE))
    t = np.arange(n_samples) / SAMPLING_RATE
    records = []
    for k in config.classes:
        for i in range(config.records_per_class):
            labels = [k]
            if len(config.classes) > 1 and rng.random() < config.co_rate:
                others = [c for c in config.classes if c != k]
                labels.append(others[int(rng.integers(len(others)))])
            signal = np.zeros((config.n_leads, n_samples))
            for c in sorted(labels):
                phase_sin, phase_pulse = rng.random(2)
                wave = class_signature(c, t, phase_sin, phase_pulse)
                signal += _lead_gains(c, config.n_leads)[:, None] * wave[None, :]
            if config.noise > 0:
                signal += config.noise * rng.standard_normal(signal.shape)
            records.append(
                ECGRecord(
                    record_id=f"s{k:02d}r{i:04d}",
                    fs=SAMPLING_RATE,
                    samples=signal.astype(np.float32),
                    labels=multi_hot(labels),
                )
            )
    return records
