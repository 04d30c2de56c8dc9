"""Record ingestion, synthetic surrogate generation, and the slicing,
decimation, normalization, and stratified-split pipeline."""

from .records import (
    CLASS_LABELS,
    N_CLASSES,
    ECGRecord,
    RecordFormatError,
    label_names,
    load_record,
    read_manifest,
    save_record,
    write_manifest,
)
from .pipeline import (
    DECIMATION,
    RAW_WINDOW,
    SLICE_LEN,
    LeadNormalizer,
    Slice,
    SliceSet,
    downsample,
    fit_normalizer,
    load_sliceset,
    slice_record,
)
from .split import stratified_split, stratify_assign
from .synth import SynthConfig, synth_generate

__all__ = [
    "CLASS_LABELS",
    "DECIMATION",
    "ECGRecord",
    "LeadNormalizer",
    "N_CLASSES",
    "RAW_WINDOW",
    "RecordFormatError",
    "SLICE_LEN",
    "Slice",
    "SliceSet",
    "SynthConfig",
    "downsample",
    "fit_normalizer",
    "label_names",
    "load_record",
    "load_sliceset",
    "read_manifest",
    "save_record",
    "slice_record",
    "stratified_split",
    "stratify_assign",
    "synth_generate",
    "write_manifest",
]
