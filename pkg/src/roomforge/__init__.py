"""roomforge: constraint-aware tile-room generation pipeline.

Parse and validate character-grid rooms, measure novelty and prompt
accuracy, augment scarce room data, and run bootstrapped generation rounds
against a pluggable text-completion backend.
"""

from .backend import GenerationRequest, MockBackend, ModelRef, RemoteBackend, make_backend
from .config import PipelineConfig
from .constraints import (
    Door,
    PlayabilityReport,
    find_doors,
    repairability_rank,
    validate,
    wide_walkable_region,
)
from .core import (
    ALPHABET,
    Grid,
    TileCensus,
    flip_horizontal,
    flip_vertical,
    parse_level,
    rotate90,
    serialize_level,
    swap_patterns,
    tile_census,
)
from .dataset import Dataset, DatasetEntry, Provenance, augment_all, load, save
from .metrics import (
    INCOMPARABLE,
    ClassifyResult,
    NoveltyResult,
    RoundStats,
    accuracy,
    aggregate_round,
    classify,
    hamming_distance,
    is_novel,
)
from .orchestrator import Pipeline, RepairTicket, init_dataset
from .prompting import (
    FinetuneRecord,
    PromptSpec,
    build_prompt,
    derive_spec,
    make_record,
    parse_prompt,
    parse_record,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHABET",
    "INCOMPARABLE",
    "ClassifyResult",
    "Dataset",
    "DatasetEntry",
    "Door",
    "FinetuneRecord",
    "GenerationRequest",
    "Grid",
    "MockBackend",
    "ModelRef",
    "NoveltyResult",
    "Pipeline",
    "PipelineConfig",
    "PlayabilityReport",
    "PromptSpec",
    "Provenance",
    "RemoteBackend",
    "RepairTicket",
    "RoundStats",
    "TileCensus",
    "accuracy",
    "aggregate_round",
    "augment_all",
    "build_prompt",
    "classify",
    "derive_spec",
    "find_doors",
    "flip_horizontal",
    "flip_vertical",
    "hamming_distance",
    "init_dataset",
    "is_novel",
    "load",
    "make_backend",
    "make_record",
    "parse_level",
    "parse_prompt",
    "parse_record",
    "repairability_rank",
    "rotate90",
    "save",
    "serialize_level",
    "swap_patterns",
    "tile_census",
    "validate",
    "wide_walkable_region",
]
