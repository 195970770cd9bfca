"""Provenance-tracked level store with augmentation, dedup, and persistence.

On disk a dataset is a directory:

    levels/<id>.lvl   one level per file, plain level text format
    manifest.jsonl    one line per entry: {id, file, provenance, round_added}
    finetune.jsonl    training records, regenerated on every save

Augmentation applies the canonical transform set to every non-augmented
entry: identity, both flips, one clockwise rotation (with door respacing),
the pattern swap, and the swap composed with each flip. Rooms with fewer
than two pattern tiles skip the swap composites, leaving four variants.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .config import PipelineConfig
from .constraints import validate
from .core import (
    DoorRelocationError,
    Grid,
    LevelFormatError,
    flip_horizontal,
    flip_vertical,
    parse_level,
    rotate90,
    serialize_level,
    swap_patterns,
    tile_census,
)
from .prompting import PromptSpec, derive_spec, make_record, write_finetune_jsonl

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
FINETUNE_NAME = "finetune.jsonl"
LEVELS_DIR = "levels"

PROVENANCE_KINDS = ("handmade", "repaired", "generated", "augmented")

AUGMENT_TRANSFORMS: dict[str, Callable[[Grid], Grid]] = {
    "flip_h": flip_horizontal,
    "flip_v": flip_vertical,
    "rot90": rotate90,
    "swap": swap_patterns,
    "swap_flip_h": lambda g: flip_horizontal(swap_patterns(g)),
    "swap_flip_v": lambda g: flip_vertical(swap_patterns(g)),
}
SWAP_TRANSFORMS = ("swap", "swap_flip_h", "swap_flip_v")


class DatasetError(ValueError):
    pass


class EmptyDatasetError(DatasetError):
    def __init__(self) -> None:
        super().__init__("dataset has no entries")


class ManifestCorruptError(DatasetError):
    pass


class LevelFileUnparseableError(DatasetError):
    def __init__(self, filename: str, detail: str) -> None:
        self.filename = filename
        super().__init__(f"{filename}: {detail}")


@dataclass(frozen=True)
class Provenance:
    kind: str
    transform: str | None = None
    parent_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in PROVENANCE_KINDS:
            raise ValueError(f"unknown provenance kind {self.kind!r}")
        if self.kind == "augmented" and (self.transform is None or self.parent_id is None):
            raise ValueError("augmented provenance needs a transform and parent id")

    def to_json_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.transform is not None:
            out["transform"] = self.transform
        if self.parent_id is not None:
            out["parent"] = self.parent_id
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Provenance":
        return cls(
            kind=obj.get("kind", ""),
            transform=obj.get("transform"),
            parent_id=obj.get("parent"),
        )


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    grid: Grid
    spec: PromptSpec
    provenance: Provenance
    round_added: int


class Dataset:
    """Ordered, deduplicated collection of levels with provenance."""

    def __init__(self, config_snapshot: PipelineConfig | None = None) -> None:
        self.entries: list[DatasetEntry] = []
        self.config_snapshot = config_snapshot
        self._by_id: dict[str, DatasetEntry] = {}
        self._grid_keys: set[tuple[str, ...]] = set()
        self._next_index = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def get(self, entry_id: str) -> DatasetEntry | None:
        return self._by_id.get(entry_id)

    def contains_grid(self, grid: Grid) -> bool:
        return grid.rows in self._grid_keys

    def _allocate_id(self) -> str:
        entry_id = f"lvl-{self._next_index:06d}"
        self._next_index += 1
        return entry_id

    def _insert(self, entry: DatasetEntry) -> None:
        if entry.id in self._by_id:
            raise DatasetError(f"duplicate entry id {entry.id!r}")
        if entry.grid.rows in self._grid_keys:
            raise DatasetError(f"duplicate grid for entry {entry.id!r}")
        self.entries.append(entry)
        self._by_id[entry.id] = entry
        self._grid_keys.add(entry.grid.rows)

    def add_if_new(self, grid: Grid, provenance: Provenance, round_added: int) -> bool:
        """Append the grid unless an identical one is already stored."""
        if self.contains_grid(grid):
            return False
        entry = DatasetEntry(
            id=self._allocate_id(),
            grid=grid,
            spec=derive_spec(grid),
            provenance=provenance,
            round_added=round_added,
        )
        self._insert(entry)
        return True

    def sample_specs(self, n: int, rng_seed: int) -> list[PromptSpec]:
        """Uniform with-replacement draw of n entry specs, deterministic in rng_seed."""
        if not self.entries:
            raise EmptyDatasetError()
        if n < 0:
            raise ValueError("n must be >= 0")
        rng = random.Random(rng_seed)
        return [self.entries[rng.randrange(len(self.entries))].spec for _ in range(n)]


def augment_all(dataset: Dataset) -> Dataset:
    """Expand a dataset with the canonical transform set.

    Previously augmented entries are carried over but not re-augmented.
    Variants that duplicate an existing grid are dropped silently; variants
    that fail validation (possible when door respacing backs a door into a
    corner) are dropped with a warning.
    """
    out = Dataset(config_snapshot=dataset.config_snapshot)
    for entry in dataset.entries:
        out._insert(entry)
    out._next_index = dataset._next_index

    for entry in dataset.entries:
        if entry.provenance.kind == "augmented":
            continue
        try:
            two_pattern = len(tile_census(entry.grid).pattern_tiles) >= 2
        except ValueError:
            two_pattern = False
        for name, transform in AUGMENT_TRANSFORMS.items():
            if name in SWAP_TRANSFORMS and not two_pattern:
                continue
            try:
                variant = transform(entry.grid)
            except DoorRelocationError as exc:
                logger.warning("dropping %s of %s: %s", name, entry.id, exc)
                continue
            if out.contains_grid(variant):
                continue
            if not validate(variant).verdict:
                logger.warning("dropping %s of %s: variant fails validation", name, entry.id)
                continue
            out.add_if_new(
                variant,
                Provenance(kind="augmented", transform=name, parent_id=entry.id),
                entry.round_added,
            )
    return out


def save(dataset: Dataset, path: Path | str) -> None:
    """Persist to a directory; regenerates the manifest and fine-tune file."""
    root = Path(path)
    levels = root / LEVELS_DIR
    levels.mkdir(parents=True, exist_ok=True)

    wanted = {f"{entry.id}.lvl" for entry in dataset.entries}
    for stale in levels.glob("*.lvl"):
        if stale.name not in wanted:
            stale.unlink()

    manifest_lines = []
    for entry in dataset.entries:
        filename = f"{entry.id}.lvl"
        (levels / filename).write_text(serialize_level(entry.grid), encoding="utf-8")
        manifest_lines.append(
            json.dumps(
                {
                    "id": entry.id,
                    "file": f"{LEVELS_DIR}/{filename}",
                    "provenance": entry.provenance.to_json_dict(),
                    "round_added": entry.round_added,
                },
                ensure_ascii=False,
            )
        )
    (root / MANIFEST_NAME).write_text(
        "".join(line + "\n" for line in manifest_lines), encoding="utf-8"
    )
    write_finetune_jsonl(
        (make_record(entry.grid) for entry in dataset.entries),
        root / FINETUNE_NAME,
    )


def load(path: Path | str, config_snapshot: PipelineConfig | None = None) -> Dataset:
    """Load a dataset directory written by save()."""
    root = Path(path)
    manifest = root / MANIFEST_NAME
    if not manifest.is_file():
        raise ManifestCorruptError(f"missing {MANIFEST_NAME} in {root}")

    dataset = Dataset(config_snapshot=config_snapshot)
    max_index = -1
    for lineno, line in enumerate(manifest.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            entry_id = obj["id"]
            filename = obj["file"]
            provenance = Provenance.from_json_dict(obj["provenance"])
            round_added = int(obj["round_added"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ManifestCorruptError(f"manifest line {lineno}: {exc}") from exc

        level_path = root / filename
        try:
            text = level_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise LevelFileUnparseableError(filename, str(exc)) from exc
        try:
            grid = parse_level(text)
        except LevelFormatError as exc:
            raise LevelFileUnparseableError(filename, str(exc)) from exc

        try:
            dataset._insert(
                DatasetEntry(
                    id=entry_id,
                    grid=grid,
                    spec=derive_spec(grid),
                    provenance=provenance,
                    round_added=round_added,
                )
            )
        except DatasetError as exc:
            raise ManifestCorruptError(str(exc)) from exc
        if entry_id.startswith("lvl-"):
            suffix = entry_id[4:]
            if suffix.isdigit():
                max_index = max(max_index, int(suffix))
    dataset._next_index = max_index + 1
    return dataset
