"""Novelty, prompt accuracy, and the combined playable-novel classification.

A candidate is novel when its minimum Hamming distance to every dataset
level, before and after swapping its own pattern tiles, reaches the novelty
threshold (a fraction of the candidate's tile count, border included).
Grids of different dimensions are maximally distant (INCOMPARABLE).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .config import PipelineConfig
from .constraints import PlayabilityReport, validate
from .core import CensusError, Grid, LevelFormatError, parse_level, pattern_percent, swap_patterns, tile_census
from .prompting import PromptSpec

if TYPE_CHECKING:
    from .dataset import Dataset


class ZeroPromptPercentError(ValueError):
    def __init__(self) -> None:
        super().__init__("accuracy is undefined for a zero pattern percentage")


class _Incomparable:
    """Distance between grids of different dimensions; exceeds every threshold."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INCOMPARABLE"

    def __ge__(self, other) -> bool:
        return True

    def __gt__(self, other) -> bool:
        return not isinstance(other, _Incomparable)

    def __le__(self, other) -> bool:
        return isinstance(other, _Incomparable)

    def __lt__(self, other) -> bool:
        return False


INCOMPARABLE = _Incomparable()


def hamming_distance(a: Grid, b: Grid):
    """Differing-cell count between equal-size grids, else INCOMPARABLE."""
    if a.width != b.width or a.height != b.height:
        return INCOMPARABLE
    return int((a.codes != b.codes).sum())


@dataclass(frozen=True)
class NoveltyResult:
    min_distance_raw: object  # int or INCOMPARABLE
    min_distance_swapped: object
    threshold_cells: int
    is_novel: bool
    nearest_entry_id: str | None

    def to_json_dict(self) -> dict:
        def enc(d):
            return None if isinstance(d, _Incomparable) else int(d)

        return {
            "min_distance_raw": enc(self.min_distance_raw),
            "min_distance_swapped": enc(self.min_distance_swapped),
            "threshold_cells": self.threshold_cells,
            "is_novel": self.is_novel,
            "nearest_entry_id": self.nearest_entry_id,
        }


def novelty_threshold(grid: Grid, novelty_fraction: float) -> int:
    return math.ceil(novelty_fraction * grid.width * grid.height)


def is_novel(candidate: Grid, dataset: "Dataset", novelty_fraction: float) -> NoveltyResult:
    """Check the candidate against every level currently in the dataset.

    Both the raw candidate and its pattern-swapped form must sit at least
    threshold_cells away from every entry; the swap check catches recolored
    copies. Candidates with fewer than two pattern tiles skip the swap
    (it would be the identity). An empty dataset makes everything novel.
    """
    if not 0.0 < novelty_fraction <= 1.0:
        raise ValueError(f"novelty_fraction must be in (0, 1], got {novelty_fraction}")
    threshold = novelty_threshold(candidate, novelty_fraction)
    entries = list(dataset.entries)
    if not entries:
        return NoveltyResult(INCOMPARABLE, INCOMPARABLE, threshold, True, None)

    swapped: Grid | None = None
    try:
        if len(tile_census(candidate).pattern_tiles) >= 2:
            swapped = swap_patterns(candidate)
    except CensusError:
        swapped = None

    min_raw = INCOMPARABLE
    min_swapped = INCOMPARABLE
    nearest_id: str | None = None
    nearest_dist = INCOMPARABLE
    for entry in entries:
        d_raw = hamming_distance(candidate, entry.grid)
        d_swapped = hamming_distance(swapped, entry.grid) if swapped is not None else d_raw
        if d_raw < min_raw:
            min_raw = d_raw
        if d_swapped < min_swapped:
            min_swapped = d_swapped
        effective = min(d_raw, d_swapped)
        if effective < nearest_dist:
            nearest_dist = effective
            nearest_id = entry.id

    novel = (min_raw >= threshold) and (min_swapped >= threshold)
    return NoveltyResult(min_raw, min_swapped, threshold, novel, nearest_id)


def accuracy_from_percents(prompt_percent: float, generated_percent: float) -> float:
    """The prompt-controllability accuracy: 1 - |P - G| / P. May go negative."""
    if prompt_percent == 0:
        raise ZeroPromptPercentError()
    return 1.0 - abs(prompt_percent - generated_percent) / prompt_percent


def accuracy(spec: PromptSpec, generated: Grid) -> float:
    """Accuracy of a generated grid against its prompt's pattern percentage.

    Uses the spec's raw (unrounded) percentage, not the integer rendered in
    the prompt string.
    """
    return accuracy_from_percents(spec.percent_pattern_tiles, pattern_percent(generated))


@dataclass(frozen=True)
class ClassifyResult:
    parse_ok: bool
    grid: Grid | None
    report: PlayabilityReport | None
    novelty: NoveltyResult | None
    accuracy: float | None
    playable_novel: bool
    parse_error: str | None = None


def classify(
    candidate_text: str,
    spec: PromptSpec,
    dataset: "Dataset",
    config: PipelineConfig,
) -> ClassifyResult:
    """Parse, validate, then (for playable grids only) novelty-check a completion.

    Constraints run before novelty, matching the evaluation order of the
    pipeline. Accuracy is computed for every parseable grid regardless of
    playability; prompts with a zero pattern percentage yield no accuracy.
    """
    try:
        grid = parse_level(candidate_text)
    except LevelFormatError as exc:
        return ClassifyResult(False, None, None, None, None, False, str(exc))

    report = validate(grid)
    acc: float | None
    if spec.percent_pattern_tiles > 0:
        acc = accuracy(spec, grid)
    else:
        acc = None
    novelty = is_novel(grid, dataset, config.novelty_fraction) if report.verdict else None
    playable_novel = report.verdict and novelty is not None and novelty.is_novel
    return ClassifyResult(True, grid, report, novelty, acc, playable_novel)


@dataclass(frozen=True)
class RoundStats:
    """Per-round generation metrics, one CSV row per round."""

    round_index: int
    seed: int
    n_generated: int
    n_parsed: int
    n_playable: int
    n_novel: int
    n_playable_novel: int
    mean_accuracy: float

    CSV_HEADER = "round,seed,n_generated,n_parsed,n_playable,n_novel,n_playable_novel,mean_accuracy"

    def to_csv_row(self) -> str:
        return (
            f"{self.round_index},{self.seed},{self.n_generated},{self.n_parsed},"
            f"{self.n_playable},{self.n_novel},{self.n_playable_novel},"
            f"{self.mean_accuracy:.6f}"
        )


def aggregate_round(
    results: Sequence[ClassifyResult], round_index: int, seed: int
) -> RoundStats:
    """Counts plus the clamped mean accuracy over parsed candidates."""
    n_parsed = sum(1 for r in results if r.parse_ok)
    n_playable = sum(1 for r in results if r.report is not None and r.report.verdict)
    n_novel = sum(1 for r in results if r.novelty is not None and r.novelty.is_novel)
    n_playable_novel = sum(1 for r in results if r.playable_novel)
    defined = [max(0.0, r.accuracy) for r in results if r.parse_ok and r.accuracy is not None]
    mean_accuracy = sum(defined) / len(defined) if defined else 0.0
    return RoundStats(
        round_index=round_index,
        seed=seed,
        n_generated=len(results),
        n_parsed=n_parsed,
        n_playable=n_playable,
        n_novel=n_novel,
        n_playable_novel=n_playable_novel,
        mean_accuracy=mean_accuracy,
    )
