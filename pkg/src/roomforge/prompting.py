"""Controllable prompt construction/parsing and fine-tune record serialization.

A prompt describes the target room: size, base tile, border tile, pattern
tiles, and the pattern-tile percentage, ending in the "->" completion marker.
Training records pair such a prompt with a completion holding the serialized
level (leading space, ". XUT" terminator), stored as JSONL.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .core import (
    Grid,
    LEVEL_TERMINATOR,
    LevelFormatError,
    WALKABLE_TILES,
    WALL_TILES,
    parse_level,
    serialize_level,
    tile_census,
)

PROMPT_END = "->"


class TemplateMismatchError(ValueError):
    """Prompt text diverges from the canonical template."""

    def __init__(self, position: int, expected: str) -> None:
        self.position = position
        self.expected = expected
        super().__init__(f"prompt diverges at position {position}: expected {expected}")


class RecordError(ValueError):
    """Base class for fine-tune record problems."""


class MalformedJsonError(RecordError):
    pass


class MissingFieldError(RecordError):
    def __init__(self, field: str) -> None:
        self.field = field
        super().__init__(f"record is missing field {field!r}")


class CompletionUnparseableError(RecordError):
    pass


@dataclass(frozen=True)
class PromptSpec:
    """The controllable prompt parameters."""

    width: int
    height: int
    base_tile: str
    border_tile: str
    pattern_tiles: tuple[str, ...]
    percent_pattern_tiles: float

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"invalid size {self.width}x{self.height}")
        if self.base_tile not in WALKABLE_TILES:
            raise ValueError(f"base tile {self.base_tile!r} is not walkable")
        if self.border_tile not in WALL_TILES:
            raise ValueError(f"border tile {self.border_tile!r} is not a wall tile")
        if len(self.pattern_tiles) > 2:
            raise ValueError("at most two pattern tiles")
        for tile in self.pattern_tiles:
            if tile not in WALKABLE_TILES or tile == self.base_tile:
                raise ValueError(f"bad pattern tile {tile!r}")
        if not 0.0 <= self.percent_pattern_tiles <= 100.0:
            raise ValueError(f"percent out of range: {self.percent_pattern_tiles}")


@dataclass(frozen=True)
class FinetuneRecord:
    """One training row: prompt ending in "->", completion holding the level."""

    prompt: str
    completion: str


def rendered_percent(percent: float) -> int:
    """Prompt rendering of the pattern percentage: round half up to an integer."""
    return int(math.floor(percent + 0.5))


def build_prompt(spec: PromptSpec) -> str:
    """Render the canonical prompt string for a spec. Byte-deterministic."""
    if len(spec.pattern_tiles) == 2:
        patterns = (
            f'There are 2 pattern tiles, "{spec.pattern_tiles[0]}" and '
            f'"{spec.pattern_tiles[1]}", '
        )
    elif len(spec.pattern_tiles) == 1:
        patterns = f'There is 1 pattern tile, "{spec.pattern_tiles[0]}", '
    else:
        patterns = "There are 0 pattern tiles, "
    return (
        f"The size of the level is {spec.width}x{spec.height}, "
        f'the base tile is "{spec.base_tile}", '
        f'and the border tile is "{spec.border_tile}". '
        f"{patterns}"
        f'"F" is the water tile, "J" is the door tile, '
        f"and the percentage of pattern tiles is {rendered_percent(spec.percent_pattern_tiles)}%."
        f"{PROMPT_END}"
    )


class _PromptScanner:
    """Cursor-based matcher that reports the first divergent position."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def literal(self, fragment: str) -> None:
        if not self.text.startswith(fragment, self.pos):
            matched = 0
            while (
                matched < len(fragment)
                and self.pos + matched < len(self.text)
                and self.text[self.pos + matched] == fragment[matched]
            ):
                matched += 1
            raise TemplateMismatchError(self.pos + matched, repr(fragment))
        self.pos += len(fragment)

    def take(self, pattern: str, expected: str) -> str:
        match = re.compile(pattern).match(self.text, self.pos)
        if not match:
            raise TemplateMismatchError(self.pos, expected)
        self.pos = match.end()
        return match.group(0)

    def peek(self, fragment: str) -> bool:
        return self.text.startswith(fragment, self.pos)

    def end(self) -> None:
        if self.pos != len(self.text):
            raise TemplateMismatchError(self.pos, "end of prompt")


def parse_prompt(text: str) -> PromptSpec:
    """Recover a PromptSpec from canonical prompt text.

    The percentage comes back as the rendered integer. Raises
    TemplateMismatchError at the first divergent character.
    """
    scan = _PromptScanner(text)
    scan.literal("The size of the level is ")
    width = int(scan.take(r"\d+", "width"))
    scan.literal("x")
    height = int(scan.take(r"\d+", "height"))
    scan.literal(', the base tile is "')
    base = scan.take(r"[ABC]", "walkable base tile")
    scan.literal('", and the border tile is "')
    border = scan.take(r"[E#]", "wall border tile")
    scan.literal('". ')
    if scan.peek("There are 2 pattern tiles, "):
        scan.literal('There are 2 pattern tiles, "')
        p0 = scan.take(r"[ABC]", "pattern tile")
        scan.literal('" and "')
        p1 = scan.take(r"[ABC]", "pattern tile")
        scan.literal('", ')
        patterns: tuple[str, ...] = (p0, p1)
    elif scan.peek("There is 1 pattern tile, "):
        scan.literal('There is 1 pattern tile, "')
        p0 = scan.take(r"[ABC]", "pattern tile")
        scan.literal('", ')
        patterns = (p0,)
    elif scan.peek("There are 0 pattern tiles, "):
        scan.literal("There are 0 pattern tiles, ")
        patterns = ()
    else:
        raise TemplateMismatchError(scan.pos, "pattern tile clause")
    scan.literal('"F" is the water tile, "J" is the door tile, ')
    scan.literal("and the percentage of pattern tiles is ")
    percent = int(scan.take(r"\d+", "percentage"))
    scan.literal("%.")
    scan.literal(PROMPT_END)
    scan.end()
    try:
        return PromptSpec(
            width=width,
            height=height,
            base_tile=base,
            border_tile=border,
            pattern_tiles=patterns,
            percent_pattern_tiles=float(percent),
        )
    except ValueError as exc:
        raise TemplateMismatchError(0, str(exc)) from exc


def derive_spec(grid: Grid) -> PromptSpec:
    """Prompt parameters of an existing grid (census plus dimensions)."""
    census = tile_census(grid)
    return PromptSpec(
        width=grid.width,
        height=grid.height,
        base_tile=census.base_tile,
        border_tile=census.border_tile,
        pattern_tiles=census.pattern_tiles,
        percent_pattern_tiles=census.percent_pattern,
    )


def make_record(grid: Grid) -> FinetuneRecord:
    """Training record for a grid: derived prompt plus terminated completion.

    The completion starts with a single space, the completion-style
    convention shared by every backend.
    """
    return FinetuneRecord(
        prompt=build_prompt(derive_spec(grid)),
        completion=" " + serialize_level(grid, with_terminator=True),
    )


def record_grid(record: FinetuneRecord) -> Grid:
    """The grid held in a record's completion."""
    return parse_level(record.completion)


def record_to_json_line(record: FinetuneRecord) -> str:
    return json.dumps(
        {"prompt": record.prompt, "completion": record.completion},
        ensure_ascii=False,
    )


def parse_record(json_line: str) -> FinetuneRecord:
    """Parse one JSONL line into a FinetuneRecord, validating the completion."""
    try:
        obj = json.loads(json_line)
    except json.JSONDecodeError as exc:
        raise MalformedJsonError(str(exc)) from exc
    if not isinstance(obj, dict):
        raise MalformedJsonError("record line is not a JSON object")
    for field in ("prompt", "completion"):
        if field not in obj or not isinstance(obj[field], str):
            raise MissingFieldError(field)
    record = FinetuneRecord(prompt=obj["prompt"], completion=obj["completion"])
    try:
        parse_level(record.completion)
    except LevelFormatError as exc:
        raise CompletionUnparseableError(str(exc)) from exc
    return record


def write_finetune_jsonl(records: Iterable[FinetuneRecord], path: Path | str) -> None:
    """Write records as UTF-8 JSONL: one object per line, LF endings, no BOM."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record_to_json_line(record))
            fh.write("\n")


def read_finetune_jsonl(path: Path | str) -> Iterator[tuple[int, FinetuneRecord]]:
    """Yield (1-based line number, record) pairs from a JSONL file."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            yield lineno, parse_record(line)
