"""Tile alphabet, the Grid type, text (de)serialization, and structural transforms.

Rooms are rectangular character grids over a fixed seven-symbol alphabet:

    A, B, C   walkable pattern tiles
    E, #      wall tiles
    F         water
    J         junction (door marker on the border)

The on-disk text form is one row per line, each row terminated by a single
"\\n", with an optional ". XUT" terminator after the final newline.
"""

from __future__ import annotations

import functools
from collections import Counter
from dataclasses import dataclass

import numpy as np

WALKABLE_TILES = ("A", "B", "C")
WALL_TILES = ("E", "#")
WATER_TILE = "F"
JUNCTION_TILE = "J"

ALPHABET = frozenset(WALKABLE_TILES) | frozenset(WALL_TILES) | {WATER_TILE, JUNCTION_TILE}
UNWALKABLE_TILES = frozenset(WALL_TILES) | {WATER_TILE}
# Traversable = cells a player can occupy; junctions are door openings.
TRAVERSABLE_TILES = frozenset(WALKABLE_TILES) | {JUNCTION_TILE}

LEVEL_TERMINATOR = ". XUT"

MIN_SIDE = 4  # border ring plus a 2x2 interior

# Junction separation along the wall: a vertical door spans 2 rows (one gap
# tile between the pair), a horizontal door spans 3 columns (two gap tiles).
VERTICAL_DOOR_SPAN = 2
HORIZONTAL_DOOR_SPAN = 3


class LevelFormatError(ValueError):
    """Base class for level text / grid structure errors."""


class EmptyLevelError(LevelFormatError):
    def __init__(self) -> None:
        super().__init__("level text contains no rows")


class RaggedRowsError(LevelFormatError):
    def __init__(self, row: int, length: int, expected: int) -> None:
        self.row = row
        super().__init__(f"row {row} has length {length}, expected {expected}")


class IllegalSymbolError(LevelFormatError):
    def __init__(self, row: int, col: int, symbol: str) -> None:
        self.row = row
        self.col = col
        self.symbol = symbol
        super().__init__(f"illegal symbol {symbol!r} at row {row}, col {col}")


class TooSmallError(LevelFormatError):
    def __init__(self, width: int, height: int) -> None:
        super().__init__(f"grid must be at least {MIN_SIDE}x{MIN_SIDE}, got {width}x{height}")


class CensusError(ValueError):
    """Base class for tile-census preconditions."""


class NoWalkableTilesError(CensusError):
    def __init__(self) -> None:
        super().__init__("grid contains no walkable tiles")


class NoBorderWallError(CensusError):
    def __init__(self) -> None:
        super().__init__("grid has no wall tiles on its border ring")


class DoorRelocationError(ValueError):
    """A junction pair sits too close to a corner to respace after rotation."""

    def __init__(self, junctions: tuple[tuple[int, int], tuple[int, int]]) -> None:
        self.junctions = junctions
        super().__init__(f"cannot respace door with junctions at {junctions[0]} and {junctions[1]}")


@dataclass(frozen=True)
class Grid:
    """Immutable rectangular tile grid, stored as a tuple of row strings."""

    rows: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise EmptyLevelError()
        width = len(self.rows[0])
        for r, row in enumerate(self.rows):
            if len(row) != width:
                raise RaggedRowsError(r, len(row), width)
        for r, row in enumerate(self.rows):
            for c, sym in enumerate(row):
                if sym not in ALPHABET:
                    raise IllegalSymbolError(r, c, sym)
        if width < MIN_SIDE or len(self.rows) < MIN_SIDE:
            raise TooSmallError(width, len(self.rows))

    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def height(self) -> int:
        return len(self.rows)

    def cell(self, r: int, c: int) -> str:
        return self.rows[r][c]

    def with_cell(self, r: int, c: int, symbol: str) -> "Grid":
        """Return a copy with one cell replaced."""
        if symbol not in ALPHABET:
            raise IllegalSymbolError(r, c, symbol)
        row = self.rows[r]
        return Grid(self.rows[:r] + (row[:c] + symbol + row[c + 1 :],) + self.rows[r + 1 :])

    def is_border(self, r: int, c: int) -> bool:
        return r == 0 or r == self.height - 1 or c == 0 or c == self.width - 1

    def coords(self):
        for r in range(self.height):
            for c in range(self.width):
                yield r, c

    def counts(self) -> Counter:
        return Counter("".join(self.rows))

    @functools.cached_property
    def codes(self) -> np.ndarray:
        """Cell symbols as a (height, width) uint8 array of character codes."""
        return np.frombuffer("".join(self.rows).encode("ascii"), dtype=np.uint8).reshape(
            self.height, self.width
        )


@dataclass(frozen=True)
class TileCensus:
    """Tile-role summary of a grid: base/pattern/border tiles and pattern share."""

    counts: dict[str, int]
    base_tile: str
    pattern_tiles: tuple[str, ...]
    border_tile: str
    percent_pattern: float


def parse_level(text: str) -> Grid:
    """Parse level text into a Grid.

    Accepts an optional trailing ". XUT" terminator and surrounding
    whitespace, both of which are stripped.
    """
    stripped = text.strip()
    if stripped.endswith(LEVEL_TERMINATOR):
        stripped = stripped[: -len(LEVEL_TERMINATOR)].rstrip()
    if not stripped:
        raise EmptyLevelError()
    return Grid(tuple(stripped.split("\n")))


def serialize_level(grid: Grid, with_terminator: bool = False) -> str:
    """Render a grid to text: every row newline-terminated, optional ". XUT" suffix."""
    text = "".join(row + "\n" for row in grid.rows)
    if with_terminator:
        text += LEVEL_TERMINATOR
    return text


def flip_horizontal(grid: Grid) -> Grid:
    return Grid(tuple(row[::-1] for row in grid.rows))


def flip_vertical(grid: Grid) -> Grid:
    return Grid(grid.rows[::-1])


def tile_census(grid: Grid) -> TileCensus:
    """Compute tile roles for a grid.

    The base tile is the most frequent walkable symbol (ties broken A < B < C),
    pattern tiles are the remaining walkable symbols present ordered by
    descending count then alphabetically, and the border tile is the wall
    symbol most frequent on the border ring (E before # on ties). The pattern
    percentage is taken over all tiles, border included.
    """
    counts = grid.counts()
    walkable = [(s, counts[s]) for s in WALKABLE_TILES if counts.get(s, 0) > 0]
    if not walkable:
        raise NoWalkableTilesError()
    base_tile = max(walkable, key=lambda sc: (sc[1], -ord(sc[0])))[0]
    patterns = sorted(
        (s for s, _ in walkable if s != base_tile),
        key=lambda s: (-counts[s], s),
    )

    border_counts = Counter(
        grid.cell(r, c) for r, c in grid.coords() if grid.is_border(r, c)
    )
    wall_on_border = [(s, border_counts[s]) for s in WALL_TILES if border_counts.get(s, 0) > 0]
    if not wall_on_border:
        raise NoBorderWallError()
    border_tile = max(wall_on_border, key=lambda sc: (sc[1], -ord(sc[0])))[0]

    pattern_total = sum(counts[s] for s in patterns)
    percent = 100.0 * pattern_total / (grid.width * grid.height)
    return TileCensus(
        counts=dict(counts),
        base_tile=base_tile,
        pattern_tiles=tuple(patterns),
        border_tile=border_tile,
        percent_pattern=percent,
    )


def pattern_percent(grid: Grid) -> float:
    """Pattern-tile percentage over all tiles; 0.0 for grids with no walkable tiles."""
    try:
        return tile_census(grid).percent_pattern
    except NoWalkableTilesError:
        return 0.0
    except NoBorderWallError:
        counts = grid.counts()
        walkable = [(s, counts[s]) for s in WALKABLE_TILES if counts.get(s, 0) > 0]
        base = max(walkable, key=lambda sc: (sc[1], -ord(sc[0])))[0]
        total = sum(n for s, n in walkable if s != base)
        return 100.0 * total / (grid.width * grid.height)


def swap_patterns(grid: Grid, census: TileCensus | None = None) -> Grid:
    """Exchange the grid's two pattern tiles; identity when fewer than two exist."""
    if census is None:
        census = tile_census(grid)
    if len(census.pattern_tiles) < 2:
        return grid
    p0, p1 = census.pattern_tiles[0], census.pattern_tiles[1]
    table = str.maketrans({p0: p1, p1: p0})
    return Grid(tuple(row.translate(table) for row in grid.rows))


def _rotate_cw(grid: Grid) -> Grid:
    # (r, c) -> (c, height - 1 - r)
    h = grid.height
    return Grid(
        tuple(
            "".join(grid.rows[h - 1 - c][r] for c in range(h))
            for r in range(grid.width)
        )
    )


def _wall_line(grid: Grid, wall: str) -> list[tuple[int, int]]:
    """Cells of one wall in increasing wall coordinate, corners included."""
    if wall == "top":
        return [(0, c) for c in range(grid.width)]
    if wall == "bottom":
        return [(grid.height - 1, c) for c in range(grid.width)]
    if wall == "left":
        return [(r, 0) for r in range(grid.height)]
    return [(r, grid.width - 1) for r in range(grid.height)]


def _source_door_pairs(grid: Grid, wall: str, span: int) -> list[tuple[int, int]]:
    """Junction pairs on one wall at the given span with walkable gaps.

    Positions are wall coordinates. Pairing is greedy over sorted junction
    positions; gap cells may not hold junctions, so legal pairs are always
    consecutive.
    """
    line = _wall_line(grid, wall)
    last = len(line) - 1
    positions = [
        i for i, (r, c) in enumerate(line)
        if grid.cell(r, c) == JUNCTION_TILE and 0 < i < last
    ]
    pairs = []
    i = 0
    while i < len(positions) - 1:
        a, b = positions[i], positions[i + 1]
        gaps_ok = all(
            grid.cell(*line[p]) in WALKABLE_TILES for p in range(a + 1, b)
        )
        if b - a == span and gaps_ok:
            pairs.append((a, b))
            i += 2
        else:
            i += 1
    return pairs


def _default_door_tiles(grid: Grid) -> tuple[str, str]:
    """Base and border tiles for door respacing, with lenient fallbacks."""
    counts = grid.counts()
    walkable = [(s, counts[s]) for s in WALKABLE_TILES if counts.get(s, 0) > 0]
    base = max(walkable, key=lambda sc: (sc[1], -ord(sc[0])))[0] if walkable else "A"
    border_counts = Counter(
        grid.cell(r, c) for r, c in grid.coords() if grid.is_border(r, c)
    )
    wall = [(s, border_counts[s]) for s in WALL_TILES if border_counts.get(s, 0) > 0]
    border = max(wall, key=lambda sc: (sc[1], -ord(sc[0])))[0] if wall else "E"
    return base, border


def rotate90(grid: Grid) -> Grid:
    """Rotate clockwise, then respace doors for the new wall orientation.

    A vertical door lands on a top/bottom wall still 2 apart and is expanded
    to the horizontal span of 3; a horizontal door lands on a left/right wall
    3 apart and is shrunk to 2. The junction nearer the grid origin stays
    fixed; the other junction moves outward, or inward past the fixed one if
    the wall ends first. Cells between the pair become the base tile and
    vacated door cells revert to the border tile.

    Raises DoorRelocationError when neither placement fits.
    """
    rotated = _rotate_cw(grid)

    moves = []  # (wall, old_pair, target_span)
    for wall in ("top", "bottom"):
        for pair in _source_door_pairs(rotated, wall, VERTICAL_DOOR_SPAN):
            moves.append((wall, pair, HORIZONTAL_DOOR_SPAN))
    for wall in ("left", "right"):
        for pair in _source_door_pairs(rotated, wall, HORIZONTAL_DOOR_SPAN):
            moves.append((wall, pair, VERTICAL_DOOR_SPAN))
    if not moves:
        return rotated

    base, border = _default_door_tiles(rotated)

    # Reserve every door's current footprint so one relocation cannot
    # overwrite another door; release each footprint as it is processed.
    reserved: dict[tuple[str, int], set[int]] = {}
    for wall, (a, b), _ in moves:
        for line_key in _reserve_keys(rotated, wall):
            reserved.setdefault(line_key, set()).update(range(a, b + 1))

    cells = [list(row) for row in rotated.rows]
    for wall, (a, b), span in moves:
        line = _wall_line(rotated, wall)
        last = len(line) - 1
        keys = _reserve_keys(rotated, wall)
        for key in keys:
            reserved[key] -= set(range(a, b + 1))

        def fits(lo: int, hi: int) -> bool:
            if lo < 1 or hi > last - 1:
                return False
            span_cells = set(range(lo, hi + 1))
            return all(not (reserved.get(key, set()) & span_cells) for key in keys)

        if fits(a, a + span):
            new_a, new_b = a, a + span
        elif fits(a - span, a):
            new_a, new_b = a - span, a
        else:
            raise DoorRelocationError((line[a], line[b]))

        for p in range(min(a, new_a), max(b, new_b) + 1):
            r, c = line[p]
            if p == new_a or p == new_b:
                cells[r][c] = JUNCTION_TILE
            elif new_a < p < new_b:
                cells[r][c] = base
            else:
                cells[r][c] = border
        for key in keys:
            reserved[key].update(range(new_a, new_b + 1))

    return Grid(tuple("".join(row) for row in cells))


def _reserve_keys(grid: Grid, wall: str) -> list[tuple[str, int]]:
    """Reservation-map keys for a wall; opposite walls never collide."""
    if wall in ("top", "bottom"):
        return [("row", 0 if wall == "top" else grid.height - 1)]
    return [("col", 0 if wall == "left" else grid.width - 1)]
