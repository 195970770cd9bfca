"""Synthetic playable rooms for demos, tests, and trying the pipeline without
real hand-made data.

Every builder is deterministic; rooms come out playable unless the caller
asks for something structurally impossible.
"""

from __future__ import annotations

from .core import Grid
from .dataset import Dataset, Provenance


def make_room(
    width: int = 16,
    height: int = 12,
    *,
    n_b: int = 6,
    n_c: int = 3,
    vdoor_row: int = 3,
    hdoor_col: int = 3,
    border: str = "E",
    wall_stub_row: int | None = None,
    water_block: tuple[int, int] | None = None,
) -> Grid:
    """Build a bordered room with two doors and B/C pattern fills.

    The vertical door sits on the left wall at rows (vdoor_row, vdoor_row+2),
    the horizontal door on the top wall at columns (hdoor_col, hdoor_col+3).
    B and C cells fill interior positions row-major from the top-left, so
    rooms with distinct (n_b, n_c) are distinct grids. An optional
    single-row wall stub attaches to the left border and an optional 1x2
    water block is placed clear of other obstacles.
    """
    if width % 2 or height % 2:
        raise ValueError("room dimensions must be even")
    if not (1 <= vdoor_row and vdoor_row + 2 <= height - 2):
        raise ValueError("vertical door out of range")
    if not (1 <= hdoor_col and hdoor_col + 3 <= width - 2):
        raise ValueError("horizontal door out of range")

    cells = [
        [border if r in (0, height - 1) or c in (0, width - 1) else "A" for c in range(width)]
        for r in range(height)
    ]

    cells[vdoor_row][0] = "J"
    cells[vdoor_row + 1][0] = "A"
    cells[vdoor_row + 2][0] = "J"
    cells[0][hdoor_col] = "J"
    cells[0][hdoor_col + 1] = "A"
    cells[0][hdoor_col + 2] = "A"
    cells[0][hdoor_col + 3] = "J"

    blocked: set[tuple[int, int]] = set()
    if wall_stub_row is not None:
        stub_len = max(2, width // 3)
        for c in range(1, 1 + stub_len):
            cells[wall_stub_row][c] = border
            blocked.add((wall_stub_row, c))
        # keep the stub clear of the pattern fill so counts stay exact
        for c in range(1 + stub_len, width - 1):
            blocked.add((wall_stub_row, c))
    if water_block is not None:
        wr, wc = water_block
        for rc in ((wr, wc), (wr, wc + 1)):
            cells[rc[0]][rc[1]] = "F"
            blocked.add(rc)
        for r in range(wr - 1, wr + 2):
            for c in range(wc - 1, wc + 3):
                blocked.add((r, c))

    fill = [
        (r, c)
        for r in range(1, height - 1)
        for c in range(1, width - 1)
        if (r, c) not in blocked
    ]
    if n_b + n_c > len(fill):
        raise ValueError("too many pattern cells for the interior")
    for r, c in fill[:n_b]:
        cells[r][c] = "B"
    for r, c in fill[n_b : n_b + n_c]:
        cells[r][c] = "C"

    return Grid(tuple("".join(row) for row in cells))


def two_pattern_rooms(count: int = 120, *, width: int = 16, height: int = 12) -> list[Grid]:
    """Distinct two-pattern rooms whose transform orbits never collide.

    Every room keeps n_b > n_c >= 1 so pattern-swapped variants cannot
    coincide with any unswapped room, and the asymmetric fill plus off-center
    doors keep all flip/rotation variants distinct.
    """
    rooms = []
    n_b = 2
    n_c = 1
    while len(rooms) < count:
        rooms.append(make_room(width, height, n_b=n_b, n_c=n_c))
        n_c += 1
        if n_c >= n_b:
            n_b += 1
            n_c = 1
    return rooms


def seed_rooms(count: int = 60) -> list[Grid]:
    """A varied set of playable rooms standing in for a hand-made dataset."""
    shapes = [
        dict(width=16, height=12),
        dict(width=12, height=10),
        dict(width=10, height=8),
        dict(width=14, height=12, wall_stub_row=6),
        dict(width=12, height=12, water_block=(3, 8)),
        dict(width=10, height=10),
    ]
    rooms = []
    n_b = 2
    n_c = 1
    for i in range(count):
        kwargs = dict(shapes[i % len(shapes)])
        kwargs["n_b"] = n_b
        kwargs["n_c"] = n_c
        rooms.append(make_room(**kwargs))
        n_c += 1
        if n_c >= n_b:
            n_b += 1
            n_c = 1
    return rooms


def seed_dataset(count: int = 60) -> Dataset:
    """A dataset of seed_rooms marked as handmade, round 0."""
    dataset = Dataset()
    for grid in seed_rooms(count):
        dataset.add_if_new(grid, Provenance(kind="handmade"), 0)
    return dataset
