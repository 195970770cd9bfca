"""Playability validation: the seven room constraints, with per-constraint diagnostics.

A room passes when all of C1..C7 hold:

    C1  walkable tiles form a strict majority of the interior
    C2  obstacles touching the door-connected path keep their distance
        (no two clusters closer than Chebyshev distance 2)
    C3  water may cluster (a permission realized inside C2's cluster rule)
    C4  walls are single rows: no 2x2 block of wall tiles
    C5  exactly one strict-majority base tile among the walkable symbols
    C6  junctions pair into legal doors, and at least two doors connect
    C7  width and height are even

The report carries offending cells per constraint and a repairability score
(total offending cells over failed constraints) used to pick candidates worth
hand-repairing.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    Grid,
    JUNCTION_TILE,
    TRAVERSABLE_TILES,
    UNWALKABLE_TILES,
    VERTICAL_DOOR_SPAN,
    HORIZONTAL_DOOR_SPAN,
    WALKABLE_TILES,
    WALL_TILES,
)

Coord = tuple[int, int]

CONSTRAINT_IDS = ("C1", "C2", "C3", "C4", "C5", "C6", "C7")

CONSTRAINT_NAMES = {
    "C1": "walkable majority",
    "C2": "obstacle separation",
    "C3": "water clustering",
    "C4": "thin walls",
    "C5": "tile roles",
    "C6": "doors",
    "C7": "even dimensions",
}


@dataclass(frozen=True)
class Door:
    """A junction pair on one wall with the walkable gap cells between them."""

    wall: str  # top | bottom | left | right
    junctions: tuple[Coord, Coord]
    gap_cells: tuple[Coord, ...]
    orientation: str  # vertical | horizontal

    @property
    def cells(self) -> tuple[Coord, ...]:
        return (self.junctions[0],) + self.gap_cells + (self.junctions[1],)


@dataclass(frozen=True)
class ConstraintCheck:
    passed: bool
    offending: tuple[Coord, ...]
    message: str


@dataclass(frozen=True)
class PlayabilityReport:
    verdict: bool
    per_constraint: dict[str, ConstraintCheck]
    doors: tuple[Door, ...]
    repairability: int
    wide_region: frozenset[Coord]
    all_doors_connected: bool | None  # non-gating diagnostic; None with < 2 doors

    @property
    def failed_ids(self) -> tuple[str, ...]:
        return tuple(cid for cid in CONSTRAINT_IDS if not self.per_constraint[cid].passed)

    def to_json_dict(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "constraints": [
                {
                    "id": cid,
                    "pass": check.passed,
                    "cells": [list(rc) for rc in check.offending],
                    "message": check.message,
                }
                for cid, check in sorted(self.per_constraint.items())
            ],
            "repairability": self.repairability,
            "doors": [
                {
                    "wall": d.wall,
                    "orientation": d.orientation,
                    "junctions": [list(rc) for rc in d.junctions],
                    "gap_cells": [list(rc) for rc in d.gap_cells],
                }
                for d in self.doors
            ],
            "wide_region": sorted(list(rc) for rc in self.wide_region),
            "all_doors_connected": self.all_doors_connected,
        }


def _wall_line(grid: Grid, wall: str) -> list[Coord]:
    if wall == "top":
        return [(0, c) for c in range(grid.width)]
    if wall == "bottom":
        return [(grid.height - 1, c) for c in range(grid.width)]
    if wall == "left":
        return [(r, 0) for r in range(grid.height)]
    return [(r, grid.width - 1) for r in range(grid.height)]


def find_doors(grid: Grid) -> tuple[list[Door], list[Coord]]:
    """Pair border junctions into doors.

    Returns the legal doors plus the offending cells: interior junctions,
    corner junctions, unpaired junctions, and wrongly spaced or blocked
    pairs. Legal pairs are always consecutive along a wall because gap
    cells must be walkable (a junction in the gap disqualifies the pair).
    """
    h, w = grid.height, grid.width
    corners = {(0, 0), (0, w - 1), (h - 1, 0), (h - 1, w - 1)}
    offenders: list[Coord] = []
    doors: list[Door] = []

    for r, c in grid.coords():
        if grid.cell(r, c) != JUNCTION_TILE:
            continue
        if (r, c) in corners:
            offenders.append((r, c))
        elif not grid.is_border(r, c):
            offenders.append((r, c))

    for wall in ("top", "bottom", "left", "right"):
        line = _wall_line(grid, wall)
        last = len(line) - 1
        span = HORIZONTAL_DOOR_SPAN if wall in ("top", "bottom") else VERTICAL_DOOR_SPAN
        orientation = "horizontal" if wall in ("top", "bottom") else "vertical"
        positions = [
            i for i in range(1, last)
            if grid.cell(*line[i]) == JUNCTION_TILE
        ]
        i = 0
        while i < len(positions):
            if i + 1 < len(positions):
                a, b = positions[i], positions[i + 1]
                gaps = [line[p] for p in range(a + 1, b)]
                if b - a == span and all(grid.cell(r, c) in WALKABLE_TILES for r, c in gaps):
                    doors.append(
                        Door(
                            wall=wall,
                            junctions=(line[a], line[b]),
                            gap_cells=tuple(gaps),
                            orientation=orientation,
                        )
                    )
                    i += 2
                    continue
            offenders.append(line[positions[i]])
            i += 1

    return doors, offenders


def wide_walkable_region(grid: Grid) -> frozenset[Coord]:
    """Traversable cells that fit in at least one fully traversable 2x2 block."""
    rows = grid.rows
    region: set[Coord] = set()
    for r in range(grid.height - 1):
        for c in range(grid.width - 1):
            if (
                rows[r][c] in TRAVERSABLE_TILES
                and rows[r][c + 1] in TRAVERSABLE_TILES
                and rows[r + 1][c] in TRAVERSABLE_TILES
                and rows[r + 1][c + 1] in TRAVERSABLE_TILES
            ):
                region.update(((r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)))
    return frozenset(region)


def _components(cells: Iterable[Coord]) -> dict[Coord, int]:
    """4-connected component labels over an arbitrary cell set."""
    cells = set(cells)
    labels: dict[Coord, int] = {}
    next_label = 0
    for start in sorted(cells):
        if start in labels:
            continue
        queue = deque([start])
        labels[start] = next_label
        while queue:
            r, c = queue.popleft()
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if (nr, nc) in cells and (nr, nc) not in labels:
                    labels[(nr, nc)] = next_label
                    queue.append((nr, nc))
        next_label += 1
    return labels


def _obstacle_clusters(grid: Grid) -> dict[Coord, int]:
    """Cluster labels for unwalkable cells; everything touching the border ring
    is merged into a single cluster (label -1)."""
    unwalkable = [rc for rc in grid.coords() if grid.cell(*rc) in UNWALKABLE_TILES]
    labels = _components(unwalkable)
    border_labels = {
        label for (r, c), label in labels.items() if grid.is_border(r, c)
    }
    return {
        rc: (-1 if label in border_labels else label)
        for rc, label in labels.items()
    }


def validate(grid: Grid) -> PlayabilityReport:
    """Evaluate all seven constraints and assemble the playability report."""
    h, w = grid.height, grid.width
    interior = [(r, c) for r in range(1, h - 1) for c in range(1, w - 1)]

    checks: dict[str, ConstraintCheck] = {}

    # C1: strict walkable majority of the interior.
    interior_unwalkable = [rc for rc in interior if grid.cell(*rc) not in WALKABLE_TILES]
    walkable_count = len(interior) - len(interior_unwalkable)
    c1_pass = 2 * walkable_count > len(interior)
    checks["C1"] = ConstraintCheck(
        c1_pass,
        () if c1_pass else tuple(sorted(interior_unwalkable)),
        f"{walkable_count}/{len(interior)} interior cells walkable"
        + ("" if c1_pass else "; walkable tiles must exceed half the interior"),
    )

    doors, door_offenders = find_doors(grid)
    region = wide_walkable_region(grid)
    region_labels = _components(region)

    # A door may touch several region components in degenerate grids, so
    # track the full set per door.
    door_components: list[set[int]] = [
        {region_labels[cell] for cell in door.cells if cell in region_labels}
        for door in doors
    ]
    connected_components = set().union(*door_components) if door_components else set()
    door_connected = {
        rc for rc, label in region_labels.items() if label in connected_components
    }

    # C2: obstacles flanking the door-connected path stay 2 apart. Only
    # diagonal contact between distinct clusters can violate this (orthogonal
    # contact would merge the clusters).
    clusters = _obstacle_clusters(grid)
    adjacent: set[Coord] = set()
    for r, c in interior:
        if grid.cell(r, c) not in UNWALKABLE_TILES:
            continue
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if (r + dr, c + dc) in door_connected:
                    adjacent.add((r, c))
                    break
            else:
                continue
            break
    c2_offenders: set[Coord] = set()
    for r, c in adjacent:
        for dr, dc in ((-1, -1), (-1, 1), (1, -1), (1, 1)):
            v = (r + dr, c + dc)
            if v in adjacent and clusters[v] != clusters[(r, c)]:
                c2_offenders.add((r, c))
                c2_offenders.add(v)
    checks["C2"] = ConstraintCheck(
        not c2_offenders,
        tuple(sorted(c2_offenders)),
        "obstacle clusters on the path are well separated"
        if not c2_offenders
        else "distinct obstacle clusters touch diagonally along the path",
    )

    # C3: water clustering is a permission; same-cluster contact is already
    # exempt from C2, so there is nothing to violate.
    checks["C3"] = ConstraintCheck(True, (), "water may form clusters")

    # C4: no 2x2 block made entirely of wall tiles.
    c4_offenders: set[Coord] = set()
    rows = grid.rows
    for r in range(h - 1):
        for c in range(w - 1):
            if (
                rows[r][c] in WALL_TILES
                and rows[r][c + 1] in WALL_TILES
                and rows[r + 1][c] in WALL_TILES
                and rows[r + 1][c + 1] in WALL_TILES
            ):
                c4_offenders.update(((r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)))
    checks["C4"] = ConstraintCheck(
        not c4_offenders,
        tuple(sorted(c4_offenders)),
        "walls are single rows" if not c4_offenders else "2x2 wall block found",
    )

    # C5: a unique strict-majority base tile among walkable symbols.
    counts = grid.counts()
    walkable_counts = {s: counts[s] for s in WALKABLE_TILES if counts.get(s, 0) > 0}
    if not walkable_counts:
        checks["C5"] = ConstraintCheck(False, (), "no walkable tiles present")
    else:
        top = max(walkable_counts.values())
        tied = [s for s, n in walkable_counts.items() if n == top]
        if len(tied) == 1:
            checks["C5"] = ConstraintCheck(True, (), f"base tile {tied[0]!r}")
        else:
            offending = tuple(
                sorted(rc for rc in grid.coords() if grid.cell(*rc) in tied)
            )
            checks["C5"] = ConstraintCheck(
                False, offending, f"tiles {'/'.join(sorted(tied))} tie for base"
            )

    # C6: junction geometry plus door-to-door reachability via the wide region.
    c6_offenders = set(door_offenders)
    if len(doors) >= 2:
        reachable_pair = any(
            door_components[i] & door_components[j]
            for i in range(len(doors))
            for j in range(i + 1, len(doors))
        )
        if not reachable_pair:
            for door in doors:
                c6_offenders.update(door.junctions)
        all_connected = all(
            door_components[i] & door_components[j]
            for i in range(len(doors))
            for j in range(i + 1, len(doors))
        )
    else:
        reachable_pair = True
        all_connected = None
    checks["C6"] = ConstraintCheck(
        not c6_offenders and reachable_pair,
        tuple(sorted(c6_offenders)),
        f"{len(doors)} door(s)"
        + ("" if not c6_offenders else "; junctions misplaced or doors unreachable"),
    )

    # C7: even width and height.
    c7_offenders: set[Coord] = set()
    if w % 2 != 0:
        c7_offenders.update((r, w - 1) for r in range(h))
    if h % 2 != 0:
        c7_offenders.update((h - 1, c) for c in range(w))
    checks["C7"] = ConstraintCheck(
        not c7_offenders,
        tuple(sorted(c7_offenders)),
        f"{w}x{h}" + ("" if not c7_offenders else " has odd dimension(s)"),
    )

    verdict = all(check.passed for check in checks.values())
    repairability = sum(
        len(check.offending) for check in checks.values() if not check.passed
    )
    return PlayabilityReport(
        verdict=verdict,
        per_constraint=checks,
        doors=tuple(doors),
        repairability=repairability,
        wide_region=region,
        all_doors_connected=all_connected,
    )


def repairability_rank(
    reports: Sequence[tuple[Grid, PlayabilityReport]], k: int
) -> list[Grid]:
    """The k failing grids easiest to repair.

    Sorted by repairability, then by number of failed constraints, then by
    input order; passing grids are excluded.
    """
    failing = [
        (report.repairability, len(report.failed_ids), idx, grid)
        for idx, (grid, report) in enumerate(reports)
        if not report.verdict
    ]
    failing.sort(key=lambda item: item[:3])
    return [grid for _, _, _, grid in failing[: max(k, 0)]]
