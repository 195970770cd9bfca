"""Shared hypothesis strategies and random-grid helpers for the test suite."""

import random

from hypothesis import strategies as st

from roomforge.core import ALPHABET, Grid

FULL_ALPHABET = sorted(ALPHABET)


@st.composite
def grids(draw, min_side=4, max_side=10, alphabet=None):
    symbols = alphabet or FULL_ALPHABET
    w = draw(st.integers(min_side, max_side))
    h = draw(st.integers(min_side, max_side))
    rows = tuple(
        draw(st.text(alphabet=symbols, min_size=w, max_size=w)) for _ in range(h)
    )
    return Grid(rows)


def random_grid(rng: random.Random, width: int, height: int, alphabet=None) -> Grid:
    symbols = alphabet or FULL_ALPHABET
    return Grid(
        tuple("".join(rng.choice(symbols) for _ in range(width)) for _ in range(height))
    )


def structured_room(rng: random.Random) -> Grid:
    """Random bordered room with planted (sometimes slightly wrong) doors.

    Exercises door pairing, path connectivity, and obstacle separation far
    more often than uniform noise does.
    """
    w = rng.choice([8, 9, 10, 11, 12])
    h = rng.choice([8, 9, 10, 12])
    cells = [
        [
            "E" if r in (0, h - 1) or c in (0, w - 1) else rng.choice("AAAABCEF#J")
            for c in range(w)
        ]
        for r in range(h)
    ]
    for _ in range(rng.randrange(4)):
        wall = rng.choice(["top", "bottom", "left", "right"])
        span = 3 if wall in ("top", "bottom") else 2
        if rng.random() < 0.2:
            span += rng.choice([-1, 1])
        length = w if wall in ("top", "bottom") else h
        if length - 2 - span < 1:
            continue
        start = rng.randrange(1, length - 1 - span)
        for p in range(start, start + span + 1):
            if wall == "top":
                rc = (0, p)
            elif wall == "bottom":
                rc = (h - 1, p)
            elif wall == "left":
                rc = (p, 0)
            else:
                rc = (p, w - 1)
            cells[rc[0]][rc[1]] = "J" if p in (start, start + span) else rng.choice("AABF")
    return Grid(tuple("".join(row) for row in cells))
