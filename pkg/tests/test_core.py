import random
from collections import Counter

import pytest
from hypothesis import given, settings

from roomforge.core import (
    DoorRelocationError,
    EmptyLevelError,
    Grid,
    IllegalSymbolError,
    NoBorderWallError,
    NoWalkableTilesError,
    RaggedRowsError,
    TooSmallError,
    flip_horizontal,
    flip_vertical,
    parse_level,
    pattern_percent,
    rotate90,
    serialize_level,
    swap_patterns,
    tile_census,
)
from roomforge.constraints import find_doors, validate
from roomforge.fixtures import make_room

from strategies import grids


class TestParseSerialize:
    def test_parse_small_room(self):
        g = parse_level("EEEE\nEAAE\nEAAE\nEEEE")
        assert (g.width, g.height) == (4, 4)
        counts = g.counts()
        assert counts["E"] == 12
        assert counts["A"] == 4

    def test_ragged_rows(self):
        with pytest.raises(RaggedRowsError) as exc:
            parse_level("EEEE\nEAE\nEEEE")
        assert exc.value.row == 1

    def test_illegal_symbol_location(self):
        with pytest.raises(IllegalSymbolError) as exc:
            parse_level("EEEE\nEAXE\nEAAE\nEEEE")
        assert (exc.value.row, exc.value.col) == (1, 2)

    def test_empty(self):
        with pytest.raises(EmptyLevelError):
            parse_level("   \n  ")

    def test_too_small(self):
        with pytest.raises(TooSmallError):
            parse_level("EEE\nEAE\nEEE")

    def test_full_room_with_terminator_roundtrips(self):
        room = make_room(16, 12)
        text = serialize_level(room, with_terminator=True)
        parsed = parse_level(text)
        assert (parsed.width, parsed.height) == (16, 12)
        assert serialize_level(parsed, with_terminator=True) == text

    def test_serialize_terminator_off(self):
        g = parse_level("EEEE\nEAAE\nEAAE\nEEEE")
        assert serialize_level(g) == "EEEE\nEAAE\nEAAE\nEEEE\n"

    def test_serialize_terminator_on(self):
        g = parse_level("EEEE\nEAAE\nEAAE\nEEEE")
        assert serialize_level(g, with_terminator=True) == "EEEE\nEAAE\nEAAE\nEEEE\n. XUT"

    def test_leading_space_and_terminator_stripped(self):
        # the completion form: leading space, trailing terminator
        g = parse_level(" EEEE\nEAAE\nEAAE\nEEEE\n. XUT")
        assert serialize_level(g) == "EEEE\nEAAE\nEAAE\nEEEE\n"

    @given(grids())
    @settings(max_examples=100)
    def test_roundtrip_property(self, g):
        assert parse_level(serialize_level(g)) == g
        assert parse_level(serialize_level(g, with_terminator=True)) == g

    def test_with_cell(self):
        g = parse_level("EEEE\nEAAE\nEAAE\nEEEE")
        g2 = g.with_cell(1, 1, "B")
        assert g2.cell(1, 1) == "B"
        assert g.cell(1, 1) == "A"  # original untouched


class TestFlips:
    @given(grids())
    @settings(max_examples=60)
    def test_involutions(self, g):
        assert flip_horizontal(flip_horizontal(g)) == g
        assert flip_vertical(flip_vertical(g)) == g

    def test_columns_reversed(self):
        g = parse_level("EEEE\nEABE\nEABE\nEEEE")
        flipped = flip_horizontal(g)
        assert flipped.rows[1] == "EBAE"
        assert flipped.rows[2] == "EBAE"

    @given(grids())
    @settings(max_examples=60)
    def test_multiset_preserved(self, g):
        assert flip_horizontal(g).counts() == g.counts()
        assert flip_vertical(g).counts() == g.counts()

    def test_door_moves_to_mirror_wall_same_verdict(self):
        room = make_room(12, 10)
        flipped = flip_horizontal(room)
        # the left-wall door is now on the right wall at mirrored rows
        doors, _ = find_doors(flipped)
        walls = {d.wall for d in doors}
        assert "right" in walls
        assert validate(room).verdict == validate(flipped).verdict is True


class TestRotate90:
    def test_doorless_dimensions_and_multiset(self):
        rng = random.Random(7)
        rows = tuple(
            "".join(rng.choice("ABCE#F") for _ in range(8)) for _ in range(10)
        )
        g = Grid(rows)
        rot = rotate90(g)
        assert (rot.width, rot.height) == (10, 8)
        assert rot.counts() == g.counts()

    def test_four_rotations_identity_doorless(self):
        rng = random.Random(11)
        g = Grid(tuple("".join(rng.choice("ABCE#F") for _ in range(6)) for _ in range(8)))
        out = g
        for _ in range(4):
            out = rotate90(out)
        assert out == g

    def test_vertical_door_becomes_valid_horizontal_door(self):
        room = make_room(16, 12, vdoor_row=3)  # junctions (3,0),(5,0)
        rot = rotate90(room)
        doors, offenders = find_doors(rot)
        assert offenders == []
        horizontal = [d for d in doors if d.orientation == "horizontal"]
        assert len(horizontal) == 1
        (r0, c0), (r1, c1) = horizontal[0].junctions
        assert r0 == r1 == 0
        assert c1 - c0 == 3
        assert len(horizontal[0].gap_cells) == 2

    def test_horizontal_door_shrinks_to_vertical(self):
        room = make_room(16, 12, hdoor_col=3)
        rot = rotate90(room)
        doors, offenders = find_doors(rot)
        assert offenders == []
        vertical = [d for d in doors if d.orientation == "vertical"]
        assert len(vertical) == 1
        (r0, _), (r1, _) = vertical[0].junctions
        assert r1 - r0 == 2

    def test_relocation_failure_near_corner(self):
        # a vertical door hugging the wall end leaves no room to respace
        cells = [["E"] * 6 for _ in range(6)]
        for r in range(1, 5):
            for c in range(1, 5):
                cells[r][c] = "A"
        cells[1][0] = "J"
        cells[2][0] = "A"
        cells[3][0] = "J"
        g = Grid(tuple("".join(row) for row in cells))
        with pytest.raises(DoorRelocationError):
            rotate90(g)


class TestSwapPatterns:
    def test_involution(self):
        room = make_room(12, 10, n_b=8, n_c=4)
        assert swap_patterns(swap_patterns(room)) == room

    def test_single_pattern_identity(self):
        room = make_room(12, 10, n_b=5, n_c=0)
        assert swap_patterns(room) == room

    def test_counts_exchange(self):
        room = make_room(16, 12, n_b=30, n_c=12)
        before = room.counts()
        assert (before["B"], before["C"]) == (30, 12)
        after = swap_patterns(room).counts()
        assert (after["B"], after["C"]) == (12, 30)
        assert after["A"] == before["A"]


class TestTileCensus:
    def test_derived_percent_example(self):
        # 8x12 room, all-E border, B=20, C=10: percent = 100*30/96 = 31.25
        room = make_room(8, 12, n_b=20, n_c=10)
        census = tile_census(room)
        assert census.base_tile == "A"
        assert census.pattern_tiles == ("B", "C")
        assert census.border_tile == "E"
        assert census.percent_pattern == pytest.approx(31.25)

    def test_all_base_no_patterns(self):
        room = make_room(10, 8, n_b=0, n_c=0)
        census = tile_census(room)
        assert census.base_tile == "A"
        assert census.pattern_tiles == ()
        assert census.percent_pattern == 0.0

    def test_tie_break_alphabetical(self):
        g = parse_level("EEEE\nEABE\nEABE\nEEEE")
        census = tile_census(g)
        assert g.counts()["A"] == g.counts()["B"]
        assert census.base_tile == "A"
        assert census.pattern_tiles == ("B",)

    @given(grids())
    @settings(max_examples=60)
    def test_counts_total(self, g):
        try:
            census = tile_census(g)
        except (NoWalkableTilesError, NoBorderWallError):
            return
        assert sum(census.counts.values()) == g.width * g.height

    def test_no_walkable(self):
        with pytest.raises(NoWalkableTilesError):
            tile_census(Grid(("EEEE", "EFFE", "EFFE", "EEEE")))

    def test_no_border_wall(self):
        with pytest.raises(NoBorderWallError):
            tile_census(Grid(("AAAA", "AAAA", "AAAA", "AAAA")))

    def test_pattern_percent_handles_degenerate_grids(self):
        assert pattern_percent(Grid(("EEEE", "EFFE", "EFFE", "EEEE"))) == 0.0
        assert pattern_percent(Grid(("AAAA", "ABAA", "AAAA", "AAAA"))) == pytest.approx(
            100.0 / 16
        )

    def test_census_ordering_by_count_then_alpha(self):
        room = make_room(16, 12, n_b=4, n_c=9)
        census = tile_census(room)
        assert census.pattern_tiles == ("C", "B")


def test_grid_codes_matches_cells():
    g = parse_level("EEEE\nEABE\nEFJE\nEEEE")
    assert g.codes.shape == (4, 4)
    assert chr(g.codes[1, 1]) == "A"
    assert chr(g.codes[2, 2]) == "J"


def test_counts_equals_counter_over_text():
    g = make_room(10, 8)
    assert g.counts() == Counter("".join(g.rows))
