import random

import pytest
from hypothesis import given, settings

from roomforge.constraints import (
    find_doors,
    repairability_rank,
    validate,
    wide_walkable_region,
)
from roomforge.core import Grid, flip_horizontal, parse_level
from roomforge.fixtures import make_room

from oracle import oracle_checks
from strategies import grids, random_grid, structured_room


def room_from(art: str) -> Grid:
    return Grid(tuple(line.strip() for line in art.strip().splitlines()))


# 12x10: all-E border, one vertical + one horizontal door, A-majority
# interior, a 3-cell F cluster clear of other obstacles, and a single-row
# interior E wall attached to the left border.
PASSING_ROOM = room_from(
    """
    EEJAAJEEEEEE
    EAAAAAAAAAAE
    EAAAAAAAFFAE
    JAAAAAAAFAAE
    AAAAAAAAAAAE
    JAAAAAAAAAAE
    EAAAAAAAAAAE
    EEEEEEEAAAAE
    EAAAAAAAAAAE
    EEEEEEEEEEEE
    """
)


class TestFindDoors:
    def test_vertical_pair(self):
        g = make_room(12, 10, vdoor_row=3)
        doors, offenders = find_doors(g)
        vertical = [d for d in doors if d.orientation == "vertical"]
        assert vertical[0].junctions == ((3, 0), (5, 0))
        assert vertical[0].gap_cells == ((4, 0),)
        assert vertical[0].wall == "left"
        assert offenders == []

    def test_horizontal_pair(self):
        cells = [list(row) for row in make_room(12, 10, hdoor_col=2).rows]
        g = Grid(tuple("".join(row) for row in cells))
        doors, _ = find_doors(g)
        horizontal = [d for d in doors if d.orientation == "horizontal"]
        assert horizontal[0].junctions == ((0, 2), (0, 5))
        assert horizontal[0].gap_cells == ((0, 3), (0, 4))

    def test_unpaired_junction_offends(self):
        g = room_from(
            """
            EEEEJEEE
            EAAAAAAE
            EAAAAAAE
            EAAAAAAE
            EAAAAAAE
            EEEEEEEE
            """
        )
        doors, offenders = find_doors(g)
        assert doors == []
        assert offenders == [(0, 4)]

    def test_corner_and_interior_junctions_offend(self):
        g = room_from(
            """
            JEEEEEEE
            EAAAAAAE
            EAAJAAAE
            EAAAAAAE
            EAAAAAAE
            EEEEEEEE
            """
        )
        _, offenders = find_doors(g)
        assert set(offenders) == {(0, 0), (2, 3)}

    def test_wrong_spacing_offends(self):
        g = room_from(
            """
            EEJAJEEE
            EAAAAAAE
            EAAAAAAE
            EAAAAAAE
            EAAAAAAE
            EEEEEEEE
            """
        )
        doors, offenders = find_doors(g)
        assert doors == []
        assert set(offenders) == {(0, 2), (0, 4)}

    def test_blocked_gap_offends(self):
        g = room_from(
            """
            EEJAFAJE
            EAAAAAAE
            EAAAAAAE
            EAAAAAAE
            EAAAAAAE
            EEEEEEEE
            """
        )
        # junctions 4 apart is also wrong; use exact span with an F gap
        g2 = room_from(
            """
            EEJFAJEE
            EAAAAAAE
            EAAAAAAE
            EAAAAAAE
            EAAAAAAE
            EEEEEEEE
            """
        )
        _, offenders = find_doors(g2)
        assert set(offenders) == {(0, 2), (0, 5)}


class TestWideRegion:
    def test_fully_open_interior(self):
        g = make_room(10, 8, n_b=0, n_c=0)
        region = wide_walkable_region(g)
        for r in range(1, 7):
            for c in range(1, 9):
                assert (r, c) in region

    def test_one_wide_corridor_excluded(self):
        g = room_from(
            """
            EEEEEEEE
            EAAAAAAE
            EEEEEEAE
            EEEEEEAE
            EAAAAAAE
            EEEEEEEE
            """
        )
        region = wide_walkable_region(g)
        assert (2, 6) not in region
        assert (3, 6) not in region
        assert (1, 1) not in region  # 1-wide top corridor too

    def test_l_shaped_two_wide_corridor(self):
        g = room_from(
            """
            EEEEEEEEEE
            EAAEEEEEEE
            EAAEEEEEEE
            EAAEEEEEEE
            EAAEEEEEEE
            EAAEEEEEEE
            EAAAAAAAAE
            EAAAAAAAAE
            EEEEEEEEEE
            EEEEEEEEEE
            """
        )
        region = wide_walkable_region(g)
        expected = {(r, c) for r in range(1, 8) for c in (1, 2)}
        expected |= {(r, c) for r in (6, 7) for c in range(1, 9)}
        assert region == expected

    @given(grids(max_side=8))
    @settings(max_examples=60)
    def test_monotone_in_walkable_cells(self, g):
        rng = random.Random(len(g.rows))
        unwalkable = [rc for rc in g.coords() if g.cell(*rc) in "E#F"]
        if not unwalkable:
            return
        target = unwalkable[rng.randrange(len(unwalkable))]
        grown = g.with_cell(*target, "A")
        assert wide_walkable_region(g) <= wide_walkable_region(grown)


class TestValidate:
    def test_hand_built_room_passes(self):
        report = validate(PASSING_ROOM)
        assert report.verdict, report.failed_ids
        assert report.repairability == 0
        assert len(report.doors) == 2

    def test_odd_width_fails_c7(self):
        g = random_grid(random.Random(3), 9, 8)
        report = validate(g)
        assert not report.per_constraint["C7"].passed
        assert all(c == 8 for _, c in report.per_constraint["C7"].offending)

    def test_2x2_wall_block_fails_c4(self):
        g = PASSING_ROOM.with_cell(4, 4, "E").with_cell(4, 5, "E") \
            .with_cell(5, 4, "E").with_cell(5, 5, "E")
        report = validate(g)
        assert not report.per_constraint["C4"].passed
        assert set(report.per_constraint["C4"].offending) == {(4, 4), (4, 5), (5, 4), (5, 5)}

    def test_diagonal_obstacle_pinch_fails_c2(self):
        # two single-cell wall obstacles touching diagonally on the open floor
        g = PASSING_ROOM.with_cell(3, 4, "E").with_cell(4, 5, "E")
        report = validate(g)
        assert not report.per_constraint["C2"].passed
        assert set(report.per_constraint["C2"].offending) == {(3, 4), (4, 5)}

    def test_water_cluster_is_not_a_pinch(self):
        # the 3-cell F cluster in PASSING_ROOM touches itself diagonally;
        # same cluster, so C2 holds and C3 is a permission
        report = validate(PASSING_ROOM)
        assert report.per_constraint["C2"].passed
        assert report.per_constraint["C3"].passed

    def test_base_tile_tie_fails_c5(self):
        # 80 interior cells + 3 door gaps: n_b=41, n_c=1 makes A and B tie at 41
        g = make_room(12, 10, n_b=41, n_c=1)
        counts = g.counts()
        assert counts["A"] == counts["B"] == 41
        report = validate(g)
        assert not report.per_constraint["C5"].passed
        assert len(report.per_constraint["C5"].offending) == counts["A"] + counts["B"]

    def test_unconnected_doors_fail_c6(self):
        # full-height wall seals the right door away from the left one
        g = room_from(
            """
            EEEEEEEEEEEE
            EAAAAAEAAAAE
            EAAAAAEAAAAE
            JAAAAAEAAAAJ
            AAAAAAEAAAAA
            JAAAAAEAAAAJ
            EAAAAAEAAAAE
            EAAAAAEAAAAE
            EAAAAAEAAAAE
            EEEEEEEEEEEE
            """
        )
        report = validate(g)
        assert not report.per_constraint["C6"].passed
        # both doors' junctions are flagged
        junctions = {rc for d in report.doors for rc in d.junctions}
        assert junctions <= set(report.per_constraint["C6"].offending)

    def test_doors_on_same_side_of_wall_pass_c6(self):
        report = validate(PASSING_ROOM)
        assert report.per_constraint["C6"].passed
        assert report.all_doors_connected is True

    def test_interior_walkable_minority_fails_c1(self):
        rows = ["EEEEEEEE"] * 2 + ["EEJAAJEE"] + ["EEEEEEEE"] * 5
        g = room_from("\n".join(rows))
        report = validate(g)
        assert not report.per_constraint["C1"].passed
        assert len(report.per_constraint["C1"].offending) > 0

    def test_repairability_zero_iff_pass(self):
        rng = random.Random(42)
        for _ in range(200):
            g = structured_room(rng)
            report = validate(g)
            assert (report.repairability == 0) == report.verdict


class TestOffendingCellsViolate:
    """Spot-check that reported cells actually witness each constraint."""

    def test_c4_cells_are_wall_cells_in_blocks(self):
        rng = random.Random(5)
        for _ in range(100):
            g = structured_room(rng)
            report = validate(g)
            for r, c in report.per_constraint["C4"].offending:
                assert g.cell(r, c) in "E#"

    def test_c1_cells_are_interior_non_walkable(self):
        rng = random.Random(6)
        for _ in range(100):
            g = structured_room(rng)
            report = validate(g)
            for r, c in report.per_constraint["C1"].offending:
                assert not g.is_border(r, c)
                assert g.cell(r, c) not in "ABC"

    def test_c6_cells_hold_junctions(self):
        rng = random.Random(8)
        for _ in range(100):
            g = structured_room(rng)
            report = validate(g)
            for r, c in report.per_constraint["C6"].offending:
                assert g.cell(r, c) == "J"

    def test_c2_cells_are_interior_unwalkable(self):
        rng = random.Random(9)
        for _ in range(200):
            g = structured_room(rng)
            report = validate(g)
            for r, c in report.per_constraint["C2"].offending:
                assert not g.is_border(r, c)
                assert g.cell(r, c) in "E#F"


class TestSymmetryAndOracle:
    @given(grids(max_side=9))
    @settings(max_examples=80)
    def test_flip_symmetry(self, g):
        left = validate(g)
        right = validate(flip_horizontal(g))
        assert left.verdict == right.verdict
        for cid in left.per_constraint:
            assert left.per_constraint[cid].passed == right.per_constraint[cid].passed

    def test_oracle_agreement_structured(self):
        rng = random.Random(31337)
        for _ in range(500):
            g = structured_room(rng)
            report = validate(g)
            mine = {cid: chk.passed for cid, chk in report.per_constraint.items()}
            assert mine == oracle_checks(list(g.rows)), "\n".join(g.rows)


class TestRepairabilityRank:
    def test_rank_prefers_small_scores(self):
        passing = PASSING_ROOM
        odd = make_room(12, 10).with_cell(4, 4, "E").with_cell(4, 5, "E") \
            .with_cell(5, 4, "E").with_cell(5, 5, "E")  # C4: 4 cells
        pinch = make_room(12, 10).with_cell(3, 4, "E").with_cell(4, 5, "E")  # C2: 2
        big = make_room(12, 10)
        cells = big
        for c in range(2, 9):
            cells = cells.with_cell(2, c, "E").with_cell(3, c, "E")
        graded = [passing, odd, cells, pinch]
        reports = [(g, validate(g)) for g in graded]
        scores = [rep.repairability for _, rep in reports]
        assert scores[0] == 0
        picked = repairability_rank(reports, 2)
        assert picked == [pinch, odd]

    def test_k_larger_than_failing(self):
        grids_in = [make_room(12, 10).with_cell(4, 4, "F").with_cell(5, 5, "F")]
        reports = [(g, validate(g)) for g in grids_in]
        failing = [g for g, rep in reports if not rep.verdict]
        assert repairability_rank(reports, 10) == failing

    def test_order_is_stable_for_ties(self):
        a = make_room(12, 10).with_cell(3, 4, "E").with_cell(4, 5, "E")
        b = make_room(12, 10).with_cell(5, 4, "E").with_cell(6, 5, "E")
        reports = [(g, validate(g)) for g in (a, b)]
        assert validate(a).repairability == validate(b).repairability
        assert repairability_rank(reports, 2) == [a, b]


def test_report_json_shape():
    report = validate(PASSING_ROOM.with_cell(4, 4, "E").with_cell(5, 5, "E"))
    payload = report.to_json_dict()
    assert payload["verdict"] in ("pass", "fail")
    assert {c["id"] for c in payload["constraints"]} == {f"C{i}" for i in range(1, 8)}
    for check in payload["constraints"]:
        assert set(check) == {"id", "pass", "cells", "message"}
    assert isinstance(payload["repairability"], int)
    assert all(len(rc) == 2 for rc in payload["wide_region"])
