"""Rooms as character grids, and what the playability validator says about them.

Run: python3 demos/01_rooms_and_validation.py
"""

from roomforge import parse_level, serialize_level, tile_census, validate

# A complete room: E border, two doors (J pairs), A floor with B/C patterns,
# a water pocket, and a single-row inner wall.
ROOM = """\
EEJAAJEEEEEE
EABBBAAAAAAE
EABBBAAFFAAE
JABBBAAFAAAE
AACCCAAAAAAE
JACCCAAAAAAE
EAAAAAAAAAAE
EEEEEEEAAAAE
EAAAAAAAAAAE
EEEEEEEEEEEE
"""

room = parse_level(ROOM)
print(f"parsed a {room.width}x{room.height} room")

census = tile_census(room)
print(f"base tile {census.base_tile!r}, patterns {census.pattern_tiles}, "
      f"border {census.border_tile!r}, {census.percent_pattern:.2f}% pattern tiles")

report = validate(room)
print(f"verdict: {'PASS' if report.verdict else 'FAIL'}")
for door in report.doors:
    print(f"  door on {door.wall} wall, junctions {door.junctions}")

# Now break it: a 2x2 wall chunk (walls must stay one tile thin) and a
# diagonal obstacle pinch on the walkable path.
broken = (
    room.with_cell(6, 3, "E").with_cell(6, 4, "E")
    .with_cell(7, 3, "E").with_cell(7, 4, "E")
)
report = validate(broken)
print(f"\nafter vandalism: {'PASS' if report.verdict else 'FAIL'}, "
      f"repairability score {report.repairability}")
for cid, check in sorted(report.per_constraint.items()):
    if not check.passed:
        print(f"  {cid} failed: {check.message}; offending cells {list(check.offending)}")

# Round-trip guarantee: serialize -> parse -> serialize is byte-identical.
assert parse_level(serialize_level(room)) == room
print("\nserialization round-trips byte-exactly")
