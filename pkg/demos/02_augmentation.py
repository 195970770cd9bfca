"""Growing a scarce room dataset with the canonical transform set.

Each source room yields up to seven variants: itself, two flips, one
rotation (door spans re-fitted to the new wall orientation), the pattern
swap, and the swap composed with each flip. 120 two-pattern rooms expand
to exactly 840 entries.

Run: python3 demos/02_augmentation.py
"""

from roomforge import Dataset, Provenance, augment_all, rotate90, serialize_level
from roomforge.dataset import AUGMENT_TRANSFORMS
from roomforge.fixtures import make_room, two_pattern_rooms

room = make_room(12, 10, n_b=8, n_c=3)
print("source room:")
print(serialize_level(room))

print("rotated (note the doors: the side door respaces to a 3-wide top door):")
print(serialize_level(rotate90(room)))

dataset = Dataset()
for grid in two_pattern_rooms(120):
    dataset.add_if_new(grid, Provenance(kind="handmade"), 0)
print(f"dataset before augmentation: {len(dataset)} rooms")

augmented = augment_all(dataset)
print(f"dataset after augmentation:  {len(augmented)} rooms")

by_transform = {}
for entry in augmented.entries:
    if entry.provenance.kind == "augmented":
        by_transform[entry.provenance.transform] = (
            by_transform.get(entry.provenance.transform, 0) + 1
        )
print("variants per transform:", dict(sorted(by_transform.items())))

# Provenance is replayable: every augmented grid re-derives from its parent.
sample = next(e for e in augmented.entries if e.provenance.kind == "augmented")
parent = augmented.get(sample.provenance.parent_id)
rederived = AUGMENT_TRANSFORMS[sample.provenance.transform](parent.grid)
print(f"\nentry {sample.id} = {sample.provenance.transform}({parent.id}) "
      f"- verified: {sample.grid == rederived}")
