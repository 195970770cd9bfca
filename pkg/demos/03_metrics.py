"""Novelty thresholds, the pattern-swap check, and prompt accuracy.

Run: python3 demos/03_metrics.py
"""

from roomforge import (
    Dataset,
    Provenance,
    accuracy,
    build_prompt,
    derive_spec,
    hamming_distance,
    is_novel,
    swap_patterns,
)
from roomforge.fixtures import make_room

reference = make_room(10, 10, n_b=20, n_c=8)
dataset = Dataset()
dataset.add_if_new(reference, Provenance(kind="handmade"), 0)

# Novelty threshold: 10% of the candidate's 100 tiles = 10 differing cells.
candidate = reference
for i, (r, c) in enumerate(((2, 2), (2, 3), (2, 4), (3, 2), (3, 3),
                            (3, 4), (4, 2), (4, 3), (4, 4))):
    candidate = candidate.with_cell(r, c, "F")
result = is_novel(candidate, dataset, novelty_fraction=0.10)
print(f"9 cells changed -> distance {result.min_distance_raw}, "
      f"threshold {result.threshold_cells}, novel: {result.is_novel}")

candidate = candidate.with_cell(5, 5, "F")
result = is_novel(candidate, dataset, novelty_fraction=0.10)
print(f"10 cells changed -> distance {result.min_distance_raw}, novel: {result.is_novel}")

# Recoloring is not novelty: swap the two pattern tiles and the raw distance
# looks huge, but the swap check sees through it.
recolored = swap_patterns(reference)
print(f"\nrecolored copy: raw distance "
      f"{hamming_distance(recolored, reference)}, "
      f"novel: {is_novel(recolored, dataset, 0.10).is_novel}")

# Accuracy measures how well a generated room honored the prompt percentage.
spec = derive_spec(reference)
print(f"\nprompt: {build_prompt(spec)}")
for generated in (reference, make_room(10, 10, n_b=10, n_c=4), make_room(10, 10, n_b=2, n_c=1)):
    pct = derive_spec(generated).percent_pattern_tiles
    print(f"  generated {pct:5.1f}% pattern tiles -> accuracy "
          f"{accuracy(spec, generated):.3f}")
