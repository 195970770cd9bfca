"""The whole two-stage pipeline against the deterministic mock backend.

Stage 1 generates rooms, banks any that are already playable-novel, and
queues the most repairable failures for a human (here we play the human and
repair one through the same API the UI uses). After augmentation, stage 2
runs fully automated rounds: fine-tune, generate 100, classify, feed the
playable-novel rooms back into the dataset.

Run: python3 demos/04_full_pipeline.py
"""

import tempfile
from pathlib import Path

from roomforge import MockBackend, PipelineConfig, validate
from roomforge.fixtures import make_room, seed_rooms
from roomforge.orchestrator import Pipeline, init_dataset

workdir = Path(tempfile.mkdtemp(prefix="roomforge-demo-"))
print(f"working in {workdir}\n")

init_dataset(workdir, seed_rooms(60))
config = PipelineConfig(seed=7)  # temperature 0.4, 10% novelty, 100/round
pipeline = Pipeline(workdir, config, MockBackend())
print(f"seed dataset: {len(pipeline.dataset)} handmade rooms")

# --- stage 1: one bootstrap round -----------------------------------------
tickets = pipeline.stage1_round()
stats = pipeline.dataset_stats()
print(f"stage 1 round: dataset now {stats['entries']}, "
      f"{stats['pending_tickets']} repair tickets queued")
if tickets:
    worst = tickets[0]
    print(f"  easiest ticket {worst.ticket_id}: repairability "
          f"{worst.report.repairability}, fails {worst.report.failed_ids}")
    # stand in for the human: submit a clean replacement room
    repair = make_room(18, 14, n_b=11, n_c=6)
    assert validate(repair).verdict
    outcome = pipeline.submit_repair(worst.ticket_id, repair)
    print(f"  submitted repair -> accepted: {outcome.accepted}")

# --- augment ----------------------------------------------------------------
print(f"\naugmenting: {len(pipeline.dataset)} -> {pipeline.augment()} rooms")

# --- stage 2: automated self-feeding rounds ---------------------------------
print("\nstage 2 rounds (round, playable, novel, playable-novel, mean accuracy):")
for stats_row in pipeline.run_stage2():
    print(f"  round {stats_row.round_index}: {stats_row.n_playable:3d} playable, "
          f"{stats_row.n_novel:3d} novel, {stats_row.n_playable_novel:3d} kept, "
          f"accuracy {stats_row.mean_accuracy:.3f}")

print(f"\nfinal dataset: {len(pipeline.dataset)} rooms")
print(f"report CSV: {pipeline.report_path}")
print(pipeline.report_path.read_text(), end="")
