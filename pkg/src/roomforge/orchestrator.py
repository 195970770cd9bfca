"""The two-stage generation pipeline and its on-disk run state.

A pipeline owns one dataset directory exclusively (guarded by a lock file).
Alongside the dataset's own files it keeps run state under state/:

    state/model.json      current model lineage
    state/tickets.jsonl   the stage-1 repair queue
    state/stage1.json     stage-1 progress (initial size, rounds run)
    state/report.csv      one row per automated round
    state/lock            single-writer lock

Stage 1 generates rooms, adds any that are already playable-novel, and
queues the most repairable failures for a human. Stage 2 is fully
automated: fine-tune, generate, classify, feed the playable-novel rooms
back, repeat.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from filelock import FileLock

from . import dataset as dataset_mod
from .backend import GenerationRequest, ModelRef
from .config import PipelineConfig
from .constraints import PlayabilityReport, repairability_rank, validate
from .core import Grid, parse_level, serialize_level
from .dataset import Dataset, Provenance
from .metrics import ClassifyResult, NoveltyResult, RoundStats, aggregate_round, classify, is_novel
from .prompting import build_prompt

logger = logging.getLogger(__name__)

STATE_DIR = "state"
MODEL_FILE = "model.json"
TICKETS_FILE = "tickets.jsonl"
STAGE1_FILE = "stage1.json"
REPORT_FILE = "report.csv"
LOCK_FILE = "lock"

MAX_STAGE1_ROUNDS = 1000


class TicketError(ValueError):
    pass


class UnknownTicketError(TicketError):
    def __init__(self, ticket_id: str) -> None:
        super().__init__(f"no ticket {ticket_id!r}")


class TicketClosedError(TicketError):
    def __init__(self, ticket_id: str, status: str) -> None:
        super().__init__(f"ticket {ticket_id!r} is already {status}")


@dataclass
class RepairTicket:
    ticket_id: str
    original_grid: Grid
    report: PlayabilityReport
    status: str = "pending"  # pending | repaired | discarded
    repaired_grid: Grid | None = None
    round_index: int = 0


@dataclass(frozen=True)
class RepairOutcome:
    accepted: bool
    report: PlayabilityReport
    novelty: NoveltyResult | None


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary labeled parts."""
    material = "|".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


class Pipeline:
    """One run's view of a dataset directory plus backend and model lineage."""

    def __init__(self, root: Path | str, config: PipelineConfig, backend) -> None:
        self.root = Path(root)
        self.config = config
        self.backend = backend
        self.state_dir = self.root / STATE_DIR
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.dataset: Dataset = dataset_mod.load(self.root, config)
        self.model: ModelRef | None = self._load_model()
        self.tickets: dict[str, RepairTicket] = self._load_tickets()
        self._lock = FileLock(str(self.state_dir / LOCK_FILE))

    # -- locking ------------------------------------------------------------

    def __enter__(self) -> "Pipeline":
        self._lock.acquire(timeout=10)
        return self

    def __exit__(self, *exc_info) -> None:
        self._lock.release()

    # -- state persistence ----------------------------------------------------

    def _load_model(self) -> ModelRef | None:
        path = self.state_dir / MODEL_FILE
        if not path.is_file():
            return None
        return ModelRef.from_json_dict(json.loads(path.read_text(encoding="utf-8")))

    def _save_model(self) -> None:
        if self.model is not None:
            (self.state_dir / MODEL_FILE).write_text(
                json.dumps(self.model.to_json_dict(), indent=2) + "\n", encoding="utf-8"
            )

    def _load_tickets(self) -> dict[str, RepairTicket]:
        path = self.state_dir / TICKETS_FILE
        tickets: dict[str, RepairTicket] = {}
        if not path.is_file():
            return tickets
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            grid = parse_level(obj["grid"])
            repaired = obj.get("repaired_grid")
            tickets[obj["ticket_id"]] = RepairTicket(
                ticket_id=obj["ticket_id"],
                original_grid=grid,
                report=validate(grid),
                status=obj["status"],
                repaired_grid=parse_level(repaired) if repaired else None,
                round_index=int(obj.get("round", 0)),
            )
        return tickets

    def _save_tickets(self) -> None:
        lines = []
        for ticket in self.tickets.values():
            lines.append(
                json.dumps(
                    {
                        "ticket_id": ticket.ticket_id,
                        "status": ticket.status,
                        "round": ticket.round_index,
                        "grid": serialize_level(ticket.original_grid),
                        "repaired_grid": (
                            serialize_level(ticket.repaired_grid)
                            if ticket.repaired_grid is not None
                            else None
                        ),
                    },
                    ensure_ascii=False,
                )
            )
        (self.state_dir / TICKETS_FILE).write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )

    def _load_stage1(self) -> dict:
        path = self.state_dir / STAGE1_FILE
        if path.is_file():
            return json.loads(path.read_text(encoding="utf-8"))
        return {"initial_size": len(self.dataset), "rounds_run": 0}

    def _save_stage1(self, progress: dict) -> None:
        (self.state_dir / STAGE1_FILE).write_text(
            json.dumps(progress, indent=2) + "\n", encoding="utf-8"
        )

    def save(self) -> None:
        dataset_mod.save(self.dataset, self.root)
        self._save_model()
        self._save_tickets()

    # -- shared helpers -------------------------------------------------------

    def _next_ticket_id(self) -> str:
        highest = -1
        for ticket_id in self.tickets:
            suffix = ticket_id.rsplit("-", 1)[-1]
            if suffix.isdigit():
                highest = max(highest, int(suffix))
        return f"t-{highest + 1:04d}"

    def _fine_tune(self, epochs: int) -> None:
        dataset_mod.save(self.dataset, self.root)
        records = self.root / dataset_mod.FINETUNE_NAME
        self.model = self.backend.fine_tune(self.model, records, epochs)
        self._save_model()

    def _generate_batch(self, rng_seed: int) -> list[tuple]:
        """(spec, completion) pairs for one round of sampled specs.

        Repeated prompts are folded into one request with n = multiplicity,
        so every candidate in the round is an independent sample. The
        original spec rides along with each completion because accuracy is
        computed against its raw percentage, not the integer rendered into
        the prompt.
        """
        specs = self.dataset.sample_specs(self.config.gen_per_round, rng_seed)
        prompts = [build_prompt(spec) for spec in specs]
        counts: dict[str, int] = {}
        for prompt in prompts:
            counts[prompt] = counts.get(prompt, 0) + 1
        completions: dict[str, list[str]] = {}
        for prompt in counts:
            request = GenerationRequest(
                model=self.model,
                prompt=prompt,
                temperature=self.config.temperature,
                n=counts[prompt],
            )
            completions[prompt] = list(self.backend.generate(request))
        batch = []
        for spec, prompt in zip(specs, prompts):
            batch.append((spec, completions[prompt].pop(0)))
        return batch

    def _classify_and_add(
        self, batch: list[tuple], provenance_kind: str, round_added: int
    ) -> list[ClassifyResult]:
        """Classify completions in order, feeding accepted rooms straight back
        so later candidates in the same round see them in the novelty check."""
        results = []
        for spec, text in batch:
            result = classify(text, spec, self.dataset, self.config)
            results.append(result)
            if result.playable_novel and result.grid is not None:
                self.dataset.add_if_new(
                    result.grid, Provenance(kind=provenance_kind), round_added
                )
        return results

    # -- stage 1 ---------------------------------------------------------------

    def stage1_round(self) -> list[RepairTicket]:
        """One human-in-the-loop bootstrap round.

        Generates a batch, adds anything already playable-novel, and turns
        the most repairable failures into pending tickets.
        """
        progress = self._load_stage1()
        round_number = progress["rounds_run"] + 1
        self._fine_tune(self.config.stage1_epochs)
        rng_seed = derive_seed(self.config.seed, "stage1", round_number)
        batch = self._generate_batch(rng_seed)
        results = self._classify_and_add(batch, "generated", 0)

        failing = [
            (res.grid, res.report)
            for res in results
            if res.parse_ok and res.report is not None and not res.report.verdict
        ]
        ranked = repairability_rank(failing, self.config.repair_per_round)

        queued_grids = {
            t.original_grid.rows for t in self.tickets.values() if t.status == "pending"
        }
        new_tickets = []
        for grid in ranked:
            if grid.rows in queued_grids:
                continue
            ticket = RepairTicket(
                ticket_id=self._next_ticket_id(),
                original_grid=grid,
                report=validate(grid),
                round_index=round_number,
            )
            self.tickets[ticket.ticket_id] = ticket
            queued_grids.add(grid.rows)
            new_tickets.append(ticket)

        progress["rounds_run"] = round_number
        progress.setdefault("initial_size", len(self.dataset))
        self._save_stage1(progress)
        self.save()
        stats = aggregate_round(results, round_number, self.config.seed)
        logger.info(
            "stage1 round %d: %d generated, %d playable-novel added, %d tickets queued",
            round_number,
            stats.n_generated,
            stats.n_playable_novel,
            len(new_tickets),
        )
        return new_tickets

    def run_stage1(self, max_rounds: int | None = None) -> int:
        """Loop stage-1 rounds until enough new rooms have been accepted.

        Stops early once a round contributes nothing by itself and the queue
        holds pending tickets: at that point progress needs a human to repair
        and resubmit, after which stage1 can be invoked again.
        """
        progress = self._load_stage1()
        self._save_stage1(progress)  # pin initial_size on first invocation
        target = self.config.stage1_target_new
        for _ in range(max_rounds if max_rounds is not None else MAX_STAGE1_ROUNDS):
            added_so_far = len(self.dataset) - progress["initial_size"]
            if added_so_far >= target:
                logger.info("stage1 target reached: %d new rooms", added_so_far)
                return added_so_far
            before = len(self.dataset)
            self.stage1_round()
            progress = self._load_stage1()
            if len(self.dataset) == before:
                pending = sum(1 for t in self.tickets.values() if t.status == "pending")
                logger.info(
                    "stage1 paused at %d/%d new rooms; %d pending tickets await repair",
                    len(self.dataset) - progress["initial_size"],
                    target,
                    pending,
                )
                return len(self.dataset) - progress["initial_size"]
        return len(self.dataset) - progress["initial_size"]

    def submit_repair(self, ticket_id: str, repaired_grid: Grid) -> RepairOutcome:
        """Validate and novelty-check a repaired room; accept it into the dataset.

        A rejected submission leaves the ticket pending with full diagnostics
        so the operator can keep editing.
        """
        ticket = self.tickets.get(ticket_id)
        if ticket is None:
            raise UnknownTicketError(ticket_id)
        if ticket.status != "pending":
            raise TicketClosedError(ticket_id, ticket.status)

        report = validate(repaired_grid)
        novelty = None
        if report.verdict:
            novelty = is_novel(repaired_grid, self.dataset, self.config.novelty_fraction)
        accepted = report.verdict and novelty is not None and novelty.is_novel
        if accepted:
            self.dataset.add_if_new(repaired_grid, Provenance(kind="repaired"), 0)
            ticket.status = "repaired"
            ticket.repaired_grid = repaired_grid
            self.save()
        return RepairOutcome(accepted=accepted, report=report, novelty=novelty)

    # -- stage 2 ---------------------------------------------------------------

    def stage2_round(self, round_index: int) -> RoundStats:
        """One automated round: fine-tune, generate, classify, feed back."""
        self._fine_tune(self.config.stage2_epochs)
        rng_seed = derive_seed(self.config.seed, "stage2", round_index)
        batch = self._generate_batch(rng_seed)
        size_before = len(self.dataset)
        results = self._classify_and_add(batch, "generated", round_index)
        self.save()
        stats = aggregate_round(results, round_index, self.config.seed)
        self._append_report_row(stats)
        logger.info(
            "stage2 round %d: %d/%d playable-novel, dataset %d -> %d",
            round_index,
            stats.n_playable_novel,
            stats.n_generated,
            size_before,
            len(self.dataset),
        )
        return stats

    def run_stage2(self) -> list[RoundStats]:
        start = self._last_report_round() + 1
        return [
            self.stage2_round(round_index)
            for round_index in range(start, start + self.config.stage2_rounds)
        ]

    def augment(self) -> int:
        """Replace the dataset with its augmented expansion; returns new size."""
        self.dataset = dataset_mod.augment_all(self.dataset)
        self.save()
        return len(self.dataset)

    # -- reporting ---------------------------------------------------------------

    @property
    def report_path(self) -> Path:
        return self.state_dir / REPORT_FILE

    def _last_report_round(self) -> int:
        if not self.report_path.is_file():
            return 0
        last = 0
        for line in self.report_path.read_text(encoding="utf-8").splitlines()[1:]:
            if line.strip():
                last = max(last, int(line.split(",", 1)[0]))
        return last

    def _append_report_row(self, stats: RoundStats) -> None:
        new_file = not self.report_path.is_file()
        with open(self.report_path, "a", encoding="utf-8", newline="\n") as fh:
            if new_file:
                fh.write(RoundStats.CSV_HEADER + "\n")
            fh.write(stats.to_csv_row() + "\n")

    def dataset_stats(self) -> dict:
        by_provenance: dict[str, int] = {}
        for entry in self.dataset.entries:
            by_provenance[entry.provenance.kind] = by_provenance.get(entry.provenance.kind, 0) + 1
        return {
            "entries": len(self.dataset),
            "by_provenance": by_provenance,
            "pending_tickets": sum(
                1 for t in self.tickets.values() if t.status == "pending"
            ),
        }


def init_dataset(root: Path | str, grids: list[Grid] | None = None) -> Dataset:
    """Create a fresh dataset directory, optionally seeded with handmade rooms."""
    ds = Dataset()
    for grid in grids or []:
        ds.add_if_new(grid, Provenance(kind="handmade"), 0)
    dataset_mod.save(ds, root)
    return ds
