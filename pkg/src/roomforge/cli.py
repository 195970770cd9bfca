"""Command-line entry point.

    roomforge init --dataset DIR [--synthetic N | --from-levels SRC]
    roomforge stage1|augment|stage2|report|serve --dataset DIR [options]
    roomforge repair-export|repair-import --dataset DIR
    roomforge validate FILE
    roomforge novelty FILE --dataset DIR
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import dataset as dataset_mod
from . import fixtures
from .backend import make_backend
from .config import PipelineConfig
from .constraints import validate as validate_grid
from .core import LevelFormatError, parse_level, serialize_level
from .metrics import is_novel
from .orchestrator import Pipeline, init_dataset

logger = logging.getLogger("roomforge")

REPAIR_DIR = "state/repair"


def _add_common(parser: argparse.ArgumentParser, dataset_required: bool = True) -> None:
    parser.add_argument("--dataset", required=dataset_required, help="dataset directory")
    parser.add_argument("--backend", choices=("mock", "remote"), default="mock")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--temperature", type=float, default=None)
    parser.add_argument("--novelty-fraction", type=float, default=None)
    parser.add_argument("--rounds", type=int, default=None)
    parser.add_argument("--gen-per-round", type=int, default=None)
    parser.add_argument("--epochs", type=int, default=None)


def _build_config(args: argparse.Namespace, mode: str) -> PipelineConfig:
    overrides: dict = {"seed": args.seed}
    if args.temperature is not None:
        overrides["temperature"] = args.temperature
    if getattr(args, "novelty_fraction", None) is not None:
        overrides["novelty_fraction"] = args.novelty_fraction
    if getattr(args, "gen_per_round", None) is not None:
        overrides["gen_per_round"] = args.gen_per_round
    if getattr(args, "rounds", None) is not None:
        overrides["stage2_rounds"] = args.rounds
    if getattr(args, "epochs", None) is not None:
        if mode == "stage1":
            overrides["stage1_epochs"] = args.epochs
        else:
            overrides["stage2_epochs"] = args.epochs
    return PipelineConfig(**overrides)


def _open_pipeline(args: argparse.Namespace, mode: str) -> Pipeline:
    config = _build_config(args, mode)
    backend = make_backend(args.backend)
    return Pipeline(args.dataset, config, backend)


def cmd_init(args: argparse.Namespace) -> int:
    grids = []
    if args.from_levels:
        src = Path(args.from_levels)
        files = sorted(list(src.glob("*.lvl")) + list(src.glob("*.txt")))
        for path in files:
            grids.append(parse_level(path.read_text(encoding="utf-8")))
        logger.info("imported %d levels from %s", len(grids), src)
    elif args.synthetic:
        grids = fixtures.seed_rooms(args.synthetic)
        logger.info("generated %d synthetic rooms", len(grids))
    ds = init_dataset(args.dataset, grids)
    print(f"initialized dataset with {len(ds)} entries at {args.dataset}")
    return 0


def cmd_stage1(args: argparse.Namespace) -> int:
    with _open_pipeline(args, "stage1") as pipeline:
        added = pipeline.run_stage1(max_rounds=args.rounds)
        pending = pipeline.dataset_stats()["pending_tickets"]
    print(f"stage1: {added} new rooms accepted, {pending} tickets pending repair")
    return 0


def cmd_repair_export(args: argparse.Namespace) -> int:
    pipeline = _open_pipeline(args, "stage1")
    out = Path(args.dataset) / REPAIR_DIR
    out.mkdir(parents=True, exist_ok=True)
    count = 0
    for ticket in pipeline.tickets.values():
        if ticket.status != "pending":
            continue
        (out / f"{ticket.ticket_id}.lvl").write_text(
            serialize_level(ticket.original_grid), encoding="utf-8"
        )
        (out / f"{ticket.ticket_id}.report.json").write_text(
            json.dumps(ticket.report.to_json_dict(), indent=2) + "\n", encoding="utf-8"
        )
        count += 1
    print(f"exported {count} pending tickets to {out}")
    return 0


def cmd_repair_import(args: argparse.Namespace) -> int:
    src = Path(args.dataset) / REPAIR_DIR
    with _open_pipeline(args, "stage1") as pipeline:
        accepted = rejected = 0
        for path in sorted(src.glob("t-*.lvl")):
            ticket_id = path.stem
            ticket = pipeline.tickets.get(ticket_id)
            if ticket is None or ticket.status != "pending":
                continue
            try:
                grid = parse_level(path.read_text(encoding="utf-8"))
            except LevelFormatError as exc:
                print(f"{ticket_id}: unparseable ({exc})")
                rejected += 1
                continue
            if grid.rows == ticket.original_grid.rows:
                continue  # untouched export
            outcome = pipeline.submit_repair(ticket_id, grid)
            if outcome.accepted:
                accepted += 1
                print(f"{ticket_id}: accepted")
            else:
                rejected += 1
                failed = ", ".join(outcome.report.failed_ids) or "novelty"
                print(f"{ticket_id}: rejected ({failed})")
    print(f"repair-import: {accepted} accepted, {rejected} rejected")
    return 0


def cmd_augment(args: argparse.Namespace) -> int:
    with _open_pipeline(args, "augment") as pipeline:
        before = len(pipeline.dataset)
        after = pipeline.augment()
    print(f"augmented dataset: {before} -> {after} entries")
    return 0


def cmd_stage2(args: argparse.Namespace) -> int:
    with _open_pipeline(args, "stage2") as pipeline:
        stats = pipeline.run_stage2()
        for row in stats:
            print(row.to_csv_row())
    print(f"report written to {pipeline.report_path}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    pipeline = _open_pipeline(args, "report")
    if not pipeline.report_path.is_file():
        print("no report yet; run stage2 first", file=sys.stderr)
        return 1
    text = pipeline.report_path.read_text(encoding="utf-8")
    print(text, end="")
    rows = [line.split(",") for line in text.splitlines()[1:] if line.strip()]
    for row in rows:
        print(
            f"# round {row[0]} seed {row[1]}: {row[6]}/{row[2]} playable-novel, "
            f"mean accuracy {row[7]}",
            file=sys.stderr,
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app, default_static_dir

    pipeline = _open_pipeline(args, "serve")
    static = Path(args.static) if args.static else default_static_dir()
    app = create_app(pipeline, static)
    with pipeline:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        grid = parse_level(Path(args.file).read_text(encoding="utf-8"))
    except LevelFormatError as exc:
        print(json.dumps({"parse_ok": False, "error": str(exc)}, indent=2))
        return 2
    report = validate_grid(grid)
    print(json.dumps(report.to_json_dict(), indent=2))
    return 0 if report.verdict else 1


def cmd_novelty(args: argparse.Namespace) -> int:
    try:
        grid = parse_level(Path(args.file).read_text(encoding="utf-8"))
    except LevelFormatError as exc:
        print(json.dumps({"parse_ok": False, "error": str(exc)}, indent=2))
        return 2
    ds = dataset_mod.load(args.dataset)
    fraction = args.novelty_fraction if args.novelty_fraction is not None else 0.10
    result = is_novel(grid, ds, fraction)
    print(json.dumps(result.to_json_dict(), indent=2))
    return 0 if result.is_novel else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roomforge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a dataset directory")
    _add_common(p)
    p.add_argument("--from-levels", help="directory of .lvl/.txt files to import")
    p.add_argument("--synthetic", type=int, help="seed with N synthetic rooms")
    p.set_defaults(func=cmd_init)

    for name, func, help_text in (
        ("stage1", cmd_stage1, "human-in-the-loop bootstrap rounds"),
        ("repair-export", cmd_repair_export, "write pending tickets out for hand editing"),
        ("repair-import", cmd_repair_import, "submit hand-edited ticket files"),
        ("augment", cmd_augment, "expand the dataset with the transform set"),
        ("stage2", cmd_stage2, "automated self-feeding rounds"),
        ("report", cmd_report, "print the per-round report CSV"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("serve", help="run the repair UI API server")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory of built UI assets")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("validate", help="validate one level file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("novelty", help="novelty of one level file against a dataset")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(func=cmd_novelty)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # structured nonzero exit for unrecoverable failures
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
