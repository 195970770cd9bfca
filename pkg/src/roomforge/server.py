"""Serve mode: the JSON API behind the repair UI, plus its static assets.

The server is the single source of truth for constraint verdicts; the UI
never re-implements validation. Dataset mutations funnel through one lock
so concurrent editor tabs cannot race a submit.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .constraints import validate
from .core import LevelFormatError, parse_level, serialize_level
from .metrics import is_novel
from .orchestrator import Pipeline, TicketClosedError, UnknownTicketError


class GridBody(BaseModel):
    grid: str


def _ticket_summary(ticket) -> dict:
    return {
        "ticket_id": ticket.ticket_id,
        "status": ticket.status,
        "round": ticket.round_index,
        "repairability": ticket.report.repairability,
        "failed_constraints": list(ticket.report.failed_ids),
        "width": ticket.original_grid.width,
        "height": ticket.original_grid.height,
    }


def create_app(pipeline: Pipeline, static_dir: Path | str | None = None) -> FastAPI:
    app = FastAPI(title="roomforge repair API")
    mutate_lock = threading.Lock()

    @app.get("/tickets")
    def list_tickets() -> dict:
        tickets = sorted(
            pipeline.tickets.values(),
            key=lambda t: (t.report.repairability, t.ticket_id),
        )
        return {"tickets": [_ticket_summary(t) for t in tickets]}

    @app.get("/tickets/{ticket_id}")
    def get_ticket(ticket_id: str) -> dict:
        ticket = pipeline.tickets.get(ticket_id)
        if ticket is None:
            raise HTTPException(status_code=404, detail=f"no ticket {ticket_id}")
        return {
            **_ticket_summary(ticket),
            "grid": serialize_level(ticket.original_grid),
            "report": ticket.report.to_json_dict(),
        }

    @app.put("/tickets/{ticket_id}/grid")
    def revalidate(ticket_id: str, body: GridBody) -> dict:
        ticket = pipeline.tickets.get(ticket_id)
        if ticket is None:
            raise HTTPException(status_code=404, detail=f"no ticket {ticket_id}")
        try:
            grid = parse_level(body.grid)
        except LevelFormatError as exc:
            return JSONResponse(
                status_code=422, content={"parse_ok": False, "error": str(exc)}
            )
        report = validate(grid)
        novelty = None
        if report.verdict:
            novelty = is_novel(grid, pipeline.dataset, pipeline.config.novelty_fraction)
        return {
            "parse_ok": True,
            "report": report.to_json_dict(),
            "novelty": novelty.to_json_dict() if novelty else None,
        }

    @app.post("/tickets/{ticket_id}/submit")
    def submit(ticket_id: str, body: GridBody) -> dict:
        try:
            grid = parse_level(body.grid)
        except LevelFormatError as exc:
            return JSONResponse(
                status_code=422, content={"accepted": False, "error": str(exc)}
            )
        with mutate_lock:
            try:
                outcome = pipeline.submit_repair(ticket_id, grid)
            except UnknownTicketError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            except TicketClosedError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
        payload = {
            "accepted": outcome.accepted,
            "report": outcome.report.to_json_dict(),
            "novelty": outcome.novelty.to_json_dict() if outcome.novelty else None,
        }
        if (
            not outcome.accepted
            and outcome.novelty is not None
            and outcome.novelty.nearest_entry_id is not None
        ):
            nearest = pipeline.dataset.get(outcome.novelty.nearest_entry_id)
            if nearest is not None:
                payload["nearest_grid"] = serialize_level(nearest.grid)
        return payload

    @app.get("/dataset/stats")
    def stats() -> dict:
        return pipeline.dataset_stats()

    @app.get("/levels/{entry_id}")
    def get_level(entry_id: str) -> dict:
        entry = pipeline.dataset.get(entry_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"no level {entry_id}")
        return {
            "id": entry.id,
            "grid": serialize_level(entry.grid),
            "provenance": entry.provenance.to_json_dict(),
            "round_added": entry.round_added,
        }

    if static_dir is not None and Path(static_dir).is_dir():
        static_dir = Path(static_dir)
        index = static_dir / "index.html"

        @app.get("/")
        def root() -> FileResponse:
            return FileResponse(index)

        app.mount("/assets", StaticFiles(directory=static_dir), name="assets")

    return app


def default_static_dir() -> Path | None:
    """The built frontend, when present next to the installed package or repo."""
    here = Path(__file__).resolve()
    for base in (here.parents[2], here.parents[3] if len(here.parents) > 3 else None):
        if base is None:
            continue
        candidate = base / "frontend" / "dist"
        if candidate.is_dir():
            return candidate
    return None
