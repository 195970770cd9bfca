"""Pluggable text-completion backends.

MockBackend is a deterministic offline stand-in for a fine-tuned LLM: an
order-2 per-row tile Markov model built from the training records, keyed by
the prompt's size and tile fields. Sampling uses integer-only arithmetic
seeded from (model handle, prompt, sample index), so output is
bit-reproducible across runs and platforms. Its rooms parse cleanly but
fail constraints at a healthy rate, which is exactly what the filtering
pipeline needs to exercise.

RemoteBackend speaks the OpenAI-compatible JSON API: file upload, fine-tune
job submission with status polling, and the completions endpoint.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from .core import ALPHABET, Grid, LevelFormatError, parse_level
from .prompting import (
    FinetuneRecord,
    PromptSpec,
    RecordError,
    TemplateMismatchError,
    parse_prompt,
    parse_record,
)

DEFAULT_API_BASE = "https://api.openai.com/v1"
API_KEY_ENV = "ROOMFORGE_API_KEY"
API_BASE_ENV = "ROOMFORGE_API_BASE"

STOP_TOKEN = ". XUT"

_SORTED_ALPHABET = sorted(ALPHABET)


class BackendError(RuntimeError):
    pass


class RecordsInvalidError(BackendError):
    def __init__(self, line: int, detail: str) -> None:
        self.line = line
        super().__init__(f"records line {line}: {detail}")


class RemoteRejectedError(BackendError):
    def __init__(self, status: int, body: str) -> None:
        self.status = status
        self.body = body
        super().__init__(f"HTTP {status}: {body}")


class JobFailedError(BackendError):
    pass


class MockSpecUnparseableError(BackendError):
    pass


class UnknownModelError(BackendError):
    pass


@dataclass(frozen=True)
class ModelRef:
    """Handle to a trained model plus its training lineage."""

    backend_kind: str  # mock | remote
    handle: str
    trained_on: str  # fingerprint of the fine-tune JSONL bytes
    epochs: int

    def __post_init__(self) -> None:
        if not self.handle:
            raise ValueError("model handle must be nonempty")

    def to_json_dict(self) -> dict:
        return {
            "backend_kind": self.backend_kind,
            "handle": self.handle,
            "trained_on": self.trained_on,
            "epochs": self.epochs,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ModelRef":
        return cls(
            backend_kind=obj["backend_kind"],
            handle=obj["handle"],
            trained_on=obj["trained_on"],
            epochs=int(obj["epochs"]),
        )


@dataclass(frozen=True)
class GenerationRequest:
    model: ModelRef
    prompt: str
    temperature: float = 0.4
    n: int = 1
    stop: tuple[str, ...] = (STOP_TOKEN,)
    max_tokens: int | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if STOP_TOKEN not in self.stop:
            object.__setattr__(self, "stop", (STOP_TOKEN,) + tuple(self.stop))


def default_max_tokens(width: int, height: int) -> int:
    # room + newlines + terminator slack
    return width * height + height + 8


def fingerprint_records(path: Path | str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_records(path: Path | str) -> list[FinetuneRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                records.append(parse_record(line))
            except RecordError as exc:
                raise RecordsInvalidError(lineno, str(exc)) from exc
    if not records:
        raise RecordsInvalidError(0, "records file is empty")
    return records


class _SplitMix64:
    """Tiny integer-only PRNG; identical output everywhere."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int) -> None:
        self.state = seed & self.MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)


_ROW_FIRST, _ROW_MIDDLE, _ROW_LAST = 0, 1, 2

_SpecKey = tuple[int, int, str, str, tuple[str, ...]]
_State = tuple[int, str, str]


def _spec_key(spec: PromptSpec) -> _SpecKey:
    return (spec.width, spec.height, spec.base_tile, spec.border_tile, spec.pattern_tiles)


class _MarkovModel:
    """Order-2 row chains over tiles, one table per prompt key plus a global one."""

    def __init__(self) -> None:
        self.tables: dict[_SpecKey, dict[_State, dict[str, int]]] = {}
        self.global_table: dict[_State, dict[str, int]] = {}

    @staticmethod
    def _bump(table: dict[_State, dict[str, int]], state: _State, sym: str) -> None:
        table.setdefault(state, {}).setdefault(sym, 0)
        table[state][sym] += 1

    def train(self, records: list[FinetuneRecord]) -> None:
        for record in records:
            try:
                spec = parse_prompt(record.prompt)
                grid = parse_level(record.completion)
            except (TemplateMismatchError, LevelFormatError):
                continue  # off-template rows contribute nothing
            key = _spec_key(spec)
            table = self.tables.setdefault(key, {})
            for r, row in enumerate(grid.rows):
                kind = _ROW_FIRST if r == 0 else _ROW_LAST if r == grid.height - 1 else _ROW_MIDDLE
                p2 = p1 = "^"
                for sym in row:
                    state = (kind, p2, p1)
                    self._bump(table, state, sym)
                    self._bump(self.global_table, state, sym)
                    p2, p1 = p1, sym

    def _draw(self, counts: dict[str, int] | None, rng: _SplitMix64) -> str:
        if not counts:
            return _SORTED_ALPHABET[rng.next() % len(_SORTED_ALPHABET)]
        total = sum(counts.values())
        pick = rng.next() % total
        acc = 0
        for sym in sorted(counts):
            acc += counts[sym]
            if pick < acc:
                return sym
        return sym  # unreachable

    def sample(self, spec: PromptSpec, rng: _SplitMix64) -> str:
        table = self.tables.get(_spec_key(spec), {})
        rows = []
        for r in range(spec.height):
            kind = _ROW_FIRST if r == 0 else _ROW_LAST if r == spec.height - 1 else _ROW_MIDDLE
            p2 = p1 = "^"
            row = []
            for _ in range(spec.width):
                state = (kind, p2, p1)
                counts = table.get(state) or self.global_table.get(state)
                sym = self._draw(counts, rng)
                row.append(sym)
                p2, p1 = p1, sym
            rows.append("".join(row))
        return " " + "".join(row + "\n" for row in rows)


class MockBackend:
    """Deterministic offline generator; a pure function of (records bytes, request)."""

    backend_kind = "mock"

    def __init__(self) -> None:
        self._models: dict[str, _MarkovModel] = {}

    def fine_tune(self, base: ModelRef | None, records_path: Path | str, epochs: int) -> ModelRef:
        records = _load_records(records_path)
        fingerprint = fingerprint_records(records_path)
        lineage = base.handle if base is not None else ""
        digest = hashlib.sha256(f"{lineage}:{fingerprint}:{epochs}".encode()).hexdigest()
        handle = f"mock-{digest[:16]}"
        model = _MarkovModel()
        model.train(records)
        self._models[handle] = model
        return ModelRef(
            backend_kind="mock", handle=handle, trained_on=fingerprint, epochs=epochs
        )

    def generate(self, request: GenerationRequest) -> list[str]:
        model = self._models.get(request.model.handle)
        if model is None:
            raise UnknownModelError(f"no mock model with handle {request.model.handle!r}")
        try:
            spec = parse_prompt(request.prompt)
        except TemplateMismatchError as exc:
            raise MockSpecUnparseableError(str(exc)) from exc
        limit = request.max_tokens or default_max_tokens(spec.width, spec.height)
        out = []
        for index in range(request.n):
            seed_material = f"{request.model.handle}|{index}|{request.prompt}".encode()
            seed = int.from_bytes(hashlib.sha256(seed_material).digest()[:8], "big")
            text = model.sample(spec, _SplitMix64(seed))
            out.append(text[:limit])
        return out


class RemoteBackend:
    """Client for an OpenAI-compatible fine-tune/completions service.

    Base URL and bearer token come from ROOMFORGE_API_BASE / ROOMFORGE_API_KEY
    unless given explicitly. A session object may be injected for testing or
    connection pooling; it only needs requests.Session's request() signature.
    """

    backend_kind = "remote"

    def __init__(
        self,
        api_key: str | None = None,
        api_base: str | None = None,
        session=None,
        base_model: str = "davinci-002",
        poll_interval: float = 10.0,
        poll_jitter: float = 2.0,
        job_timeout: float = 7200.0,
        min_request_interval: float = 0.0,
    ) -> None:
        self.api_key = api_key or os.environ.get(API_KEY_ENV, "")
        self.api_base = (api_base or os.environ.get(API_BASE_ENV, DEFAULT_API_BASE)).rstrip("/")
        self.session = session or requests.Session()
        self.base_model = base_model
        self.poll_interval = poll_interval
        self.poll_jitter = poll_jitter
        self.job_timeout = job_timeout
        self.min_request_interval = min_request_interval
        self._rate_lock = threading.Lock()
        self._last_request = 0.0

    def _throttle(self) -> None:
        if self.min_request_interval <= 0:
            return
        with self._rate_lock:
            wait = self._last_request + self.min_request_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()

    def _request(self, method: str, path: str, **kwargs) -> dict:
        self._throttle()
        headers = kwargs.pop("headers", {})
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        response = self.session.request(
            method, f"{self.api_base}{path}", headers=headers, **kwargs
        )
        if response.status_code >= 400:
            raise RemoteRejectedError(response.status_code, response.text)
        return response.json()

    def fine_tune(self, base: ModelRef | None, records_path: Path | str, epochs: int) -> ModelRef:
        _load_records(records_path)  # fail fast on bad records
        fingerprint = fingerprint_records(records_path)
        upload = self._request(
            "POST",
            "/files",
            data={"purpose": "fine-tune"},
            files={"file": (Path(records_path).name, Path(records_path).read_bytes())},
        )
        job = self._request(
            "POST",
            "/fine_tuning/jobs",
            json={
                "training_file": upload["id"],
                "model": base.handle if base is not None else self.base_model,
                "hyperparameters": {"n_epochs": epochs},
            },
        )
        job_id = job["id"]
        deadline = time.monotonic() + self.job_timeout
        while True:
            status = job.get("status", "")
            if status == "succeeded":
                model_id = job.get("fine_tuned_model")
                if not model_id:
                    raise JobFailedError(f"job {job_id} succeeded without a model id")
                return ModelRef(
                    backend_kind="remote",
                    handle=model_id,
                    trained_on=fingerprint,
                    epochs=epochs,
                )
            if status in ("failed", "cancelled"):
                raise JobFailedError(f"job {job_id} ended with status {status!r}")
            if time.monotonic() >= deadline:
                raise JobFailedError(f"job {job_id} timed out after {self.job_timeout}s")
            time.sleep(self.poll_interval + random.uniform(0, self.poll_jitter))
            job = self._request("GET", f"/fine_tuning/jobs/{job_id}")

    def generate(self, request: GenerationRequest) -> list[str]:
        if request.n == 0:
            return []
        max_tokens = request.max_tokens
        if max_tokens is None:
            try:
                spec = parse_prompt(request.prompt)
                max_tokens = default_max_tokens(spec.width, spec.height)
            except TemplateMismatchError:
                max_tokens = 512
        payload = self._request(
            "POST",
            "/completions",
            json={
                "model": request.model.handle,
                "prompt": request.prompt,
                "temperature": request.temperature,
                "n": request.n,
                "stop": list(request.stop),
                "max_tokens": max_tokens,
            },
        )
        choices = sorted(payload.get("choices", []), key=lambda ch: ch.get("index", 0))
        texts = []
        for choice in choices:
            text = choice.get("text", "")
            for stop in request.stop:
                if stop and text.endswith(stop):
                    text = text[: -len(stop)]
            texts.append(text)
        return texts


def make_backend(kind: str, **kwargs):
    if kind == "mock":
        return MockBackend()
    if kind == "remote":
        return RemoteBackend(**kwargs)
    raise ValueError(f"unknown backend kind {kind!r}")
