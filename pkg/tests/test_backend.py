import json
from pathlib import Path

import pytest

from roomforge.backend import (
    GenerationRequest,
    JobFailedError,
    MockBackend,
    MockSpecUnparseableError,
    ModelRef,
    RecordsInvalidError,
    RemoteBackend,
    RemoteRejectedError,
    default_max_tokens,
    fingerprint_records,
)
from roomforge.config import PipelineConfig
from roomforge.core import ALPHABET, parse_level
from roomforge.dataset import save
from roomforge.fixtures import make_room, seed_dataset
from roomforge.prompting import build_prompt, derive_spec

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture()
def records_path(tmp_path):
    ds = seed_dataset(20)
    save(ds, tmp_path)
    return tmp_path / "finetune.jsonl"


class TestGenerationRequest:
    def test_stop_always_includes_terminator(self):
        model = ModelRef("mock", "m", "fp", 1)
        request = GenerationRequest(model=model, prompt="p", stop=("\n\n",))
        assert ". XUT" in request.stop

    def test_temperature_default(self):
        model = ModelRef("mock", "m", "fp", 1)
        assert GenerationRequest(model=model, prompt="p").temperature == 0.4

    def test_default_max_tokens_formula(self):
        assert default_max_tokens(16, 12) == 16 * 12 + 12 + 8


class TestConfigEpochDefaults:
    def test_stage_epoch_defaults(self):
        config = PipelineConfig()
        assert config.stage1_epochs == 5
        assert config.stage2_epochs == 2
        assert config.temperature == 0.4
        assert config.novelty_fraction == 0.10
        assert config.gen_per_round == 100
        assert config.repair_per_round == 10
        assert config.stage2_rounds == 5
        assert config.stage1_target_new == 60


class TestMockFineTune:
    def test_deterministic_handles(self, records_path):
        a = MockBackend().fine_tune(None, records_path, epochs=5)
        b = MockBackend().fine_tune(None, records_path, epochs=5)
        assert a.handle == b.handle
        assert a.trained_on == b.trained_on == fingerprint_records(records_path)

    def test_lineage_changes_handle(self, records_path):
        backend = MockBackend()
        first = backend.fine_tune(None, records_path, epochs=5)
        second = backend.fine_tune(first, records_path, epochs=2)
        assert first.handle != second.handle
        assert second.epochs == 2

    def test_invalid_records_names_line(self, records_path):
        text = records_path.read_text().splitlines()
        text[2] = "{broken"
        bad = records_path.parent / "bad.jsonl"
        bad.write_text("\n".join(text) + "\n")
        with pytest.raises(RecordsInvalidError) as exc:
            MockBackend().fine_tune(None, bad, epochs=5)
        assert exc.value.line == 3


class TestMockGenerate:
    def make_model(self, tmp_path, rooms=None):
        from roomforge.dataset import Dataset, Provenance

        ds = Dataset()
        for room in rooms or []:
            ds.add_if_new(room, Provenance(kind="handmade"), 0)
        if not rooms:
            ds = seed_dataset(20)
        save(ds, tmp_path)
        backend = MockBackend()
        model = backend.fine_tune(None, tmp_path / "finetune.jsonl", epochs=5)
        return backend, model, ds

    def test_same_request_identical(self, tmp_path):
        backend, model, ds = self.make_model(tmp_path)
        prompt = build_prompt(ds.entries[0].spec)
        request = GenerationRequest(model=model, prompt=prompt, n=5)
        assert backend.generate(request) == backend.generate(request)

    def test_distinct_indices_vary(self, tmp_path):
        backend, model, ds = self.make_model(tmp_path)
        prompt = build_prompt(ds.entries[0].spec)
        outs = backend.generate(GenerationRequest(model=model, prompt=prompt, n=8))
        assert len(set(outs)) > 1

    def test_all_completions_parse_to_prompt_size(self, tmp_path):
        rooms = [make_room(8, 8, n_b=i, n_c=0) for i in range(6)]
        backend, model, _ = self.make_model(tmp_path, rooms)
        spec = derive_spec(rooms[0])
        outs = backend.generate(
            GenerationRequest(model=model, prompt=build_prompt(spec), n=20)
        )
        for text in outs:
            grid = parse_level(text)
            assert (grid.width, grid.height) == (8, 8)

    def test_n_zero(self, tmp_path):
        backend, model, ds = self.make_model(tmp_path)
        prompt = build_prompt(ds.entries[0].spec)
        assert backend.generate(GenerationRequest(model=model, prompt=prompt, n=0)) == []

    def test_alphabet_only_and_within_budget(self, tmp_path):
        backend, model, ds = self.make_model(tmp_path)
        spec = ds.entries[0].spec
        request = GenerationRequest(model=model, prompt=build_prompt(spec), n=10)
        legal = set(ALPHABET) | {"\n", " "}
        for text in backend.generate(request):
            assert set(text) <= legal
            assert len(text) <= default_max_tokens(spec.width, spec.height)

    def test_off_template_prompt_rejected(self, tmp_path):
        backend, model, _ = self.make_model(tmp_path)
        with pytest.raises(MockSpecUnparseableError):
            backend.generate(GenerationRequest(model=model, prompt="make me a room", n=1))


class FakeResponse:
    def __init__(self, payload, status=200):
        self._payload = payload
        self.status_code = status
        self.text = json.dumps(payload)

    def json(self):
        return self._payload


class FakeSession:
    """Replays scripted responses and records every request."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def request(self, method, url, **kwargs):
        self.calls.append((method, url, kwargs))
        return self.responses.pop(0)


class TestRemoteBackend:
    def test_completion_fixture_replay(self):
        payload = json.loads((FIXTURES / "completions_response.json").read_text())
        session = FakeSession([FakeResponse(payload)])
        backend = RemoteBackend(api_key="k", api_base="https://svc.test/v1", session=session)
        model = ModelRef("remote", "ft:davinci-002:acme:rooms:0001", "fp", 2)
        outs = backend.generate(
            GenerationRequest(model=model, prompt=build_prompt(seed_dataset(1).entries[0].spec), n=2)
        )
        # choices come back ordered by index, stop token stripped
        assert len(outs) == 2
        assert outs[0].endswith("EEEEEEEEEE\n")
        assert not outs[0].endswith(". XUT")
        assert outs[1].startswith(" EEEEJAAJEE")
        method, url, kwargs = session.calls[0]
        assert (method, url) == ("POST", "https://svc.test/v1/completions")
        body = kwargs["json"]
        assert body["model"] == "ft:davinci-002:acme:rooms:0001"
        assert body["temperature"] == 0.4
        assert ". XUT" in body["stop"]
        assert kwargs["headers"]["Authorization"] == "Bearer k"

    def test_fine_tune_flow(self, records_path):
        session = FakeSession(
            [
                FakeResponse({"id": "file-1"}),
                FakeResponse({"id": "job-1", "status": "running"}),
                FakeResponse(
                    {"id": "job-1", "status": "succeeded", "fine_tuned_model": "ft:model-9"}
                ),
            ]
        )
        backend = RemoteBackend(
            api_key="k", api_base="https://svc.test/v1", session=session,
            poll_interval=0, poll_jitter=0,
        )
        model = backend.fine_tune(None, records_path, epochs=5)
        assert model.handle == "ft:model-9"
        assert model.backend_kind == "remote"
        assert model.trained_on == fingerprint_records(records_path)
        submit = session.calls[1]
        assert submit[2]["json"]["hyperparameters"] == {"n_epochs": 5}

    def test_job_failure(self, records_path):
        session = FakeSession(
            [
                FakeResponse({"id": "file-1"}),
                FakeResponse({"id": "job-1", "status": "failed"}),
            ]
        )
        backend = RemoteBackend(
            api_key="k", api_base="https://svc.test/v1", session=session,
            poll_interval=0, poll_jitter=0,
        )
        with pytest.raises(JobFailedError):
            backend.fine_tune(None, records_path, epochs=5)

    def test_http_error_surfaces_body(self, records_path):
        session = FakeSession([FakeResponse({"error": "quota exceeded"}, status=429)])
        backend = RemoteBackend(api_key="k", api_base="https://svc.test/v1", session=session)
        with pytest.raises(RemoteRejectedError) as exc:
            backend.fine_tune(None, records_path, epochs=5)
        assert exc.value.status == 429
        assert "quota exceeded" in exc.value.body
