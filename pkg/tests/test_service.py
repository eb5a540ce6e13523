import io
import wave

import numpy as np
import pytest
from fastapi.testclient import TestClient

from multivox import align
from multivox.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="module")
def model_client(mini_checkpoint):
    return TestClient(create_app(checkpoint=str(mini_checkpoint)))


class TestBareService:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["model_loaded"] is False

    def test_languages_include_alias(self, client):
        langs = {
            item["code"]: item["backend_code"]
            for item in client.get("/languages").json()["languages"]
        }
        assert langs["chhattisgarhi"] == "hindi"
        assert langs["telugu"] == "telugu"

    def test_phonemize(self, client):
        body = client.post(
            "/phonemize", json={"text": "hello", "language": "english"}
        ).json()
        assert body["phonemes"] == ["h", "ə", "l", "oʊ"]

    def test_phonemize_unsupported(self, client):
        resp = client.post("/phonemize", json={"text": "x", "language": "klingon"})
        assert resp.status_code == 422
        assert resp.json()["detail"]["kind"] == "unsupported-language"

    def test_synthesize_requires_model(self, client):
        resp = client.post(
            "/synthesize", json={"text": "x", "language": "english", "speaker": "a"}
        )
        assert resp.status_code == 409

    def test_verify_endpoint(self, client):
        body = client.get("/verify/replication", params={"quick": True}).json()
        assert body["passed"] is True
        assert body["checks"][0]["name"] == "replication-exactness"

    def test_verify_unknown_suite(self, client):
        assert client.get("/verify/bogus").status_code == 400


class TestMasEndpoints:
    def test_single_matches_reference(self, client):
        rng = np.random.default_rng(0)
        loglik = rng.normal(size=(3, 7))
        body = client.post("/align/mas", json={"loglik": loglik.tolist()}).json()
        ref = align.mas(loglik)
        assert body["assignment"] == ref.assignment.tolist()
        assert body["durations"] == ref.durations.tolist()
        assert body["total"] == ref.total

    def test_batch_matches_reference(self, client):
        rng = np.random.default_rng(1)
        items = []
        refs = []
        for _ in range(5):
            p = int(rng.integers(1, 6))
            f = int(rng.integers(p, 12))
            m = rng.normal(size=(p, f))
            items.append({"loglik": m.tolist()})
            refs.append(align.mas(m))
        body = client.post("/align/mas/batch", json={"items": items}).json()
        for got, ref in zip(body["items"], refs):
            assert got["assignment"] == ref.assignment.tolist()

    def test_infeasible_names_item(self, client):
        resp = client.post(
            "/align/mas/batch",
            json={"items": [{"loglik": [[0.0, 1.0]]}, {"loglik": [[0.0], [1.0]]}]},
        )
        assert resp.status_code == 422
        assert "item 1" in resp.json()["detail"]["message"]

    def test_valid_region_respected(self, client):
        rng = np.random.default_rng(2)
        core = rng.normal(size=(2, 5))
        padded = np.zeros((4, 8))
        padded[:2, :5] = core
        body = client.post(
            "/align/mas",
            json={"loglik": padded.tolist(), "valid_p": 2, "valid_f": 5},
        ).json()
        ref = align.mas(core)
        assert body["assignment"] == ref.assignment.tolist()


class TestModelService:
    def test_info(self, model_client):
        body = model_client.get("/model/info").json()
        assert body["sample_rate"] == 16000
        assert len(body["languages"]) == 7
        assert body["speakers"]

    def test_synthesize_returns_wav(self, model_client):
        resp = model_client.post(
            "/synthesize",
            json={
                "text": "hello water",
                "language": "english",
                "speaker": "spk00",
                "noise_scale": 0.0,
                "duration_noise_scale": 0.0,
            },
        )
        assert resp.status_code == 200
        assert resp.headers["content-type"].startswith("audio/wav")
        with wave.open(io.BytesIO(resp.content), "rb") as wf:
            assert wf.getframerate() == 16000
            frames = int(resp.headers["X-Total-Frames"])
            assert wf.getnframes() == frames * 64

    def test_synthesize_deterministic_at_zero_noise(self, model_client):
        payload = {
            "text": "hello",
            "language": "english",
            "speaker": "spk00",
            "noise_scale": 0.0,
            "duration_noise_scale": 0.0,
        }
        a = model_client.post("/synthesize", json=payload).content
        b = model_client.post("/synthesize", json=payload).content
        assert a == b

    def test_unknown_speaker(self, model_client):
        resp = model_client.post(
            "/synthesize",
            json={"text": "x", "language": "english", "speaker": "nobody"},
        )
        assert resp.status_code == 422
        assert resp.json()["detail"]["kind"] == "unknown-speaker"

    def test_phonemize_includes_ids_with_model(self, model_client):
        body = model_client.post(
            "/phonemize", json={"text": "hello", "language": "english"}
        ).json()
        assert len(body["ids"]) == len(body["phonemes"])
        assert all(i >= 3 or i == 1 for i in body["ids"])
