import inspect

import numpy as np
import pytest

pytest.importorskip("fastapi")
pytest.importorskip("aiosqlite")

from fastapi.testclient import TestClient  # noqa: E402

from sffkit import config  # noqa: E402
from sffkit.app import app  # noqa: E402
from sffkit.client import SffKitClient  # noqa: E402
from sffkit.metrics import aggregate_folds, confusion  # noqa: E402
from sffkit.models import FeatureKind, FoldReport, UtterancePrediction  # noqa: E402


def _report(accuracy_of_b=0.0):
    folds = []
    for speaker, actual, predicted in (("a", 0, 0), ("b", 1, 2 if accuracy_of_b == 0 else 1), ("c", 2, 2)):
        folds.append(FoldReport(
            speaker_id=speaker,
            predictions=[UtterancePrediction(utterance_id=f"{speaker}0", actual=actual,
                                             predicted=predicted, margins={"0-1": 0.5})],
            chosen_c=1.0,
            accuracy=float(actual == predicted),
            confusion=confusion([actual], [predicted]),
        ))
    return aggregate_folds(folds, FeatureKind.sffcc)


@pytest.fixture
def http(registry_db):
    with TestClient(app) as client:
        yield client


def test_health(http):
    assert http.get("/health").json()["status"] == "ok"


def test_sff_spectrogram_endpoint(http):
    n = np.arange(800)
    samples = (0.5 * np.sin(2 * np.pi * 1000 * n / 8000)).tolist()
    body = http.post("/analyze/spectrogram", json={
        "samples": samples, "sample_rate_hz": 8000, "method": "sff", "sff": {"delta_f_hz": 250.0},
    }).json()
    assert body["origin"] == "sff"
    frames = np.array(body["frames"])
    assert frames.shape == (10, 16)
    assert frames[-1].argmax() == 3


def test_stft_spectrogram_endpoint(http):
    body = http.post("/analyze/spectrogram", json={
        "samples": [0.0] * 1600, "sample_rate_hz": 16000, "method": "stft",
    }).json()
    assert body["bin_spacing_hz"] == 31.25
    assert len(body["frames"][0]) == 257


def test_features_endpoint(http):
    rng = np.random.default_rng(0)
    resp = http.post("/analyze/features", json={
        "samples": rng.uniform(-0.2, 0.2, 1600).tolist(), "sample_rate_hz": 16000,
        "feature_kind": "mfcc_sff",
    })
    assert resp.status_code == 200
    assert len(resp.json()["pooled"]) == 39


def test_invalid_input_is_422(http):
    resp = http.post("/analyze/spectrogram", json={"samples": [2.0], "sample_rate_hz": 8000})
    assert resp.status_code == 422
    resp = http.post("/analyze/features", json={
        "samples": [0.1] * 1600, "sample_rate_hz": 16000, "sff": {"delta_f_hz": 1000.0},
    })
    assert resp.status_code == 422
    assert "n_cepstra" in resp.json()["detail"]


def test_publish_and_fetch(http):
    report = _report()
    first = http.post("/experiments", content=report.model_dump_json(),
                      headers={"Content-Type": "application/json"}).json()["run_id"]
    again = http.post("/experiments", content=report.model_dump_json(),
                      headers={"Content-Type": "application/json"}).json()["run_id"]
    assert first == again

    listing = http.get("/experiments").json()
    assert listing["count"] == 1
    assert listing["experiments"][0]["feature_kind"] == "sffcc"
    fetched = http.get(f"/experiments/{first}").json()
    assert fetched["fold_count"] == 3
    assert http.get("/experiments/missing").status_code == 404


def test_secret_is_enforced(http, monkeypatch):
    monkeypatch.setattr(config, "SFFKIT_SECRET", "s3cret")
    payload = _report().model_dump_json()
    headers = {"Content-Type": "application/json"}
    assert http.post("/experiments", content=payload, headers=headers).status_code == 401
    bad = {**headers, "X-SffKit-Secret": "nope"}
    assert http.post("/experiments", content=payload, headers=bad).status_code == 403
    good = {**headers, "X-SffKit-Secret": "s3cret"}
    assert http.post("/experiments", content=payload, headers=good).status_code == 200
    assert http.get("/experiments").status_code == 200


def test_client_against_test_app(http):
    client = SffKitClient(base_url="", secret="", http_client=http)
    assert client.health()["service"] == "sffkit"
    report = _report(accuracy_of_b=1.0)
    run_id = client.publish_report(report)
    assert client.get_experiment(run_id) == report
    assert client.list_experiments(limit=5)["count"] == 1
    pooled = client.features([0.1] * 1600, 16000, feature_kind="sffcc")["pooled"]
    assert len(pooled) == 39
    assert client.spectrogram([0.0] * 800, 8000, method="stft")["origin"] == "stft"


def test_analysis_routes_do_not_block_the_event_loop():
    endpoints = {route.path: route.endpoint for route in app.routes if hasattr(route, "endpoint")}
    for path in ("/analyze/spectrogram", "/analyze/features"):
        assert not inspect.iscoroutinefunction(endpoints[path])
    assert inspect.iscoroutinefunction(endpoints["/experiments/{run_id}"])
