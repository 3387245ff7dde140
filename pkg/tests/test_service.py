import json
from pathlib import Path
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from fastapi.testclient import TestClient

from frontrank.data import FeatureDataset, save_dataset
from frontrank.metrics import make_bridge_benchmark
from frontrank.service import create_app


@pytest.fixture(scope="module")
def service(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc")
    ds, labels = make_bridge_benchmark(n_core=30, n_bridge=15, n_distractor=20, seed=0)
    dataset_path = root / "bench.bin"
    save_dataset(ds, dataset_path, format="binary", labels=labels)
    (root / "bench.thumbs.json").write_text(json.dumps({"a000": "thumbs/a000.png"}))
    app = create_app(root / "data")
    client = TestClient(app)
    resp = client.post(
        "/models",
        json={
            "dataset_path": str(dataset_path),
            "dataset_format": "binary",
            "config": {"alpha": 0.95, "anchor_count": 16, "nearest_anchors": 3, "seed": 1},
        },
    )
    assert resp.status_code == 200, resp.text
    return client, resp.json()["model_id"], ds, dataset_path, root


class TestModels:
    def test_build_is_idempotent(self, service):
        client, model_id, _, dataset_path, _ = service
        again = client.post(
            "/models",
            json={
                "dataset_path": str(dataset_path),
                "dataset_format": "binary",
                "config": {"alpha": 0.95, "anchor_count": 16, "nearest_anchors": 3, "seed": 1},
            },
        )
        assert again.json()["model_id"] == model_id

    def test_different_seed_different_model(self, service):
        client, model_id, _, dataset_path, _ = service
        other = client.post(
            "/models",
            json={
                "dataset_path": str(dataset_path),
                "dataset_format": "binary",
                "config": {"alpha": 0.95, "anchor_count": 16, "nearest_anchors": 3, "seed": 2},
            },
        )
        assert other.json()["model_id"] != model_id

    def test_missing_dataset_404(self, service):
        client, *_ = service
        resp = client.post(
            "/models", json={"dataset_path": "/nope/NOPE.bin", "config": {}}
        )
        assert resp.status_code == 404


class TestRetrieve:
    def test_pfm_shape(self, service):
        client, model_id, ds, _, _ = service
        resp = client.post(
            "/retrieve",
            json={"model_id": model_id, "query_ids": [0, 50], "k": 20, "method": "pfm"},
        )
        assert resp.status_code == 200
        body = resp.json()
        items = [it for front in body["fronts"] for it in front]
        assert 0 < len(items) <= 20
        assert body["method"] == "pfm"
        assert "timing_ms" in body
        # front groups are emitted middle-out; positions are tail-to-tail ranks
        for front in body["fronts"]:
            positions = [it["position"] for it in front]
            assert len(set(positions)) == len(positions)

    def test_query_items_not_returned(self, service):
        client, model_id, ds, _, _ = service
        resp = client.post(
            "/retrieve",
            json={"model_id": model_id, "query_ids": [3, 7], "k": ds.n, "method": "pfm"},
        )
        indices = [it["item_index"] for front in resp.json()["fronts"] for it in front]
        assert {3, 7}.isdisjoint(indices)

    def test_k_zero_rejected(self, service):
        client, model_id, *_ = service
        resp = client.post(
            "/retrieve", json={"model_id": model_id, "query_ids": [0], "k": 0}
        )
        assert resp.status_code == 422

    def test_unknown_model_404(self, service):
        client, *_ = service
        resp = client.post(
            "/retrieve", json={"model_id": "doesnotexist", "query_ids": [0], "k": 5}
        )
        assert resp.status_code == 404

    def test_invalid_query_ids_422(self, service):
        client, model_id, ds, _, _ = service
        for bad in ([ds.n + 5], [1, 1]):
            resp = client.post(
                "/retrieve", json={"model_id": model_id, "query_ids": bad, "k": 5}
            )
            assert resp.status_code == 422

    def test_unknown_method_422(self, service):
        client, model_id, *_ = service
        resp = client.post(
            "/retrieve",
            json={"model_id": model_id, "query_ids": [0], "k": 5, "method": "borda"},
        )
        assert resp.status_code == 422

    def test_replaying_a_request_gives_identical_content(self, service):
        client, model_id, *_ = service
        payload = {"model_id": model_id, "query_ids": [5, 70], "k": 12, "method": "pfm"}
        first = client.post("/retrieve", json=payload).json()
        second = client.post("/retrieve", json=payload).json()
        first.pop("timing_ms")
        second.pop("timing_ms")
        assert first == second

    def test_numeric_failure_maps_to_500(self, tmp_path):
        # corrupt the persisted model so ranking produces non-finite scores
        import struct

        ds, labels = make_bridge_benchmark(n_core=10, n_bridge=5, n_distractor=5, seed=4)
        path = tmp_path / "d.bin"
        save_dataset(ds, path, format="binary", labels=labels)
        client = TestClient(create_app(tmp_path / "data"))
        model_id = client.post(
            "/models",
            json={
                "dataset_path": str(path),
                "dataset_format": "binary",
                "config": {"anchor_count": 8, "nearest_anchors": 2, "seed": 0},
            },
        ).json()["model_id"]
        model_file = tmp_path / "data" / "models" / f"{model_id}.emr"
        blob = bytearray(model_file.read_bytes())
        blob[-8:] = struct.pack("<d", float("nan"))  # last core-inverse entry
        model_file.write_bytes(bytes(blob))
        resp = client.post(
            "/retrieve", json={"model_id": model_id, "query_ids": [0, 20], "k": 3}
        )
        assert resp.status_code == 500
        assert resp.json()["detail"]["error_code"] == "NumericalError"

    def test_concurrent_calls_match_serial(self, service):
        client, model_id, _, _, _ = service
        payload = {"model_id": model_id, "query_ids": [2, 60], "k": 15, "method": "pfm"}
        serial = client.post("/retrieve", json=payload).json()
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = [pool.submit(client.post, "/retrieve", json=payload) for _ in range(2)]
            results = [f.result().json() for f in futures]
        for body in results:
            assert body["fronts"] == serial["fronts"]

    def test_baseline_returns_single_group(self, service):
        client, model_id, *_ = service
        resp = client.post(
            "/retrieve",
            json={"model_id": model_id, "query_ids": [0, 40], "k": 10, "method": "mq_avg"},
        )
        body = resp.json()
        assert len(body["fronts"]) == 1
        scores = [it["score"] for it in body["fronts"][0]]
        assert scores == sorted(scores, reverse=True)


class TestFronts:
    def test_depth_one_anti_diagonal_single_front(self, tmp_path):
        # a feature-space line whose endpoint queries give anti-monotone
        # dissimilarities, so every candidate sits on the first front
        line = np.linspace(0.0, 1.0, 12)[:, None] * np.ones((1, 2))
        ds = FeatureDataset(
            item_ids=tuple(f"p{i:02d}" for i in range(12)), features=line
        )
        path = tmp_path / "line.bin"
        save_dataset(ds, path, format="binary")
        client = TestClient(create_app(tmp_path / "data"))
        model_id = client.post(
            "/models",
            json={
                "dataset_path": str(path),
                "dataset_format": "binary",
                "config": {"alpha": 0.5, "anchor_count": 4, "nearest_anchors": 2, "seed": 0},
            },
        ).json()["model_id"]
        resp = client.get(
            f"/fronts/{model_id}", params={"queries": "0,11", "depth": 1}
        )
        body = resp.json()
        assert resp.status_code == 200
        assert len(body["fronts"]) == 1
        assert len(body["fronts"][0]) == 10  # everything except the two queries

    def test_positions_sorted_tail_to_tail(self, service):
        client, model_id, *_ = service
        body = client.get(
            f"/fronts/{model_id}", params={"queries": "0,50", "depth": 3}
        ).json()
        for front in body["fronts"]:
            coords = [it["coords"][0] for it in front]
            assert coords == sorted(coords)
            assert [it["position"] for it in front] == list(range(len(front)))

    def test_bad_query_string_422(self, service):
        client, model_id, *_ = service
        resp = client.get(f"/fronts/{model_id}", params={"queries": "a,b", "depth": 1})
        assert resp.status_code == 422


class TestItems:
    def test_item_metadata_with_labels_and_thumbnail(self, service):
        client, model_id, ds, _, _ = service
        resp = client.get("/items/a000", params={"model_id": model_id})
        body = resp.json()
        assert resp.status_code == 200
        assert body["labels"] == [1, 0, 0]
        assert body["thumbnail"] == "thumbs/a000.png"

    def test_unknown_item_404(self, service):
        client, model_id, *_ = service
        resp = client.get("/items/zzz", params={"model_id": model_id})
        assert resp.status_code == 404


class TestFrontendContract:
    def test_frozen_ui_fixture_matches_live_schema(self, service):
        # the browser client pins its tests to this fixture; if the wire
        # format drifts, this cross-check fails before the UI silently rots
        fixture_path = (
            Path(__file__).parent.parent / "frontend" / "test" / "fronts_fixture.json"
        )
        if not fixture_path.exists():
            pytest.skip("frontend fixture not present")
        fixture = json.loads(fixture_path.read_text())
        client, model_id, *_ = service
        live = client.get(
            f"/fronts/{model_id}", params={"queries": "0,50", "depth": 2}
        ).json()
        assert set(live) == set(fixture)
        assert set(live["fronts"][0][0]) == set(fixture["fronts"][0][0])


class TestFingerprint:
    def test_mismatch_refuses_service(self, tmp_path):
        ds, labels = make_bridge_benchmark(n_core=10, n_bridge=5, n_distractor=5, seed=3)
        path = tmp_path / "d.bin"
        save_dataset(ds, path, format="binary", labels=labels)
        client = TestClient(create_app(tmp_path / "data"))
        model_id = client.post(
            "/models",
            json={
                "dataset_path": str(path),
                "dataset_format": "binary",
                "config": {"anchor_count": 8, "nearest_anchors": 2, "seed": 0},
            },
        ).json()["model_id"]
        # tamper with the dataset file
        save_dataset(ds, path, format="binary")  # drop labels -> new bytes
        resp = client.post(
            "/retrieve", json={"model_id": model_id, "query_ids": [0], "k": 3}
        )
        assert resp.status_code == 409
        assert resp.json()["detail"]["error_code"] == "fingerprint_mismatch"
