"""HTTP surface tests driven through the in-process test client."""

import json

import pytest
from fastapi.testclient import TestClient

from techkg.pipeline import STAGES
from techkg.service import JobManager, create_app

from test_pipeline import demo_config


def make_client(root, **config_overrides) -> TestClient:
    manager = JobManager(root, default_config=demo_config(**config_overrides))
    return TestClient(create_app(manager))


@pytest.fixture(scope="module")
def done_client(tmp_path_factory):
    """Client over one fully-run job plus an empty second job."""
    client = make_client(tmp_path_factory.mktemp("svc"))
    client.post("/jobs")
    for stage in STAGES:
        response = client.post(f"/jobs/job-001/stages/{stage}")
        assert response.status_code == 200, response.text
    return client


@pytest.fixture()
def review_client(tmp_path):
    """Client over a manual-review job stopped at extraction."""
    client = make_client(tmp_path, auto_accept=False)
    client.post("/jobs")
    for stage in STAGES[: STAGES.index("extracted") + 1]:
        assert client.post(f"/jobs/job-001/stages/{stage}").status_code == 200
    return client


# -- job lifecycle -----------------------------------------------------------


def test_create_job_with_server_default(tmp_path):
    client = make_client(tmp_path)
    response = client.post("/jobs")
    assert response.status_code == 201
    body = response.json()
    assert body["job_id"] == "job-001"
    assert body["stage"] is None
    assert client.post("/jobs").json()["job_id"] == "job-002"
    listed = client.get("/jobs").json()
    assert [j["job_id"] for j in listed] == ["job-001", "job-002"]


def test_create_job_with_explicit_config(tmp_path):
    client = make_client(tmp_path)
    response = client.post("/jobs", json=demo_config(selection_k=3).to_json())
    assert response.status_code == 201
    assert response.json()["config"]["selection_k"] == 3


def test_create_job_with_bad_config(tmp_path):
    client = make_client(tmp_path)
    response = client.post("/jobs", json={"corpus": "nowhere.jsonl"})
    assert response.status_code == 400
    assert "thesaurus" in response.json()["detail"]


def test_unknown_job_is_404(tmp_path):
    client = make_client(tmp_path)
    response = client.get("/jobs/job-999")
    assert response.status_code == 404
    assert "unknown job" in response.json()["detail"]


def test_reads_without_any_job_are_404(tmp_path):
    client = make_client(tmp_path)
    response = client.get("/topicmap")
    assert response.status_code == 404
    assert "POST /jobs" in response.json()["detail"]


def test_stage_out_of_order_is_409(tmp_path):
    client = make_client(tmp_path)
    client.post("/jobs")
    response = client.post("/jobs/job-001/stages/extracted")
    assert response.status_code == 409
    assert "requires" in response.json()["detail"]


def test_unknown_stage_is_400(tmp_path):
    client = make_client(tmp_path)
    client.post("/jobs")
    assert client.post("/jobs/job-001/stages/warp").status_code == 400


def test_artifact_read_before_stage_is_409(tmp_path):
    client = make_client(tmp_path)
    client.post("/jobs")
    response = client.get("/scores")
    assert response.status_code == 409


# -- read endpoints over the finished job ----------------------------------------


def test_job_record_endpoint(done_client):
    record = done_client.get("/jobs/job-001").json()
    assert record["stage"] == "exported"
    assert [h["stage"] for h in record["history"]] == list(STAGES)


def test_topicmap_endpoint(done_client):
    body = done_client.get("/topicmap").json()
    assert body["stats"]["node_count"] == 8
    assert all("cluster" in node for node in body["nodes"])


def test_clusters_endpoint(done_client):
    clusters = done_client.get("/clusters").json()
    assert sum(c["size"] for c in clusters) == 8


def test_documents_endpoint_filters(done_client):
    docs = done_client.get("/documents", params={"term": "t10"}).json()
    assert {d["id"] for d in docs} == {"n06", "s04", "p05"}
    assert done_client.get("/documents?cluster=999").json() == []


def test_scores_endpoint(done_client):
    scores = done_client.get("/scores").json()
    assert len(scores["scores"]) == 8


def test_selection_endpoints(done_client):
    selected = done_client.get("/selection").json()
    assert len(selected) == 5
    # extraction already ran in this job, so edits are refused
    response = done_client.post(
        "/selection", json={"action": "add", "doc_id": "n02"}
    )
    assert response.status_code == 409
    response = done_client.post("/selection", json={"action": "drop", "doc_id": "x"})
    assert response.status_code == 400


def test_selection_amend_before_extraction(tmp_path):
    client = make_client(tmp_path)
    client.post("/jobs")
    for stage in STAGES[: STAGES.index("selected") + 1]:
        client.post(f"/jobs/job-001/stages/{stage}")
    body = client.post(
        "/selection", json={"action": "add", "doc_id": "n02"}
    ).json()
    assert "n02" in {e["doc_id"] for e in body}
    response = client.post("/selection", json={"action": "add", "doc_id": "zz99"})
    assert response.status_code == 400


def test_kg_endpoints(done_client):
    view = done_client.get("/kg").json()
    assert {"nodes", "edges"} <= set(view)
    stats = done_client.get("/kg/stats").json()
    assert stats["class_count"] >= 10
    export = done_client.get("/kg/export.ttl")
    assert export.status_code == 200
    assert export.headers["content-type"].startswith("text/turtle")
    assert export.text.startswith("@prefix")


def test_report_endpoint(done_client):
    manifest = done_client.get("/kg/report").json()
    assert manifest["metrics"]["violations_residual"] == 0
    assert len(manifest["figures"]) == 3


def test_coverage_endpoint(done_client, tmp_path):
    dump = tmp_path / "dump.json"
    dump.write_text(json.dumps({"nodes": [{"label": "CAN bus"}], "edges": []}))
    body = done_client.get("/coverage", params={"dump": str(dump)}).json()
    assert body["shared"] == 1
    missing = done_client.get("/coverage", params={"dump": str(tmp_path / "no.json")})
    assert missing.status_code == 400
    assert done_client.get("/coverage").status_code == 422  # dump is required


def test_job_query_param_selects_job(done_client):
    # job-002 is newest and empty, so the default resolution conflicts
    assert done_client.post("/jobs").json()["job_id"] == "job-002"
    assert done_client.get("/topicmap").status_code == 409
    assert done_client.get("/topicmap", params={"job": "job-001"}).status_code == 200
    assert done_client.get("/topicmap", params={"job": "job-x"}).status_code == 404


def test_review_closed_after_validation(done_client):
    assert done_client.get("/review/queue", params={"job": "job-001"}).json() == []
    response = done_client.post("/review/00000000/accept", params={"job": "job-001"})
    assert response.status_code == 409
    assert "closed" in response.json()["detail"]


# -- review over HTTP ---------------------------------------------------------


def test_review_flow_over_http(review_client):
    queue = review_client.get("/review/queue").json()
    assert len(queue) == 12
    assert all(entry["snippet"] for entry in queue)

    blocked = review_client.post("/jobs/job-001/stages/validated")
    assert blocked.status_code == 500
    assert "awaiting review" in blocked.json()["detail"]

    victim, rest = queue[0], queue[1:]
    rejected = review_client.post(
        f"/review/{victim['triple_id']}/reject", json={"reason": "wrong head"}
    )
    assert rejected.status_code == 200
    assert rejected.json()["status"] == "rejected"
    assert rejected.json()["reason"] == "wrong head"

    flip = review_client.post(f"/review/{victim['triple_id']}/accept")
    assert flip.status_code == 409

    missing = review_client.post("/review/feedbeef/accept")
    assert missing.status_code == 404

    for entry in rest:
        assert review_client.post(
            f"/review/{entry['triple_id']}/accept"
        ).status_code == 200
    assert review_client.get("/review/queue").json() == []
    assert review_client.post("/jobs/job-001/stages/validated").status_code == 200


def test_review_decisions_survive_restart(tmp_path):
    client = make_client(tmp_path, auto_accept=False)
    client.post("/jobs")
    for stage in STAGES[: STAGES.index("extracted") + 1]:
        client.post(f"/jobs/job-001/stages/{stage}")
    queue = client.get("/review/queue").json()
    client.post(f"/review/{queue[0]['triple_id']}/reject")

    # a second manager over the same root sees the decision
    reopened = make_client(tmp_path, auto_accept=False)
    assert len(reopened.get("/review/queue").json()) == len(queue) - 1


# -- static UI mount --------------------------------------------------------


def test_ui_mount_serves_index(tmp_path):
    ui = tmp_path / "dist"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>explorer</title>")
    manager = JobManager(tmp_path / "root", default_config=demo_config())
    client = TestClient(create_app(manager, ui_dir=ui))
    root = client.get("/", follow_redirects=False)
    assert root.status_code in (302, 307)
    assert root.headers["location"] == "/ui/"
    page = client.get("/ui/")
    assert page.status_code == 200
    assert "explorer" in page.text


def test_no_ui_mount_without_dir(tmp_path):
    client = make_client(tmp_path)
    assert client.get("/").status_code == 404
