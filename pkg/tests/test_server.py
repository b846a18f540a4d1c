from __future__ import annotations

import csv
import io

import pytest
from fastapi.testclient import TestClient

from evidex.core import EffectLabel
from evidex.server import create_app
from evidex.store import EvidenceStore, StoredFinding

from test_store import stored


@pytest.fixture()
def client(tmp_path):
    store = EvidenceStore(tmp_path / "api.db")
    store.ingest(
        [
            stored("900001", intervention="zinc sulfate capsules", outcome="warts"),
            stored("900001", intervention="zinc sulfate capsules", outcome="recurrence of warts"),
            stored("900002", intervention="metformin", outcome="hba1c", pmcid="PMC9002"),
        ]
    )
    app = create_app(tmp_path / "api.db")
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


class TestSearchEndpoint:
    def test_basic_search(self, client):
        response = client.get("/search", params={"q": "warts", "fields": "all", "page": 1})
        assert response.status_code == 200
        body = response.json()
        assert body["total_docs"] == 1
        assert body["hits"][0]["pmid"] == "900001"
        assert len(body["hits"][0]["findings"]) == 2
        assert body["page_size"] == 10

    def test_empty_query_is_400_with_shape(self, client):
        response = client.get("/search", params={"q": "   "})
        assert response.status_code == 400
        body = response.json()
        assert body["error"] == "validation" and "detail" in body

    def test_unknown_field_is_400(self, client):
        response = client.get("/search", params={"q": "zinc", "fields": "body"})
        assert response.status_code == 400
        assert "intervention" in response.json()["detail"]

    def test_non_numeric_page_is_400(self, client):
        response = client.get("/search", params={"q": "zinc", "page": "two"})
        assert response.status_code == 400


class TestDocEndpoint:
    def test_found(self, client):
        response = client.get("/doc/900002")
        assert response.status_code == 200
        assert response.json()["pmcid"] == "PMC9002"

    def test_missing_is_404(self, client):
        response = client.get("/doc/123")
        assert response.status_code == 404
        assert response.json()["error"] == "not_found"


class TestLookupEndpoint:
    def test_mixed_ids(self, client):
        response = client.post("/lookup", json={"ids": ["900002", "nope", "PMC9002"]})
        assert response.status_code == 200
        body = response.json()
        assert [d["pmid"] for d in body["found"]] == ["900002"]
        assert body["missing"] == ["nope"]

    def test_malformed_body_is_400(self, client):
        response = client.post("/lookup", json={"ids": "900002"})
        assert response.status_code == 400


class TestExportEndpoint:
    def test_csv_shape_and_count(self, client):
        response = client.get("/export.csv", params={"q": "zinc"})
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/csv")
        rows = list(csv.reader(io.StringIO(response.text)))
        assert rows[0] == list(
            ("pmid", "pmcid", "title", "intervention", "outcome", "comparator", "evidence", "label")
        )
        assert len(rows) == 1 + 2

    def test_quoting_round_trip(self, tmp_path):
        db = tmp_path / "quotes.db"
        store = EvidenceStore(db)
        tricky = 'outcome with, commas and "quotes"'
        store.ingest(
            [
                StoredFinding(
                    pmid="1",
                    intervention="tricky drug",
                    outcome=tricky,
                    comparator="placebo",
                    evidence="line one, line two",
                    label=EffectLabel.SIGNIFICANTLY_INCREASED,
                    abstract="tricky drug trial",
                )
            ]
        )
        with TestClient(create_app(db)) as c:
            response = c.get("/export.csv", params={"q": "tricky"})
        rows = list(csv.reader(io.StringIO(response.text)))
        assert rows[1][4] == tricky

    def test_id_mode_export(self, client):
        response = client.get("/export.csv", params={"ids": "900002,missing"})
        rows = list(csv.reader(io.StringIO(response.text)))
        assert len(rows) == 2
        assert rows[1][0] == "900002"

    def test_needs_query_or_ids(self, client):
        response = client.get("/export.csv")
        assert response.status_code == 400


class TestHealthz:
    def test_counts(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["docs"] == 2
        assert body["findings"] == 3
