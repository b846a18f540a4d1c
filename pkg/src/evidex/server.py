"""HTTP surface of the evidence store.

Endpoints::

    GET  /search?q=&fields=&page=   ranked documents with findings, paginated
    GET  /doc/{pmid}                one document with findings
    POST /lookup {"ids": [...]}     bulk PMID/PMCID lookup
    GET  /export.csv?q=&fields=     CSV download (or ?ids=... for an id list)
    GET  /healthz                   liveness plus corpus counts

Validation failures are 400, unknown documents 404; error bodies are always
``{"error", "detail"}`` so clients never have to sniff shapes.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Iterator
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .store import (
    CSV_HEADER,
    DocRecord,
    EvidenceStore,
    QueryValidationError,
    SearchPage,
    StoredFinding,
)


class LookupRequest(BaseModel):
    ids: list[str]


def _finding_payload(f: StoredFinding) -> dict:
    return {
        "finding_id": f.finding_id,
        "intervention": f.intervention,
        "outcome": f.outcome,
        "comparator": f.comparator,
        "evidence": f.evidence,
        "label": f.label.value,
    }


def _doc_payload(doc: DocRecord) -> dict:
    return {
        "pmid": doc.pmid,
        "pmcid": doc.pmcid,
        "title": doc.title,
        "abstract": doc.abstract,
        "findings": [_finding_payload(f) for f in doc.findings],
    }


def _page_payload(page: SearchPage) -> dict:
    return {
        "query": page.query,
        "fields": list(page.fields),
        "page": page.page,
        "page_size": page.page_size,
        "total_docs": page.total_docs,
        "total_pages": page.total_pages,
        "hits": [
            {
                "pmid": hit.pmid,
                "score": hit.score,
                "pmcid": hit.pmcid,
                "title": hit.title,
                "snippet": hit.snippet,
                "findings": [_finding_payload(f) for f in hit.findings],
            }
            for hit in page.hits
        ],
    }


def _csv_lines(header: Iterable[str], rows: Iterable[tuple[str, ...]]) -> Iterator[str]:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
        yield buffer.getvalue()
        buffer.seek(0)
        buffer.truncate(0)
    remainder = buffer.getvalue()
    if remainder:
        yield remainder


def create_app(db_path: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    store = EvidenceStore(db_path)
    app = FastAPI(title="evidex store", version=__version__)

    @app.exception_handler(QueryValidationError)
    async def on_query_error(request: Request, exc: QueryValidationError):
        return JSONResponse(status_code=400, content={"error": "validation", "detail": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def on_request_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "validation", "detail": str(exc)})

    @app.exception_handler(Exception)
    async def on_internal_error(request: Request, exc: Exception):
        return JSONResponse(status_code=500, content={"error": "internal", "detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        docs, findings = store.counts()
        return {"status": "ok", "version": __version__, "docs": docs, "findings": findings}

    @app.get("/search")
    def search(q: str = Query(default=""), fields: str = "all", page: int = 1):
        result = store.search(q, tuple(fields.split(",")), page=page)
        return _page_payload(result)

    @app.get("/doc/{pmid}")
    def get_doc(pmid: str):
        doc = store.get_doc(pmid)
        if doc is None:
            return JSONResponse(
                status_code=404,
                content={"error": "not_found", "detail": f"no document with pmid {pmid!r}"},
            )
        return _doc_payload(doc)

    @app.post("/lookup")
    def lookup(body: LookupRequest):
        result = store.lookup_ids(body.ids)
        return {
            "found": [_doc_payload(doc) for doc in result.found],
            "missing": list(result.missing),
        }

    @app.get("/export.csv")
    def export_csv(q: str | None = None, ids: str | None = None, fields: str = "all"):
        id_list = [part for part in (ids.split(",") if ids else []) if part.strip()]
        rows = store.export_rows(
            query=q,
            ids=id_list if ids is not None else None,
            fields=tuple(fields.split(",")),
        )
        # Surface validation problems before the stream starts.
        first: list[tuple[str, ...]] = []
        iterator = iter(rows)
        try:
            first.append(next(iterator))
        except StopIteration:
            pass

        def chain() -> Iterator[tuple[str, ...]]:
            yield from first
            yield from iterator

        return StreamingResponse(
            _csv_lines(CSV_HEADER, chain()),
            media_type="text/csv",
            headers={"Content-Disposition": 'attachment; filename="findings.csv"'},
        )

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
