"""Embedded search store over extracted findings.

Persistence is a single SQLite file: a documents table, a findings table, and
serialized per-field inverted-index segments. Ranking is Okapi BM25 summed
over the selected fields, per document (a hit is a document with its findings
attached, matching how results are browsed and exported).

Search interface constants: at most ``RESULT_CAP`` documents per query, paged
``PAGE_SIZE`` at a time. Both are configurable server-side but default to the
shipped prototype's limits.
"""

from __future__ import annotations

import json
import math
import sqlite3
from collections.abc import Iterable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from .core import EffectLabel, normalize_text, string_to_label

RESULT_CAP = 100
PAGE_SIZE = 10
DEFAULT_K1 = 1.2
DEFAULT_B = 0.75

SEARCHABLE_FIELDS = ("abstract", "intervention", "outcome", "comparator", "evidence", "all")

CSV_HEADER = ("pmid", "pmcid", "title", "intervention", "outcome", "comparator", "evidence", "label")


class StoreError(RuntimeError):
    pass


class QueryValidationError(ValueError):
    pass


def tokenize(s: str) -> list[str]:
    """Normalized whitespace tokens; no stemming, no stopwords."""
    return normalize_text(s).split()


@dataclass(frozen=True)
class StoredFinding:
    pmid: str
    intervention: str
    outcome: str
    comparator: str
    evidence: str
    label: EffectLabel
    pmcid: str | None = None
    title: str | None = None
    #: document body; carried on the finding so the abstract field is indexable
    abstract: str | None = None
    #: assigned by the store on insert
    finding_id: int | None = None


@dataclass(frozen=True)
class IngestReport:
    inserted: int
    skipped: int
    docs: int


@dataclass(frozen=True)
class FieldIndex:
    """Inverted index for one searchable field."""

    field: str
    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    avgdl: float
    n_docs: int


@dataclass(frozen=True)
class DocRecord:
    pmid: str
    pmcid: str | None
    title: str | None
    abstract: str | None
    findings: tuple[StoredFinding, ...]


@dataclass(frozen=True)
class SearchHit:
    pmid: str
    score: float
    pmcid: str | None
    title: str | None
    findings: tuple[StoredFinding, ...]
    snippet: str


@dataclass(frozen=True)
class SearchPage:
    query: str
    fields: tuple[str, ...]
    page: int
    page_size: int
    total_docs: int
    total_pages: int
    hits: tuple[SearchHit, ...]


@dataclass(frozen=True)
class LookupResult:
    found: tuple[DocRecord, ...]
    missing: tuple[str, ...]


def bm25_score(
    terms: Sequence[str],
    doc_id: str,
    index: FieldIndex,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> float:
    """Okapi BM25 for one document against a tokenized query.

    score = sum_t IDF(t) * f(t,D) * (k1+1) / (f(t,D) + k1 * (1 - b + b*|D|/avgdl))
    with IDF(t) = ln((N - n_t + 0.5) / (n_t + 0.5) + 1). Absent terms add 0.
    """
    dl = index.doc_lengths.get(doc_id, 0)
    avgdl = index.avgdl if index.avgdl > 0 else 1.0
    score = 0.0
    for term in terms:
        postings = index.postings.get(term)
        if not postings:
            continue
        tf = 0
        for pmid, frequency in postings:
            if pmid == doc_id:
                tf = frequency
                break
        if tf == 0:
            continue
        n_t = len(postings)
        idf = math.log((index.n_docs - n_t + 0.5) / (n_t + 0.5) + 1.0)
        score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl))
    return score


def _pmid_sort_key(pmid: str) -> tuple[int, int | str]:
    if pmid.isdigit():
        return (0, int(pmid))
    return (1, pmid)


_SCHEMA = """
CREATE TABLE IF NOT EXISTS documents (
    pmid TEXT PRIMARY KEY,
    pmcid TEXT,
    title TEXT,
    abstract TEXT
);
CREATE TABLE IF NOT EXISTS findings (
    finding_id INTEGER PRIMARY KEY,
    pmid TEXT NOT NULL REFERENCES documents(pmid),
    intervention TEXT NOT NULL,
    outcome TEXT NOT NULL,
    comparator TEXT NOT NULL,
    evidence TEXT NOT NULL,
    label TEXT NOT NULL,
    triplet_key TEXT NOT NULL,
    UNIQUE (pmid, triplet_key)
);
CREATE INDEX IF NOT EXISTS findings_by_pmid ON findings(pmid);
CREATE TABLE IF NOT EXISTS index_segments (
    field TEXT PRIMARY KEY,
    payload TEXT NOT NULL
);
"""


class EvidenceStore:
    """Single-file store; many concurrent readers, one writer at a time."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.path)
        conn.row_factory = sqlite3.Row
        return conn

    @contextmanager
    def _reader(self):
        conn = self._connect()
        try:
            yield conn
        finally:
            conn.close()

    def initialize(self) -> None:
        conn = self._connect()
        try:
            conn.executescript(_SCHEMA)
            conn.commit()
        finally:
            conn.close()

    # -- ingest ---------------------------------------------------------

    def ingest(self, findings: Iterable[StoredFinding]) -> IngestReport:
        """Atomic batch insert; duplicates (same pmid and normalized triplet) skip.

        Indexes are rebuilt inside the same transaction, so readers never see
        findings without matching index segments.
        """
        inserted = 0
        skipped = 0
        batch_docs: set[str] = set()
        conn = self._connect()
        try:
            conn.executescript(_SCHEMA)
            conn.execute("BEGIN IMMEDIATE")
            for item in findings:
                if not item.pmid:
                    raise StoreError("StoredFinding.pmid must be nonempty")
                batch_docs.add(item.pmid)
                conn.execute(
                    "INSERT INTO documents (pmid, pmcid, title, abstract) VALUES (?, ?, ?, ?) "
                    "ON CONFLICT(pmid) DO UPDATE SET "
                    "pmcid = COALESCE(documents.pmcid, excluded.pmcid), "
                    "title = COALESCE(documents.title, excluded.title), "
                    "abstract = COALESCE(documents.abstract, excluded.abstract)",
                    (item.pmid, item.pmcid, item.title, item.abstract),
                )
                key = "|".join(
                    (
                        normalize_text(item.intervention),
                        normalize_text(item.outcome),
                        normalize_text(item.comparator),
                    )
                )
                cursor = conn.execute(
                    "INSERT OR IGNORE INTO findings "
                    "(pmid, intervention, outcome, comparator, evidence, label, triplet_key) "
                    "VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (
                        item.pmid,
                        item.intervention,
                        item.outcome,
                        item.comparator,
                        item.evidence,
                        item.label.value,
                        key,
                    ),
                )
                if cursor.rowcount == 1:
                    inserted += 1
                else:
                    skipped += 1
            self._rebuild_indexes(conn)
            conn.commit()
        except BaseException:
            conn.rollback()
            raise
        finally:
            conn.close()
        return IngestReport(inserted=inserted, skipped=skipped, docs=len(batch_docs))

    def _field_texts(self, conn: sqlite3.Connection) -> dict[str, dict[str, str]]:
        """Concatenated searchable text per document, per field."""
        texts: dict[str, dict[str, str]] = {f: {} for f in SEARCHABLE_FIELDS}
        docs = conn.execute("SELECT pmid, title, abstract FROM documents").fetchall()
        parts_by_doc: dict[str, dict[str, list[str]]] = {}
        for row in docs:
            parts_by_doc[row["pmid"]] = {
                "abstract": [row["abstract"] or ""],
                "intervention": [],
                "outcome": [],
                "comparator": [],
                "evidence": [],
                "all": [row["title"] or "", row["abstract"] or ""],
            }
        rows = conn.execute(
            "SELECT pmid, intervention, outcome, comparator, evidence FROM findings "
            "ORDER BY finding_id"
        ).fetchall()
        for row in rows:
            parts = parts_by_doc[row["pmid"]]
            parts["intervention"].append(row["intervention"])
            parts["outcome"].append(row["outcome"])
            parts["comparator"].append(row["comparator"])
            parts["evidence"].append(row["evidence"])
            parts["all"].extend(
                (row["intervention"], row["outcome"], row["comparator"], row["evidence"])
            )
        for pmid, parts in parts_by_doc.items():
            for field_name in SEARCHABLE_FIELDS:
                texts[field_name][pmid] = " ".join(p for p in parts[field_name] if p)
        return texts

    def _rebuild_indexes(self, conn: sqlite3.Connection) -> None:
        for field_name, by_doc in self._field_texts(conn).items():
            postings: dict[str, list[tuple[str, int]]] = {}
            doc_lengths: dict[str, int] = {}
            for pmid in sorted(by_doc, key=_pmid_sort_key):
                terms = tokenize(by_doc[pmid])
                doc_lengths[pmid] = len(terms)
                counts: dict[str, int] = {}
                for term in terms:
                    counts[term] = counts.get(term, 0) + 1
                for term, tf in counts.items():
                    postings.setdefault(term, []).append((pmid, tf))
            n_docs = len(doc_lengths)
            avgdl = sum(doc_lengths.values()) / n_docs if n_docs else 0.0
            payload = json.dumps(
                {
                    "postings": postings,
                    "doc_lengths": doc_lengths,
                    "avgdl": avgdl,
                    "n_docs": n_docs,
                },
                ensure_ascii=False,
            )
            conn.execute(
                "INSERT INTO index_segments (field, payload) VALUES (?, ?) "
                "ON CONFLICT(field) DO UPDATE SET payload = excluded.payload",
                (field_name, payload),
            )

    # -- reads ------------------------------------------------------------

    def load_index(self, field_name: str, conn: sqlite3.Connection | None = None) -> FieldIndex:
        if field_name not in SEARCHABLE_FIELDS:
            raise QueryValidationError(
                f"unknown field {field_name!r}; valid fields: {', '.join(SEARCHABLE_FIELDS)}"
            )
        close = conn is None
        conn = conn or self._connect()
        try:
            row = conn.execute(
                "SELECT payload FROM index_segments WHERE field = ?", (field_name,)
            ).fetchone()
        finally:
            if close:
                conn.close()
        if row is None:
            return FieldIndex(field_name, {}, {}, 0.0, 0)
        payload = json.loads(row["payload"])
        return FieldIndex(
            field=field_name,
            postings={t: [(p, f) for p, f in lst] for t, lst in payload["postings"].items()},
            doc_lengths=payload["doc_lengths"],
            avgdl=payload["avgdl"],
            n_docs=payload["n_docs"],
        )

    def _findings_for(self, conn: sqlite3.Connection, pmid: str) -> tuple[StoredFinding, ...]:
        rows = conn.execute(
            "SELECT f.*, d.pmcid AS doc_pmcid, d.title AS doc_title, d.abstract AS doc_abstract "
            "FROM findings f JOIN documents d ON d.pmid = f.pmid "
            "WHERE f.pmid = ? ORDER BY f.finding_id",
            (pmid,),
        ).fetchall()
        return tuple(
            StoredFinding(
                pmid=row["pmid"],
                intervention=row["intervention"],
                outcome=row["outcome"],
                comparator=row["comparator"],
                evidence=row["evidence"],
                label=string_to_label(row["label"]),
                pmcid=row["doc_pmcid"],
                title=row["doc_title"],
                abstract=row["doc_abstract"],
                finding_id=row["finding_id"],
            )
            for row in rows
        )

    def _doc_row(self, conn: sqlite3.Connection, pmid: str) -> sqlite3.Row | None:
        return conn.execute(
            "SELECT pmid, pmcid, title, abstract FROM documents WHERE pmid = ?", (pmid,)
        ).fetchone()

    def get_doc(self, pmid: str) -> DocRecord | None:
        with self._reader() as conn:
            row = self._doc_row(conn, pmid)
            if row is None:
                return None
            return DocRecord(
                pmid=row["pmid"],
                pmcid=row["pmcid"],
                title=row["title"],
                abstract=row["abstract"],
                findings=self._findings_for(conn, pmid),
            )

    def counts(self) -> tuple[int, int]:
        with self._reader() as conn:
            try:
                docs = conn.execute("SELECT COUNT(*) FROM documents").fetchone()[0]
                findings = conn.execute("SELECT COUNT(*) FROM findings").fetchone()[0]
            except sqlite3.OperationalError:
                return (0, 0)
        return (docs, findings)

    def _validate_fields(self, fields: Sequence[str]) -> tuple[str, ...]:
        if not fields:
            fields = ("all",)
        cleaned = []
        for name in fields:
            name = name.strip()
            if not name:
                continue
            if name not in SEARCHABLE_FIELDS:
                raise QueryValidationError(
                    f"unknown field {name!r}; valid fields: {', '.join(SEARCHABLE_FIELDS)}"
                )
            if name not in cleaned:
                cleaned.append(name)
        if not cleaned:
            raise QueryValidationError(f"no field selected; valid fields: {', '.join(SEARCHABLE_FIELDS)}")
        return tuple(cleaned)

    def _ranked_docs(
        self,
        conn: sqlite3.Connection,
        terms: list[str],
        fields: tuple[str, ...],
        k1: float,
        b: float,
        cap: int,
    ) -> list[tuple[str, float]]:
        scores: dict[str, float] = {}
        for field_name in fields:
            index = self.load_index(field_name, conn)
            avgdl = index.avgdl if index.avgdl > 0 else 1.0
            for term in sorted(set(terms)):
                multiplicity = terms.count(term)
                postings = index.postings.get(term)
                if not postings:
                    continue
                n_t = len(postings)
                idf = math.log((index.n_docs - n_t + 0.5) / (n_t + 0.5) + 1.0)
                for pmid, tf in postings:
                    dl = index.doc_lengths.get(pmid, 0)
                    gain = idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl))
                    scores[pmid] = scores.get(pmid, 0.0) + multiplicity * gain
        ranked = sorted(
            ((pmid, score) for pmid, score in scores.items() if score > 0.0),
            key=lambda item: (-item[1], _pmid_sort_key(item[0])),
        )
        return ranked[:cap]

    def search(
        self,
        query: str,
        fields: Sequence[str] = ("all",),
        page: int = 1,
        k1: float = DEFAULT_K1,
        b: float = DEFAULT_B,
        cap: int = RESULT_CAP,
        page_size: int = PAGE_SIZE,
    ) -> SearchPage:
        """Ranked document page; an out-of-range page is empty but keeps totals."""
        terms = tokenize(query)
        if not terms:
            raise QueryValidationError("query must contain at least one searchable term")
        if page < 1:
            raise QueryValidationError("page numbers start at 1")
        selected = self._validate_fields(fields)
        with self._reader() as conn:
            ranked = self._ranked_docs(conn, terms, selected, k1, b, cap)
            total = len(ranked)
            total_pages = math.ceil(total / page_size) if total else 0
            start = (page - 1) * page_size
            hits = []
            for pmid, score in ranked[start : start + page_size]:
                row = self._doc_row(conn, pmid)
                findings = self._findings_for(conn, pmid)
                hits.append(
                    SearchHit(
                        pmid=pmid,
                        score=score,
                        pmcid=row["pmcid"] if row else None,
                        title=row["title"] if row else None,
                        findings=findings,
                        snippet=_snippet(row["abstract"] if row else None, terms),
                    )
                )
        return SearchPage(
            query=query,
            fields=selected,
            page=page,
            page_size=page_size,
            total_docs=total,
            total_pages=total_pages,
            hits=tuple(hits),
        )

    def lookup_ids(self, ids: Sequence[str]) -> LookupResult:
        """Fetch documents by PMID or PMCID, preserving request order."""
        found = []
        missing = []
        seen_keys: set[str] = set()
        resolved: set[str] = set()
        with self._reader() as conn:
            for raw in ids:
                key = raw.strip()
                if not key or key in seen_keys:
                    continue
                seen_keys.add(key)
                row = self._doc_row(conn, key)
                if row is None:
                    by_pmcid = conn.execute(
                        "SELECT pmid FROM documents WHERE pmcid = ?", (key,)
                    ).fetchone()
                    row = self._doc_row(conn, by_pmcid["pmid"]) if by_pmcid else None
                if row is None:
                    missing.append(key)
                    continue
                if row["pmid"] in resolved:
                    continue
                resolved.add(row["pmid"])
                found.append(
                    DocRecord(
                        pmid=row["pmid"],
                        pmcid=row["pmcid"],
                        title=row["title"],
                        abstract=row["abstract"],
                        findings=self._findings_for(conn, row["pmid"]),
                    )
                )
        return LookupResult(tuple(found), tuple(missing))

    def export_rows(
        self,
        query: str | None = None,
        ids: Sequence[str] | None = None,
        fields: Sequence[str] = ("all",),
        cap: int = RESULT_CAP,
    ) -> Iterator[tuple[str, ...]]:
        """CSV data rows (header excluded), one per finding of each hit document."""
        if query is None and ids is None:
            raise QueryValidationError("an export needs a query or an id list")
        if query is not None:
            docs = []
            terms = tokenize(query)
            if not terms:
                raise QueryValidationError("query must contain at least one searchable term")
            selected = self._validate_fields(fields)
            with self._reader() as conn:
                ranked = self._ranked_docs(conn, terms, selected, DEFAULT_K1, DEFAULT_B, cap)
                for pmid, _score in ranked:
                    row = self._doc_row(conn, pmid)
                    docs.append(
                        DocRecord(
                            pmid=pmid,
                            pmcid=row["pmcid"] if row else None,
                            title=row["title"] if row else None,
                            abstract=None,
                            findings=self._findings_for(conn, pmid),
                        )
                    )
        else:
            docs = list(self.lookup_ids(ids or ()).found)
        for doc in docs:
            for f in doc.findings:
                yield (
                    doc.pmid,
                    doc.pmcid or "",
                    doc.title or "",
                    f.intervention,
                    f.outcome,
                    f.comparator,
                    f.evidence,
                    f.label.value,
                )


def _snippet(abstract: str | None, terms: Sequence[str], width: int = 180) -> str:
    if not abstract:
        return ""
    lowered = abstract.lower()
    positions = [lowered.find(t) for t in terms]
    positions = [p for p in positions if p != -1]
    if not positions:
        start = 0
    else:
        start = max(0, min(positions) - width // 3)
    end = min(len(abstract), start + width)
    prefix = "..." if start > 0 else ""
    suffix = "..." if end < len(abstract) else ""
    return prefix + abstract[start:end].strip() + suffix
