"""Load annotated abstracts, deduplicate triplets, and build training pairs.

Annotation files are line-delimited JSON, one document per line::

    {"id": ..., "pmid": ..., "title": ..., "abstract": ...,
     "findings": [{"intervention": ..., "outcome": ..., "comparator": ...,
                   "evidence": ..., "label": ...}, ...]}

Training annotations must be clean: a malformed record or unknown label
surface is an error carrying the line number, unlike model output where
defects are data.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import (
    AbstractDoc,
    Finding,
    LabelDecodeError,
    LinearizedTarget,
    linearize_document,
    normalize_text,
    string_to_label,
)

log = logging.getLogger(__name__)

DEFAULT_PREAMBLE = (
    "List every intervention, outcome, comparator, supporting evidence span, "
    "and result direction reported in the following randomized controlled "
    "trial abstract."
)


class AnnotationError(ValueError):
    """Malformed annotation record; message carries file and line number."""


@dataclass(frozen=True)
class AnnotatedDoc:
    doc: AbstractDoc
    findings: tuple[Finding, ...]


@dataclass(frozen=True)
class SplitStats:
    abstracts: int
    total_tuples: int
    unique_triplets: int
    tuples_per_abstract: Fraction

    def ratio_display(self) -> str:
        """Ratio truncated (not rounded) to two decimals, e.g. 4.97 for 229/46."""
        hundredths = (self.tuples_per_abstract * 100).__floor__()
        return f"{hundredths // 100}.{hundredths % 100:02d}"


@dataclass(frozen=True)
class PairConfig:
    """How model inputs are assembled from an abstract.

    ``preamble=None`` means the input is the abstract body verbatim. The
    preamble is configuration, not a constant, and is recorded alongside any
    artifact built from it.
    """

    preamble: str | None = DEFAULT_PREAMBLE
    separator: str = "\n\n"


@dataclass(frozen=True)
class TrainingPair:
    doc_id: str
    input_text: str
    target_text: str
    target_count: int


def _parse_finding(raw: object, where: str) -> Finding:
    if not isinstance(raw, dict):
        raise AnnotationError(f"{where}: finding is not an object")
    values = {}
    for key in ("intervention", "outcome", "comparator", "evidence", "label"):
        value = raw.get(key)
        if not isinstance(value, str):
            raise AnnotationError(f"{where}: finding field {key!r} missing or not a string")
        values[key] = value.strip()
    try:
        label = string_to_label(values["label"])
    except LabelDecodeError as exc:
        raise AnnotationError(f"{where}: {exc}") from exc
    for key in ("intervention", "outcome", "comparator"):
        if not normalize_text(values[key]):
            raise AnnotationError(f"{where}: finding field {key!r} is blank")
    return Finding(
        intervention=values["intervention"],
        outcome=values["outcome"],
        comparator=values["comparator"],
        evidence=values["evidence"],
        label=label,
    )


def load_annotations(path: str | Path, split_name: str = "") -> list[AnnotatedDoc]:
    """Load one split; documents with zero findings are dropped (and counted)."""
    path = Path(path)
    docs: list[AnnotatedDoc] = []
    seen_ids: set[str] = set()
    dropped = 0
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            where = f"{path}:{lineno}"
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AnnotationError(f"{where}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise AnnotationError(f"{where}: record is not an object")
            if "_meta" in record:
                continue
            doc_id = record.get("id")
            if not isinstance(doc_id, str) or not doc_id:
                raise AnnotationError(f"{where}: missing document id")
            if doc_id in seen_ids:
                raise AnnotationError(f"{where}: duplicate document id {doc_id!r}")
            seen_ids.add(doc_id)
            body = record.get("abstract")
            if not isinstance(body, str) or not body.strip():
                raise AnnotationError(f"{where}: missing abstract text")
            raw_findings = record.get("findings", [])
            if not isinstance(raw_findings, list):
                raise AnnotationError(f"{where}: findings is not a list")
            findings = tuple(
                _parse_finding(raw, f"{where} (finding {i})") for i, raw in enumerate(raw_findings)
            )
            if not findings:
                dropped += 1
                continue
            docs.append(
                AnnotatedDoc(
                    doc=AbstractDoc(
                        id=doc_id,
                        body=body,
                        pmid=record.get("pmid"),
                        pmcid=record.get("pmcid"),
                        title=record.get("title"),
                    ),
                    findings=findings,
                )
            )
    if dropped:
        log.info(
            "dropped %d document(s) with no annotated findings from %s",
            dropped,
            split_name or path.name,
        )
    return docs


def _triplet_key(f: Finding) -> tuple[str, str, str]:
    return (
        normalize_text(f.intervention),
        normalize_text(f.outcome),
        normalize_text(f.comparator),
    )


def dedupe_triplets(doc: AnnotatedDoc) -> AnnotatedDoc:
    """Keep the first finding per normalized (I, O, C); order is preserved."""
    seen: set[tuple[str, str, str]] = set()
    kept = []
    for f in doc.findings:
        key = _triplet_key(f)
        if key in seen:
            continue
        seen.add(key)
        kept.append(f)
    return AnnotatedDoc(doc=doc.doc, findings=tuple(kept))


def build_input(doc: AbstractDoc, config: PairConfig | None = None) -> str:
    config = config or PairConfig()
    if config.preamble is None:
        return doc.body
    return config.preamble + config.separator + doc.body


def build_target(doc: AnnotatedDoc) -> LinearizedTarget:
    return linearize_document(doc.findings, doc_id=doc.doc.id)


def build_training_pairs(
    docs: Iterable[AnnotatedDoc], config: PairConfig | None = None
) -> Iterator[TrainingPair]:
    """Deterministic (input, target) pairs in document order."""
    config = config or PairConfig()
    for doc in docs:
        target = build_target(doc)
        yield TrainingPair(
            doc_id=doc.doc.id,
            input_text=build_input(doc.doc, config),
            target_text=target.text,
            target_count=target.count,
        )


def split_stats(docs: Iterable[AnnotatedDoc]) -> SplitStats:
    """Abstract/tuple/unique-triplet counts for one split.

    ``unique_triplets`` deduplicates within each abstract (the same triplet in
    two different abstracts is distinct evidence).
    """
    abstracts = 0
    total = 0
    unique = 0
    for doc in docs:
        abstracts += 1
        total += len(doc.findings)
        unique += len(dedupe_triplets(doc).findings)
    ratio = Fraction(total, abstracts) if abstracts else Fraction(0)
    return SplitStats(
        abstracts=abstracts,
        total_tuples=total,
        unique_triplets=unique,
        tuples_per_abstract=ratio,
    )
