"""Decode generator output into findings, classifying whatever fails to decode.

Malformed output is data, not an exception: batch runs see a steady ~10%
defect rate at scale, so every per-document failure is recorded as a
:class:`Malformation` and the run continues.

Two formats are supported:

* ``canonical`` - the sentinel grammar emitted by :mod:`evidex.core`.
* ``legacy`` - bracketed comma-delimited transcripts of the form
  ``[I, O, C, evidence, [INT] I [LABEL] label [OUT] O [COMP] C]`` where the
  trailing marker clause is authoritative for I/O/C/label and the evidence is
  recovered from the comma-delimited remainder.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum

from .core import (
    COMPARATOR_MARKER,
    EVIDENCE_MARKER,
    FIELD_MARKERS,
    INTERVENTION_MARKER,
    LABEL_MARKER,
    OUTCOME_MARKER,
    TUPLE_CLOSE,
    TUPLE_OPEN,
    AbstractDoc,
    EffectLabel,
    Finding,
    LabelDecodeError,
    normalize_text,
    string_to_label,
)


class MalformationKind(Enum):
    UNPARSEABLE = "unparseable"
    WRONG_FIELD_COUNT = "wrong_field_count"
    MISSING_ELEMENT = "missing_element"
    DUPLICATED_ELEMENT = "duplicated_element"
    IRRELEVANT_TOKENS = "irrelevant_tokens"
    MALFORMED_LABEL = "malformed_label"


@dataclass(frozen=True)
class Malformation:
    """One classified defect; ``span`` is a byte-offset range into the generation."""

    kind: MalformationKind
    detail: str
    span: tuple[int, int]


@dataclass(frozen=True)
class ParseOutcome:
    """Findings plus defects decoded from one generation.

    ``verbatim_evidence`` is parallel to ``findings``: True when the finding's
    evidence is a substring of the source abstract after normalization.
    """

    doc_id: str
    findings: tuple[Finding, ...]
    defects: tuple[Malformation, ...]
    verbatim_evidence: tuple[bool, ...]


@dataclass
class ParseReport:
    total_docs: int = 0
    total_findings: int = 0
    findings_per_doc: float = 0.0
    defect_counts: dict[str, int] = field(default_factory=dict)
    unparseable_fraction: float = 0.0
    unknown_doc_ids: tuple[str, ...] = ()


def _byte_span(text: str, start: int, end: int) -> tuple[int, int]:
    return (
        len(text[:start].encode("utf-8")),
        len(text[:end].encode("utf-8")),
    )


def _trimmed_span(text: str, start: int, end: int) -> tuple[int, int]:
    """Tighten [start, end) to the non-whitespace extent before byte conversion."""
    segment = text[start:end]
    lead = len(segment) - len(segment.lstrip())
    trail = len(segment) - len(segment.rstrip())
    return _byte_span(text, start + lead, end - trail)


def _verbatim(evidence: str, source: AbstractDoc | None) -> bool:
    if source is None:
        return False
    return normalize_text(evidence) in normalize_text(source.body)


def _duplicate_defects(f: Finding, text: str, start: int, end: int) -> list[Malformation]:
    """Flag identical elements inside one tuple; the finding itself stands."""
    defects = []
    fields = (
        ("intervention", f.intervention),
        ("outcome", f.outcome),
        ("comparator", f.comparator),
    )
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            if normalize_text(fields[i][1]) == normalize_text(fields[j][1]):
                defects.append(
                    Malformation(
                        MalformationKind.DUPLICATED_ELEMENT,
                        f"{fields[i][0]} and {fields[j][0]} are identical after normalization",
                        _trimmed_span(text, start, end),
                    )
                )
    return defects


# --- canonical format ---------------------------------------------------


def _classify_outside(text: str, start: int, end: int, defects: list[Malformation]) -> None:
    segment = text[start:end]
    if not segment.strip():
        return
    span = _trimmed_span(text, start, end)
    if TUPLE_CLOSE in segment or any(m in segment for m in FIELD_MARKERS):
        # Structural tokens stranded outside a block: a bracket went missing.
        defects.append(
            Malformation(MalformationKind.UNPARSEABLE, "tuple syntax outside any <tup> block", span)
        )
    else:
        defects.append(
            Malformation(MalformationKind.IRRELEVANT_TOKENS, f"stray text {segment.strip()[:60]!r}", span)
        )


def _parse_canonical_block(
    text: str,
    start: int,
    end: int,
    source: AbstractDoc | None,
    findings: list[Finding],
    defects: list[Malformation],
    verbatim: list[bool],
) -> None:
    """Decode one ``<tup>...</tup>`` body sitting at text[start:end]."""
    body = text[start:end]
    span = _trimmed_span(text, start, end)

    positions: dict[str, list[int]] = {m: [] for m in FIELD_MARKERS}
    for marker in FIELD_MARKERS:
        at = body.find(marker)
        while at != -1:
            positions[marker].append(at)
            at = body.find(marker, at + 1)

    repeated = [m for m in FIELD_MARKERS if len(positions[m]) > 1]
    if repeated:
        defects.append(
            Malformation(
                MalformationKind.WRONG_FIELD_COUNT,
                "repeated marker(s) " + ", ".join(repeated),
                span,
            )
        )
        return

    present = sorted((positions[m][0], m) for m in FIELD_MARKERS if positions[m])
    segments: dict[str, str] = {}
    for idx, (at, marker) in enumerate(present):
        seg_end = present[idx + 1][0] if idx + 1 < len(present) else len(body)
        segments[marker] = body[at + len(marker) : seg_end].strip()

    missing = [m for m in FIELD_MARKERS if not positions[m]]
    if missing:
        defects.append(
            Malformation(MalformationKind.MISSING_ELEMENT, "missing " + ", ".join(missing), span)
        )
        # Still report an undecodable label so the accounting matches what a
        # reviewer sees in the raw string.
        if LABEL_MARKER in segments:
            try:
                string_to_label(segments[LABEL_MARKER])
            except LabelDecodeError:
                defects.append(
                    Malformation(
                        MalformationKind.MALFORMED_LABEL,
                        f"undecodable label {segments[LABEL_MARKER]!r}",
                        span,
                    )
                )
        return

    if [m for _, m in present] != list(FIELD_MARKERS):
        defects.append(
            Malformation(MalformationKind.UNPARSEABLE, "markers out of canonical order", span)
        )
        return

    empty = [
        m
        for m in (INTERVENTION_MARKER, OUTCOME_MARKER, COMPARATOR_MARKER)
        if not normalize_text(segments[m])
    ]
    if empty:
        defects.append(
            Malformation(
                MalformationKind.MISSING_ELEMENT,
                "empty segment(s) " + ", ".join(empty),
                span,
            )
        )
        return

    try:
        label = string_to_label(segments[LABEL_MARKER])
    except LabelDecodeError:
        defects.append(
            Malformation(
                MalformationKind.MALFORMED_LABEL,
                f"undecodable label {segments[LABEL_MARKER]!r}",
                span,
            )
        )
        return

    finding = Finding(
        intervention=segments[INTERVENTION_MARKER],
        outcome=segments[OUTCOME_MARKER],
        comparator=segments[COMPARATOR_MARKER],
        evidence=segments[EVIDENCE_MARKER],
        label=label,
    )
    defects.extend(_duplicate_defects(finding, text, start, end))
    findings.append(finding)
    verbatim.append(_verbatim(finding.evidence, source))


def parse_canonical(
    generation: str, source: AbstractDoc | None, *, doc_id: str | None = None
) -> ParseOutcome:
    """Decode a canonical-grammar generation; never raises on bad input."""
    findings: list[Finding] = []
    defects: list[Malformation] = []
    verbatim: list[bool] = []

    pos = 0
    while True:
        open_at = generation.find(TUPLE_OPEN, pos)
        if open_at == -1:
            _classify_outside(generation, pos, len(generation), defects)
            break
        _classify_outside(generation, pos, open_at, defects)
        close_at = generation.find(TUPLE_CLOSE, open_at + len(TUPLE_OPEN))
        if close_at == -1:
            defects.append(
                Malformation(
                    MalformationKind.UNPARSEABLE,
                    "unterminated <tup> block",
                    _trimmed_span(generation, open_at, len(generation)),
                )
            )
            break
        _parse_canonical_block(
            generation,
            open_at + len(TUPLE_OPEN),
            close_at,
            source,
            findings,
            defects,
            verbatim,
        )
        pos = close_at + len(TUPLE_CLOSE)

    return ParseOutcome(
        doc_id=doc_id if doc_id is not None else (source.id if source else ""),
        findings=tuple(findings),
        defects=tuple(defects),
        verbatim_evidence=tuple(verbatim),
    )


# --- legacy format --------------------------------------------------------

_LEGACY_CLAUSE_MARKERS = (INTERVENTION_MARKER, LABEL_MARKER, OUTCOME_MARKER, COMPARATOR_MARKER)


def _split_top_level(text: str) -> list[str]:
    """Split on commas that are not nested inside parentheses or brackets."""
    parts: list[str] = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth = max(0, depth - 1)
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts]


def _last_top_level_comma(text: str, before: int) -> int:
    depth = 0
    last = -1
    for i, ch in enumerate(text[:before]):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth = max(0, depth - 1)
        elif ch == "," and depth == 0:
            last = i
    return last


def _after_top_level_commas(text: str, n: int) -> int:
    """Index just past the n-th top-level comma, or -1 if there are fewer."""
    depth = 0
    seen = 0
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth = max(0, depth - 1)
        elif ch == "," and depth == 0:
            seen += 1
            if seen == n:
                return i + 1
    return -1


def _recover_evidence(pre_clause: str, i: str, o: str, c: str) -> str:
    """Evidence sits between the third leading field and the marker clause.

    The leading fields duplicate the clause fields, so strip them by exact
    prefix match first; fall back to counting top-level commas when the two
    copies disagree. Over-capture is possible on the fallback path and is
    surfaced downstream via the verbatim-evidence flag.
    """
    rest = pre_clause
    matched = True
    for part in (i, o, c):
        rest = rest.lstrip()
        if part and rest.startswith(part):
            rest = rest[len(part) :].lstrip()
            if rest.startswith(","):
                rest = rest[1:]
            else:
                matched = False
                break
        else:
            matched = False
            break
    if not matched:
        cut = _after_top_level_commas(pre_clause, 3)
        if cut == -1:
            return ""
        rest = pre_clause[cut:]
    return rest.strip().rstrip(",").strip()


def parse_legacy(
    generation: str, source: AbstractDoc | None, *, doc_id: str | None = None
) -> ParseOutcome:
    """Best-effort decode of a bracketed comma-delimited transcript."""
    resolved_id = doc_id if doc_id is not None else (source.id if source else "")
    findings: list[Finding] = []
    defects: list[Malformation] = []
    verbatim: list[bool] = []

    text = generation.strip()
    if not text:
        return ParseOutcome(resolved_id, (), (), ())

    inner = text
    if (
        inner.startswith("[")
        and inner.endswith("]")
        and not any(inner.startswith(m) for m in FIELD_MARKERS)
    ):
        inner = inner[1:-1]

    whole_span = _trimmed_span(generation, 0, len(generation))
    marker_at = {m: inner.find(m) for m in _LEGACY_CLAUSE_MARKERS}
    present = sorted((at, m) for m, at in marker_at.items() if at != -1)

    if not present:
        fields = _split_top_level(inner)
        if len(fields) != 5:
            defects.append(
                Malformation(
                    MalformationKind.WRONG_FIELD_COUNT,
                    f"{len(fields)} elements where 5 were expected",
                    whole_span,
                )
            )
            return ParseOutcome(resolved_id, (), tuple(defects), ())
        i_text, o_text, c_text, ev_text, label_text = fields
        return _assemble_legacy(
            resolved_id, generation, source, i_text, o_text, c_text, ev_text, label_text, whole_span
        )

    clause_start = present[0][0]
    evidence_end = clause_start

    segments: dict[str, str] = {}
    for idx, (at, marker) in enumerate(present):
        seg_end = present[idx + 1][0] if idx + 1 < len(present) else len(inner)
        segments[marker] = inner[at + len(marker) : seg_end].strip()

    i_text = segments.get(INTERVENTION_MARKER, "")
    if INTERVENTION_MARKER not in segments:
        # Some transcripts open the clause with a bare intervention before
        # the first marker; it starts after the last leading comma.
        comma = _last_top_level_comma(inner, clause_start)
        bare = inner[comma + 1 : clause_start].strip()
        if bare:
            i_text = bare
            evidence_end = comma if comma != -1 else 0

    missing = []
    if not normalize_text(i_text):
        missing.append(INTERVENTION_MARKER)
    for marker in (OUTCOME_MARKER, COMPARATOR_MARKER):
        if not normalize_text(segments.get(marker, "")):
            missing.append(marker)
    if LABEL_MARKER not in segments:
        missing.append(LABEL_MARKER)
    if missing:
        defects.append(
            Malformation(
                MalformationKind.MISSING_ELEMENT,
                "missing " + ", ".join(missing),
                whole_span,
            )
        )
        if LABEL_MARKER in segments:
            try:
                string_to_label(segments[LABEL_MARKER])
            except LabelDecodeError:
                defects.append(
                    Malformation(
                        MalformationKind.MALFORMED_LABEL,
                        f"undecodable label {segments[LABEL_MARKER]!r}",
                        whole_span,
                    )
                )
        return ParseOutcome(resolved_id, (), tuple(defects), ())

    o_text = segments[OUTCOME_MARKER]
    c_text = segments[COMPARATOR_MARKER]
    ev_text = _recover_evidence(inner[:evidence_end], i_text, o_text, c_text)
    return _assemble_legacy(
        resolved_id, generation, source, i_text, o_text, c_text, ev_text, segments[LABEL_MARKER], whole_span
    )


def _assemble_legacy(
    doc_id: str,
    generation: str,
    source: AbstractDoc | None,
    i_text: str,
    o_text: str,
    c_text: str,
    ev_text: str,
    label_text: str,
    span: tuple[int, int],
) -> ParseOutcome:
    defects: list[Malformation] = []
    empty = [
        name
        for name, value in (("intervention", i_text), ("outcome", o_text), ("comparator", c_text))
        if not normalize_text(value)
    ]
    if empty:
        defects.append(
            Malformation(MalformationKind.MISSING_ELEMENT, "empty " + ", ".join(empty), span)
        )
        return ParseOutcome(doc_id, (), tuple(defects), ())
    try:
        label = string_to_label(label_text)
    except LabelDecodeError:
        defects.append(
            Malformation(MalformationKind.MALFORMED_LABEL, f"undecodable label {label_text!r}", span)
        )
        return ParseOutcome(doc_id, (), tuple(defects), ())

    finding = Finding(i_text, o_text, c_text, ev_text, label)
    defects.extend(_duplicate_defects(finding, generation, 0, len(generation)))
    return ParseOutcome(
        doc_id,
        (finding,),
        tuple(defects),
        (_verbatim(ev_text, source),),
    )


# --- corpus-level driver ----------------------------------------------------


class ReportBuilder:
    """Commutative counters over parse outcomes; safe to merge in any order."""

    def __init__(self) -> None:
        self.total_docs = 0
        self.total_findings = 0
        self.defect_counts: dict[str, int] = {k.value: 0 for k in MalformationKind}
        self.unparseable_docs = 0
        self.unknown_doc_ids: list[str] = []

    def add(self, outcome: ParseOutcome) -> None:
        self.total_docs += 1
        self.total_findings += len(outcome.findings)
        for defect in outcome.defects:
            self.defect_counts[defect.kind.value] += 1
        if any(d.kind is MalformationKind.UNPARSEABLE for d in outcome.defects):
            self.unparseable_docs += 1

    def unknown(self, doc_id: str) -> None:
        self.unknown_doc_ids.append(doc_id)

    def build(self) -> ParseReport:
        docs = self.total_docs
        return ParseReport(
            total_docs=docs,
            total_findings=self.total_findings,
            findings_per_doc=self.total_findings / docs if docs else 0.0,
            defect_counts=dict(self.defect_counts),
            unparseable_fraction=self.unparseable_docs / docs if docs else 0.0,
            unknown_doc_ids=tuple(self.unknown_doc_ids),
        )


def parse_corpus(
    records: Iterable[tuple[str, str]],
    corpus: Mapping[str, AbstractDoc],
    format: str = "canonical",
) -> tuple[list[ParseOutcome], ParseReport]:
    """Parse (doc_id, generation) records against a document lookup.

    Unresolvable doc ids are reported on the :class:`ParseReport`, never
    raised; their generations are still parsed (with no verbatim-evidence
    verification possible).
    """
    if format == "canonical":
        parse_one = parse_canonical
    elif format == "legacy":
        parse_one = parse_legacy
    else:
        raise ValueError(f"unknown format {format!r}; expected 'canonical' or 'legacy'")

    builder = ReportBuilder()
    outcomes = []
    for doc_rec_id, text in records:
        source = corpus.get(doc_rec_id)
        if source is None:
            builder.unknown(doc_rec_id)
        outcome = parse_one(text, source, doc_id=doc_rec_id)
        builder.add(outcome)
        outcomes.append(outcome)
    return outcomes, builder.build()
