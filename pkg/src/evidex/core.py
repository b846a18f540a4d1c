"""Domain types, text normalization, and the tuple grammar shared by the pipeline.

A finding is one (intervention, outcome, comparator, evidence, label) tuple
describing a reported trial result. Findings are serialized into a flat
string ("linearized") so a conditional text generator can emit any number of
them for one abstract, and are decoded back by :mod:`evidex.parser`.

Grammar for one finding::

    <tup> [INT] {intervention} [OUT] {outcome} [COMP] {comparator}
          [EV] {evidence} [LABEL] {label surface} </tup>

Every field carries an explicit sentinel because field contents routinely
contain commas, so a purely positional (comma-delimited) encoding is
ambiguous. Multiple findings are joined with single spaces; zero findings
linearize to the empty string.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum

TUPLE_OPEN = "<tup>"
TUPLE_CLOSE = "</tup>"
INTERVENTION_MARKER = "[INT]"
OUTCOME_MARKER = "[OUT]"
COMPARATOR_MARKER = "[COMP]"
EVIDENCE_MARKER = "[EV]"
LABEL_MARKER = "[LABEL]"

#: Field sentinels in canonical emission order.
FIELD_MARKERS = (
    INTERVENTION_MARKER,
    OUTCOME_MARKER,
    COMPARATOR_MARKER,
    EVIDENCE_MARKER,
    LABEL_MARKER,
)

#: Tokens that may never appear verbatim inside a finding field.
RESERVED_MARKERS = (TUPLE_OPEN, TUPLE_CLOSE, *FIELD_MARKERS)


class LinearizationError(ValueError):
    """A finding cannot be serialized (reserved marker or blank field)."""


class LabelDecodeError(ValueError):
    """A surface string does not decode to any :class:`EffectLabel`."""


def normalize_text(s: str) -> str:
    """Canonical lowercase form used for all fuzzy comparisons.

    NFC-normalizes, lowercases, replaces every non-alphanumeric codepoint
    with a space, collapses whitespace runs, and trims. Total and idempotent.
    """
    s = unicodedata.normalize("NFC", s).lower()
    s = "".join(ch if ch.isalnum() else " " for ch in s)
    # Re-normalize so sequences NFC can still compose (e.g. Hangul jamo)
    # do not change on a second application.
    return unicodedata.normalize("NFC", " ".join(s.split()))


class EffectLabel(Enum):
    """Three-way direction of a reported result."""

    SIGNIFICANTLY_INCREASED = "significantly increased"
    SIGNIFICANTLY_DECREASED = "significantly decreased"
    NO_SIGNIFICANT_DIFFERENCE = "no significant difference"

    def flipped(self) -> "EffectLabel":
        """Direction after swapping intervention and comparator roles."""
        if self is EffectLabel.SIGNIFICANTLY_INCREASED:
            return EffectLabel.SIGNIFICANTLY_DECREASED
        if self is EffectLabel.SIGNIFICANTLY_DECREASED:
            return EffectLabel.SIGNIFICANTLY_INCREASED
        return self


_LABEL_BY_NORMALIZED = {normalize_text(label.value): label for label in EffectLabel}


def label_to_string(label: EffectLabel) -> str:
    return label.value


def string_to_label(s: str) -> EffectLabel:
    """Decode a label surface form, case- and punctuation-insensitively."""
    key = normalize_text(s)
    try:
        return _LABEL_BY_NORMALIZED[key]
    except KeyError:
        raise LabelDecodeError(f"not a recognized effect label: {s!r}") from None


@dataclass(frozen=True)
class AbstractDoc:
    """One trial abstract plus its identifiers.

    ``id`` is the opaque corpus key; ``pmid``/``pmcid`` are the public
    registry identifiers when known.
    """

    id: str
    body: str
    pmid: str | None = None
    pmcid: str | None = None
    title: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("AbstractDoc.id must be nonempty")


@dataclass(frozen=True)
class Finding:
    """One (intervention, outcome, comparator, evidence, label) tuple.

    Intervention, outcome, and comparator must be nonempty after
    normalization; evidence may be empty in triplet-only contexts.
    """

    intervention: str
    outcome: str
    comparator: str
    evidence: str
    label: EffectLabel


@dataclass(frozen=True)
class LinearizedTarget:
    """Serialized findings for one document: ``count`` findings in ``text``."""

    doc_id: str
    text: str
    count: int


def _check_field(name: str, value: str, required: bool) -> None:
    for marker in RESERVED_MARKERS:
        if marker in value:
            raise LinearizationError(
                f"{name} contains reserved marker {marker!r}; "
                "field contents must not embed grammar tokens"
            )
    if required and not normalize_text(value):
        raise LinearizationError(f"{name} is empty after normalization")


def linearize_finding(f: Finding) -> str:
    """Serialize one finding under the canonical grammar.

    Raises :class:`LinearizationError` if a field embeds a reserved marker
    (upstream data corruption) or a required field is blank.
    """
    _check_field("intervention", f.intervention, required=True)
    _check_field("outcome", f.outcome, required=True)
    _check_field("comparator", f.comparator, required=True)
    _check_field("evidence", f.evidence, required=False)
    parts = [TUPLE_OPEN]
    for marker, value in (
        (INTERVENTION_MARKER, f.intervention),
        (OUTCOME_MARKER, f.outcome),
        (COMPARATOR_MARKER, f.comparator),
        (EVIDENCE_MARKER, f.evidence),
        (LABEL_MARKER, f.label.value),
    ):
        parts.append(marker)
        if value:
            parts.append(value)
    parts.append(TUPLE_CLOSE)
    return " ".join(parts)


def linearize_document(findings: list[Finding] | tuple[Finding, ...], doc_id: str) -> LinearizedTarget:
    """Serialize an ordered finding list; an empty list yields empty text.

    The empty string is the target for documents with nothing to report:
    the generator should emit end-of-sequence immediately.
    """
    blocks = []
    for i, f in enumerate(findings):
        try:
            blocks.append(linearize_finding(f))
        except LinearizationError as exc:
            raise LinearizationError(f"finding {i}: {exc}") from exc
    return LinearizedTarget(doc_id=doc_id, text=" ".join(blocks), count=len(blocks))
