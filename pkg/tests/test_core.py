from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evidex.core import (
    RESERVED_MARKERS,
    EffectLabel,
    Finding,
    LabelDecodeError,
    LinearizationError,
    label_to_string,
    linearize_document,
    linearize_finding,
    normalize_text,
    string_to_label,
)
from evidex.parser import MalformationKind, parse_canonical

from conftest import LABELS, make_finding


class TestNormalizeText:
    def test_empty(self):
        assert normalize_text("") == ""

    def test_case_punctuation_whitespace(self):
        assert normalize_text("No Significant  Difference.") == "no significant difference"

    def test_symbols_become_spaces(self):
        assert normalize_text("beta-carotene (20 mg d-1)") == "beta carotene 20 mg d 1"

    def test_unicode_letters_survive(self):
        assert normalize_text("Café au lait!") == "café au lait"

    @given(st.text(max_size=200))
    def test_idempotent(self, s):
        once = normalize_text(s)
        assert normalize_text(once) == once

    @given(st.text(max_size=200))
    def test_total_and_space_separated(self, s):
        out = normalize_text(s)
        assert out == out.strip()
        assert "  " not in out


class TestLabelCodec:
    @pytest.mark.parametrize("label", LABELS)
    def test_bijection(self, label):
        assert string_to_label(label_to_string(label)) is label

    @pytest.mark.parametrize("label", LABELS)
    def test_decoding_normalizes(self, label):
        noisy = label.value.upper().replace(" ", "   ") + "."
        assert string_to_label(noisy) is label

    def test_unknown_surface_rejected(self):
        with pytest.raises(LabelDecodeError):
            string_to_label("significant")

    def test_flip_is_involution(self):
        for label in LABELS:
            assert label.flipped().flipped() is label
        assert (
            EffectLabel.SIGNIFICANTLY_INCREASED.flipped()
            is EffectLabel.SIGNIFICANTLY_DECREASED
        )
        assert (
            EffectLabel.NO_SIGNIFICANT_DIFFERENCE.flipped()
            is EffectLabel.NO_SIGNIFICANT_DIFFERENCE
        )


class TestLinearize:
    def test_single_finding_shape(self, zinc_findings):
        text = linearize_finding(zinc_findings[0])
        assert text == (
            "<tup> [INT] zinc sulfate capsules [OUT] warts [COMP] placebo "
            "[EV] warts resolved in 68% of the patients in treatment group and 64% "
            "of the patients in placebo group [LABEL] no significant difference </tup>"
        )

    def test_empty_evidence_keeps_marker(self):
        text = linearize_finding(make_finding(evidence=""))
        assert "[EV] [LABEL]" in text

    def test_reserved_marker_rejected(self):
        bad = make_finding(outcome="weight [LABEL] gain")
        with pytest.raises(LinearizationError, match=r"\[LABEL\]"):
            linearize_finding(bad)

    def test_blank_required_field_rejected(self):
        with pytest.raises(LinearizationError, match="intervention"):
            linearize_finding(make_finding(intervention="..."))

    def test_document_empty_list(self):
        target = linearize_document([], "d0")
        assert target.text == "" and target.count == 0

    def test_document_counts_and_joins(self, zinc_findings):
        target = linearize_document(zinc_findings, "d001")
        assert target.count == 2
        assert target.text.count("<tup>") == 2
        assert "</tup> <tup>" in target.text

    def test_document_error_carries_index(self, zinc_findings):
        bad = zinc_findings + [make_finding(comparator="placebo [EV]")]
        with pytest.raises(LinearizationError, match="finding 2"):
            linearize_document(bad, "d001")


def field_text(**kwargs):
    return (
        st.text(min_size=1, max_size=30, **kwargs)
        .map(str.strip)
        .filter(lambda s: s and normalize_text(s) and not any(m in s for m in RESERVED_MARKERS))
    )


findings_lists = st.lists(
    st.builds(
        Finding,
        intervention=field_text(),
        outcome=field_text(),
        comparator=field_text(),
        evidence=st.one_of(st.just(""), field_text()),
        label=st.sampled_from(LABELS),
    ),
    max_size=5,
)


@settings(max_examples=300, deadline=None)
@given(findings_lists)
def test_grammar_round_trip(findings):
    target = linearize_document(findings, "doc")
    outcome = parse_canonical(target.text, None, doc_id="doc")
    assert list(outcome.findings) == findings
    # Coincidentally equal fields may fire the duplicate diagnostic; nothing
    # structural may.
    assert all(d.kind is MalformationKind.DUPLICATED_ELEMENT for d in outcome.defects)
