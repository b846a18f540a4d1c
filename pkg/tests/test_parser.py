from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evidex.core import AbstractDoc, EffectLabel, linearize_document
from evidex.parser import (
    MalformationKind,
    parse_canonical,
    parse_corpus,
    parse_legacy,
)

from conftest import LABELS
from test_core import findings_lists

INCR = EffectLabel.SIGNIFICANTLY_INCREASED
DECR = EffectLabel.SIGNIFICANTLY_DECREASED
NODIFF = EffectLabel.NO_SIGNIFICANT_DIFFERENCE


class TestParseCanonical:
    def test_round_trips_reference_tuples(self, zinc_doc, zinc_findings):
        text = linearize_document(zinc_findings, "d001").text
        outcome = parse_canonical(text, zinc_doc)
        assert list(outcome.findings) == zinc_findings
        assert outcome.defects == ()
        assert outcome.verbatim_evidence == (True, True)

    def test_empty_generation_is_clean(self, zinc_doc):
        outcome = parse_canonical("", zinc_doc)
        assert outcome.findings == () and outcome.defects == ()

    def test_missing_elements_and_bad_label(self, zinc_doc):
        outcome = parse_canonical("<tup> [INT] x [OUT] y [LABEL] maybe </tup>", zinc_doc)
        assert outcome.findings == ()
        assert {d.kind for d in outcome.defects} == {
            MalformationKind.MISSING_ELEMENT,
            MalformationKind.MALFORMED_LABEL,
        }
        missing = next(d for d in outcome.defects if d.kind is MalformationKind.MISSING_ELEMENT)
        assert "[COMP]" in missing.detail and "[EV]" in missing.detail

    def test_unterminated_block(self, zinc_doc):
        outcome = parse_canonical("<tup> [INT] x [OUT] y", zinc_doc)
        assert [d.kind for d in outcome.defects] == [MalformationKind.UNPARSEABLE]

    def test_markers_without_block_are_structural(self, zinc_doc):
        outcome = parse_canonical("[INT] x [OUT] y [COMP] z", zinc_doc)
        assert [d.kind for d in outcome.defects] == [MalformationKind.UNPARSEABLE]

    def test_plain_garbage_is_irrelevant_tokens(self, zinc_doc):
        outcome = parse_canonical("the trial went well overall", zinc_doc)
        assert [d.kind for d in outcome.defects] == [MalformationKind.IRRELEVANT_TOKENS]

    def test_text_around_valid_block_flagged_but_finding_kept(self, zinc_doc, zinc_findings):
        block = linearize_document(zinc_findings[:1], "d001").text
        outcome = parse_canonical(f"sure, here you go: {block}", zinc_doc)
        assert len(outcome.findings) == 1
        assert [d.kind for d in outcome.defects] == [MalformationKind.IRRELEVANT_TOKENS]

    def test_repeated_marker_is_wrong_field_count(self, zinc_doc):
        text = "<tup> [INT] a [INT] b [OUT] o [COMP] c [EV] e [LABEL] no significant difference </tup>"
        outcome = parse_canonical(text, zinc_doc)
        assert outcome.findings == ()
        assert [d.kind for d in outcome.defects] == [MalformationKind.WRONG_FIELD_COUNT]

    def test_out_of_order_markers_unparseable(self, zinc_doc):
        text = "<tup> [OUT] o [INT] a [COMP] c [EV] e [LABEL] no significant difference </tup>"
        outcome = parse_canonical(text, zinc_doc)
        assert [d.kind for d in outcome.defects] == [MalformationKind.UNPARSEABLE]

    def test_duplicated_element_keeps_finding(self, zinc_doc):
        text = "<tup> [INT] placebo [OUT] pain [COMP] placebo [EV] e [LABEL] no significant difference </tup>"
        outcome = parse_canonical(text, zinc_doc)
        assert len(outcome.findings) == 1
        assert [d.kind for d in outcome.defects] == [MalformationKind.DUPLICATED_ELEMENT]

    def test_non_verbatim_evidence_flagged(self, zinc_doc):
        text = (
            "<tup> [INT] zinc [OUT] warts [COMP] placebo "
            "[EV] a sentence that appears nowhere in the abstract [LABEL] no significant difference </tup>"
        )
        outcome = parse_canonical(text, zinc_doc)
        assert outcome.verbatim_evidence == (False,)

    def test_defect_spans_inside_input(self, zinc_doc):
        text = "noise <tup> [INT] x [OUT] y [LABEL] maybe </tup> trailing noise"
        outcome = parse_canonical(text, zinc_doc)
        encoded = len(text.encode("utf-8"))
        for defect in outcome.defects:
            start, end = defect.span
            assert 0 <= start <= end <= encoded


# Real transcripts of the bracketed legacy format, with their expected
# clause-derived fields.
LEGACY_SAMPLES = [
    (
        "1457358-reference",
        "[beta-carotene supplementation (20 mg d-1), Initial micronuclei counts (per 3,000 cells), placebo, "
        "Initial micro nuclei counts (per 3,000 cells) were higher in the treatment group than in the placebo group (5.0 vs 4.0, P; 0.05)., "
        "[INT] beta-carotene supplementation (20 mg d-1) [LABEL] significantly increased [OUT] Initial micronuclei counts (per 3,000 cells) [COMP] placebo]",
        "beta-carotene supplementation (20 mg d-1)",
        INCR,
    ),
    (
        "1457358-generated",
        "[14 weeks of beta-carotene supplementation (20 mg d-1), micronuclei counts, placebo, "
        "Initial micronuclei counts (per 3,000 cells) were higher in the treatment group than in the placebo group (5.0 vs 4.0, P 0.05)., "
        "[INT] 14 weeks of beta-carotene supplementation (20 mg d-1) [LABEL] significantly increased [OUT] micronuclei counts [COMP] placebo]",
        "14 weeks of beta-carotene supplementation (20 mg d-1)",
        INCR,
    ),
    (
        "29295869-reference",
        "[LPS exposure, macrophage activation, Saline axposure, "
        "We observed a significant two-fold increase in plasma sCD163 levels following LPS exposure (P < 0.001), "
        "and sCD163 concentrations correlated positively with the plasma concentration of free fatty acids, Rapalmitate, "
        "lipid oxidation rates and phosphorylation of the hormone-sensitive lipase at serine 660 in adipose tissue (P < 0.05, all). "
        "Furthermore, sCD163 concentrations correlated positively with plasma concentrations of cortisol, glucagon, "
        "tumour necrosis factor (TNF)-alpha, interleukin (IL)-6 and IL-10 (P < 0.05, all)., "
        "[INT] LPS exposure [LABEL] significantly increased [OUT] macrophage activation [COMP] Saline axposure]",
        "LPS exposure",
        INCR,
    ),
    (
        "29295869-generated",
        "[lipopolysaccharides (LPS) exposure, plasma sCD163 levels, saline exposure, "
        "We observed a significant two-fold increase in plasma sCD163 levels following LPS exposure (P < 0.001), "
        "and sCD163 concentrations correlated positively with the plasma concentration of free fatty acids, Rapalmitate, "
        "lipid oxidation rates and phosphorylation of the hormone-sensitive lipase at serine 660 in adipose tissue (P < 0.05, all)., "
        "[INT] lipopolysaccharides (LPS) exposure [LABEL] significantly increased [OUT] plasma sCD163 levels [COMP] saline exposure]",
        "lipopolysaccharides (LPS) exposure",
        INCR,
    ),
    (
        "26258157-reference-1",
        "[Oseltamivir, Severity of illness, Control, Oseltamivir treatment did not reduce illness duration, severity, or duration of virus detection., "
        "[INT] Oseltamivir [LABEL] no significant difference [OUT] Severity of illness [COMP] Control]",
        "Oseltamivir",
        NODIFF,
    ),
    (
        "26258157-reference-2",
        "[Oseltamivir, Duration of virus detection, Control, Oseltamivir treatment did not reduce illness duration, severity, or duration of virus detection., "
        "[INT] Oseltamivir [LABEL] no significant difference [OUT] Duration of virus detection [COMP] Control]",
        "Oseltamivir",
        NODIFF,
    ),
    (
        "26258157-generated",
        "[Oseltamivir, Illness duration, severity, or duration of virus detection, Control, "
        "Oseltamivir treatment did not reduce illness duration, severity, or duration of virus detection., "
        "[INT] Oseltamivir [LABEL] no significant difference [OUT] Illness duration, severity, or duration of virus detection [COMP] Control]",
        "Oseltamivir",
        NODIFF,
    ),
    (
        "26283840-reference",
        '[Ksharasutra (cotton Seton coated with Ayurvedic medicines), number of days "off-work", fistulotomy, '
        "Ksharasutra group took more time to heal (mean: 53 vs 35.7 days, P = 0.002) despite reduced disruption to their routine work "
        "(2.7 vs. 15.5 days work off, P < 0.001)., "
        '[INT] Ksharasutra (cotton Seton coated with Ayurvedic medicines) [LABEL] significantly decreased [OUT] number of days "off-work" [COMP] fistulotomy]',
        "Ksharasutra (cotton Seton coated with Ayurvedic medicines)",
        DECR,
    ),
    (
        "26283840-generated-1",
        "[Ksharasutra (cotton Seton coated with Ayurvedic medicines), Severe postoperative pain, fistulotomy, "
        "Severe postoperative pain was more (7.7% vs. 25%) in fistulotomy group, while wound discharge was more associated with Ksharasutra group (15.3% vs. 8.3%)., "
        "[INT] Ksharasutra (cotton Seton coated with Ayurvedic medicines) [LABEL] significantly decreased [OUT] Severe postoperative pain [COMP] fistulotomy]",
        "Ksharasutra (cotton Seton coated with Ayurvedic medicines)",
        DECR,
    ),
    (
        "26283840-generated-2",
        "[Ksharasutra (cotton Seton coated with Ayurvedic medicines), Wound scarring, bleeding, and infection rate, fistulotomy, "
        "Wound scarring, bleeding, and infection rate were similar in both groups., "
        "[INT] Ksharasutra (cotton Seton coated with Ayurvedic medicines) [LABEL] no significant difference [OUT] Wound scarring, bleeding, and infection rate [COMP] fistulotomy]",
        "Ksharasutra (cotton Seton coated with Ayurvedic medicines)",
        NODIFF,
    ),
]

SIX_ELEMENT_SAMPLE = (
    "[none, score, no, none, score was not significantly different between the two groups., "
    "no significant difference]"
)


class TestParseLegacy:
    @pytest.mark.parametrize(
        "name,text,intervention,label", LEGACY_SAMPLES, ids=[s[0] for s in LEGACY_SAMPLES]
    )
    def test_transcripts_decode(self, name, text, intervention, label):
        outcome = parse_legacy(text, None, doc_id=name)
        assert len(outcome.findings) == 1, outcome.defects
        finding = outcome.findings[0]
        assert finding.intervention == intervention
        assert finding.label is label

    def test_oseltamivir_evidence_recovered_despite_commas(self):
        outcome = parse_legacy(LEGACY_SAMPLES[6][1], None)
        finding = outcome.findings[0]
        assert finding.outcome == "Illness duration, severity, or duration of virus detection"
        assert finding.comparator == "Control"
        assert finding.evidence == (
            "Oseltamivir treatment did not reduce illness duration, severity, or duration of virus detection."
        )

    def test_six_element_output_is_wrong_field_count(self):
        outcome = parse_legacy(SIX_ELEMENT_SAMPLE, None)
        assert outcome.findings == ()
        assert [d.kind for d in outcome.defects] == [MalformationKind.WRONG_FIELD_COUNT]
        assert "6" in outcome.defects[0].detail

    def test_markerless_five_field_fallback(self):
        text = "[metformin, HbA1c, placebo, HbA1c fell further with metformin., significantly decreased]"
        outcome = parse_legacy(text, None)
        assert len(outcome.findings) == 1
        f = outcome.findings[0]
        assert (f.intervention, f.outcome, f.comparator) == ("metformin", "HbA1c", "placebo")
        assert f.label is DECR

    def test_markerless_bad_label(self):
        text = "[memory game with fruit, banana intake, no fruit game, snack evidence, significant increase]"
        outcome = parse_legacy(text, None)
        assert outcome.findings == ()
        assert [d.kind for d in outcome.defects] == [MalformationKind.MALFORMED_LABEL]

    def test_clause_without_intervention_marker(self):
        text = (
            "[canagliflozin, body weight, placebo, Canagliflozin produced statistically significant "
            "reductions in body weight compared with placebo., canagliflozin [LABEL] significantly "
            "decreased [OUT] body weight [COMP] placebo]"
        )
        outcome = parse_legacy(text, None)
        assert len(outcome.findings) == 1
        f = outcome.findings[0]
        assert f.intervention == "canagliflozin"
        assert f.evidence.startswith("Canagliflozin produced")
        assert f.label is DECR

    def test_empty_generation(self):
        outcome = parse_legacy("", None, doc_id="x")
        assert outcome.findings == () and outcome.defects == ()

    def test_verbatim_evidence_flag(self):
        doc = AbstractDoc(id="a", body="Severe postoperative pain was more (7.7% vs. 25%) in fistulotomy group, while wound discharge was more associated with Ksharasutra group (15.3% vs. 8.3%).")
        outcome = parse_legacy(LEGACY_SAMPLES[8][1], doc)
        assert outcome.verbatim_evidence == (True,)


class TestParseCorpus:
    def test_well_formed_corpus(self, zinc_doc, zinc_findings):
        corpus = {}
        records = []
        for i in range(100):
            doc = AbstractDoc(id=f"d{i}", body=zinc_doc.body)
            corpus[doc.id] = doc
            records.append((doc.id, linearize_document(zinc_findings, doc.id).text))
        outcomes, report = parse_corpus(records, corpus)
        assert report.total_docs == 100
        assert report.findings_per_doc == 2.0
        assert report.unparseable_fraction == 0.0
        assert len(outcomes) == 100

    def test_mixed_corpus_fraction(self, zinc_doc, zinc_findings):
        corpus = {f"d{i}": AbstractDoc(id=f"d{i}", body=zinc_doc.body) for i in range(10)}
        good = linearize_document(zinc_findings[:1], "x").text
        records = [(f"d{i}", good) for i in range(9)]
        records.append(("d9", "<tup> [INT] broken"))
        _outcomes, report = parse_corpus(records, corpus)
        assert report.unparseable_fraction == pytest.approx(0.1)
        assert report.defect_counts["unparseable"] == 1

    def test_empty_stream(self):
        outcomes, report = parse_corpus([], {})
        assert outcomes == []
        assert report.total_docs == 0
        assert report.findings_per_doc == 0.0
        assert report.unparseable_fraction == 0.0

    def test_unknown_doc_id_reported_not_raised(self, zinc_findings):
        records = [("ghost", linearize_document(zinc_findings, "ghost").text)]
        outcomes, report = parse_corpus(records, {})
        assert report.unknown_doc_ids == ("ghost",)
        assert len(outcomes[0].findings) == 2
        assert outcomes[0].verbatim_evidence == (False, False)

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError, match="format"):
            parse_corpus([], {}, format="xml")

    @settings(max_examples=50, deadline=None)
    @given(findings_lists, findings_lists)
    def test_monotone_accounting(self, first, second):
        corpus = {}
        records = []
        for i, findings in enumerate([first, second]):
            doc_id = f"d{i}"
            corpus[doc_id] = AbstractDoc(id=doc_id, body="body text")
            records.append((doc_id, linearize_document(findings, doc_id).text))
        _, smaller = parse_corpus(records[:1], corpus)
        _, larger = parse_corpus(records, corpus)
        assert larger.total_docs >= smaller.total_docs
        assert larger.total_findings >= smaller.total_findings
        for kind, count in smaller.defect_counts.items():
            assert larger.defect_counts[kind] >= count


@settings(max_examples=200, deadline=None)
@given(findings_lists)
def test_parsed_labels_always_valid(findings):
    text = linearize_document(findings, "d").text
    outcome = parse_canonical(text, None, doc_id="d")
    assert all(f.label in LABELS for f in outcome.findings)
