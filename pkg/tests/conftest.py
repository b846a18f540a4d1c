from __future__ import annotations

from pathlib import Path

import pytest

from evidex.core import AbstractDoc, EffectLabel, Finding
from evidex.dataset import load_annotations

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURE_ANNOTATIONS = REPO_ROOT / "fixtures" / "annotations.jsonl"

LABELS = (
    EffectLabel.SIGNIFICANTLY_INCREASED,
    EffectLabel.SIGNIFICANTLY_DECREASED,
    EffectLabel.NO_SIGNIFICANT_DIFFERENCE,
)


def make_finding(
    intervention="drug a",
    outcome="pain score",
    comparator="placebo",
    evidence="pain score fell in the drug a group",
    label=EffectLabel.SIGNIFICANTLY_DECREASED,
) -> Finding:
    return Finding(intervention, outcome, comparator, evidence, label)


@pytest.fixture(scope="session")
def fixture_path() -> Path:
    assert FIXTURE_ANNOTATIONS.is_file(), "run scripts/make_fixture.py first"
    return FIXTURE_ANNOTATIONS


@pytest.fixture(scope="session")
def fixture_docs(fixture_path):
    return load_annotations(fixture_path, "fixture")


@pytest.fixture()
def zinc_doc() -> AbstractDoc:
    return AbstractDoc(
        id="d001",
        pmid="900001",
        title="Oral zinc sulfate for recalcitrant common warts",
        body=(
            "warts resolved in 68% of the patients in treatment group and 64% of the "
            "patients in placebo group. three patients in treatment group and six patients "
            "in placebo group had a recurrence of warts (p=.19)."
        ),
    )


@pytest.fixture()
def zinc_findings() -> list[Finding]:
    return [
        Finding(
            "zinc sulfate capsules",
            "warts",
            "placebo",
            "warts resolved in 68% of the patients in treatment group and 64% of the patients in placebo group",
            EffectLabel.NO_SIGNIFICANT_DIFFERENCE,
        ),
        Finding(
            "zinc sulfate capsules",
            "recurrence of warts",
            "placebo",
            "three patients in treatment group and six patients in placebo group had a recurrence of warts (p=.19)",
            EffectLabel.NO_SIGNIFICANT_DIFFERENCE,
        ),
    ]
