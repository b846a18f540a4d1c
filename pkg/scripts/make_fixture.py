"""Regenerate the synthetic annotation fixture under fixtures/.

The corpus is small but covers the cases the suite leans on: a document with
two findings sharing one intervention, a duplicated triplet with differing
evidence, an annotated-but-empty document (dropped on load), and enough
vocabulary spread for search ranking to be interesting.
"""

from __future__ import annotations

import json
from pathlib import Path

DOCS = [
    {
        "id": "d001",
        "pmid": "900001",
        "title": "Oral zinc sulfate for recalcitrant common warts: a randomized placebo-controlled trial",
        "abstract": (
            "Common warts are frequent in young adults and often resist topical therapy. "
            "We randomized 80 patients with recalcitrant warts to oral zinc sulfate capsules or "
            "matching placebo for two months. warts resolved in 68% of the patients in treatment "
            "group and 64% of the patients in placebo group. At six months, three patients in "
            "treatment group and six patients in placebo group had a recurrence of warts (p=.19). "
            "Gastrointestinal upset was the most common adverse event in both arms."
        ),
        "findings": [
            {
                "intervention": "zinc sulfate capsules",
                "outcome": "warts",
                "comparator": "placebo",
                "evidence": "warts resolved in 68% of the patients in treatment group and 64% of the patients in placebo group",
                "label": "no significant difference",
            },
            {
                "intervention": "zinc sulfate capsules",
                "outcome": "recurrence of warts",
                "comparator": "placebo",
                "evidence": "three patients in treatment group and six patients in placebo group had a recurrence of warts (p=.19)",
                "label": "no significant difference",
            },
        ],
    },
    {
        "id": "d002",
        "pmid": "900002",
        "title": "Metformin monotherapy in newly diagnosed type 2 diabetes",
        "abstract": (
            "We enrolled 210 adults with newly diagnosed type 2 diabetes and randomized them to "
            "metformin or placebo for 24 weeks. HbA1c fell by 1.1 percentage points more in the "
            "metformin group than in the placebo group (p<0.001). Body weight decreased by a mean "
            "of 2.4 kg relative to placebo (p=0.003). Gastrointestinal side effects were more "
            "frequent with metformin."
        ),
        "findings": [
            {
                "intervention": "metformin",
                "outcome": "HbA1c",
                "comparator": "placebo",
                "evidence": "HbA1c fell by 1.1 percentage points more in the metformin group than in the placebo group (p<0.001)",
                "label": "significantly decreased",
            },
            {
                "intervention": "metformin",
                "outcome": "body weight",
                "comparator": "placebo",
                "evidence": "Body weight decreased by a mean of 2.4 kg relative to placebo (p=0.003)",
                "label": "significantly decreased",
            },
            {
                "intervention": "Metformin",
                "outcome": "HbA1c",
                "comparator": "Placebo",
                "evidence": "HbA1c fell by 1.1 percentage points more in the metformin group than in the placebo group",
                "label": "significantly decreased",
            },
        ],
    },
    {
        "id": "d003",
        "pmid": "900003",
        "title": "High-dose atorvastatin and LDL cholesterol in familial hypercholesterolemia",
        "abstract": (
            "In this open-label trial, 96 participants with familial hypercholesterolemia received "
            "high-dose atorvastatin or continued usual care for 12 weeks. LDL cholesterol was 38% "
            "lower with atorvastatin than with usual care (p<0.001). Muscle symptoms were reported "
            "by four participants on atorvastatin."
        ),
        "findings": [
            {
                "intervention": "high-dose atorvastatin",
                "outcome": "LDL cholesterol",
                "comparator": "usual care",
                "evidence": "LDL cholesterol was 38% lower with atorvastatin than with usual care (p<0.001)",
                "label": "significantly decreased",
            }
        ],
    },
    {
        "id": "d004",
        "pmid": "900004",
        "title": "Supervised aerobic exercise for mild depression: a waiting-list controlled trial",
        "abstract": (
            "Adults with mild depression (n=142) were assigned to a 10-week supervised aerobic "
            "exercise program or a waiting list. Depression scores on the BDI-II fell 5.2 points "
            "further in the exercise group (p=0.008). Self-reported sleep quality did not differ "
            "between groups at follow-up (p=0.41)."
        ),
        "findings": [
            {
                "intervention": "supervised aerobic exercise program",
                "outcome": "depression scores",
                "comparator": "waiting list",
                "evidence": "Depression scores on the BDI-II fell 5.2 points further in the exercise group (p=0.008)",
                "label": "significantly decreased",
            },
            {
                "intervention": "supervised aerobic exercise program",
                "outcome": "sleep quality",
                "comparator": "waiting list",
                "evidence": "Self-reported sleep quality did not differ between groups at follow-up (p=0.41)",
                "label": "no significant difference",
            },
        ],
    },
    {
        "id": "d005",
        "pmid": "900005",
        "title": "Monthly vitamin D supplementation in community-dwelling older adults",
        "abstract": (
            "We randomized 5,108 older adults to monthly high-dose vitamin D supplementation or "
            "placebo. Serum 25-hydroxyvitamin D concentrations increased to a mean of 54 ng/mL in "
            "the supplementation arm versus 28 ng/mL with placebo (p<0.001). Fracture incidence "
            "over three years was similar between groups (hazard ratio 0.96, p=0.72)."
        ),
        "findings": [
            {
                "intervention": "monthly high-dose vitamin D supplementation",
                "outcome": "serum 25-hydroxyvitamin D concentrations",
                "comparator": "placebo",
                "evidence": "Serum 25-hydroxyvitamin D concentrations increased to a mean of 54 ng/mL in the supplementation arm versus 28 ng/mL with placebo (p<0.001)",
                "label": "significantly increased",
            },
            {
                "intervention": "monthly high-dose vitamin D supplementation",
                "outcome": "fracture incidence",
                "comparator": "placebo",
                "evidence": "Fracture incidence over three years was similar between groups (hazard ratio 0.96, p=0.72)",
                "label": "no significant difference",
            },
        ],
    },
    {
        "id": "d006",
        "pmid": "900006",
        "title": "Brief cognitive behavioral therapy for health anxiety in primary care",
        "abstract": (
            "Primary care patients with health anxiety (n=88) received six sessions of brief "
            "cognitive behavioral therapy or standard counseling. Health anxiety scores were 9.3 "
            "points lower after cognitive behavioral therapy than after counseling (p=0.002)."
        ),
        "findings": [
            {
                "intervention": "brief cognitive behavioral therapy",
                "outcome": "health anxiety scores",
                "comparator": "standard counseling",
                "evidence": "Health anxiety scores were 9.3 points lower after cognitive behavioral therapy than after counseling (p=0.002)",
                "label": "significantly decreased",
            }
        ],
    },
    {
        "id": "d007",
        "pmid": "900007",
        "title": "Probiotic yogurt for antibiotic-associated diarrhea in children",
        "abstract": (
            "Children prescribed broad-spectrum antibiotics (n=120) were randomized to probiotic "
            "yogurt or plain yogurt daily. Mean duration of diarrhea was 1.4 days shorter in the "
            "probiotic group (p=0.01). No serious adverse events occurred."
        ),
        "findings": [
            {
                "intervention": "probiotic yogurt",
                "outcome": "duration of diarrhea",
                "comparator": "plain yogurt",
                "evidence": "Mean duration of diarrhea was 1.4 days shorter in the probiotic group (p=0.01)",
                "label": "significantly decreased",
            }
        ],
    },
    {
        "id": "d008",
        "pmid": "900008",
        "pmcid": "PMC800008",
        "title": "Transdermal nicotine patch and sustained smoking cessation",
        "abstract": (
            "Smokers motivated to quit (n=412) received a transdermal nicotine patch or placebo "
            "patch for eight weeks. Sustained cessation at six months was achieved by 22% of the "
            "nicotine patch group versus 12% of the placebo patch group (p=0.004)."
        ),
        "findings": [
            {
                "intervention": "transdermal nicotine patch",
                "outcome": "sustained cessation at six months",
                "comparator": "placebo patch",
                "evidence": "Sustained cessation at six months was achieved by 22% of the nicotine patch group versus 12% of the placebo patch group (p=0.004)",
                "label": "significantly increased",
            }
        ],
    },
    {
        "id": "d009",
        "pmid": "900009",
        "title": "Dietary sodium restriction and ambulatory blood pressure in stage 1 hypertension",
        "abstract": (
            "Adults with stage 1 hypertension (n=176) followed a low sodium diet or their regular "
            "diet for eight weeks. Mean systolic blood pressure was 6.8 mmHg lower on the low "
            "sodium diet (p<0.001). Diastolic blood pressure did not differ significantly between "
            "diets (p=0.09)."
        ),
        "findings": [
            {
                "intervention": "low sodium diet",
                "outcome": "systolic blood pressure",
                "comparator": "regular diet",
                "evidence": "Mean systolic blood pressure was 6.8 mmHg lower on the low sodium diet (p<0.001)",
                "label": "significantly decreased",
            },
            {
                "intervention": "low sodium diet",
                "outcome": "diastolic blood pressure",
                "comparator": "regular diet",
                "evidence": "Diastolic blood pressure did not differ significantly between diets (p=0.09)",
                "label": "no significant difference",
            },
        ],
    },
    {
        "id": "d010",
        "pmid": "900010",
        "title": "Acupuncture versus sham acupuncture for chronic low back pain",
        "abstract": (
            "Patients with chronic low back pain (n=230) received ten sessions of acupuncture or "
            "sham acupuncture. Pain scores at 12 weeks were similar in the two groups (mean "
            "difference 0.3 points, p=0.36)."
        ),
        "findings": [
            {
                "intervention": "acupuncture",
                "outcome": "pain scores at 12 weeks",
                "comparator": "sham acupuncture",
                "evidence": "Pain scores at 12 weeks were similar in the two groups (mean difference 0.3 points, p=0.36)",
                "label": "no significant difference",
            }
        ],
    },
    {
        "id": "d011",
        "pmid": "900011",
        "title": "Descriptive cohort of statin prescribing patterns",
        "abstract": (
            "This registry analysis describes prescribing patterns for lipid-lowering therapy in "
            "primary care and reports no comparative outcomes."
        ),
        "findings": [],
    },
]


def main() -> None:
    out = Path(__file__).resolve().parent.parent / "fixtures" / "annotations.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as handle:
        for doc in DOCS:
            handle.write(json.dumps(doc, ensure_ascii=False) + "\n")
    print(f"wrote {len(DOCS)} documents to {out}")


if __name__ == "__main__":
    main()
