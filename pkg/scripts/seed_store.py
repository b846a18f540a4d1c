"""Build a search store database from an annotation file.

Usage:
    python scripts/seed_store.py --db out/fixture.db [--annotations fixtures/annotations.jsonl]

Loads the reference findings directly (no generation step), so the resulting
database reflects the annotated ground truth. Handy for UI development and
integration tests.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from evidex.dataset import load_annotations
from evidex.store import EvidenceStore, StoredFinding

REPO_ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--db", required=True)
    parser.add_argument(
        "--annotations", default=str(REPO_ROOT / "fixtures" / "annotations.jsonl")
    )
    args = parser.parse_args()

    docs = load_annotations(args.annotations, "seed")
    items = []
    for annotated in docs:
        doc = annotated.doc
        if not doc.pmid:
            continue
        for f in annotated.findings:
            items.append(
                StoredFinding(
                    pmid=doc.pmid,
                    intervention=f.intervention,
                    outcome=f.outcome,
                    comparator=f.comparator,
                    evidence=f.evidence,
                    label=f.label,
                    pmcid=doc.pmcid,
                    title=doc.title,
                    abstract=doc.body,
                )
            )

    Path(args.db).parent.mkdir(parents=True, exist_ok=True)
    store = EvidenceStore(args.db)
    report = store.ingest(items)
    print(f"ingested {report.inserted} findings over {report.docs} documents into {args.db}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
