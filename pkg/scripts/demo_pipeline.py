"""Run the full pipeline over the bundled fixture corpus.

build-dataset -> generate (echo oracle) -> parse -> evaluate -> ingest -> export

Everything lands in ./out/. The echo oracle replays reference targets, so the
evaluation must report a perfect score; this doubles as a quick smoke test of
an installed copy.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from evidex.cli import main as evidex

REPO_ROOT = Path(__file__).resolve().parent.parent
OUT = REPO_ROOT / "out"


def run(argv: list[str]) -> None:
    code = evidex(argv)
    if code != 0:
        print(f"step failed ({code}): {' '.join(argv)}", file=sys.stderr)
        raise SystemExit(code)


def main() -> int:
    OUT.mkdir(exist_ok=True)
    ann = str(REPO_ROOT / "fixtures" / "annotations.jsonl")
    pairs = str(OUT / "pairs.jsonl")
    gens = str(OUT / "gens.jsonl")
    parsed = str(OUT / "parsed.jsonl")

    run(["build-dataset", "--annotations", ann, "--out", pairs])
    run(["generate", "--pairs", pairs, "--backend", "echo", "--out", gens, "--workers", "4"])
    run(["parse", "--in", gens, "--annotations", ann, "--out", parsed,
         "--report", str(OUT / "parse-report.json")])
    run(["evaluate", "--refs", ann, "--gens", gens, "--mode", "both",
         "--out", str(OUT / "eval.json"), "--sheets", str(OUT / "review-sheets.csv")])
    run(["ingest", "--db", str(OUT / "fixture.db"), "--in", ann])
    run(["export", "--db", str(OUT / "fixture.db"), "--q", "warts",
         "--out", str(OUT / "warts.csv")])

    scores = json.loads((OUT / "eval.json").read_text())["reports"]["e2e"]
    print(f"echo-oracle e2e scores: P={scores['precision']} R={scores['recall']} F1={scores['f1']}")
    print(f"artifacts in {OUT}")
    print(f"next: evidex serve --db {OUT / 'fixture.db'} --port 8807")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
