"""Single command-line entry point wiring the pipeline stages together.

Exit codes: 0 success, 1 validation/usage error, 2 I/O or backend failure.
Diagnostics go to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from collections import defaultdict
from pathlib import Path

from . import __version__
from .core import Finding, LabelDecodeError, string_to_label
from .dataset import (
    AnnotationError,
    PairConfig,
    build_training_pairs,
    dedupe_triplets,
    load_annotations,
    split_stats,
)
from .evaluation import (
    REVIEW_SHEET_COLUMNS,
    EvalConfigError,
    MatchConfig,
    RatingMatrix,
    UndefinedAgreementError,
    export_review_sheets,
    fleiss_kappa,
    majority_vote,
    score_corpus,
)
from .genclient import (
    EchoOracle,
    FileBacked,
    GenConfigError,
    GenRequest,
    HTTPBackend,
    generate_corpus,
)
from .parser import parse_corpus
from .records import read_jsonl, write_jsonl
from .store import CSV_HEADER, EvidenceStore, QueryValidationError, StoredFinding

PORT_ENV_VAR = "EVIDEX_PORT"


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _require_file(path: str, flag: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"{flag}: no such file: {p}", exit_code=2)
    return p


def _load_corpus(path: Path):
    try:
        return load_annotations(path)
    except AnnotationError as exc:
        raise CliError(str(exc), exit_code=1)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", exit_code=2)


# --- subcommands ------------------------------------------------------------


def cmd_build_dataset(args) -> int:
    docs = _load_corpus(_require_file(args.annotations, "--annotations"))
    if args.dedupe:
        docs = [dedupe_triplets(d) for d in docs]
    if args.no_preamble:
        config = PairConfig(preamble=None)
    elif args.preamble is not None:
        config = PairConfig(preamble=args.preamble)
    else:
        config = PairConfig()
    pairs = build_training_pairs(docs, config)
    count = write_jsonl(
        args.out,
        (
            {
                "id": p.doc_id,
                "input": p.input_text,
                "target": p.target_text,
                "count": p.target_count,
            }
            for p in pairs
        ),
        command="build-dataset",
        config={"preamble": config.preamble, "dedupe": args.dedupe, "annotations": str(args.annotations)},
    )
    print(f"wrote {count} pairs to {args.out}", file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    docs = _load_corpus(_require_file(args.annotations, "--annotations"))
    stats = split_stats(docs)
    payload = {
        "abstracts": stats.abstracts,
        "total_tuples": stats.total_tuples,
        "unique_triplets": stats.unique_triplets,
        "tuples_per_abstract": float(stats.tuples_per_abstract),
        "tuples_per_abstract_display": stats.ratio_display(),
    }
    print(json.dumps(payload, indent=2))
    return 0


def _build_backend(args):
    if args.backend == "echo":
        pairs = read_jsonl(_require_file(args.pairs, "--pairs"))
        return EchoOracle({r["id"]: r["target"] for r in pairs})
    if args.backend == "file":
        if not args.outputs:
            raise CliError("--outputs is required with the file backend", exit_code=1)
        return FileBacked.from_path(_require_file(args.outputs, "--outputs"))
    if args.backend == "http":
        if not args.url:
            raise CliError("--url is required with the http backend", exit_code=1)
        return HTTPBackend(args.url)
    raise CliError(f"unknown backend {args.backend!r}", exit_code=1)


def cmd_generate(args) -> int:
    pairs = list(read_jsonl(_require_file(args.pairs, "--pairs")))
    backend = _build_backend(args)
    requests = [
        GenRequest(
            doc_id=r["id"],
            input_text=r["input"],
            max_input_tokens=args.max_input_tokens,
            max_output_tokens=args.max_output_tokens,
        )
        for r in pairs
    ]
    try:
        batch = generate_corpus(requests, backend, workers=args.workers)
    except GenConfigError as exc:
        raise CliError(str(exc), exit_code=1)
    write_jsonl(
        args.out,
        (
            {"id": r.doc_id, "output_text": r.output_text, "backend_meta": dict(r.backend_meta)}
            for r in batch.responses
        ),
        command="generate",
        config={
            "backend": args.backend,
            "workers": args.workers,
            "max_input_tokens": args.max_input_tokens,
            "max_output_tokens": args.max_output_tokens,
        },
    )
    for failure in batch.failures:
        print(f"generation failed for {failure.doc_id}: {failure.error}", file=sys.stderr)
    print(
        f"wrote {len(batch.responses)} generations to {args.out} "
        f"({len(batch.failures)} failure(s))",
        file=sys.stderr,
    )
    return 0


def cmd_parse(args) -> int:
    corpus = {}
    if args.annotations:
        corpus = {d.doc.id: d.doc for d in _load_corpus(_require_file(args.annotations, "--annotations"))}
    generations = [
        (r["id"], r["output_text"]) for r in read_jsonl(_require_file(args.inputs, "--in"))
    ]
    outcomes, report = parse_corpus(generations, corpus, format=args.format)
    write_jsonl(
        args.out,
        (
            {
                "id": o.doc_id,
                "findings": [
                    {
                        "intervention": f.intervention,
                        "outcome": f.outcome,
                        "comparator": f.comparator,
                        "evidence": f.evidence,
                        "label": f.label.value,
                    }
                    for f in o.findings
                ],
                "defects": [
                    {"kind": d.kind.value, "detail": d.detail, "span": list(d.span)}
                    for d in o.defects
                ],
                "verbatim_evidence": list(o.verbatim_evidence),
            }
            for o in outcomes
        ),
        command="parse",
        config={"format": args.format},
    )
    report_payload = {
        "tool": "evidex",
        "version": __version__,
        "config": {"format": args.format},
        "total_docs": report.total_docs,
        "total_findings": report.total_findings,
        "findings_per_doc": report.findings_per_doc,
        "defect_counts": report.defect_counts,
        "unparseable_fraction": report.unparseable_fraction,
        "unknown_doc_ids": list(report.unknown_doc_ids),
    }
    if args.report:
        Path(args.report).write_text(json.dumps(report_payload, indent=2) + "\n", encoding="utf-8")
    else:
        print(json.dumps(report_payload, indent=2))
    return 0


def _findings_by_doc(records, label_strict=True):
    by_doc = {}
    for record in records:
        findings = []
        for raw in record.get("findings", []):
            try:
                label = string_to_label(raw["label"])
            except LabelDecodeError:
                if label_strict:
                    raise
                continue
            findings.append(
                Finding(
                    intervention=raw["intervention"],
                    outcome=raw["outcome"],
                    comparator=raw["comparator"],
                    evidence=raw.get("evidence", ""),
                    label=label,
                )
            )
        by_doc[record["id"]] = findings
    return by_doc


def cmd_evaluate(args) -> int:
    ref_docs = {
        d.doc.id: list(d.findings)
        for d in _load_corpus(_require_file(args.refs, "--refs"))
    }
    gen_records = list(read_jsonl(_require_file(args.gens, "--gens")))
    if gen_records and "output_text" in gen_records[0]:
        outcomes, _report = parse_corpus(
            ((r["id"], r["output_text"]) for r in gen_records),
            corpus={},
            format=args.format,
        )
        gen_docs = {o.doc_id: list(o.findings) for o in outcomes}
    else:
        gen_docs = _findings_by_doc(gen_records)
    for doc_id in ref_docs:
        gen_docs.setdefault(doc_id, [])

    try:
        cfg = MatchConfig(
            tau_field=args.tau_field,
            tau_evidence=args.tau_evidence,
            swap_aware=args.swap_aware,
            containment_counts=not args.no_containment,
            orientation=args.orientation,
        )
    except EvalConfigError as exc:
        raise CliError(str(exc), exit_code=1)

    modes = ["e2e", "triplet"] if args.mode == "both" else [args.mode]
    reports = {mode: score_corpus(ref_docs, gen_docs, cfg, mode) for mode in modes}
    payload = {
        "tool": "evidex",
        "version": __version__,
        "reports": {mode: report.to_dict() for mode, report in reports.items()},
    }
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    else:
        print(json.dumps(payload, indent=2))
    for mode, report in reports.items():
        print(
            f"{mode}: P={report.precision:.4f} R={report.recall:.4f} F1={report.f1:.4f}",
            file=sys.stderr,
        )
    if args.sheets:
        questions = export_review_sheets(ref_docs, gen_docs, cfg)
        with Path(args.sheets).open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(REVIEW_SHEET_COLUMNS)
            for q in questions:
                writer.writerow([q.question_id, q.doc_id, q.side, q.question_text, q.answer])
        print(f"wrote {len(questions)} review questions to {args.sheets}", file=sys.stderr)
    return 0


def cmd_kappa(args) -> int:
    path = _require_file(args.ratings, "--ratings")
    by_item: dict[str, dict[str, str]] = defaultdict(dict)
    categories: list[str] = []
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"item", "rater", "label"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise CliError("ratings CSV needs columns: item, rater, label", exit_code=1)
        for row in reader:
            by_item[row["item"]][row["rater"]] = row["label"]
            if row["label"] not in categories:
                categories.append(row["label"])
    if not by_item:
        raise CliError("ratings file has no rows", exit_code=1)
    rater_sets = {tuple(sorted(raters)) for raters in by_item.values()}
    if len(rater_sets) != 1:
        raise CliError("every item must be rated by the same raters", exit_code=1)
    raters = sorted(next(iter(rater_sets)))
    items = sorted(by_item)
    try:
        matrix = RatingMatrix(
            categories=tuple(sorted(categories)),
            ratings=tuple(tuple(by_item[item][r] for r in raters) for item in items),
        )
        kappa = fleiss_kappa(matrix)
    except (EvalConfigError, UndefinedAgreementError) as exc:
        raise CliError(str(exc), exit_code=1)
    votes = majority_vote(matrix)
    payload = {
        "kappa": kappa,
        "items": len(items),
        "raters": len(raters),
        "categories": list(matrix.categories),
        "majority": [
            {"item": item, "label": label, "tie": tie}
            for item, label, tie in zip(items, votes.labels, votes.ties)
        ],
        "tie_precedence": list(votes.precedence),
    }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_ingest(args) -> int:
    store = EvidenceStore(args.db)
    doc_meta = {}
    if args.annotations:
        for d in _load_corpus(_require_file(args.annotations, "--annotations")):
            doc_meta[d.doc.id] = d.doc

    def stored():
        skipped_missing_pmid = 0
        for record in read_jsonl(_require_file(args.inputs, "--in")):
            if "pmid" in record:
                pmid = record["pmid"]
                pmcid = record.get("pmcid")
                title = record.get("title")
                abstract = record.get("abstract")
            else:
                doc = doc_meta.get(record.get("id"))
                if doc is None or not doc.pmid:
                    skipped_missing_pmid += 1
                    continue
                pmid, pmcid, title, abstract = doc.pmid, doc.pmcid, doc.title, doc.body
            for raw in record.get("findings", []):
                yield StoredFinding(
                    pmid=str(pmid),
                    intervention=raw["intervention"],
                    outcome=raw["outcome"],
                    comparator=raw["comparator"],
                    evidence=raw.get("evidence", ""),
                    label=string_to_label(raw["label"]),
                    pmcid=pmcid,
                    title=title,
                    abstract=abstract,
                )
        if skipped_missing_pmid:
            print(
                f"skipped {skipped_missing_pmid} record(s) with no resolvable pmid",
                file=sys.stderr,
            )

    report = store.ingest(stored())
    print(
        json.dumps({"inserted": report.inserted, "skipped": report.skipped, "docs": report.docs})
    )
    return 0


def cmd_serve(args) -> int:
    db = Path(args.db)
    if not db.is_file():
        raise CliError(f"--db: no such database file: {db}", exit_code=2)
    port = args.port
    if port is None:
        port = int(os.environ.get(PORT_ENV_VAR, "8807"))
    import uvicorn

    from .server import create_app

    app = create_app(db, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def cmd_export(args) -> int:
    if bool(args.query) == bool(args.ids):
        raise CliError("exactly one of --q or --ids is required", exit_code=1)
    store = EvidenceStore(args.db)
    if not Path(args.db).is_file():
        raise CliError(f"--db: no such database file: {args.db}", exit_code=2)
    ids = [part.strip() for part in args.ids.split(",")] if args.ids else None
    try:
        rows = list(
            store.export_rows(
                query=args.query, ids=ids, fields=tuple(args.fields.split(","))
            )
        )
    except QueryValidationError as exc:
        raise CliError(str(exc), exit_code=1)
    handle = Path(args.out).open("w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)
    finally:
        if args.out:
            handle.close()
    print(f"exported {len(rows)} finding rows", file=sys.stderr)
    return 0


# --- parser wiring -----------------------------------------------------------


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evidex", description=__doc__)
    parser.add_argument("--version", action="version", version=f"evidex {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dataset", help="annotations -> (input, target) training pairs")
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dedupe", action="store_true", help="drop repeated (I, O, C) triplets per doc")
    p.add_argument("--preamble", default=None, help="override the instruction preamble")
    p.add_argument("--no-preamble", action="store_true", help="inputs are abstract bodies verbatim")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("stats", help="split statistics for an annotation file")
    p.add_argument("--annotations", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("generate", help="run a generation backend over training pairs")
    p.add_argument("--pairs", required=True)
    p.add_argument("--backend", choices=["echo", "file", "http"], default="echo")
    p.add_argument("--outputs", help="JSONL of stored outputs (file backend)")
    p.add_argument("--url", help="base URL of the model server (http backend)")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-input-tokens", type=int, default=1024)
    p.add_argument("--max-output-tokens", type=int, default=512)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("parse", help="decode generations into findings plus defects")
    p.add_argument("--in", dest="inputs", required=True)
    p.add_argument("--annotations", help="corpus for doc lookup and verbatim-evidence checks")
    p.add_argument("--format", choices=["canonical", "legacy"], default="canonical")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="write the parse report JSON here instead of stdout")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("evaluate", help="score generations against reference annotations")
    p.add_argument("--refs", required=True)
    p.add_argument("--gens", required=True, help="generation outputs or parsed findings JSONL")
    p.add_argument("--format", choices=["canonical", "legacy"], default="canonical")
    p.add_argument("--mode", choices=["e2e", "triplet", "both"], default="both")
    p.add_argument("--tau-field", type=float, default=0.5)
    p.add_argument("--tau-evidence", type=float, default=0.3)
    p.add_argument("--swap-aware", action="store_true")
    p.add_argument("--no-containment", action="store_true")
    p.add_argument("--orientation", choices=["conventional", "reversed"], default="conventional")
    p.add_argument("--out", help="write the evaluation report JSON here")
    p.add_argument("--sheets", help="write manual review sheets CSV here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("kappa", help="multi-rater agreement from a ratings CSV")
    p.add_argument("--ratings", required=True, help="CSV with columns item, rater, label")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("ingest", help="load findings into the search store")
    p.add_argument("--db", required=True)
    p.add_argument("--in", dest="inputs", required=True)
    p.add_argument("--annotations", help="corpus metadata when ingesting parsed outputs")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("serve", help="serve the search API over a store database")
    p.add_argument("--db", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None, help=f"default 8807, or ${PORT_ENV_VAR}")
    p.add_argument("--static", default=None, help="directory of UI assets to mount at /ui")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="CSV export for a query or id list")
    p.add_argument("--db", required=True)
    p.add_argument("--q", dest="query")
    p.add_argument("--ids")
    p.add_argument("--fields", default="all")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except CliError as exc:
        print(f"evidex: {exc}", file=sys.stderr)
        return exc.exit_code
    except (AnnotationError, EvalConfigError, QueryValidationError, LabelDecodeError, ValueError) as exc:
        print(f"evidex: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"evidex: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
