"""Command line: ingest data files, train the recommender, serve, report.

Every command takes --config; input file problems exit nonzero with a
line-numbered diagnostic.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..analytics import (
    SearchEvent,
    SelectionEvent,
    ServiceType,
    classify_selections,
    compute_metrics,
    format_metrics_table,
    format_pattern_report,
    histogram_csv,
    letters_histogram,
    metrics_csv,
    pattern_report,
    pattern_report_csv,
    position_histogram,
    read_events,
)
from ..recommender import (
    AssociationTable,
    build_association_table,
    load_corpus,
    unknown_controlled_terms,
)
from ..synthlog import write_study_log
from ..vocabulary import InputFileError
from .app import Backend, create_app
from .config import ConfigError, ServiceConfig, load_config


def _load(path: str) -> ServiceConfig:
    try:
        return load_config(path)
    except FileNotFoundError:
        raise SystemExit(f"config file not found: {path}")
    except ConfigError as exc:
        raise SystemExit(str(exc))


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _load(args.config)
    try:
        backend = Backend.from_config(config)
    except (InputFileError, FileNotFoundError) as exc:
        print(f"ingest failed: {exc}", file=sys.stderr)
        return 2
    if backend.thesaurus and config.corpus:
        corpus = load_corpus(config.corpus)
        descriptors = {t.normalized for t in backend.thesaurus.descriptors}
        for doc_id, term in unknown_controlled_terms(corpus, descriptors):
            print(
                f"warning: document {doc_id}: controlled term {term.display!r} "
                "is not a thesaurus descriptor",
                file=sys.stderr,
            )
    out = Path(args.out) if args.out else Path(args.config).parent / "indexes.bin"
    backend.save_bundle(out)
    parts = []
    if backend.ust_index is not None:
        parts.append(f"{len(backend.ust_index)} user search terms")
    if backend.thesaurus is not None:
        parts.append(
            f"{backend.thesaurus.descriptor_count} descriptors "
            f"(+{backend.thesaurus.non_descriptor_count} non-descriptors)"
        )
    if backend.concordance is not None:
        parts.append(f"{len(backend.concordance)} concordance mappings")
    if backend.corpus_doc_count is not None:
        parts.append(f"{backend.corpus_doc_count} corpus documents")
    print(f"compiled {', '.join(parts) or 'nothing'} -> {out}")
    return 0


def cmd_build_str(args: argparse.Namespace) -> int:
    config = _load(args.config)
    if not config.corpus:
        print("build-str: config has no corpus path", file=sys.stderr)
        return 2
    try:
        corpus = load_corpus(config.corpus)
        table = build_association_table(
            corpus, min_count=args.min_count, top_k=args.top_k
        )
    except (InputFileError, ValueError) as exc:
        print(f"build-str failed: {exc}", file=sys.stderr)
        return 2
    out = (
        Path(args.out)
        if args.out
        else config.association_table or Path(args.config).parent / "association.json"
    )
    table.save(out)
    print(
        f"trained associations for {len(table)} free terms "
        f"over {table.corpus_size} documents -> {out}"
    )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    config = _load(args.config)
    if args.indexes:
        backend = Backend.load_bundle(args.indexes)
    else:
        try:
            backend = Backend.from_config(config)
        except (InputFileError, FileNotFoundError) as exc:
            print(f"serve failed: {exc}", file=sys.stderr)
            return 2
    app = create_app(config, backend)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    config = _load(args.config)
    log_path = Path(args.log) if args.log else config.log_path
    try:
        events, warnings = read_events(log_path)
    except FileNotFoundError:
        print(f"report: log file not found: {log_path}", file=sys.stderr)
        return 2
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)

    if args.service:
        services = [ServiceType(args.service.upper())]
    else:
        present = {e.service_type for e in events if e.service_type is not None}
        services = [s for s in ServiceType if s in present]
    if not services:
        print("report: no service cohorts in the log", file=sys.stderr)
        return 2

    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    metrics = {}
    all_selections: list[SelectionEvent] = []
    for service in services:
        cohort = [e for e in events if e.service_type is service]
        selections = [e for e in cohort if isinstance(e, SelectionEvent)]
        searches = sum(1 for e in cohort if isinstance(e, SearchEvent))
        users = len({e.session_id for e in cohort})
        if users == 0:
            continue
        metrics[service.value] = compute_metrics(selections, searches, users)
        all_selections.extend(selections)

    print("Key figures")
    print(format_metrics_table(metrics))
    print()
    classified = classify_selections(all_selections)
    for service in services:
        report = pattern_report(classified, service)
        if report.total == 0:
            continue
        print(f"Reformulation patterns: {service.value} ({report.total} selections)")
        print(format_pattern_report(report))
    positions = position_histogram(all_selections)
    letters = letters_histogram(all_selections)
    if out_dir:
        (out_dir / "key_figures.csv").write_text(metrics_csv(metrics), "utf-8")
        for service in services:
            report = pattern_report(classified, service)
            if report.total:
                (out_dir / f"patterns_{service.value.lower()}.csv").write_text(
                    pattern_report_csv(report), "utf-8"
                )
        (out_dir / "positions.csv").write_text(
            histogram_csv(positions, "rank"), "utf-8"
        )
        (out_dir / "letters.csv").write_text(
            histogram_csv(letters, "letters"), "utf-8"
        )
        print(f"CSV reports written to {out_dir}")
    return 0


def cmd_synth_log(args: argparse.Namespace) -> int:
    count = write_study_log(args.out)
    print(f"wrote {count} synthetic events -> {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="termsuggest",
        description="term suggestion services, recommender training, "
        "and query-log reporting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser(
        "ingest", help="validate data files and compile binary indexes"
    )
    p_ingest.add_argument("--config", required=True)
    p_ingest.add_argument("--out", help="bundle path (default: indexes.bin)")
    p_ingest.set_defaults(func=cmd_ingest)

    p_build = sub.add_parser("build-str", help="train the association table")
    p_build.add_argument("--config", required=True)
    p_build.add_argument("--min-count", type=int, default=2)
    p_build.add_argument("--top-k", type=int, default=50)
    p_build.add_argument("--out")
    p_build.set_defaults(func=cmd_build_str)

    p_serve = sub.add_parser("serve", help="run the suggestion service")
    p_serve.add_argument("--config", required=True)
    p_serve.add_argument("--indexes", help="load a compiled index bundle")
    p_serve.set_defaults(func=cmd_serve)

    p_report = sub.add_parser("report", help="analyze an event log")
    p_report.add_argument("--config", required=True)
    p_report.add_argument("--log", help="log file (default: config log_path)")
    p_report.add_argument("--service", help="restrict to one service")
    p_report.add_argument("--out", help="directory for CSV outputs")
    p_report.set_defaults(func=cmd_report)

    p_synth = sub.add_parser(
        "synth-log", help="write the bundled synthetic evaluation log"
    )
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=cmd_synth_log)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
