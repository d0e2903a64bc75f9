"""Command-line interface: batch PDF verification.

    citecheck -i paper1.pdf paper2.pdf --db dbs/acl --db dbs/arxiv \
              [-o outputs] [--threshold 0.9] [--lockfile pins.lock]

Prints "All Clear!" for a document with no findings; otherwise prints one
author/title record per flagged citation and lists unverifiable entries
separately.  Exit codes: 0 all clear everywhere, 1 candidates found,
2 operational error (bad input file, unreadable PDF, missing section...).

The CLI is a thin client of the verification service: by default it runs
the service in-process (fully offline); with --server it sends the same
requests to a running citecheck-server instead.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .client import ServiceClient, ServiceError
from .report import VerificationReport, timing_table

EXIT_ALL_CLEAR = 0
EXIT_CANDIDATES = 1
EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citecheck",
        description="Detect hallucinated citations in scientific PDFs, offline.",
    )
    parser.add_argument("-i", "--input", nargs="+", required=True, metavar="PDF",
                        help="input PDF file(s)")
    parser.add_argument("-o", "--output", metavar="DIR",
                        help="write per-document JSON reports and highlighted "
                             "PDFs into this directory")
    parser.add_argument("--db", action="append", default=[], metavar="PATH",
                        help="bibliographic database directory; repeatable, "
                             "chained in the order given")
    parser.add_argument("--threshold", type=float, default=0.9,
                        help="similarity threshold (0-1 scale; values above 1 "
                             "are read as percentages)")
    parser.add_argument("--lockfile", metavar="PATH",
                        help="pin file of db_name<TAB>version lines; the pin "
                             "check outcome is embedded in every report")
    parser.add_argument("--labeler", metavar="NAME",
                        help="field labeler to use (default: the built-in "
                             "rule labeler)")
    parser.add_argument("--json-only", action="store_true",
                        help="print one JSON report per line instead of "
                             "human-readable output")
    parser.add_argument("--no-highlight", action="store_true",
                        help="skip writing highlighted PDFs")
    parser.add_argument("--profile", action="store_true",
                        help="print a per-stage timing table to stderr")
    parser.add_argument("--workers", type=int, default=1,
                        help="documents processed concurrently")
    parser.add_argument("--server", metavar="URL",
                        help="use a running citecheck-server instead of "
                             "verifying in-process")
    return parser


@dataclass
class _FileOutcome:
    path: str
    report: dict | None = None
    highlighted: bytes | None = None
    error: str | None = None


async def _verify_all(args) -> list[_FileOutcome]:
    outcomes: list[_FileOutcome] = [_FileOutcome(path=p) for p in args.input]
    async with ServiceClient(server=args.server) as client:
        db_names: list[str] = []
        for db_path in args.db:
            info = await client.load_db(db_path)
            db_names.append(info["name"])

        want_highlight = bool(args.output) and not args.no_highlight
        semaphore = asyncio.Semaphore(max(1, args.workers))

        async def run_one(outcome: _FileOutcome) -> None:
            try:
                data = Path(outcome.path).read_bytes()
            except OSError as e:
                outcome.error = str(e)
                return
            async with semaphore:
                try:
                    report, highlighted = await client.verify_bytes(
                        Path(outcome.path).name,
                        data,
                        dbs=db_names,
                        threshold=args.threshold,
                        labeler=args.labeler,
                        highlight=want_highlight,
                        lockfile=args.lockfile,
                    )
                except ServiceError as e:
                    outcome.error = f"{e.error}: {e.message}"
                    return
            outcome.report = report
            outcome.highlighted = highlighted

        await asyncio.gather(*(run_one(o) for o in outcomes))
    return outcomes


def _flagged_record(citation: dict) -> str:
    record = {
        "author": citation.get("fields", {}).get("author", ""),
        "title": citation.get("title", ""),
    }
    return json.dumps(record, ensure_ascii=False)


def _print_human(outcome: _FileOutcome, show_header: bool) -> None:
    report = outcome.report
    if show_header:
        print(f"== {outcome.path}")
    if report["counts"]["flagged"] == 0 and report["counts"]["unverifiable"] == 0:
        print("All Clear!")
        return
    for citation in report["flagged"]:
        print(_flagged_record(citation))
    if report["unverifiable"]:
        print("Unverifiable citations (no title recognized; check manually):")
        for citation in report["unverifiable"]:
            print(f"- {citation['raw_text']}")


def _write_outputs(outcome: _FileOutcome, out_dir: Path, used: set[str]) -> None:
    stem = Path(outcome.path).stem or "document"
    candidate = stem
    counter = 2
    while candidate in used:
        candidate = f"{stem}-{counter}"
        counter += 1
    used.add(candidate)
    report_text = json.dumps(outcome.report, sort_keys=True, indent=2,
                             ensure_ascii=False) + "\n"
    (out_dir / f"{candidate}.report.json").write_text(report_text, encoding="utf-8")
    if outcome.highlighted is not None:
        (out_dir / f"{candidate}.flagged.pdf").write_bytes(outcome.highlighted)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if not args.db:
        print("citecheck: error: at least one --db is required", file=sys.stderr)
        return EXIT_ERROR

    try:
        outcomes = asyncio.run(_verify_all(args))
    except ServiceError as e:
        print(f"citecheck: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"citecheck: error: {e}", file=sys.stderr)
        return EXIT_ERROR

    out_dir = None
    if args.output:
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)

    exit_code = EXIT_ALL_CLEAR
    used_stems: set[str] = set()
    multi = len(outcomes) > 1
    reports_for_profile: list[VerificationReport] = []

    for outcome in outcomes:
        if outcome.error is not None:
            print(f"citecheck: error: {outcome.path}: {outcome.error}",
                  file=sys.stderr)
            exit_code = EXIT_ERROR
            continue
        report = outcome.report
        if args.json_only:
            print(json.dumps(report, sort_keys=True, ensure_ascii=False))
        else:
            _print_human(outcome, show_header=multi)
        if out_dir is not None:
            _write_outputs(outcome, out_dir, used_stems)
        if report["counts"]["flagged"] or report["counts"]["unverifiable"]:
            if exit_code == EXIT_ALL_CLEAR:
                exit_code = EXIT_CANDIDATES
        reports_for_profile.append(VerificationReport(**report))

    if args.profile and reports_for_profile:
        print(timing_table(reports_for_profile), file=sys.stderr)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
