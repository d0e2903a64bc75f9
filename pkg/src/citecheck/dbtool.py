"""Database maintenance tool: ingest sources, pin versions, check pins.

    citecheck-db ingest --source dump.tsv --name acl --dest dbs/acl
    citecheck-db pin    --db dbs/acl --db dbs/arxiv --out pins.lock
    citecheck-db check  --db dbs/acl --db dbs/arxiv --lockfile pins.lock
    citecheck-db show   --db dbs/acl

Like the main CLI this is a thin client of the service; --server sends the
requests to a running citecheck-server (paths are then server-local).
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

from .client import ServiceClient, ServiceError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citecheck-db",
        description="Manage bibliographic databases for citecheck.",
    )
    parser.add_argument("--server", metavar="URL",
                        help="operate against a running citecheck-server")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="ingest a CSV/TSV dump")
    p_ingest.add_argument("--source", required=True,
                          help="delimited file with a 'title' column "
                               "(optional 'id' column)")
    p_ingest.add_argument("--name", required=True, help="database name")
    p_ingest.add_argument("--dest", required=True, help="output directory")
    p_ingest.add_argument("--delimiter", default=None,
                          help="field delimiter (default: by file extension)")

    p_pin = sub.add_parser("pin", help="write a version lockfile")
    p_pin.add_argument("--db", action="append", required=True, metavar="DIR")
    p_pin.add_argument("--out", required=True, metavar="LOCKFILE")

    p_check = sub.add_parser("check", help="check databases against a lockfile")
    p_check.add_argument("--db", action="append", required=True, metavar="DIR")
    p_check.add_argument("--lockfile", required=True)

    p_show = sub.add_parser("show", help="print a database's manifest")
    p_show.add_argument("--db", required=True, metavar="DIR")
    return parser


async def _run(args) -> int:
    async with ServiceClient(server=args.server) as client:
        if args.command == "ingest":
            result = await client.ingest(args.source, args.name, args.dest,
                                         delimiter=args.delimiter)
            manifest = result["manifest"]
            print(f"ingested {manifest['entry_count']} entries into {result['db_dir']}")
            print(f"version: {manifest['version']}")
            if result["skipped_empty_titles"]:
                print(f"skipped {result['skipped_empty_titles']} empty-title rows",
                      file=sys.stderr)
            for msg in result["malformed_rows"]:
                print(f"malformed: {msg}", file=sys.stderr)
            return 0

        if args.command == "pin":
            lines = []
            for db_path in args.db:
                info = await client.load_db(db_path)
                lines.append(f"{info['name']}\t{info['version']}")
            Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
            print(f"pinned {len(lines)} database(s) to {args.out}")
            return 0

        if args.command == "check":
            for db_path in args.db:
                await client.load_db(db_path)
            report = await client.pin_check(args.lockfile)
            for check in report["checks"]:
                status = "ok" if check["ok"] else "MISMATCH"
                print(f"{check['db_name']}: {status}")
                if not check["ok"]:
                    print(f"  pinned:  {check['expected']}")
                    print(f"  current: {check['actual']}")
            for warning in report["warnings"]:
                print(f"warning: {warning}", file=sys.stderr)
            print("pin check:", "PASS" if report["passed"] else "FAIL")
            return 0 if report["passed"] else 1

        if args.command == "show":
            info = await client.load_db(args.db)
            for key in ("name", "version", "entry_count", "path"):
                print(f"{key}: {info[key]}")
            return 0

    return 2


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return asyncio.run(_run(args))
    except ServiceError as e:
        print(f"citecheck-db: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"citecheck-db: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
