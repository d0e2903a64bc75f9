"""Run the verification service as a standing local server.

    citecheck-server --db dbs/acl --db dbs/arxiv --port 8100

Preloading databases at startup is the point of server mode: the indexes
stay warm and every subsequent /verify request skips the load cost.  The
server binds to localhost by default; nothing here ever dials out.
"""

from __future__ import annotations

import argparse
import logging
import sys


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citecheck-server",
        description="Serve the citecheck verification API.",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8100)
    parser.add_argument("--db", action="append", default=[], metavar="DIR",
                        help="database directory to preload; repeatable")
    parser.add_argument("--log-level", default="info")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper())

    import uvicorn

    from .service import create_app

    app = create_app()
    for db_path in args.db:
        info = app.state.registry.load_path(db_path)
        logging.getLogger(__name__).info(
            "preloaded database %s (%d entries)", info.name, info.entry_count
        )
    uvicorn.run(app, host=args.host, port=args.port, log_level=args.log_level)
    return 0


if __name__ == "__main__":
    sys.exit(main())
