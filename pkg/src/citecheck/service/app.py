"""FastAPI application exposing the verification pipeline.

The service keeps loaded databases in memory (loading and indexing a large
database dominates cold-start cost, so a resident process amortizes it
across many documents).  It binds to localhost by default and never makes
outbound connections; "offline" means the host needs no network at all.
"""

from __future__ import annotations

import base64
import logging
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, HTTPException, UploadFile

from .. import __version__
from ..bibdb import BibDatabase, ingest, load, pin_check
from ..errors import CitecheckError, LockfileMissing
from ..matcher import MatcherConfig
from ..pipeline import verify_document
from ..recognizer import get_labeler
from ..report import environment_profile
from . import schemas

logger = logging.getLogger(__name__)


class DatabaseRegistry:
    """Loaded databases by name, remembering load order and source path."""

    def __init__(self):
        self._dbs: dict[str, BibDatabase] = {}
        self._paths: dict[str, str] = {}

    def load_path(self, path: str) -> BibDatabase:
        resolved = str(Path(path).resolve())
        for name, p in self._paths.items():
            if p == resolved:
                return self._dbs[name]
        db = load(path)
        self._dbs[db.name] = db
        self._paths[db.name] = resolved
        return db

    def get(self, name: str) -> BibDatabase | None:
        return self._dbs.get(name)

    def infos(self) -> list[schemas.DatabaseInfo]:
        return [
            schemas.DatabaseInfo(
                name=name,
                version=db.manifest.version,
                entry_count=db.entry_count,
                path=self._paths.get(name, ""),
            )
            for name, db in self._dbs.items()
        ]


def _error(status_code: int, exc: Exception) -> HTTPException:
    return HTTPException(
        status_code=status_code,
        detail={"error": type(exc).__name__, "message": str(exc)},
    )


def normalize_threshold(value: float) -> float:
    """Accept both the 0-1 and 0-100 score scales."""
    return value / 100.0 if value > 1.0 else value


def create_app() -> FastAPI:
    app = FastAPI(
        title="citecheck",
        version=__version__,
        description="Offline verification of citations in scientific PDFs",
    )
    registry = DatabaseRegistry()
    app.state.registry = registry

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/environment")
    def environment():
        return environment_profile()

    @app.get("/schemas/report")
    def report_schema():
        return schemas.VerificationReportModel.model_json_schema()

    @app.get("/databases", response_model=schemas.DatabaseList)
    def list_databases():
        return {"databases": registry.infos()}

    @app.post("/databases/load", response_model=schemas.DatabaseInfo)
    def load_database(req: schemas.LoadDbRequest):
        try:
            db = registry.load_path(req.path)
        except CitecheckError as e:
            raise _error(422, e)
        return schemas.DatabaseInfo(
            name=db.name,
            version=db.manifest.version,
            entry_count=db.entry_count,
            path=str(Path(req.path).resolve()),
        )

    @app.post("/databases/ingest", response_model=schemas.IngestResponse)
    def ingest_database(req: schemas.IngestRequest):
        if not Path(req.source).exists():
            raise HTTPException(404, detail={
                "error": "MissingSource",
                "message": f"source file not found: {req.source}",
            })
        try:
            result = ingest(req.source, req.db_name, req.dest, delimiter=req.delimiter)
        except CitecheckError as e:
            raise _error(422, e)
        return schemas.IngestResponse(
            manifest=schemas.ManifestModel(**_manifest_record(result.manifest)),
            skipped_empty_titles=result.skipped_empty_titles,
            malformed_rows=result.malformed_rows,
            db_dir=str(result.db_dir),
        )

    @app.post("/pins/check", response_model=schemas.PinReportModel)
    def check_pins(req: schemas.PinCheckRequest):
        manifests = [db.manifest for db in registry._dbs.values()]
        try:
            report = pin_check(manifests, req.lockfile)
        except LockfileMissing as e:
            raise _error(404, e)
        return report.to_record()

    @app.post("/verify", response_model=schemas.VerifyResponse)
    def verify(
        file: UploadFile = File(...),
        dbs: str = Form(...),
        threshold: float = Form(0.9),
        labeler: Optional[str] = Form(None),
        highlight: bool = Form(False),
        lockfile: Optional[str] = Form(None),
    ):
        names = [n.strip() for n in dbs.split(",") if n.strip()]
        if not names:
            raise HTTPException(400, detail={
                "error": "NoDatabases",
                "message": "at least one loaded database name is required",
            })
        databases = []
        for name in names:
            db = registry.get(name)
            if db is None:
                raise HTTPException(404, detail={
                    "error": "UnknownDatabase",
                    "message": f"database {name!r} is not loaded",
                })
            databases.append(db)

        try:
            the_labeler = get_labeler(labeler)
        except LookupError as e:
            raise HTTPException(404, detail={
                "error": "UnknownLabeler", "message": str(e),
            })

        pin_report = None
        if lockfile:
            try:
                pin_report = pin_check([db.manifest for db in databases], lockfile)
            except LockfileMissing as e:
                raise _error(404, e)

        try:
            config = MatcherConfig(threshold=normalize_threshold(threshold))
        except ValueError as e:
            raise HTTPException(400, detail={
                "error": "BadThreshold", "message": str(e),
            })

        pdf_bytes = file.file.read()
        try:
            result = verify_document(
                pdf_bytes,
                databases,
                config=config,
                labeler=the_labeler,
                pin_report=pin_report,
                highlight=highlight,
                display_name=file.filename or "<upload>",
            )
        except CitecheckError as e:
            raise _error(422, e)

        encoded = None
        if result.highlighted_pdf is not None:
            encoded = base64.b64encode(result.highlighted_pdf).decode("ascii")
        return schemas.VerifyResponse(
            report=schemas.VerificationReportModel(**result.report.to_record()),
            highlighted_pdf_b64=encoded,
        )

    return app


def _manifest_record(manifest) -> dict:
    record = manifest.to_record()
    return record
