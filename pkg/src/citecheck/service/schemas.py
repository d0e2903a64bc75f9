"""Pydantic request/response models for the verification service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str


class BoundingBoxModel(BaseModel):
    page_index: int = Field(ge=0)
    x0: float
    y0: float
    x1: float
    y1: float


class LabeledSpanModel(BaseModel):
    tag: str
    start_char: int = Field(ge=0)
    end_char: int = Field(ge=0)
    text: str


class MatchResultModel(BaseModel):
    matched: bool
    score: float = Field(ge=0.0, le=1.0)
    db_name: str = ""
    matched_id: str = ""
    matched_title: str = ""


class CitationModel(BaseModel):
    raw_text: str
    bboxes: list[BoundingBoxModel] = []
    spans: list[LabeledSpanModel] = []
    title: str = ""
    fields: dict[str, str] = {}
    match: Optional[MatchResultModel] = None
    status: Literal["extracted", "recognized", "verified", "unverifiable"]


class SourceFileModel(BaseModel):
    path: str
    sha256: str


class ManifestModel(BaseModel):
    db_name: str
    version: str
    entry_count: int = Field(ge=0)
    created_at: str
    normalization_rule: str
    source_files: list[SourceFileModel] = []


class PinCheckItemModel(BaseModel):
    db_name: str
    expected: str
    actual: str
    ok: bool


class PinReportModel(BaseModel):
    passed: bool
    checks: list[PinCheckItemModel] = []
    warnings: list[str] = []


class StageTimingModel(BaseModel):
    stage: Literal["extractor", "recognizer", "matcher", "total"]
    elapsed_ms: float = Field(ge=0.0)
    unit_count: int = Field(ge=0)


class CountsModel(BaseModel):
    extracted: int = Field(ge=0)
    recognized: int = Field(ge=0)
    unverifiable: int = Field(ge=0)
    flagged: int = Field(ge=0)
    verified: int = Field(ge=0)


class LabelerIdentityModel(BaseModel):
    name: str
    version: str


class VerificationReportModel(BaseModel):
    """The per-document JSON report; the schema clients validate against."""

    input_path: str
    created_at: str
    threshold: float = Field(gt=0.0, le=1.0)
    labeler: LabelerIdentityModel
    databases: list[ManifestModel]
    pin_check: Optional[PinReportModel] = None
    counts: CountsModel
    flagged: list[CitationModel]
    unverifiable: list[CitationModel]
    timings: list[StageTimingModel]
    environment: dict
    warnings: list[str] = []


class VerifyResponse(BaseModel):
    report: VerificationReportModel
    highlighted_pdf_b64: Optional[str] = None


class LoadDbRequest(BaseModel):
    path: str


class DatabaseInfo(BaseModel):
    name: str
    version: str
    entry_count: int
    path: str


class DatabaseList(BaseModel):
    databases: list[DatabaseInfo]


class IngestRequest(BaseModel):
    source: str
    db_name: str
    dest: str
    delimiter: Optional[str] = None


class IngestResponse(BaseModel):
    manifest: ManifestModel
    skipped_empty_titles: int
    malformed_rows: list[str]
    db_dir: str


class PinCheckRequest(BaseModel):
    lockfile: str


class ErrorDetail(BaseModel):
    error: str
    message: str
