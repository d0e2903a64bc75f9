"""Verification reports, stage timing and environment profiling."""

from __future__ import annotations

import json
import platform
import time
from dataclasses import dataclass, field
from typing import Any

from . import __version__
from ._kernels import ENGINE
from .bibdb import DbManifest, PinReport
from .model import Citation, Stage, StageTiming


class Stopwatch:
    """Accumulates wall-clock time per pipeline stage.

    Use as ``with watch.stage(Stage.MATCHER, unit_count=n): ...``; one
    stopwatch instance covers one document run.
    """

    def __init__(self):
        self._elapsed: dict[Stage, float] = {}
        self._units: dict[Stage, int] = {}

    class _Timer:
        def __init__(self, watch: "Stopwatch", stage: Stage):
            self.watch = watch
            self.stage = stage

        def __enter__(self):
            self._start = time.perf_counter()
            return self

        def __exit__(self, *exc):
            elapsed = (time.perf_counter() - self._start) * 1000.0
            w = self.watch
            w._elapsed[self.stage] = w._elapsed.get(self.stage, 0.0) + elapsed
            return False

    def stage(self, stage: Stage) -> "Stopwatch._Timer":
        return Stopwatch._Timer(self, stage)

    def set_units(self, stage: Stage, count: int) -> None:
        self._units[stage] = count

    def timings(self) -> list[StageTiming]:
        out = []
        for stage in (Stage.EXTRACTOR, Stage.RECOGNIZER, Stage.MATCHER, Stage.TOTAL):
            if stage in self._elapsed:
                out.append(
                    StageTiming(stage, self._elapsed[stage], self._units.get(stage, 0))
                )
        return out


def environment_profile() -> dict[str, Any]:
    """Execution environment snapshot embedded in every report."""
    profile: dict[str, Any] = {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "machine": platform.machine(),
        "toolkit_version": __version__,
        "matcher_engine": ENGINE,
    }
    try:
        import os

        profile["cpu_count"] = os.cpu_count()
    except Exception:
        pass
    try:
        import resource

        usage = resource.getrusage(resource.RUSAGE_SELF)
        # ru_maxrss is KiB on Linux, bytes on macOS
        scale = 1024.0 if platform.system() != "Darwin" else 1024.0 * 1024.0
        profile["peak_rss_mb"] = round(usage.ru_maxrss / scale, 1)
    except Exception:
        pass
    return profile


#: report fields that legitimately differ between otherwise identical runs
VOLATILE_REPORT_FIELDS = ("created_at", "timings", "environment")


@dataclass
class VerificationReport:
    """Per-document outcome; the JSON artifact everything else projects."""

    input_path: str
    created_at: str
    threshold: float
    labeler: dict[str, str]
    databases: list[dict]
    pin_check: dict | None
    counts: dict[str, int]
    flagged: list[dict]
    unverifiable: list[dict]
    timings: list[dict]
    environment: dict
    warnings: list[str] = field(default_factory=list)

    def to_record(self) -> dict[str, Any]:
        return {
            "input_path": self.input_path,
            "created_at": self.created_at,
            "threshold": self.threshold,
            "labeler": self.labeler,
            "databases": self.databases,
            "pin_check": self.pin_check,
            "counts": self.counts,
            "flagged": self.flagged,
            "unverifiable": self.unverifiable,
            "timings": self.timings,
            "environment": self.environment,
            "warnings": self.warnings,
        }

    def to_json(self) -> str:
        """Canonical serialization: stable key order, UTF-8, trailing newline."""
        return json.dumps(self.to_record(), sort_keys=True, indent=2,
                          ensure_ascii=False) + "\n"

    @property
    def all_clear(self) -> bool:
        return self.counts["flagged"] == 0 and self.counts["unverifiable"] == 0


def build_report(
    input_path: str,
    *,
    threshold: float,
    labeler_name: str,
    labeler_version: str,
    manifests: list[DbManifest],
    pin_report: PinReport | None,
    extracted: list[Citation],
    flagged: list[Citation],
    unverifiable: list[Citation],
    watch: Stopwatch,
    warnings: list[str] | None = None,
) -> VerificationReport:
    from datetime import datetime, timezone

    counts = {
        "extracted": len(extracted),
        "recognized": len(extracted) - len(unverifiable),
        "unverifiable": len(unverifiable),
        "flagged": len(flagged),
        "verified": len(extracted) - len(unverifiable) - len(flagged),
    }
    return VerificationReport(
        input_path=input_path,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        threshold=threshold,
        labeler={"name": labeler_name, "version": labeler_version},
        databases=[m.to_record() for m in manifests],
        pin_check=pin_report.to_record() if pin_report else None,
        counts=counts,
        flagged=[c.to_record() for c in flagged],
        unverifiable=[c.to_record() for c in unverifiable],
        timings=[t.to_record() for t in watch.timings()],
        environment=environment_profile(),
        warnings=list(warnings or []),
    )


def strip_volatile(record: dict) -> dict:
    """Report record without run-dependent fields, for reproducibility diffs."""
    return {k: v for k, v in record.items() if k not in VOLATILE_REPORT_FIELDS}


def timing_table(reports: list[VerificationReport]) -> str:
    """Aggregate per-stage timings over a batch, per paper and per citation."""
    stages = ["extractor", "recognizer", "matcher", "total"]
    sums = {s: 0.0 for s in stages}
    papers = 0
    citations = 0
    for report in reports:
        papers += 1
        citations += report.counts["extracted"]
        for t in report.timings:
            if t["stage"] in sums:
                sums[t["stage"]] += t["elapsed_ms"]
    lines = ["Time           " + "".join(f"{s:>12s}" for s in stages)]
    if papers:
        lines.append(
            "msec/paper     "
            + "".join(f"{sums[s] / papers:>11.1f}ms" for s in stages)
        )
    if citations:
        lines.append(
            "msec/citation  "
            + "".join(f"{sums[s] / citations:>11.1f}ms" for s in stages)
        )
    else:
        lines.append("msec/citation  " + "(no citations processed)".rjust(48))
    lines.append(
        "total (sec)    "
        + "".join(f"{sums[s] / 1000.0:>11.1f}s " for s in stages)
    )
    return "\n".join(lines)
