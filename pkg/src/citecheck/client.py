"""Client for the verification service.

The CLI and other callers talk to the service through this one interface.
By default requests are dispatched in-process over an ASGI transport (no
socket is opened, keeping one-shot CLI use fully offline); pointing it at
a base URL sends the same requests to a running server instead, which is
the mode that amortizes large database loads across many documents.
"""

from __future__ import annotations

import base64
from pathlib import Path
from typing import Any

import httpx


class ServiceError(Exception):
    """A non-2xx response from the service."""

    def __init__(self, status_code: int, error: str, message: str):
        super().__init__(f"{error}: {message}")
        self.status_code = status_code
        self.error = error
        self.message = message


def _raise_for(response: httpx.Response) -> None:
    if response.is_success:
        return
    error, message = "ServiceError", response.text[:200]
    try:
        detail = response.json().get("detail")
        if isinstance(detail, dict):
            error = detail.get("error", error)
            message = detail.get("message", message)
        elif detail:
            message = str(detail)
    except Exception:
        pass
    raise ServiceError(response.status_code, error, message)


class ServiceClient:
    """Async facade over the service endpoints."""

    def __init__(self, server: str | None = None, app=None):
        if server:
            self._client = httpx.AsyncClient(base_url=server, timeout=600.0)
        else:
            if app is None:
                from .service import create_app

                app = create_app()
            self._client = httpx.AsyncClient(
                transport=httpx.ASGITransport(app=app),
                base_url="http://citecheck.internal",
                timeout=None,
            )

    async def __aenter__(self) -> "ServiceClient":
        return self

    async def __aexit__(self, *exc) -> None:
        await self.close()

    async def close(self) -> None:
        await self._client.aclose()

    async def health(self) -> dict[str, Any]:
        r = await self._client.get("/health")
        _raise_for(r)
        return r.json()

    async def environment(self) -> dict[str, Any]:
        r = await self._client.get("/environment")
        _raise_for(r)
        return r.json()

    async def report_schema(self) -> dict[str, Any]:
        r = await self._client.get("/schemas/report")
        _raise_for(r)
        return r.json()

    async def databases(self) -> list[dict[str, Any]]:
        r = await self._client.get("/databases")
        _raise_for(r)
        return r.json()["databases"]

    async def load_db(self, path: str | Path) -> dict[str, Any]:
        r = await self._client.post("/databases/load", json={"path": str(path)})
        _raise_for(r)
        return r.json()

    async def ingest(
        self,
        source: str | Path,
        db_name: str,
        dest: str | Path,
        delimiter: str | None = None,
    ) -> dict[str, Any]:
        r = await self._client.post(
            "/databases/ingest",
            json={
                "source": str(source),
                "db_name": db_name,
                "dest": str(dest),
                "delimiter": delimiter,
            },
        )
        _raise_for(r)
        return r.json()

    async def pin_check(self, lockfile: str | Path) -> dict[str, Any]:
        r = await self._client.post("/pins/check", json={"lockfile": str(lockfile)})
        _raise_for(r)
        return r.json()

    async def verify_bytes(
        self,
        filename: str,
        data: bytes,
        *,
        dbs: list[str],
        threshold: float = 0.9,
        labeler: str | None = None,
        highlight: bool = False,
        lockfile: str | Path | None = None,
    ) -> tuple[dict[str, Any], bytes | None]:
        """Verify one PDF; returns (report record, highlighted PDF bytes or None)."""
        form: dict[str, Any] = {
            "dbs": ",".join(dbs),
            "threshold": str(threshold),
            "highlight": "true" if highlight else "false",
        }
        if labeler:
            form["labeler"] = labeler
        if lockfile:
            form["lockfile"] = str(lockfile)
        r = await self._client.post(
            "/verify",
            files={"file": (filename, data, "application/pdf")},
            data=form,
        )
        _raise_for(r)
        body = r.json()
        highlighted = None
        if body.get("highlighted_pdf_b64"):
            highlighted = base64.b64decode(body["highlighted_pdf_b64"])
        return body["report"], highlighted
