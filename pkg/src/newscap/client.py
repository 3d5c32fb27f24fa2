"""Thin client for the pipeline service.

By default the client mounts the FastAPI app in-process over an ASGI
transport (no sockets, same filesystem); pass a base URL to talk to a
running server instead. Service error payloads are translated back into the
matching ToolkitError subclass so callers see the same exceptions either
way.
"""

from __future__ import annotations

import warnings

import httpx

from .errors import InputFileError, ProtocolError, SchemaError, ToolkitError

_ERRORS_BY_CODE = {
    cls.code: cls for cls in (InputFileError, SchemaError, ProtocolError, ToolkitError)
}


class ServiceClient:
    def __init__(self, base_url: str | None = None, timeout: float = 600.0):
        if base_url is None:
            # sync in-process ASGI client (starlette's portal-backed wrapper);
            # its import-time deprecation chatter is not ours to surface
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())
        else:
            self._client = httpx.Client(base_url=base_url, timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code == 400:
            detail = response.json().get("detail", {})
            if isinstance(detail, dict) and "code" in detail:
                cls = _ERRORS_BY_CODE.get(detail["code"], ToolkitError)
                raise cls(detail.get("message", "service error"))
        if response.status_code == 422:
            raise SchemaError(f"invalid request for {path}: {response.text}")
        response.raise_for_status()
        return response.json()["summary"]

    def health(self) -> dict:
        response = self._client.get("/health")
        response.raise_for_status()
        return response.json()

    def ingest(self, **payload) -> dict:
        return self._post("/ingest", payload)

    def build_alignment(self, **payload) -> dict:
        return self._post("/alignment/build", payload)

    def build_context(self, **payload) -> dict:
        return self._post("/context/build", payload)

    def generate(self, **payload) -> dict:
        return self._post("/generate", payload)

    def evaluate(self, **payload) -> dict:
        return self._post("/evaluate", payload)

    def loss_audit(self, **payload) -> dict:
        return self._post("/loss-audit", payload)
