"""HTTP front end and snapshot lifecycle.

The service holds one mutable cell: the current snapshot reference.
Queries read it once at the start of a request and run entirely against
that snapshot, so a concurrent reload never mixes two snapshots in one
response. Reload loads and validates the new file first and keeps the
old snapshot on any failure.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from . import index
from .pipeline import PipelineConfig, response_payload, run_suggest


@dataclass
class _SnapshotState:
    snapshot: index.IndexSnapshot
    built_at: str | None
    path: str


class SnapshotHolder:
    """Single-writer, many-reader cell for the active snapshot."""

    def __init__(self) -> None:
        self._state: _SnapshotState | None = None

    @property
    def state(self) -> _SnapshotState | None:
        return self._state

    def load(self, path: str) -> _SnapshotState:
        """Load, validate, and atomically swap in a snapshot file."""
        snapshot = index.load(path)
        built_at = (
            datetime.fromtimestamp(os.path.getmtime(path), tz=timezone.utc)
            .isoformat(timespec="seconds")
        )
        state = _SnapshotState(snapshot=snapshot, built_at=built_at, path=path)
        self._state = state
        return state


class ReloadRequest(BaseModel):
    path: str


def create_app(cfg: PipelineConfig, holder: SnapshotHolder | None = None) -> FastAPI:
    """Assemble the service; the snapshot may be loaded before or after."""
    holder = holder if holder is not None else SnapshotHolder()
    app = FastAPI(title="hammcode", version="0.1.0")
    app.state.holder = holder
    app.state.pipeline_config = cfg

    @app.get("/v1/suggest")
    def suggest_endpoint(q: str = Query(...), k: int | None = Query(default=None, ge=1)):
        state = holder.state
        if state is None:
            raise HTTPException(status_code=503, detail="no snapshot loaded")
        effective = replace(cfg, k=k) if k is not None else cfg
        response = run_suggest(q, effective, state.snapshot)
        return response_payload(response)

    @app.get("/v1/health")
    def health_endpoint():
        state = holder.state
        if state is None:
            return {"ready": False, "record_count": 0, "snapshot_built_at": None}
        return {
            "ready": True,
            "record_count": len(state.snapshot),
            "snapshot_built_at": state.built_at,
        }

    @app.post("/v1/reload")
    def reload_endpoint(request: ReloadRequest):
        try:
            holder.load(request.path)
        except (OSError, index.SnapshotError) as exc:
            return {"ok": False, "error": str(exc)}
        return {"ok": True}

    return app


def serve(cfg: PipelineConfig, host: str = "127.0.0.1", port: int = 8080) -> None:
    """Load the configured snapshot and run the service until stopped."""
    import uvicorn

    holder = SnapshotHolder()
    app = create_app(cfg, holder)
    if cfg.snapshot_path:
        holder.load(cfg.snapshot_path)
    uvicorn.run(app, host=host, port=port, log_level="info")
