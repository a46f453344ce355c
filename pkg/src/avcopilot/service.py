"""HTTP/WS surface for the console UI and remote callers.

Endpoints:

* ``POST /api/v1/instruction`` — body ``{"session": ..., "text": ...}``,
  returns the full interaction record;
* ``GET /api/v1/status`` — latest vehicle snapshot;
* ``WS /api/v1/telemetry`` — snapshot stream at a fixed cadence;
* ``GET /api/v1/log?session=`` — persisted records for a session.

The sim runs in a real-time background thread for the lifetime of the app;
telemetry is read-only and never blocks command processing.
"""

from __future__ import annotations

import asyncio
import tempfile
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, field_validator

from .pipeline import Pipeline
from .registry import default_registry, load_registry
from .simulation import SimHost, SimKernel, default_map, load_map
from .translation import AblationMode, HttpBackend, RuleBackend

TELEMETRY_CADENCE_HZ = 10.0


class InstructionIn(BaseModel):
    session: str = "default"
    text: str

    @field_validator("text")
    @classmethod
    def _non_empty(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("instruction text must be non-empty")
        return value


def build_pipeline(
    backend_name: str = "rule",
    map_text: str | None = None,
    registry_text: str | None = None,
    ablation: AblationMode = AblationMode.BASELINE,
    log_dir: str | Path | None = None,
) -> Pipeline:
    """Wire a pipeline from file contents (None means the shipped default)."""
    registry = load_registry(registry_text) if registry_text is not None else default_registry()
    route_map = load_map(map_text) if map_text is not None else default_map()
    host = SimHost(SimKernel(route_map))
    backend = RuleBackend() if backend_name == "rule" else HttpBackend()
    if log_dir is None:
        log_dir = Path(tempfile.mkdtemp(prefix="avcopilot-log-"))
    return Pipeline(registry, host, backend, ablation=ablation, log_dir=log_dir)


def create_app(pipeline: Pipeline, static_dir: str | Path | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_: FastAPI):
        pipeline.host.start_realtime()
        try:
            yield
        finally:
            pipeline.host.close()

    app = FastAPI(title="avcopilot", version="0.1.0", lifespan=lifespan)
    app.state.pipeline = pipeline

    @app.post("/api/v1/instruction")
    def submit_instruction(body: InstructionIn) -> dict:
        record = pipeline.handle_instruction(body.text, session=body.session)
        return record.as_dict()

    @app.get("/api/v1/status")
    def latest_status() -> dict:
        return pipeline.host.snapshot().as_dict()

    @app.get("/api/v1/log")
    def session_log(session: str = "default") -> dict:
        if pipeline.log is None:
            raise HTTPException(status_code=404, detail="logging disabled")
        records = pipeline.log.load(session)
        return {"session": session, "records": [r.as_dict() for r in records]}

    @app.websocket("/api/v1/telemetry")
    async def telemetry(ws: WebSocket) -> None:
        await ws.accept()
        period = 1.0 / TELEMETRY_CADENCE_HZ
        try:
            while True:
                await ws.send_json(pipeline.host.snapshot().as_dict())
                await asyncio.sleep(period)
        except WebSocketDisconnect:
            return

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="console")

    return app
