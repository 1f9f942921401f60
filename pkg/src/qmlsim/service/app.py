"""FastAPI application wrapping the job store.

The service speaks QML over the wire (request body and result payloads)
and JSON for status/administration, exactly the interfaces the CLI
client and the browser UI consume.  No authentication: bind to loopback.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from ..engine import ResourceLimits
from ..errors import ResourceLimitError, ValidationError
from .models import (
    DiagnosticModel,
    JobListResponse,
    JobStatusResponse,
    ResourceErrorResponse,
    SubmitResponse,
    ValidationErrorResponse,
)
from .store import JobStore

QML_MEDIA_TYPE = "application/xml"


@dataclass
class ServiceConfig:
    data_dir: Path = Path("./qmlsim-data")
    memory_cap: int = 0  # 0 -> package default / env override
    workers: int = 1  # executor threads; 0 keeps jobs queued (tests)
    kernel_workers: int = 1


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    limits = ResourceLimits(
        memory_bytes=config.memory_cap, workers=config.kernel_workers
    )
    store = JobStore(Path(config.data_dir), limits)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        threads = store.start_workers(config.workers) if config.workers else []
        yield
        store.stop_workers(threads)

    app = FastAPI(title="qmlsim job service", lifespan=lifespan)
    app.state.store = store
    app.state.config = config

    @app.post(
        "/jobs",
        status_code=202,
        response_model=SubmitResponse,
        responses={400: {"model": ValidationErrorResponse},
                   413: {"model": ResourceErrorResponse}},
    )
    async def submit_job(request: Request):
        body = await request.body()
        try:
            entry = store.submit(body)
        except ValidationError as exc:
            payload = ValidationErrorResponse(
                detail="invalid QML document",
                diagnostics=[
                    DiagnosticModel(line=d.line, column=d.column, message=d.message)
                    for d in exc.diagnostics
                ],
            )
            return JSONResponse(status_code=400, content=payload.model_dump())
        except ResourceLimitError as exc:
            payload = ResourceErrorResponse(
                detail=str(exc), required_bytes=exc.required_bytes
            )
            return JSONResponse(status_code=413, content=payload.model_dump())
        return SubmitResponse(
            id=entry.id,
            status=entry.status,
            estimate_bytes=entry.estimate_bytes,
            engine=entry.engine,
        )

    @app.get("/jobs", response_model=JobListResponse)
    async def list_jobs():
        return JobListResponse(
            jobs=[JobStatusResponse(**e.status_dict()) for e in store.list_entries()]
        )

    @app.get("/jobs/{job_id}", response_model=JobStatusResponse,
             responses={404: {"description": "unknown job"}})
    async def job_status(job_id: str):
        entry = store.get(job_id)
        if entry is None:
            return JSONResponse(status_code=404,
                                content={"detail": f"unknown job {job_id}"})
        return JobStatusResponse(**entry.status_dict())

    @app.get("/jobs/{job_id}/result",
             responses={404: {"description": "unknown job"},
                        409: {"description": "not finished"}})
    async def job_result(job_id: str):
        entry = store.get(job_id)
        if entry is None:
            return JSONResponse(status_code=404,
                                content={"detail": f"unknown job {job_id}"})
        if entry.status != "done":
            return JSONResponse(status_code=409, content=entry.status_dict())
        payload = store.result_bytes(job_id)
        if payload is None:
            return JSONResponse(status_code=409, content=entry.status_dict())
        return Response(content=payload, media_type=QML_MEDIA_TYPE)

    @app.delete("/jobs/{job_id}", status_code=204,
                responses={404: {"description": "unknown job"},
                           409: {"description": "not cancelable"}})
    async def cancel_job(job_id: str):
        outcome = store.cancel(job_id)
        if outcome == "missing":
            return JSONResponse(status_code=404,
                                content={"detail": f"unknown job {job_id}"})
        if outcome == "busy":
            return JSONResponse(
                status_code=409,
                content={"detail": "only queued jobs can be canceled"},
            )
        return Response(status_code=204)

    return app
