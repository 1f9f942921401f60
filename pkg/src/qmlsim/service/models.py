"""Pydantic request/response models for the job service."""

from __future__ import annotations

from pydantic import BaseModel


class DiagnosticModel(BaseModel):
    line: int
    column: int
    message: str


class ValidationErrorResponse(BaseModel):
    detail: str
    diagnostics: list[DiagnosticModel]


class ResourceErrorResponse(BaseModel):
    detail: str
    required_bytes: int | None = None


class SubmitResponse(BaseModel):
    id: str
    status: str
    estimate_bytes: int
    engine: str


class JobStatusResponse(BaseModel):
    id: str
    status: str
    submitted_at: str
    finished_at: str | None = None
    estimate_bytes: int
    engine: str
    error: str | None = None


class JobListResponse(BaseModel):
    jobs: list[JobStatusResponse]
