"""Durable job store and executor.

One directory per job (job.qml, result.qml, meta) under the data dir;
meta is a line-oriented "key value" file for easy inspection.  Status
transitions are queued -> running -> done|failed, documents never change
once stored, and exactly one executor thread mutates an entry.  On
restart, finished entries are preserved and queued (or interrupted
running) entries are re-queued in submission order.
"""

from __future__ import annotations

import json
import queue
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..engine import ResourceLimits, configure, run
from ..errors import SimulationError
from ..qml import parse, serialize_result

META_NAME = "meta"
JOB_NAME = "job.qml"
RESULT_NAME = "result.qml"

STATUSES = ("queued", "running", "done", "failed")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class JobEntry:
    id: str
    status: str = "queued"
    submitted_at: str = ""
    finished_at: str | None = None
    seed: int = 0
    estimate_bytes: int = 0
    engine: str = ""
    error: str | None = None

    def status_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "submitted_at": self.submitted_at,
            "finished_at": self.finished_at,
            "estimate_bytes": self.estimate_bytes,
            "engine": self.engine,
            "error": self.error,
        }


class JobStore:
    """Filesystem-backed job registry with a FIFO work queue."""

    def __init__(self, data_dir: Path, limits: ResourceLimits):
        self.data_dir = Path(data_dir)
        self.jobs_dir = self.data_dir / "jobs"
        self.jobs_dir.mkdir(parents=True, exist_ok=True)
        self.limits = limits
        self._lock = threading.Lock()
        self._entries: dict[str, JobEntry] = {}
        self._queue: "queue.Queue[str | None]" = queue.Queue()
        self._load_existing()

    # -- persistence ------------------------------------------------------

    def _job_dir(self, job_id: str) -> Path:
        return self.jobs_dir / job_id

    def _write_meta(self, entry: JobEntry) -> None:
        lines = [
            f"status {entry.status}",
            f"submitted_at {entry.submitted_at}",
            f"finished_at {entry.finished_at or ''}",
            f"seed {entry.seed}",
            f"estimate_bytes {entry.estimate_bytes}",
            f"engine {entry.engine}",
            f"error {json.dumps(entry.error)}",
        ]
        (self._job_dir(entry.id) / META_NAME).write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )

    def _read_meta(self, job_id: str) -> JobEntry | None:
        path = self._job_dir(job_id) / META_NAME
        if not path.is_file():
            return None
        fields: dict[str, str] = {}
        for line in path.read_text(encoding="utf-8").splitlines():
            key, _, value = line.partition(" ")
            fields[key] = value
        try:
            return JobEntry(
                id=job_id,
                status=fields.get("status", "failed"),
                submitted_at=fields.get("submitted_at", ""),
                finished_at=fields.get("finished_at") or None,
                seed=int(fields.get("seed", "0") or 0),
                estimate_bytes=int(fields.get("estimate_bytes", "0") or 0),
                engine=fields.get("engine", ""),
                error=json.loads(fields.get("error", "null") or "null"),
            )
        except (ValueError, json.JSONDecodeError):
            return None

    def _load_existing(self) -> None:
        restored: list[JobEntry] = []
        for child in sorted(self.jobs_dir.iterdir()) if self.jobs_dir.is_dir() else []:
            if not child.is_dir():
                continue
            entry = self._read_meta(child.name)
            if entry is None:
                continue
            if entry.status == "running":
                # interrupted by a previous shutdown: run it again
                entry.status = "queued"
                self._write_meta(entry)
            self._entries[entry.id] = entry
            if entry.status == "queued":
                restored.append(entry)
        for entry in sorted(restored, key=lambda e: e.submitted_at):
            self._queue.put(entry.id)

    # -- API used by the HTTP layer --------------------------------------

    def submit(self, body: bytes) -> JobEntry:
        """Validate, estimate, persist and enqueue one job document.

        Raises ValidationError / ResourceLimitError for 400 / 413.
        """
        job = parse(body)
        plan = configure(job, self.limits)
        entry = JobEntry(
            id=secrets.token_hex(16),
            status="queued",
            submitted_at=_now(),
            seed=job.seed,
            estimate_bytes=plan.memory_bytes,
            engine=plan.engine_id,
        )
        job_dir = self._job_dir(entry.id)
        job_dir.mkdir(parents=True)
        (job_dir / JOB_NAME).write_bytes(body)
        with self._lock:
            self._write_meta(entry)
            self._entries[entry.id] = entry
            self._queue.put(entry.id)
        return entry

    def get(self, job_id: str) -> JobEntry | None:
        with self._lock:
            return self._entries.get(job_id)

    def list_entries(self) -> list[JobEntry]:
        with self._lock:
            return sorted(self._entries.values(), key=lambda e: e.submitted_at)

    def result_bytes(self, job_id: str) -> bytes | None:
        path = self._job_dir(job_id) / RESULT_NAME
        return path.read_bytes() if path.is_file() else None

    def job_bytes(self, job_id: str) -> bytes | None:
        path = self._job_dir(job_id) / JOB_NAME
        return path.read_bytes() if path.is_file() else None

    def cancel(self, job_id: str) -> str:
        """Remove a queued job entirely; returns "gone", "busy" or "missing"."""
        with self._lock:
            entry = self._entries.get(job_id)
            if entry is None:
                return "missing"
            if entry.status != "queued":
                return "busy"
            entry.status = "canceled"  # executor skips it when dequeued
            del self._entries[job_id]
        job_dir = self._job_dir(job_id)
        for name in (META_NAME, JOB_NAME, RESULT_NAME):
            path = job_dir / name
            if path.is_file():
                path.unlink()
        if job_dir.is_dir():
            job_dir.rmdir()
        return "gone"

    # -- executor ---------------------------------------------------------

    def execute_one(self, job_id: str) -> None:
        with self._lock:
            entry = self._entries.get(job_id)
            if entry is None or entry.status != "queued":
                return
            entry.status = "running"
            self._write_meta(entry)
        try:
            body = self.job_bytes(job_id)
            if body is None:
                raise SimulationError("stored job document is missing")
            job = parse(body)
            plan = configure(job, self.limits)
            result = run(job, plan, limits=self.limits)
            payload = serialize_result(result, job)
            (self._job_dir(job_id) / RESULT_NAME).write_bytes(payload)
            with self._lock:
                entry.status = "done"
                entry.finished_at = _now()
                self._write_meta(entry)
        except Exception as exc:  # noqa: BLE001 - failure is a stored outcome
            with self._lock:
                entry.status = "failed"
                entry.finished_at = _now()
                entry.error = str(exc)
                self._write_meta(entry)

    def worker_loop(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                break
            self.execute_one(job_id)

    def start_workers(self, count: int) -> list[threading.Thread]:
        threads = []
        for _ in range(count):
            t = threading.Thread(target=self.worker_loop, daemon=True)
            t.start()
            threads.append(t)
        return threads

    def stop_workers(self, threads: list[threading.Thread]) -> None:
        for _ in threads:
            self._queue.put(None)
        for t in threads:
            t.join(timeout=30)
