"""HTTP job service: submit QML jobs, poll status, fetch results."""

from .app import ServiceConfig, create_app
from .store import JobEntry, JobStore

__all__ = ["ServiceConfig", "create_app", "JobEntry", "JobStore"]
