"""QML job/result language: parser, validator, include resolver, serializer."""

from .model import JobTree
from .parse import parse, parse_result, validate
from .serialize import serialize_job, serialize_result

__all__ = [
    "JobTree",
    "parse",
    "parse_result",
    "validate",
    "serialize_job",
    "serialize_result",
]
