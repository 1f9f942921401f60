"""Command-line front door.

Local subcommands (run, estimate, validate, spectrum, shor) execute in
process; submit/status/result are thin clients for a running service,
and serve starts one.  Exit codes: 0 ok, 1 parse/validation, 2 resource
limit, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .engine import ResourceLimits, configure, run
from .errors import (
    NumericError,
    ResourceLimitError,
    SimulationError,
    ValidationError,
)
from .observables import Trace
from .qml import parse, serialize_result, validate
from .shor import extract_factors
from .solvers import Spectrum

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RESOURCE = 2
EXIT_NUMERIC = 3


def _limits(args) -> ResourceLimits:
    memory = getattr(args, "memory_cap", None) or 0
    workers = getattr(args, "workers", None) or 1
    return ResourceLimits(memory_bytes=memory, workers=workers)


def _load_job(args):
    path = Path(args.job)
    text = path.read_bytes()
    return parse(
        text,
        base_path=path,
        allow_remote=getattr(args, "allow_remote_includes", False),
    )


def _trace_to_json(trace: Trace) -> dict:
    return {
        "engine": trace.engine,
        "seed": trace.seed,
        "threshold": trace.threshold,
        "rng": trace.rng_name,
        "warnings": list(trace.warnings),
        "records": [
            {
                "step": rec.step_index,
                "bloch": [[float(v) for v in row] for row in rec.bloch],
                "listing": [
                    {"index": e.index, "p": e.probability, "phase": e.phase}
                    for e in rec.listing
                ],
                "entropy": rec.entropy,
                "measurements": [
                    {
                        "targets": list(m.targets),
                        "bits": m.outcome,
                        "p": m.probability,
                    }
                    for m in rec.measurements
                ],
            }
            for rec in trace.records
        ],
    }


def _trace_to_csv(trace: Trace) -> str:
    lines = ["kind,step,key,v1,v2,v3"]
    for rec in trace.records:
        for qubit, row in enumerate(rec.bloch, start=1):
            lines.append(
                f"bloch,{rec.step_index},{qubit},{row[0]!r},{row[1]!r},{row[2]!r}"
            )
        for e in rec.listing:
            lines.append(
                f"base,{rec.step_index},{e.index},{e.probability!r},{e.phase!r},"
            )
        lines.append(f"entropy,{rec.step_index},,{rec.entropy!r},,")
        for m in rec.measurements:
            lines.append(
                f"outcome,{rec.step_index},{'.'.join(map(str, m.targets))},"
                f"{m.outcome},{m.probability!r},"
            )
    return "\n".join(lines) + "\n"


def _spectrum_to_json(spec: Spectrum) -> dict:
    return {
        "eigenvalues": spec.eigenvalues,
        "residuals": spec.residuals,
        "converged": spec.converged,
        "seed": spec.seed,
    }


def _write_out(data: bytes, out: str) -> None:
    if out == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(out).write_bytes(data)


def cmd_run(args) -> int:
    job = _load_job(args)
    if args.seed is not None:
        job.seed = args.seed
    if args.threshold is not None:
        job.threshold = args.threshold
    limits = _limits(args)
    plan = configure(job, limits, engine_request=args.engine)

    def progress(step: int, entropy: float) -> None:
        print(f"step {step} entropy={entropy!r}", file=sys.stderr)

    result = run(job, plan, limits=limits, progress=progress)
    if args.format == "qml":
        _write_out(serialize_result(result, job), args.out)
    elif args.format == "json":
        payload = (
            _trace_to_json(result)
            if isinstance(result, Trace)
            else _spectrum_to_json(result)
        )
        _write_out((json.dumps(payload, indent=2) + "\n").encode(), args.out)
    else:
        if not isinstance(result, Trace):
            raise ValidationError([])
        _write_out(_trace_to_csv(result).encode(), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    job = _load_job(args)
    try:
        plan = configure(job, _limits(args), engine_request=args.engine)
    except ResourceLimitError as exc:
        plan = getattr(exc, "plan", None)
        if plan is None:
            raise
        print(f"over-limit: {exc}", file=sys.stderr)
    print(f"engine: {plan.engine_id}")
    print(f"memory: {plan.memory_bytes}")
    print(f"ops: {plan.est_ops}")
    print(f"time: {plan.est_seconds:.6g}")
    print(f"workers: {plan.workers}")
    for w in plan.warnings:
        print(f"warning: {w}")
    return EXIT_OK


def cmd_validate(args) -> int:
    path = Path(args.job)
    diags = validate(
        path.read_bytes(),
        base_path=path,
        allow_remote=getattr(args, "allow_remote_includes", False),
    )
    for d in diags:
        print(f"{path.name}:{d}")
    if diags:
        return EXIT_VALIDATION
    print(f"{path.name}: ok")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    job = _load_job(args)
    if args.full:
        job.kind = "spectrum-full"
    elif args.margins is not None:
        job.kind = "spectrum-margins"
        job.spectrum_k = args.margins
    if job.kind == "circuit":
        print("error: job is not a spectrum job (use --full or --margins)",
              file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed is not None:
        job.seed = args.seed
    limits = _limits(args)
    plan = configure(job, limits)
    spec = run(job, plan, limits=limits)
    values = ", ".join(repr(v) for v in spec.eigenvalues)
    print(f"eigenvalues: {values}")
    print(f"converged: {', '.join('true' if c else 'false' for c in spec.converged)}")
    if spec.seed is not None:
        print(f"seed: {spec.seed}")
    return EXIT_OK


def cmd_shor(args) -> int:
    result = extract_factors(args.M, args.nx, args.a, args.N,
                             multiple_bound=args.multiple_bound)
    if result.success:
        print(f"factors: {result.factors[0]} {result.factors[1]}")
        if result.order is not None:
            print(f"order: {result.order}")
        return EXIT_OK
    print(f"failure: {result.reason}")
    if result.candidates_tried:
        print(f"candidates: {','.join(map(str, result.candidates_tried))}")
    return EXIT_NUMERIC


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig(
        data_dir=Path(args.data_dir),
        memory_cap=args.memory_cap or 0,
        workers=args.job_workers,
    )
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _client(args):
    import httpx

    return httpx.Client(base_url=args.url, timeout=30.0)


def cmd_submit(args) -> int:
    body = Path(args.job).read_bytes()
    with _client(args) as client:
        resp = client.post("/jobs", content=body,
                           headers={"content-type": "application/xml"})
    if resp.status_code != 202:
        print(f"error {resp.status_code}: {resp.text}", file=sys.stderr)
        return EXIT_VALIDATION if resp.status_code == 400 else EXIT_RESOURCE
    data = resp.json()
    print(data["id"])
    print(f"estimate_bytes: {data['estimate_bytes']}", file=sys.stderr)
    return EXIT_OK


def cmd_status(args) -> int:
    with _client(args) as client:
        resp = client.get(f"/jobs/{args.id}")
    print(json.dumps(resp.json(), indent=2))
    return EXIT_OK if resp.status_code == 200 else EXIT_VALIDATION


def cmd_result(args) -> int:
    with _client(args) as client:
        resp = client.get(f"/jobs/{args.id}/result")
    if resp.status_code != 200:
        print(f"error {resp.status_code}: {resp.text}", file=sys.stderr)
        return EXIT_VALIDATION
    _write_out(resp.content, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmlsim",
        description="Quantum circuit / spin-Hamiltonian simulator and job service",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--memory-cap", type=int,
                       default=int(os.environ.get("QMLSIM_MEMORY_CAP", "0") or 0),
                       help="amplitude memory cap in bytes")
        p.add_argument("--workers", type=int, default=1,
                       help="kernel worker threads")
        p.add_argument("--allow-remote-includes", action="store_true")

    p = sub.add_parser("run", help="execute a job file")
    p.add_argument("job")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("qml", "json", "csv"), default="qml")
    p.add_argument("--engine", choices=("auto", "state", "matrix"), default="auto")
    p.add_argument("--threshold", type=float, default=None)
    add_common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("estimate", help="print the engine plan for a job")
    p.add_argument("job")
    p.add_argument("--engine", choices=("auto", "state", "matrix"), default="auto")
    add_common(p)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("validate", help="print all diagnostics for a document")
    p.add_argument("job")
    add_common(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("spectrum", help="diagonalize a job's Hamiltonian")
    p.add_argument("job")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--full", action="store_true")
    group.add_argument("--margins", type=int, default=None, metavar="K")
    p.add_argument("--seed", type=int, default=None)
    add_common(p)
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("shor", help="factor from a measured x-register value")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--multiple-bound", type=int, default=64)
    p.set_defaults(fn=cmd_shor)

    p = sub.add_parser("serve", help="start the job service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default="./qmlsim-data")
    p.add_argument("--memory-cap", type=int,
                   default=int(os.environ.get("QMLSIM_MEMORY_CAP", "0") or 0))
    p.add_argument("--job-workers", type=int, default=1)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("submit", help="send a job file to a service")
    p.add_argument("job")
    p.add_argument("--url", default="http://127.0.0.1:8000")
    p.set_defaults(fn=cmd_submit)

    p = sub.add_parser("status", help="query a submitted job")
    p.add_argument("id")
    p.add_argument("--url", default="http://127.0.0.1:8000")
    p.set_defaults(fn=cmd_status)

    p = sub.add_parser("result", help="download a finished result")
    p.add_argument("id")
    p.add_argument("--url", default="http://127.0.0.1:8000")
    p.add_argument("--out", default="-")
    p.set_defaults(fn=cmd_result)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        for d in exc.diagnostics:
            print(str(d), file=sys.stderr)
        if not exc.diagnostics:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (NumericError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
