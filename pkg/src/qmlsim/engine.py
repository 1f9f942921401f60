"""Engine selection and job execution.

The configurator maps a job onto one of the registered engines and
estimates its memory and work; execution walks the time steps, applies
gates in document order (disjoint supports make the in-step order
irrelevant), and appends a StepRecord after every step.  The dense
matrix engine builds full 2**n step unitaries and exists mainly as a
cross-validation oracle for the state engine at small sizes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericError, ResourceLimitError
from .gates import (
    FIXED_KINDS,
    GateSpec,
    apply_gate,
    gate_matrix,
    powmod_table,
)
from .hamiltonian import (
    DENSE_CAP,
    PauliCouplingModel,
    TrotterPlan,
    build_dense,
    build_terms,
    embed_operator,
    exact_evolve,
    exp_gate_execute,
)
from .measurement import RNG_NAME, make_rng, measure
from .observables import Trace, step_record
from .qml.model import JobTree
from .solvers import Spectrum, full_spectrum, lanczos_margins
from .statevec import (
    StateVector,
    apply_matrix,
    memory_cap,
    new_basis_state,
    required_bytes,
)

MATRIX_CAP = 8  # qubits; dense step unitaries beyond this are pointless
NORM_DRIFT_TOL = 1e-9

ENGINE_STATE = "state-engine"
ENGINE_MATRIX = "matrix-engine"
ENGINE_SPECTRUM_DENSE = "spectrum-dense"
ENGINE_SPECTRUM_LANCZOS = "spectrum-lanczos"


@dataclass
class ResourceLimits:
    memory_bytes: int = 0  # 0 -> use the configured cap
    matrix_cap: int = MATRIX_CAP
    dense_cap: int = DENSE_CAP
    workers: int = 1
    throughput: float = 0.0  # amplitude touches per second; 0 -> calibrate

    def cap(self) -> int:
        return self.memory_bytes or memory_cap()


@dataclass
class EnginePlan:
    engine_id: str
    memory_bytes: int
    est_ops: int
    est_seconds: float
    workers: int = 1
    warnings: list[str] = field(default_factory=list)


_calibrated: list[float] = []


def kernel_throughput() -> float:
    """Measured amplitude touches per second, calibrated once per process."""
    if _calibrated:
        return _calibrated[0]
    state = new_basis_state(14)
    h = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
    reps = 8
    t0 = time.perf_counter()
    for _ in range(reps):
        state = apply_matrix(state, h, (1,))
    elapsed = max(time.perf_counter() - t0, 1e-9)
    _calibrated.append(reps * 2 * state.dim / elapsed)
    return _calibrated[0]


def _job_est_ops(job: JobTree) -> tuple[int, int]:
    """(est_ops, extra_bytes) over all gates: 2**n * 2**k amplitude touches
    per gate plus dense sub-operator storage for exact EXP nodes."""
    n = job.n_qubits
    ops = 0
    extra = 0
    for step in job.steps:
        for gate in step.gates:
            if gate.kind == "EXP":
                if gate.order == "exact":
                    ops += (1 << n) * (1 << n)
                    extra += 16 * (1 << (2 * n))
                else:
                    terms = build_terms(gate.model) if gate.model else []
                    per_slice = sum(
                        (1 << n) * (1 << len(t.targets)) for t in terms
                    )
                    mult = {"1": 1, "2": 2, "4": 5}[gate.order]
                    ops += gate.n_slices * mult * max(per_slice, 1 << n)
            elif gate.kind == "MEASURE":
                ops += 1 << n
            else:
                k = len(gate.support())
                ops += (1 << n) * (1 << min(k, n))
    return ops, extra


def configure(
    job: JobTree,
    limits: ResourceLimits | None = None,
    engine_request: str = "auto",
) -> EnginePlan:
    """Deterministic engine selection with memory and work estimates.

    Raises ResourceLimitError (carrying the estimate) when the job does
    not fit under the limits; cmd_estimate-style callers can catch it
    and still report the plan via the exception.
    """
    limits = limits or ResourceLimits()
    n = job.n_qubits
    warnings: list[str] = []

    if job.kind == "spectrum-full":
        if n > limits.dense_cap:
            raise ResourceLimitError(
                f"spectrum-full needs a dense {n}-qubit matrix "
                f"({16 * (1 << (2 * n))} bytes), over the {limits.dense_cap}-qubit "
                "cap; use spectrum-margins instead",
                required_bytes=16 * (1 << (2 * n)),
            )
        engine = ENGINE_SPECTRUM_DENSE
        mem = 16 * (1 << (2 * n))
        ops = (1 << n) ** 3
    elif job.kind == "spectrum-margins":
        engine = ENGINE_SPECTRUM_LANCZOS
        mem = required_bytes(n) * (job.spectrum_max_iter + 4)
        ops = job.spectrum_max_iter * (1 << n) * 8
    else:
        has_exp = any(g.kind == "EXP" for s in job.steps for g in s.gates)
        if engine_request == "matrix":
            if n > limits.matrix_cap:
                raise ResourceLimitError(
                    f"matrix engine is capped at {limits.matrix_cap} qubits, "
                    f"job has {n}",
                    required_bytes=16 * (1 << (2 * n)),
                )
            if has_exp:
                raise ResourceLimitError(
                    "matrix engine does not execute EXP nodes; use the state engine"
                )
            engine = ENGINE_MATRIX
            mem = 16 * (1 << (2 * n)) * 2 + required_bytes(n)
            ops, _ = _job_est_ops(job)
            ops *= 1 << n
        elif engine_request in ("auto", "state"):
            engine = ENGINE_STATE
            base_ops, extra = _job_est_ops(job)
            mem = required_bytes(n) + extra
            ops = base_ops
        else:
            raise ValueError(f"unknown engine request {engine_request!r}")

    throughput = limits.throughput or kernel_throughput()
    plan = EnginePlan(
        engine_id=engine,
        memory_bytes=mem,
        est_ops=ops,
        est_seconds=ops / throughput,
        workers=limits.workers,
        warnings=warnings,
    )
    if plan.memory_bytes > limits.cap():
        err = ResourceLimitError(
            f"job requires {plan.memory_bytes} bytes, cap is {limits.cap()} bytes",
            required_bytes=plan.memory_bytes,
        )
        err.plan = plan
        raise err
    return plan


ProgressFn = Callable[[int, float], None]

# Engine contract: execute(job, plan, limits, progress, keep_state) -> Trace
# or Spectrum.  A new engine registers its executor here and adds a
# selection predicate to configure().
ENGINE_REGISTRY: dict[str, Callable[..., "Trace | Spectrum"]] = {}


def register_engine(engine_id: str):
    def deco(fn):
        ENGINE_REGISTRY[engine_id] = fn
        return fn

    return deco


def _spectrum_matvec(model: PauliCouplingModel) -> Callable[[np.ndarray], np.ndarray]:
    terms = build_terms(model)
    n = model.n_qubits

    def apply_h(vec: np.ndarray) -> np.ndarray:
        state = StateVector(n, vec)
        out = np.zeros_like(vec)
        for term in terms:
            out += apply_matrix(state, term.matrix, term.targets).amplitudes
        return out

    return apply_h


def run(
    job: JobTree,
    plan: EnginePlan | None = None,
    *,
    limits: ResourceLimits | None = None,
    progress: ProgressFn | None = None,
    keep_state: bool = False,
) -> Trace | Spectrum:
    """Execute a configured job; returns a Trace for circuits and a
    Spectrum for spectrum jobs.  Errors carry the failing step index.
    With keep_state the final StateVector is attached to the trace
    (never serialized; cross-validation hook)."""
    limits = limits or ResourceLimits()
    if plan is None:
        plan = configure(job, limits)
    execute = ENGINE_REGISTRY.get(plan.engine_id)
    if execute is None:
        raise ValueError(f"no engine registered for {plan.engine_id!r}")
    return execute(job, plan, limits, progress, keep_state)


@register_engine(ENGINE_SPECTRUM_DENSE)
def _run_spectrum_dense(job, plan, limits, progress, keep_state) -> Spectrum:
    h = build_dense(job.hamiltonian, cap=limits.dense_cap)
    return full_spectrum(h, want_vectors=False)


@register_engine(ENGINE_SPECTRUM_LANCZOS)
def _run_spectrum_lanczos(job, plan, limits, progress, keep_state) -> Spectrum:
    return lanczos_margins(
        _spectrum_matvec(job.hamiltonian),
        dim=1 << job.n_qubits,
        k=job.spectrum_k,
        max_iter=job.spectrum_max_iter,
        tol=job.spectrum_tol,
        seed=job.seed,
    )


@register_engine(ENGINE_MATRIX)
def _run_matrix_engine(job, plan, limits, progress, keep_state) -> Trace:
    _, final, trace = matrix_engine_apply(job, limits=limits, progress=progress)
    if keep_state:
        trace.final_state = final
    return trace


@register_engine(ENGINE_STATE)
def _run_state_engine(job, plan, limits, progress, keep_state=False) -> Trace:
    state = new_basis_state(job.n_qubits, job.initial_state, cap=limits.cap())
    rng = make_rng(job.seed)
    draws = 0
    trace = Trace(
        engine=ENGINE_STATE,
        seed=job.seed,
        threshold=job.threshold,
        rng_name=RNG_NAME,
    )
    for idx, step in enumerate(job.steps, start=1):
        measurements = []
        for gate in step.gates:
            try:
                if gate.kind == "MEASURE":
                    record, state = measure(
                        state, gate.targets, rng, step=idx, draw_index=draws
                    )
                    draws += 1
                    measurements.append(record)
                elif gate.kind == "EXP":
                    state, notes = exp_gate_execute(
                        state,
                        gate.model,
                        gate.t,
                        gate.n_slices,
                        gate.order,
                        dense_cap=limits.dense_cap,
                        workers=plan.workers,
                    )
                    for note in notes:
                        if note not in trace.warnings:
                            trace.warnings.append(note)
                else:
                    state = apply_gate(state, gate, workers=plan.workers)
            except (NumericError, ResourceLimitError, ValueError) as exc:
                raise type(exc)(f"step {idx}: {exc}") from exc
        if abs(state.norm() - 1.0) > NORM_DRIFT_TOL:
            raise NumericError(
                f"step {idx}: state norm drifted to {state.norm()!r}"
            )
        trace.records.append(
            step_record(state, idx, job.threshold, measurements)
        )
        if progress is not None:
            progress(idx, trace.records[-1].entropy)
    if keep_state:
        trace.final_state = state
    return trace


def _dense_gate(gate: GateSpec, n: int) -> np.ndarray:
    """Full 2**n unitary of one gate by tensor embedding (matrix engine)."""
    if gate.kind in FIXED_KINDS:
        return embed_operator(gate_matrix(gate), gate.controls + gate.targets, n)
    if gate.kind in ("QFT", "INVQFT"):
        m = len(gate.targets)
        j = np.arange(1 << m)
        f = np.exp(2j * np.pi * np.outer(j, j) / (1 << m)) / np.sqrt(1 << m)
        if gate.kind == "INVQFT":
            f = f.conj().T
        return embed_operator(f, gate.targets, n)
    if gate.kind in ("ORACLE", "GROVERSTEP", "GROVER"):
        m = len(gate.targets)
        oracle = np.eye(1 << m, dtype=np.complex128)
        for idx in gate.marked:
            oracle[idx, idx] = -1
        if gate.kind == "ORACLE":
            return embed_operator(oracle, gate.targets, n)
        diffusion = 2.0 / (1 << m) * np.ones((1 << m, 1 << m)) - np.eye(1 << m)
        step = diffusion.astype(np.complex128) @ oracle
        if gate.kind == "GROVERSTEP":
            return embed_operator(step, gate.targets, n)
        reps = gate.iterations if gate.iterations is not None else 1
        return embed_operator(np.linalg.matrix_power(step, reps), gate.targets, n)
    if gate.kind == "MODULO":
        nx, ny = len(gate.xreg), len(gate.yreg)
        fx = powmod_table(gate.a, nx, gate.modn)
        dim = 1 << (nx + ny)
        perm = np.zeros((dim, dim), dtype=np.complex128)
        for x in range(1 << nx):
            f = int(fx[x])
            for y in range(1 << ny):
                perm[(x << ny) | (y ^ f), (x << ny) | y] = 1.0
        return embed_operator(perm, gate.xreg + gate.yreg, n)
    raise ValueError(f"matrix engine cannot build gate kind {gate.kind}")


def matrix_engine_apply(
    job: JobTree,
    *,
    limits: ResourceLimits | None = None,
    progress: ProgressFn | None = None,
) -> tuple[np.ndarray, StateVector, Trace]:
    """Dense-unitary execution: returns (product of all gate-step
    unitaries, final state, trace).  Measurements act on the evolving
    state exactly as in the state engine, sharing the RNG stream
    position, but do not enter the returned unitary."""
    limits = limits or ResourceLimits()
    n = job.n_qubits
    if n > limits.matrix_cap:
        raise ResourceLimitError(
            f"matrix engine is capped at {limits.matrix_cap} qubits, job has {n}"
        )
    state = new_basis_state(n, job.initial_state, cap=limits.cap())
    rng = make_rng(job.seed)
    draws = 0
    total = np.eye(1 << n, dtype=np.complex128)
    trace = Trace(
        engine=ENGINE_MATRIX,
        seed=job.seed,
        threshold=job.threshold,
        rng_name=RNG_NAME,
    )
    for idx, step in enumerate(job.steps, start=1):
        measurements = []
        step_u = np.eye(1 << n, dtype=np.complex128)
        for gate in step.gates:
            try:
                if gate.kind == "MEASURE":
                    record, state = measure(
                        state, gate.targets, rng, step=idx, draw_index=draws
                    )
                    draws += 1
                    measurements.append(record)
                elif gate.kind == "EXP":
                    raise ResourceLimitError(
                        "matrix engine does not execute EXP nodes"
                    )
                else:
                    step_u = _dense_gate(gate, n) @ step_u
            except (NumericError, ResourceLimitError, ValueError) as exc:
                raise type(exc)(f"step {idx}: {exc}") from exc
        state = StateVector(n, step_u @ state.amplitudes)
        total = step_u @ total
        trace.records.append(step_record(state, idx, job.threshold, measurements))
        if progress is not None:
            progress(idx, trace.records[-1].entropy)
    return total, state, trace
