from __future__ import annotations

import math

import numpy as np
import pytest

from qmlsim.engine import (
    ENGINE_MATRIX,
    ENGINE_SPECTRUM_DENSE,
    ENGINE_SPECTRUM_LANCZOS,
    ENGINE_STATE,
    EnginePlan,
    ResourceLimits,
    configure,
    matrix_engine_apply,
    run,
)
from qmlsim.errors import ResourceLimitError
from qmlsim.gates import GateSpec, TimeStep
from qmlsim.observables import Trace
from qmlsim.qml import parse, serialize_result
from qmlsim.qml.model import JobTree

from conftest import random_unitary

LIMITS = ResourceLimits(memory_bytes=4 * 1024**3, throughput=1e9)


def circuit_job(n_qubits: int, steps, seed: int = 0) -> JobTree:
    return JobTree(kind="circuit", n_qubits=n_qubits, seed=seed, steps=steps)


class TestConfigure:
    def test_31_qubit_memory_estimate_is_exact(self):
        job = circuit_job(31, [TimeStep([GateSpec("H", targets=(1,))])])
        with pytest.raises(ResourceLimitError) as err:
            configure(job, LIMITS)
        assert err.value.required_bytes == 34359738368
        assert "34359738368" in str(err.value)
        assert err.value.plan.memory_bytes == 34359738368
        assert err.value.plan.engine_id == ENGINE_STATE

    def test_small_spectrum_full_routes_dense(self):
        job = JobTree(kind="spectrum-full", n_qubits=5)
        assert configure(job, LIMITS).engine_id == ENGINE_SPECTRUM_DENSE

    def test_large_spectrum_full_advises_margins(self):
        job = JobTree(kind="spectrum-full", n_qubits=20)
        with pytest.raises(ResourceLimitError, match="spectrum-margins"):
            configure(job, LIMITS)

    def test_margins_route(self):
        # full reorthogonalization stores max_iter Krylov vectors, so a
        # 20-qubit margins job needs a bigger cap than the state alone
        job = JobTree(kind="spectrum-margins", n_qubits=20)
        roomy = ResourceLimits(memory_bytes=16 * 1024**3, throughput=1e9)
        plan = configure(job, roomy)
        assert plan.engine_id == ENGINE_SPECTRUM_LANCZOS
        assert plan.memory_bytes >= 16 * (1 << 20)

    def test_matrix_engine_on_request_within_cap(self):
        job = circuit_job(6, [TimeStep([GateSpec("H", targets=(1,))])])
        assert configure(job, LIMITS, engine_request="matrix").engine_id \
            == ENGINE_MATRIX
        with pytest.raises(ResourceLimitError, match="capped"):
            configure(circuit_job(9, []), LIMITS, engine_request="matrix")

    def test_pure_function_of_job_and_limits(self):
        job = circuit_job(4, [TimeStep([GateSpec("H", targets=(1,))])])
        a, b = configure(job, LIMITS), configure(job, LIMITS)
        assert (a.engine_id, a.memory_bytes, a.est_ops, a.est_seconds) == \
            (b.engine_id, b.memory_bytes, b.est_ops, b.est_seconds)

    def test_est_ops_formula(self):
        job = circuit_job(4, [TimeStep([
            GateSpec("H", targets=(1,)),
            GateSpec("CNOT", controls=(2,), targets=(3,)),
        ])])
        plan = configure(job, LIMITS)
        assert plan.est_ops == 16 * 2 + 16 * 4


def bell_steps():
    return [
        TimeStep([GateSpec("H", targets=(1,))]),
        TimeStep([GateSpec("CNOT", controls=(1,), targets=(2,))]),
    ]


class TestRun:
    def test_empty_circuit(self):
        trace = run(circuit_job(2, []), limits=LIMITS)
        assert isinstance(trace, Trace)
        assert trace.records == []

    def test_bell_trace(self):
        trace = run(circuit_job(2, bell_steps()), limits=LIMITS)
        rec = trace.records[1]
        assert np.max(np.abs(rec.bloch)) < 1e-12
        assert abs(rec.entropy - 1.0) < 1e-12
        probs = {e.index: e.probability for e in rec.listing}
        assert set(probs) == {0, 3}
        assert all(abs(p - 0.5) < 1e-12 for p in probs.values())

    def test_step_errors_carry_step_index(self):
        bad = circuit_job(2, [
            TimeStep([GateSpec("H", targets=(1,))]),
            TimeStep([GateSpec("CUSTOM1", targets=(1,),
                               matrix=np.array([[1, 0], [0, 2.0]]))]),
        ])
        with pytest.raises(Exception, match="step 2"):
            run(bad, limits=LIMITS)

    def test_progress_callback_sees_entropies(self):
        seen = []
        run(circuit_job(2, bell_steps()), limits=LIMITS,
            progress=lambda step, ent: seen.append((step, round(ent, 9))))
        assert seen == [(1, 1.0), (2, 1.0)]

    def test_spectrum_jobs_return_spectrum(self):
        from conftest import random_model

        model = random_model(3, seed=4)
        job = JobTree(kind="spectrum-full", n_qubits=3, hamiltonian=model)
        spec = run(job, limits=LIMITS)
        assert len(spec.eigenvalues) == 8
        margins = JobTree(kind="spectrum-margins", n_qubits=3,
                          hamiltonian=model, spectrum_k=2,
                          spectrum_max_iter=8)
        spec2 = run(margins, limits=LIMITS)
        want = spec.eigenvalues[:2] + spec.eigenvalues[-2:]
        assert np.allclose(spec2.eigenvalues, want, atol=1e-7)


def _random_job(n_qubits: int, n_gates: int, seed: int) -> JobTree:
    """Measurement-free job mixing fixed and scalable kinds, one gate per
    step so supports never collide."""
    rng = np.random.default_rng(seed)
    steps = []
    kinds = ["H", "X", "Y", "Z", "S", "T", "PHASE", "RX", "RY", "RZ",
             "CNOT", "CZ", "SWAP", "TOFFOLI", "FREDKIN", "CUSTOM1", "CUSTOM2",
             "QFT", "INVQFT", "ORACLE", "GROVERSTEP", "GROVER", "MODULO"]
    for g in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        spec = GateSpec(kind=kind)
        if kind in ("CNOT", "CZ"):
            c, t = rng.choice(n_qubits, size=2, replace=False) + 1
            spec.controls, spec.targets = (int(c),), (int(t),)
        elif kind == "TOFFOLI":
            qs = rng.choice(n_qubits, size=3, replace=False) + 1
            spec.controls, spec.targets = (int(qs[0]), int(qs[1])), (int(qs[2]),)
        elif kind == "FREDKIN":
            qs = rng.choice(n_qubits, size=3, replace=False) + 1
            spec.controls, spec.targets = (int(qs[0]),), (int(qs[1]), int(qs[2]))
        elif kind in ("SWAP", "CUSTOM2"):
            qs = rng.choice(n_qubits, size=2, replace=False) + 1
            spec.targets = (int(qs[0]), int(qs[1]))
            if kind == "CUSTOM2":
                spec.matrix = random_unitary(4, seed=seed * 100 + g)
        elif kind in ("QFT", "INVQFT", "ORACLE", "GROVERSTEP", "GROVER"):
            m = int(rng.integers(1, min(4, n_qubits) + 1))
            qs = rng.choice(n_qubits, size=m, replace=False) + 1
            spec.targets = tuple(int(q) for q in qs)
            if kind in ("ORACLE", "GROVERSTEP", "GROVER"):
                count = int(rng.integers(1, (1 << m) + 1))
                spec.marked = tuple(
                    sorted(int(x) for x in
                           rng.choice(1 << m, size=count, replace=False))
                )
            if kind == "GROVER":
                spec.iterations = int(rng.integers(0, 4))
        elif kind == "MODULO":
            nx = int(rng.integers(1, n_qubits - 1))
            ny = int(rng.integers(1, n_qubits - nx + 1))
            qs = rng.choice(n_qubits, size=nx + ny, replace=False) + 1
            spec.xreg = tuple(int(q) for q in qs[:nx])
            spec.yreg = tuple(int(q) for q in qs[nx:])
            spec.modn = int(rng.integers(1, (1 << ny) + 1))
            spec.a = int(rng.integers(0, 16))
        else:
            spec.targets = (int(rng.integers(1, n_qubits + 1)),)
            if kind in ("PHASE", "RX", "RY", "RZ"):
                spec.theta = float(rng.uniform(-math.pi, math.pi))
            if kind == "CUSTOM1":
                spec.matrix = random_unitary(2, seed=seed * 100 + g)
        steps.append(TimeStep([spec]))
    return JobTree(kind="circuit", n_qubits=n_qubits, seed=seed, steps=steps)


class TestMatrixEngine:
    def test_single_hadamard_unitary(self):
        job = circuit_job(1, [TimeStep([GateSpec("H", targets=(1,))])])
        total, state, _ = matrix_engine_apply(job, limits=LIMITS)
        h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        assert np.max(np.abs(total - h)) < 1e-12
        assert np.allclose(state.amplitudes, h[:, 0])

    def test_cnot_circuit_is_permutation(self):
        job = circuit_job(2, [TimeStep([GateSpec("CNOT", controls=(1,),
                                                 targets=(2,))])])
        total, _, _ = matrix_engine_apply(job, limits=LIMITS)
        assert np.array_equal(np.abs(total), np.abs(total).astype(bool))
        assert np.array_equal(total @ total, np.eye(4))

    def test_qft_circuit_matches_dft_formula(self):
        job = circuit_job(3, [TimeStep([GateSpec("QFT", targets=(1, 2, 3))])])
        total, _, _ = matrix_engine_apply(job, limits=LIMITS)
        j = np.arange(8)
        dft = np.exp(2j * np.pi * np.outer(j, j) / 8) / math.sqrt(8)
        assert np.max(np.abs(total - dft)) < 1e-12

    @pytest.mark.parametrize("seed", range(6))
    def test_state_engine_agrees_with_matrix_engine(self, seed):
        job = _random_job(6, 15, seed=seed)
        state_trace = run(job, configure(job, LIMITS), limits=LIMITS)
        _, final, matrix_trace = matrix_engine_apply(job, limits=LIMITS)
        for a, b in zip(state_trace.records, matrix_trace.records):
            assert abs(a.entropy - b.entropy) < 1e-9
            assert np.max(np.abs(np.asarray(a.bloch) - np.asarray(b.bloch))) < 1e-9
        last = state_trace.records[-1]
        probs = {e.index: e.probability for e in last.listing}
        final_probs = np.abs(final.amplitudes) ** 2
        for idx, p in probs.items():
            assert abs(final_probs[idx] - p) < 1e-10

    def test_measurements_share_rng_stream(self):
        steps = bell_steps() + [TimeStep([GateSpec("MEASURE", targets=(1, 2))])]
        job = circuit_job(2, steps, seed=99)
        state_trace = run(job, limits=LIMITS)
        _, _, matrix_trace = matrix_engine_apply(job, limits=LIMITS)
        a = state_trace.records[-1].measurements[0]
        b = matrix_trace.records[-1].measurements[0]
        assert (a.outcome, a.probability) == (b.outcome, b.probability)


class TestDeterminism:
    def test_within_step_gate_order_does_not_matter(self):
        gates = [
            GateSpec("H", targets=(1,)),
            GateSpec("CNOT", controls=(2,), targets=(3,)),
            GateSpec("RZ", targets=(4,), theta=0.3),
        ]
        fwd = circuit_job(4, [TimeStep(list(gates))])
        rev = circuit_job(4, [TimeStep(list(reversed(gates)))])
        a = run(fwd, limits=LIMITS).records[-1]
        b = run(rev, limits=LIMITS).records[-1]
        assert np.max(np.abs(np.asarray(a.bloch) - np.asarray(b.bloch))) < 1e-12

    def test_result_files_byte_identical_across_runs_and_workers(self, bell_doc):
        job = parse(bell_doc)
        outputs = []
        for workers in (1, 4, 1):
            limits = ResourceLimits(memory_bytes=4 * 1024**3, workers=workers,
                                    throughput=1e9)
            trace = run(job, configure(job, limits), limits=limits)
            outputs.append(serialize_result(trace, job))
        assert outputs[0] == outputs[1] == outputs[2]

    def test_seeded_measurement_reproducible(self):
        steps = bell_steps() + [TimeStep([GateSpec("MEASURE", targets=(1,))])]
        job = circuit_job(2, steps, seed=5)
        a = run(job, limits=LIMITS)
        b = run(job, limits=LIMITS)
        assert serialize_result(a, parse_job_stub(job)) == \
            serialize_result(b, parse_job_stub(job))


def parse_job_stub(job: JobTree) -> JobTree:
    return job
