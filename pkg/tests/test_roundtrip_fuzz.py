"""Property fuzz over generated circuits: any job built from the gate
vocabulary serializes to a document that re-parses to the same job."""

from __future__ import annotations

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qmlsim.gates import GateSpec, TimeStep
from qmlsim.hamiltonian import PauliCouplingModel
from qmlsim.qml import parse, serialize_job
from qmlsim.qml.model import JobTree


@st.composite
def circuits(draw) -> JobTree:
    n = draw(st.integers(2, 6))
    free = list(range(1, n + 1))
    steps = []
    for _ in range(draw(st.integers(0, 5))):
        rngq = draw(st.permutations(free))
        cursor = 0

        def take(count: int) -> tuple[int, ...]:
            nonlocal cursor
            got = tuple(rngq[cursor:cursor + count])
            cursor += count
            return got

        gates = []
        while cursor < n:
            remaining = n - cursor
            choice = draw(st.sampled_from(
                ["H", "X", "RZ", "CNOT", "SWAP", "QFT", "ORACLE", "MODULO",
                 "MEASURE", "EXP", "stop"]
            ))
            if choice == "stop":
                break
            if choice in ("H", "X"):
                gates.append(GateSpec(choice, targets=take(1)))
            elif choice == "RZ":
                theta = draw(st.floats(-math.pi, math.pi, allow_nan=False))
                gates.append(GateSpec("RZ", targets=take(1), theta=theta))
            elif choice == "CNOT" and remaining >= 2:
                gates.append(GateSpec("CNOT", controls=take(1), targets=take(1)))
            elif choice == "SWAP" and remaining >= 2:
                gates.append(GateSpec("SWAP", targets=take(2)))
            elif choice == "QFT" and remaining >= 2:
                m = draw(st.integers(1, min(remaining, 3)))
                gates.append(GateSpec("QFT", targets=take(m)))
            elif choice == "ORACLE":
                m = draw(st.integers(1, min(remaining, 3)))
                reg = take(m)
                marked = draw(st.sets(st.integers(0, (1 << m) - 1), min_size=1))
                gates.append(GateSpec("ORACLE", targets=reg,
                                      marked=tuple(sorted(marked))))
            elif choice == "MODULO" and remaining >= 2:
                nx = draw(st.integers(1, remaining - 1))
                ny = remaining - nx
                xreg, yreg = take(nx), take(ny)
                modn = draw(st.integers(1, 1 << ny))
                gates.append(GateSpec("MODULO", a=draw(st.integers(0, 7)),
                                      modn=modn, xreg=xreg, yreg=yreg))
            elif choice == "MEASURE":
                m = draw(st.integers(1, remaining))
                gates.append(GateSpec("MEASURE", targets=take(m)))
            elif choice == "EXP" and remaining >= 2:
                pair = take(2)
                model = PauliCouplingModel(n)
                e2 = np.zeros((3, 3))
                e2[2, 2] = draw(st.floats(-2, 2, allow_nan=False))
                model.add_coupling(pair[0], pair[1], 1.0, e2)
                gates.append(GateSpec(
                    "EXP", model=model,
                    t=draw(st.floats(-2, 2, allow_nan=False)),
                    n_slices=draw(st.integers(1, 8)),
                    order=draw(st.sampled_from(["1", "2", "4", "exact"])),
                ))
        steps.append(TimeStep(gates))
    return JobTree(
        kind="circuit",
        n_qubits=n,
        seed=draw(st.integers(0, 2**63 - 1)),
        threshold=draw(st.sampled_from([0.0, 1e-4, 0.01])),
        steps=steps,
    )


@settings(max_examples=60, deadline=None)
@given(job=circuits())
def test_serialize_parse_fixpoint(job):
    once = serialize_job(job)
    again = serialize_job(parse(once))
    assert once == again


@settings(max_examples=30, deadline=None)
@given(job=circuits())
def test_parsed_job_preserves_structure(job):
    back = parse(serialize_job(job))
    assert back.n_qubits == job.n_qubits
    assert back.seed == job.seed
    assert back.threshold == job.threshold
    assert len(back.steps) == len(job.steps)
    for mine, theirs in zip(job.steps, back.steps):
        assert [g.kind for g in mine.gates] == [g.kind for g in theirs.gates]
