"""Deterministic QML writers.

Numbers are written with repr(), which round-trips doubles exactly
(shortest representation, at most 17 significant digits).  Attribute
order and indentation are fixed so identical inputs serialize to
byte-identical documents.
"""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

from ..gates import GateSpec, THETA_KINDS
from ..hamiltonian import PauliCouplingModel
from ..observables import Trace
from ..solvers import Spectrum
from .model import JobTree


def fnum(x: float) -> str:
    return repr(float(x))


def _ints(values) -> str:
    return ",".join(str(int(v)) for v in values)


def _cnum(c: complex) -> str:
    return f"{fnum(c.real)},{fnum(c.imag)}"


def _attr(name: str, value: str) -> str:
    return f" {name}={quoteattr(value)}"


class _Writer:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    def line(self, text: str) -> None:
        self.lines.append("  " * self.depth + text)

    def open(self, text: str) -> None:
        self.line(text)
        self.depth += 1

    def close(self, tag: str) -> None:
        self.depth -= 1
        self.line(f"</{tag}>")

    def bytes(self) -> bytes:
        return ("\n".join(self.lines) + "\n").encode("utf-8")


def _gate_attrs(gate: GateSpec) -> str:
    parts = [_attr("kind", gate.kind)]
    if gate.kind == "MODULO":
        parts.append(_attr("a", str(gate.a)))
        parts.append(_attr("modn", str(gate.modn)))
        parts.append(_attr("xreg", _ints(gate.xreg)))
        parts.append(_attr("yreg", _ints(gate.yreg)))
        return "".join(parts)
    parts.append(_attr("targets", _ints(gate.targets)))
    if gate.controls:
        parts.append(_attr("controls", _ints(gate.controls)))
    if gate.kind in THETA_KINDS:
        parts.append(_attr("theta", fnum(gate.theta)))
    if gate.kind == "GROVER":
        parts.append(_attr("iterations", str(gate.iterations or 0)))
    if gate.kind in ("ORACLE", "GROVERSTEP", "GROVER"):
        parts.append(_attr("marked", _ints(gate.marked)))
    if gate.matrix is not None:
        flat = np.asarray(gate.matrix).reshape(-1)
        parts.append(_attr("matrix", ";".join(_cnum(complex(c)) for c in flat)))
    return "".join(parts)


def _write_model(w: _Writer, model: PauliCouplingModel, name: str | None) -> None:
    head = "<hamiltonian"
    if name is not None:
        head += _attr("name", name)
    pairs = sorted(model.couplings)
    fields = sorted(model.fields)
    if not pairs and not fields:
        w.line(head + "/>")
        return
    w.open(head + ">")
    for (i, j) in pairs:
        jij, e2 = model.couplings[(i, j)]
        e2_text = ",".join(fnum(v) for v in np.asarray(e2).reshape(-1))
        w.line(
            f"<coupling{_attr('i', str(i))}{_attr('j', str(j))}"
            f"{_attr('jij', fnum(jij))}{_attr('e2', e2_text)}/>"
        )
    for i in fields:
        e1_text = ",".join(fnum(v) for v in model.fields[i])
        w.line(f"<field{_attr('i', str(i))}{_attr('e1', e1_text)}/>")
    w.close("hamiltonian")


def _write_job(w: _Writer, job: JobTree) -> None:
    head = (
        f"<job{_attr('type', job.kind)}{_attr('nqubits', str(job.n_qubits))}"
        f"{_attr('seed', str(job.seed))}{_attr('threshold', fnum(job.threshold))}"
    )
    if job.initial_state:
        head += _attr("initial", str(job.initial_state))
    if job.kind == "spectrum-margins":
        head += (
            f"{_attr('k', str(job.spectrum_k))}{_attr('tol', fnum(job.spectrum_tol))}"
            f"{_attr('maxiter', str(job.spectrum_max_iter))}"
        )
    empty = not job.steps and not job.hamiltonians and job.hamiltonian is None
    if empty:
        w.line(head + "/>")
        return
    w.open(head + ">")
    named = set()
    for name in sorted(job.hamiltonians):
        _write_model(w, job.hamiltonians[name], name)
        named.add(id(job.hamiltonians[name]))
    if job.hamiltonian is not None and id(job.hamiltonian) not in named:
        _write_model(w, job.hamiltonian, None)
    for step in job.steps:
        if not step.gates:
            w.line("<step/>")
            continue
        w.open("<step>")
        for gate in step.gates:
            if gate.kind == "MEASURE":
                w.line(f"<measure{_attr('targets', _ints(gate.targets))}/>")
            elif gate.kind == "EXP":
                head = (
                    f"<exp{_attr('ham', gate.ham_ref) if gate.ham_ref else ''}"
                    f"{_attr('t', fnum(gate.t))}{_attr('n', str(gate.n_slices))}"
                    f"{_attr('order', gate.order)}"
                )
                if gate.ham_ref is None and gate.model is not None:
                    w.open(head + ">")
                    _write_model(w, gate.model, None)
                    w.close("exp")
                else:
                    w.line(head + "/>")
            else:
                w.line(f"<gate{_gate_attrs(gate)}/>")
        w.close("step")
    w.close("job")


def serialize_job(job: JobTree) -> bytes:
    """Normalized job document (defaults made explicit, includes inlined)."""
    w = _Writer()
    w.open('<qml version="1.0">')
    _write_job(w, job)
    w.close("qml")
    return w.bytes()


def serialize_result(result: Trace | Spectrum, job: JobTree) -> bytes:
    """Self-contained result document embedding the originating job."""
    w = _Writer()
    w.open('<qml version="1.0">')
    if isinstance(result, Trace):
        w.open(
            f"<result{_attr('engine', result.engine)}"
            f"{_attr('rng', result.rng_name)}"
            f"{_attr('threshold', fnum(result.threshold))}>"
        )
        _write_job(w, job)
        for warning in result.warnings:
            w.line(f"<warning{_attr('text', warning)}/>")
        for rec in result.records:
            w.open(f"<record{_attr('step', str(rec.step_index))}>")
            for i, row in enumerate(np.asarray(rec.bloch), start=1):
                w.line(
                    f"<bloch{_attr('i', str(i))}{_attr('x', fnum(row[0]))}"
                    f"{_attr('y', fnum(row[1]))}{_attr('z', fnum(row[2]))}/>"
                )
            for entry in rec.listing:
                w.line(
                    f"<base{_attr('index', str(entry.index))}"
                    f"{_attr('p', fnum(entry.probability))}"
                    f"{_attr('phase', fnum(entry.phase))}/>"
                )
            w.line(f"<entropy{_attr('v', fnum(rec.entropy))}/>")
            for m in rec.measurements:
                w.line(
                    f"<outcome{_attr('targets', _ints(m.targets))}"
                    f"{_attr('bits', m.outcome)}{_attr('p', fnum(m.probability))}/>"
                )
            w.close("record")
        w.close("result")
    else:
        engine = "spectrum-lanczos" if result.seed is not None else "spectrum-dense"
        w.open(f"<result{_attr('engine', engine)}>")
        _write_job(w, job)
        w.open("<spectrum>")
        for v, conv in zip(result.eigenvalues, result.converged):
            w.line(
                f"<ev{_attr('v', fnum(v))}"
                f"{_attr('converged', 'true' if conv else 'false')}/>"
            )
        w.close("spectrum")
        w.close("result")
    w.close("qml")
    return w.bytes()
