"""QML parser and validator.

Documents are parsed with expat so every element carries a line/column,
and schema checks accumulate located diagnostics instead of stopping at
the first problem.  ``parse`` raises ValidationError when any diagnostic
is an error; ``validate`` returns the full list.

Includes are textual-tree substitution: the referenced fragment's steps
are spliced in place with its local qubits remapped through the map
attribute.  Relative hrefs resolve against the including file and must
stay inside the sandbox root; remote references require an explicit
opt-in.
"""

from __future__ import annotations

import math
import os
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from xml.parsers import expat

import numpy as np

from ..errors import Diagnostic, ValidationError
from ..gates import (
    FIXED_ARITY,
    GATE_KINDS,
    GateSpec,
    TimeStep,
    THETA_KINDS,
)
from ..hamiltonian import PauliCouplingModel
from ..measurement import MeasurementRecord
from ..observables import ListingEntry, StepRecord, Trace
from ..solvers import Spectrum
from .model import JOB_KINDS, JobTree

MAX_INCLUDE_DEPTH = 32

_ALLOWED_ATTRS = {
    "qml": {"version"},
    "job": {"type", "nqubits", "seed", "threshold", "initial", "k", "tol", "maxiter"},
    "fragment": {"nqubits"},
    "step": set(),
    "gate": {"kind", "targets", "controls", "theta", "iterations", "marked",
             "a", "modn", "xreg", "yreg", "matrix"},
    "measure": {"targets"},
    "exp": {"ham", "t", "n", "order"},
    "hamiltonian": {"name"},
    "coupling": {"i", "j", "jij", "e2"},
    "field": {"i", "e1"},
    "include": {"href", "map"},
    "result": {"engine", "rng", "threshold"},
    "record": {"step"},
    "bloch": {"i", "x", "y", "z"},
    "base": {"index", "p", "phase"},
    "entropy": {"v"},
    "outcome": {"targets", "bits", "p"},
    "spectrum": set(),
    "ev": {"v", "converged"},
    "warning": {"text"},
}

# attributes each gate kind accepts beyond "kind"
_GATE_ATTRS = {
    **{k: {"targets"} for k in ("H", "X", "Y", "Z", "S", "T", "SWAP")},
    **{k: {"targets", "theta"} for k in THETA_KINDS},
    **{k: {"targets", "controls"} for k in ("CNOT", "CZ", "TOFFOLI", "FREDKIN")},
    "CUSTOM1": {"targets", "matrix"},
    "CUSTOM2": {"targets", "matrix"},
    "QFT": {"targets"},
    "INVQFT": {"targets"},
    "ORACLE": {"targets", "marked"},
    "GROVERSTEP": {"targets", "marked"},
    "GROVER": {"targets", "marked", "iterations"},
    "MODULO": {"a", "modn", "xreg", "yreg"},
}


class _Element:
    __slots__ = ("tag", "attrs", "children", "line", "column", "text")

    def __init__(self, tag, attrs, line, column):
        self.tag = tag
        self.attrs = dict(attrs)
        self.children: list[_Element] = []
        self.line = line
        self.column = column
        self.text = ""


def _read_xml(data: bytes) -> tuple[_Element | None, list[Diagnostic]]:
    parser = expat.ParserCreate()
    root: list[_Element | None] = [None]
    stack: list[_Element] = []
    diags: list[Diagnostic] = []

    def start(tag, attrs):
        elem = _Element(tag, attrs, parser.CurrentLineNumber,
                        parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].children.append(elem)
        elif root[0] is None:
            root[0] = elem
        stack.append(elem)

    def end(tag):
        stack.pop()

    def chars(text):
        if stack and text.strip():
            stack[-1].text += text

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        diags.append(
            Diagnostic(exc.lineno, exc.offset + 1,
                       f"syntax error: {expat.errors.messages[exc.code]}")
        )
        return None, diags
    return root[0], diags


@dataclass
class _Context:
    diagnostics: list[Diagnostic] = field(default_factory=list)
    base_dir: Path | None = None
    include_root: Path | None = None
    allow_remote: bool = False
    include_stack: list[str] = field(default_factory=list)

    def error(self, elem: _Element, message: str) -> None:
        self.diagnostics.append(Diagnostic(elem.line, elem.column, message))


def _check_attrs(elem: _Element, ctx: _Context, allowed: set[str] | None = None) -> None:
    allowed = _ALLOWED_ATTRS[elem.tag] if allowed is None else allowed
    for name in elem.attrs:
        if name not in allowed:
            ctx.error(elem, f'unexpected attribute "{name}" on <{elem.tag}>')
    if elem.text.strip():
        ctx.error(elem, f"unexpected text content in <{elem.tag}>")


def _attr(elem: _Element, name: str, ctx: _Context, required: bool = True) -> str | None:
    value = elem.attrs.get(name)
    if value is None and required:
        ctx.error(elem, f'missing attribute "{name}" on <{elem.tag}>')
    return value


def _int_attr(elem, name, ctx, required=True, default=None, minimum=None):
    raw = _attr(elem, name, ctx, required)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        ctx.error(elem, f'attribute "{name}" must be an integer, got "{raw}"')
        return default
    if minimum is not None and value < minimum:
        ctx.error(elem, f'attribute "{name}" must be >= {minimum}, got {value}')
        return default
    return value


def _float_attr(elem, name, ctx, required=True, default=None):
    raw = _attr(elem, name, ctx, required)
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        ctx.error(elem, f'attribute "{name}" must be a number, got "{raw}"')
        return default
    if not math.isfinite(value):
        ctx.error(elem, f'attribute "{name}" must be finite, got "{raw}"')
        return default
    return value


def _int_list_attr(elem, name, ctx, required=True):
    raw = _attr(elem, name, ctx, required)
    if raw is None:
        return None
    out = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(int(part))
        except ValueError:
            ctx.error(elem, f'attribute "{name}" must list integers, got "{part}"')
            return None
    if not out:
        ctx.error(elem, f'attribute "{name}" must not be empty')
        return None
    return tuple(out)


def _float_list(raw: str) -> list[float] | None:
    out = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            return None
        try:
            value = float(part)
        except ValueError:
            return None
        if not math.isfinite(value):
            return None
        out.append(value)
    return out


def _matrix_attr(elem, ctx, size: int) -> np.ndarray | None:
    raw = _attr(elem, "matrix", ctx, required=True)
    if raw is None:
        return None
    entries = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = _float_list(chunk)
        if parts is None or len(parts) != 2:
            ctx.error(elem, f'matrix entry "{chunk}" must be "re,im"')
            return None
        entries.append(complex(parts[0], parts[1]))
    if len(entries) != size * size:
        ctx.error(
            elem,
            f"matrix must have {size * size} entries, got {len(entries)}",
        )
        return None
    return np.array(entries, dtype=np.complex128).reshape(size, size)


def _qubits_in_range(elem, ctx, qubits, n_qubits, what) -> bool:
    ok = True
    seen = set()
    for q in qubits:
        if n_qubits is not None and not 1 <= q <= n_qubits:
            ctx.error(elem, f"{what} qubit {q} out of range 1..{n_qubits}")
            ok = False
        if q in seen:
            ctx.error(elem, f"duplicate {what} qubit {q}")
            ok = False
        seen.add(q)
    return ok


def _walk_gate(elem: _Element, ctx: _Context, n_qubits: int | None) -> GateSpec | None:
    kind = _attr(elem, "kind", ctx)
    if kind is None:
        return None
    if kind not in GATE_KINDS or kind in ("EXP", "MEASURE"):
        ctx.error(elem, f'unknown gate kind "{kind}"')
        return None
    _check_attrs(elem, ctx, {"kind"} | _GATE_ATTRS[kind])
    if elem.children:
        ctx.error(elem, f"<gate> takes no child elements")

    spec = GateSpec(kind=kind)
    if kind == "MODULO":
        a = _int_attr(elem, "a", ctx, minimum=0)
        modn = _int_attr(elem, "modn", ctx, minimum=1)
        xreg = _int_list_attr(elem, "xreg", ctx)
        yreg = _int_list_attr(elem, "yreg", ctx)
        if None in (a, modn, xreg, yreg):
            return None
        if set(xreg) & set(yreg):
            ctx.error(elem, "x and y registers overlap")
            return None
        if not _qubits_in_range(elem, ctx, xreg, n_qubits, "x-register"):
            return None
        if not _qubits_in_range(elem, ctx, yreg, n_qubits, "y-register"):
            return None
        if (1 << len(yreg)) < modn:
            ctx.error(
                elem,
                f"y register of {len(yreg)} qubit(s) too short for residues mod {modn}",
            )
            return None
        spec.a, spec.modn, spec.xreg, spec.yreg = a, modn, xreg, yreg
        return spec

    targets = _int_list_attr(elem, "targets", ctx)
    if targets is None:
        return None
    controls = ()
    if "controls" in _GATE_ATTRS[kind]:
        controls = _int_list_attr(elem, "controls", ctx) or ()
        if not controls:
            return None
    if not _qubits_in_range(elem, ctx, targets + controls, n_qubits, "gate"):
        return None
    spec.targets, spec.controls = targets, controls

    if kind in FIXED_ARITY:
        want_c, want_t = FIXED_ARITY[kind]
        if len(targets) != want_t:
            ctx.error(elem, f"{kind} takes {want_t} target(s), got {len(targets)}")
            return None
        if len(controls) != want_c:
            ctx.error(elem, f"{kind} takes {want_c} control(s), got {len(controls)}")
            return None
    if kind in THETA_KINDS:
        theta = _float_attr(elem, "theta", ctx)
        if theta is None:
            return None
        spec.theta = theta
    if kind in ("CUSTOM1", "CUSTOM2"):
        matrix = _matrix_attr(elem, ctx, 2 if kind == "CUSTOM1" else 4)
        if matrix is None:
            return None
        from ..statevec import is_unitary

        if not is_unitary(matrix):
            ctx.error(elem, f"{kind} matrix is not unitary within 1e-10")
            return None
        spec.matrix = matrix
    if kind in ("ORACLE", "GROVERSTEP", "GROVER"):
        marked = _int_list_attr(elem, "marked", ctx)
        if marked is None:
            return None
        limit = 1 << len(targets)
        bad = [x for x in marked if not 0 <= x < limit]
        if bad:
            ctx.error(
                elem,
                f"marked index {bad[0]} out of range for a {len(targets)}-qubit register",
            )
            return None
        spec.marked = tuple(sorted(set(marked)))
    if kind == "GROVER":
        iterations = _int_attr(elem, "iterations", ctx, required=False,
                               default=1, minimum=0)
        if iterations is None:
            return None
        spec.iterations = iterations
    return spec


def _walk_measure(elem: _Element, ctx: _Context, n_qubits) -> GateSpec | None:
    _check_attrs(elem, ctx)
    targets = _int_list_attr(elem, "targets", ctx)
    if targets is None:
        return None
    if not _qubits_in_range(elem, ctx, targets, n_qubits, "measure"):
        return None
    return GateSpec(kind="MEASURE", targets=targets)


def _walk_exp(elem: _Element, ctx: _Context, n_qubits) -> GateSpec | None:
    _check_attrs(elem, ctx)
    t = _float_attr(elem, "t", ctx)
    n = _int_attr(elem, "n", ctx, required=False, default=1, minimum=1)
    order = elem.attrs.get("order", "2")
    if order not in ("1", "2", "4", "exact"):
        ctx.error(elem, f'attribute "order" must be 1, 2, 4 or exact, got "{order}"')
        return None
    ham_ref = elem.attrs.get("ham")
    inline = [c for c in elem.children if c.tag == "hamiltonian"]
    other = [c for c in elem.children if c.tag != "hamiltonian"]
    for child in other:
        ctx.error(child, f"unexpected <{child.tag}> inside <exp>")
    model = None
    if inline:
        if len(inline) > 1:
            ctx.error(inline[1], "<exp> takes at most one inline <hamiltonian>")
        if ham_ref is not None:
            ctx.error(elem, '<exp> cannot have both ham="..." and an inline block')
            return None
        _, model = _walk_hamiltonian(inline[0], ctx, n_qubits, require_name=False)
    elif ham_ref is None:
        ctx.error(elem, '<exp> requires ham="name" or an inline <hamiltonian>')
        return None
    if t is None:
        return None
    return GateSpec(kind="EXP", ham_ref=ham_ref, model=model, t=t,
                    n_slices=n, order=order)


def _walk_hamiltonian(
    elem: _Element, ctx: _Context, n_qubits, require_name: bool
) -> tuple[str | None, PauliCouplingModel | None]:
    _check_attrs(elem, ctx)
    name = elem.attrs.get("name")
    if require_name and name is None:
        ctx.error(elem, 'missing attribute "name" on <hamiltonian>')
    if n_qubits is None:
        return name, None
    model = PauliCouplingModel(n_qubits)
    ok = True
    for child in elem.children:
        if child.tag == "coupling":
            _check_attrs(child, ctx)
            i = _int_attr(child, "i", ctx, minimum=1)
            j = _int_attr(child, "j", ctx, minimum=1)
            jij = _float_attr(child, "jij", ctx)
            raw = _attr(child, "e2", ctx)
            e2 = _float_list(raw) if raw is not None else None
            if raw is not None and (e2 is None or len(e2) != 9):
                ctx.error(child, 'attribute "e2" must list 9 numbers row-major')
                e2 = None
            if None in (i, j, jij) or e2 is None:
                ok = False
                continue
            try:
                model.add_coupling(i, j, jij, np.array(e2).reshape(3, 3))
            except ValueError as exc:
                ctx.error(child, str(exc))
                ok = False
        elif child.tag == "field":
            _check_attrs(child, ctx)
            i = _int_attr(child, "i", ctx, minimum=1)
            raw = _attr(child, "e1", ctx)
            e1 = _float_list(raw) if raw is not None else None
            if raw is not None and (e1 is None or len(e1) != 3):
                ctx.error(child, 'attribute "e1" must list 3 numbers')
                e1 = None
            if i is None or e1 is None:
                ok = False
                continue
            try:
                model.add_field(i, e1)
            except ValueError as exc:
                ctx.error(child, str(exc))
                ok = False
        else:
            ctx.error(child, f"unexpected <{child.tag}> inside <hamiltonian>")
            ok = False
    return name, (model if ok else None)


def _walk_step(elem: _Element, ctx: _Context, n_qubits) -> TimeStep:
    _check_attrs(elem, ctx)
    step = TimeStep()
    for child in elem.children:
        if child.tag == "gate":
            spec = _walk_gate(child, ctx, n_qubits)
        elif child.tag == "measure":
            spec = _walk_measure(child, ctx, n_qubits)
        elif child.tag == "exp":
            spec = _walk_exp(child, ctx, n_qubits)
        else:
            ctx.error(child, f"unexpected <{child.tag}> inside <step>")
            continue
        if spec is not None:
            step.gates.append(spec)
    return step


def _remap_qubits(spec: GateSpec, mapping: dict[int, int],
                  global_n: int) -> GateSpec:
    def remap(qs):
        return tuple(mapping[q] for q in qs)

    out = GateSpec(
        kind=spec.kind,
        targets=remap(spec.targets),
        controls=remap(spec.controls),
        theta=spec.theta,
        marked=spec.marked,
        iterations=spec.iterations,
        a=spec.a,
        modn=spec.modn,
        xreg=remap(spec.xreg),
        yreg=remap(spec.yreg),
        matrix=spec.matrix,
        ham_ref=spec.ham_ref,
        t=spec.t,
        n_slices=spec.n_slices,
        order=spec.order,
    )
    if spec.model is not None:
        model = PauliCouplingModel(global_n)
        for (i, j), (jij, e2) in spec.model.couplings.items():
            model.add_coupling(mapping[i], mapping[j], jij, e2)
        for i, e1 in spec.model.fields.items():
            model.add_field(mapping[i], e1)
        out.model = model
    return out


def _parse_map(raw: str) -> dict[int, int] | None:
    mapping: dict[int, int] = {}
    for pair in raw.split(","):
        pair = pair.strip()
        if not pair:
            continue
        bits = pair.split(":")
        if len(bits) != 2:
            return None
        try:
            local, glob = int(bits[0]), int(bits[1])
        except ValueError:
            return None
        if local in mapping or glob in mapping.values():
            return None
        mapping[local] = glob
    return mapping or None


def _walk_include(elem: _Element, ctx: _Context, n_qubits) -> list[TimeStep]:
    _check_attrs(elem, ctx)
    href = _attr(elem, "href", ctx)
    raw_map = _attr(elem, "map", ctx)
    if href is None or raw_map is None:
        return []
    mapping = _parse_map(raw_map)
    if mapping is None:
        ctx.error(elem, f'attribute "map" must be "local:global,..." pairs, got "{raw_map}"')
        return []

    if href.startswith(("http://", "https://")):
        if not ctx.allow_remote:
            ctx.error(elem, f"remote include disabled: {href}")
            return []
        try:
            with urllib.request.urlopen(href, timeout=10) as resp:
                data = resp.read()
        except OSError as exc:
            ctx.error(elem, f"include target unreachable: {href} ({exc})")
            return []
        frag_dir = ctx.base_dir
        frag_key = href
    else:
        if ctx.base_dir is None or ctx.include_root is None:
            ctx.error(elem, "cannot resolve include without a base path")
            return []
        path = (ctx.base_dir / href).resolve()
        root = ctx.include_root.resolve()
        if not (path == root or str(path).startswith(str(root) + os.sep)):
            ctx.error(elem, f"include escapes the sandbox root: {href}")
            return []
        if not path.is_file():
            ctx.error(elem, f"include target unreachable: {href}")
            return []
        frag_key = str(path)
        frag_dir = path.parent
        data = path.read_bytes()

    if frag_key in ctx.include_stack:
        chain = " -> ".join(
            Path(p).name for p in ctx.include_stack + [frag_key]
        )
        ctx.error(elem, f"include cycle: {chain}")
        return []
    if len(ctx.include_stack) >= MAX_INCLUDE_DEPTH:
        ctx.error(elem, "include nesting too deep")
        return []

    frag_root, syntax = _read_xml(data)
    if syntax or frag_root is None:
        for d in syntax:
            ctx.error(elem, f"in {href}: {d.message} (line {d.line})")
        return []
    if frag_root.tag != "qml":
        ctx.error(elem, f"in {href}: root element must be <qml>")
        return []
    frags = [c for c in frag_root.children if c.tag == "fragment"]
    if len(frags) != 1:
        ctx.error(elem, f"in {href}: expected exactly one <fragment>")
        return []
    frag = frags[0]
    _check_attrs(frag, ctx)
    frag_n = _int_attr(frag, "nqubits", ctx, minimum=1)
    if frag_n is None:
        return []
    if set(mapping.keys()) != set(range(1, frag_n + 1)):
        ctx.error(
            elem,
            f"qubit map arity mismatch: fragment has {frag_n} qubit(s), "
            f"map covers {sorted(mapping.keys())}",
        )
        return []
    bad_target = [g for g in mapping.values()
                  if n_qubits is not None and not 1 <= g <= n_qubits]
    if bad_target:
        ctx.error(elem, f"map target qubit {bad_target[0]} out of range 1..{n_qubits}")
        return []

    sub_ctx = _Context(
        diagnostics=ctx.diagnostics,
        base_dir=frag_dir,
        include_root=ctx.include_root,
        allow_remote=ctx.allow_remote,
        include_stack=ctx.include_stack + [frag_key],
    )
    steps: list[TimeStep] = []
    before = len(ctx.diagnostics)
    for child in frag.children:
        if child.tag == "step":
            steps.append(_walk_step(child, sub_ctx, frag_n))
        elif child.tag == "include":
            steps.extend(_walk_include(child, sub_ctx, frag_n))
        else:
            sub_ctx.error(child, f"unexpected <{child.tag}> inside <fragment>")
    if len(ctx.diagnostics) > before:
        return []
    return [
        TimeStep([_remap_qubits(g, mapping, n_qubits or frag_n) for g in s.gates])
        for s in steps
    ]


def _check_step_supports(steps: list[TimeStep], ctx: _Context,
                         origin: _Element) -> None:
    for idx, step in enumerate(steps, start=1):
        used: dict[int, int] = {}
        for g_idx, gate in enumerate(step.gates):
            for q in gate.support():
                if q in used:
                    ctx.error(
                        origin,
                        f"overlapping supports in step {idx}: qubit {q} "
                        f"used by gates {used[q] + 1} and {g_idx + 1}",
                    )
                else:
                    used[q] = g_idx


def _walk_job(elem: _Element, ctx: _Context) -> JobTree | None:
    _check_attrs(elem, ctx)
    kind = _attr(elem, "type", ctx)
    if kind is not None and kind not in JOB_KINDS:
        ctx.error(elem, f'unknown job type "{kind}"')
        kind = None
    n_qubits = _int_attr(elem, "nqubits", ctx, minimum=1)
    if n_qubits is not None and n_qubits > 31:
        ctx.error(elem, f"nqubits must be <= 31, got {n_qubits}")
        n_qubits = None
    seed = _int_attr(elem, "seed", ctx, required=False, default=0, minimum=0)
    threshold = _float_attr(elem, "threshold", ctx, required=False, default=1e-4)
    if threshold is not None and not 0.0 <= threshold < 1.0:
        ctx.error(elem, f"threshold must be in [0, 1), got {threshold}")
        threshold = 1e-4
    initial = _int_attr(elem, "initial", ctx, required=False, default=0, minimum=0)
    if (initial is not None and n_qubits is not None
            and initial >= (1 << n_qubits)):
        ctx.error(elem, f"initial state {initial} out of range for {n_qubits} qubits")
        initial = 0
    spectrum_k = _int_attr(elem, "k", ctx, required=False, default=4, minimum=1)
    spectrum_tol = _float_attr(elem, "tol", ctx, required=False, default=1e-8)
    max_iter = _int_attr(elem, "maxiter", ctx, required=False, default=300, minimum=1)

    hamiltonians: dict[str, PauliCouplingModel] = {}
    target_model: PauliCouplingModel | None = None
    # hamiltonian blocks first so steps can reference them regardless of order
    for child in elem.children:
        if child.tag == "hamiltonian":
            name, model = _walk_hamiltonian(
                child, ctx, n_qubits, require_name=(kind == "circuit")
            )
            if name is not None:
                if name in hamiltonians:
                    ctx.error(child, f'duplicate hamiltonian name "{name}"')
                elif model is not None:
                    hamiltonians[name] = model
            if target_model is None and model is not None:
                target_model = model

    steps: list[TimeStep] = []
    for child in elem.children:
        if child.tag == "step":
            steps.append(_walk_step(child, ctx, n_qubits))
        elif child.tag == "include":
            steps.extend(_walk_include(child, ctx, n_qubits))
        elif child.tag == "hamiltonian":
            pass
        else:
            ctx.error(child, f"unexpected <{child.tag}> inside <job>")

    if kind in ("spectrum-full", "spectrum-margins"):
        if steps:
            ctx.error(elem, f"{kind} jobs take no circuit steps")
        if target_model is None:
            ctx.error(elem, f"{kind} jobs require a <hamiltonian> block")
    if kind == "circuit" and spectrum_k != 4 and "k" in elem.attrs:
        ctx.error(elem, 'attribute "k" applies to spectrum-margins jobs only')

    # resolve EXP references now that all named blocks are known
    for s_idx, step in enumerate(steps, start=1):
        for gate in step.gates:
            if gate.kind == "EXP" and gate.model is None:
                model = hamiltonians.get(gate.ham_ref or "")
                if model is None:
                    ctx.error(
                        elem,
                        f'step {s_idx}: unknown hamiltonian "{gate.ham_ref}"',
                    )
                else:
                    gate.model = model

    _check_step_supports(steps, ctx, elem)

    if ctx.diagnostics or kind is None or n_qubits is None:
        return None
    return JobTree(
        kind=kind,
        n_qubits=n_qubits,
        seed=seed,
        threshold=threshold,
        initial_state=initial,
        steps=steps,
        hamiltonians=hamiltonians,
        hamiltonian=target_model,
        spectrum_k=spectrum_k,
        spectrum_tol=spectrum_tol,
        spectrum_max_iter=max_iter,
    )


def _document_root(data, ctx) -> _Element | None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    root, syntax = _read_xml(data)
    ctx.diagnostics.extend(syntax)
    if root is None:
        return None
    if root.tag != "qml":
        ctx.error(root, f"root element must be <qml>, got <{root.tag}>")
        return None
    _check_attrs(root, ctx)
    version = _attr(root, "version", ctx)
    if version is not None and version != "1.0":
        ctx.error(root, f'unsupported version "{version}"')
    return root


def _make_context(base_path, include_root, allow_remote) -> _Context:
    base_dir = Path(base_path).resolve().parent if base_path else None
    root = Path(include_root).resolve() if include_root else base_dir
    return _Context(base_dir=base_dir, include_root=root,
                    allow_remote=allow_remote)


def parse(
    text: bytes | str,
    base_path: str | os.PathLike | None = None,
    *,
    include_root: str | os.PathLike | None = None,
    allow_remote: bool = False,
) -> JobTree:
    """Parse and fully validate a QML job document.

    Raises ValidationError carrying every located diagnostic.
    """
    ctx = _make_context(base_path, include_root, allow_remote)
    job = _parse_into(text, ctx)
    if ctx.diagnostics:
        raise ValidationError(ctx.diagnostics)
    assert job is not None
    return job


def validate(
    text: bytes | str,
    base_path: str | os.PathLike | None = None,
    *,
    include_root: str | os.PathLike | None = None,
    allow_remote: bool = False,
) -> list[Diagnostic]:
    """All diagnostics for a document; empty when it is valid."""
    ctx = _make_context(base_path, include_root, allow_remote)
    _parse_into(text, ctx)
    return ctx.diagnostics


def _parse_into(text, ctx: _Context) -> JobTree | None:
    root = _document_root(text, ctx)
    if root is None:
        return None
    jobs = [c for c in root.children if c.tag == "job"]
    if len(jobs) != 1:
        ctx.error(root, f"expected exactly one <job>, found {len(jobs)}")
        return None
    for child in root.children:
        if child.tag not in ("job",):
            ctx.error(child, f"unexpected <{child.tag}> at document level")
    return _walk_job(jobs[0], ctx)


# ---------------------------------------------------------------------------
# result documents


def parse_result(
    text: bytes | str,
) -> tuple[JobTree, Trace | Spectrum]:
    """Parse a result document back into (job, trace-or-spectrum)."""
    ctx = _Context()
    root = _document_root(text, ctx)
    if root is None:
        raise ValidationError(ctx.diagnostics)
    results = [c for c in root.children if c.tag == "result"]
    if len(results) != 1:
        ctx.error(root, f"expected exactly one <result>, found {len(results)}")
        raise ValidationError(ctx.diagnostics)
    res = results[0]
    _check_attrs(res, ctx)
    engine = res.attrs.get("engine", "")
    rng_name = res.attrs.get("rng", "")
    jobs = [c for c in res.children if c.tag == "job"]
    if len(jobs) != 1:
        ctx.error(res, "result must embed the original <job>")
        raise ValidationError(ctx.diagnostics)
    job = _walk_job(jobs[0], ctx)
    if job is None or ctx.diagnostics:
        raise ValidationError(ctx.diagnostics)

    spectra = [c for c in res.children if c.tag == "spectrum"]
    if spectra:
        evs, convs = [], []
        for ev in spectra[0].children:
            if ev.tag != "ev":
                ctx.error(ev, f"unexpected <{ev.tag}> inside <spectrum>")
                continue
            _check_attrs(ev, ctx)
            v = _float_attr(ev, "v", ctx)
            conv = ev.attrs.get("converged", "true") == "true"
            if v is not None:
                evs.append(v)
                convs.append(conv)
        if ctx.diagnostics:
            raise ValidationError(ctx.diagnostics)
        spectrum = Spectrum(eigenvalues=evs, residuals=[0.0] * len(evs),
                            converged=convs)
        return job, spectrum

    trace = Trace(engine=engine, seed=job.seed, threshold=job.threshold,
                  rng_name=rng_name)
    for child in res.children:
        if child.tag in ("job",):
            continue
        if child.tag == "warning":
            trace.warnings.append(child.attrs.get("text", ""))
            continue
        if child.tag != "record":
            ctx.error(child, f"unexpected <{child.tag}> inside <result>")
            continue
        _check_attrs(child, ctx)
        step_idx = _int_attr(child, "step", ctx, minimum=1) or 0
        bloch_rows: dict[int, tuple[float, float, float]] = {}
        listing: list[ListingEntry] = []
        ent = 0.0
        measurements: list[MeasurementRecord] = []
        for item in child.children:
            if item.tag == "bloch":
                _check_attrs(item, ctx)
                i = _int_attr(item, "i", ctx, minimum=1)
                x = _float_attr(item, "x", ctx)
                y = _float_attr(item, "y", ctx)
                z = _float_attr(item, "z", ctx)
                if None not in (i, x, y, z):
                    bloch_rows[i] = (x, y, z)
            elif item.tag == "base":
                _check_attrs(item, ctx)
                i = _int_attr(item, "index", ctx, minimum=0)
                p = _float_attr(item, "p", ctx)
                ph = _float_attr(item, "phase", ctx)
                if None not in (i, p, ph):
                    listing.append(ListingEntry(i, p, ph))
            elif item.tag == "entropy":
                _check_attrs(item, ctx)
                ent = _float_attr(item, "v", ctx) or 0.0
            elif item.tag == "outcome":
                _check_attrs(item, ctx)
                targets = _int_list_attr(item, "targets", ctx) or ()
                bits = item.attrs.get("bits", "")
                p = _float_attr(item, "p", ctx) or 0.0
                measurements.append(
                    MeasurementRecord(step=step_idx, targets=targets,
                                      outcome=bits, probability=p)
                )
            else:
                ctx.error(item, f"unexpected <{item.tag}> inside <record>")
        n = job.n_qubits
        bloch = np.zeros((n, 3))
        for i, row in bloch_rows.items():
            if 1 <= i <= n:
                bloch[i - 1] = row
        trace.records.append(
            StepRecord(step_index=step_idx, bloch=bloch, listing=listing,
                       entropy=ent, measurements=measurements)
        )
    if ctx.diagnostics:
        raise ValidationError(ctx.diagnostics)
    return job, trace
