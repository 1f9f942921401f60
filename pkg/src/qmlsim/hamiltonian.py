"""Pauli coupling Hamiltonians and their time evolution.

The model is H = sum_{i<j} J_ij (sigma^(i))^T E2_ij sigma^(j)
              + sum_i   E1_i . sigma^(i)
with sigma^(i) the usual tensor embedding (i-1 identities on the left).
Evolution exp(-i t H) is computed either exactly (eigendecomposition,
small systems) or by product formulas of order 1, 2 or 4; the order-4
scheme carries the double-commutator correction exp(+i tau^3 C) with
C = [H0 + 2 H1, [H0, H1]] / 24 applied around the midpoint of each slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ResourceLimitError
from .gates import PAULIS
from .statevec import StateVector, apply_matrix

DENSE_CAP = 12  # qubits; 4096^2 complex = 256 MiB
HERMITIAN_TOL = 1e-10
ORDER4_SUPPORT_CAP = 4


class PauliCouplingModel:
    """Couplings J_ij with 3x3 matrices E2_ij plus per-qubit fields E1_i.

    E2 entries may be supplied in either orientation; (j,i) with i<j is
    normalized to (i,j) via the transpose rule E2_ij = (E2_ji)^T.
    """

    def __init__(
        self,
        n_qubits: int,
        couplings: dict[tuple[int, int], tuple[float, np.ndarray]] | None = None,
        fields: dict[int, np.ndarray] | None = None,
    ):
        if n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {n_qubits}")
        self.n_qubits = n_qubits
        self.couplings: dict[tuple[int, int], tuple[float, np.ndarray]] = {}
        self.fields: dict[int, np.ndarray] = {}
        for (i, j), (jij, e2) in (couplings or {}).items():
            self.add_coupling(i, j, jij, e2)
        for i, e1 in (fields or {}).items():
            self.add_field(i, e1)

    def add_coupling(self, i: int, j: int, jij: float, e2) -> None:
        if i == j:
            raise ValueError(f"coupling requires distinct qubits, got ({i},{j})")
        self._check_qubit(i)
        self._check_qubit(j)
        e2 = np.asarray(e2, dtype=np.float64)
        if e2.shape != (3, 3):
            raise ValueError(f"E2 must be 3x3, got shape {e2.shape}")
        if not np.all(np.isfinite(e2)) or not np.isfinite(jij):
            raise ValueError("coupling entries must be finite")
        if i > j:
            i, j, e2 = j, i, e2.T
        key = (i, j)
        if key in self.couplings:
            old_j, old_e2 = self.couplings[key]
            if old_j != jij or not np.allclose(old_e2, e2, atol=1e-12, rtol=0):
                raise ValueError(
                    f"conflicting coupling for pair ({i},{j}): "
                    "both orientations given and E2_ij != (E2_ji)^T"
                )
            return
        self.couplings[key] = (float(jij), e2)

    def add_field(self, i: int, e1) -> None:
        self._check_qubit(i)
        e1 = np.asarray(e1, dtype=np.float64)
        if e1.shape != (3,):
            raise ValueError(f"E1 must be a 3-vector, got shape {e1.shape}")
        if not np.all(np.isfinite(e1)):
            raise ValueError("field entries must be finite")
        if i in self.fields:
            raise ValueError(f"duplicate field for qubit {i}")
        self.fields[i] = e1

    def _check_qubit(self, i: int) -> None:
        if not 1 <= i <= self.n_qubits:
            raise ValueError(f"qubit {i} out of range 1..{self.n_qubits}")

    def touched_qubits(self) -> set[int]:
        out: set[int] = set()
        for (i, j), (jij, e2) in self.couplings.items():
            if jij != 0.0 and np.any(e2 != 0.0):
                out.update((i, j))
        for i, e1 in self.fields.items():
            if np.any(e1 != 0.0):
                out.add(i)
        return out


@dataclass(frozen=True)
class Term:
    """One 1- or 2-qubit Hermitian summand of the model."""

    targets: tuple[int, ...]
    matrix: np.ndarray
    label: str

    def support(self) -> frozenset[int]:
        return frozenset(self.targets)


def build_terms(model: PauliCouplingModel) -> list[Term]:
    """Model split into local Hermitian terms, single-qubit terms first,
    then pair terms by (i, j); the deterministic order the product
    formulas recurse over."""
    terms: list[Term] = []
    for i in sorted(model.fields):
        e1 = model.fields[i]
        if not np.any(e1 != 0.0):
            continue
        m = sum(e1[a] * PAULIS[a] for a in range(3))
        terms.append(Term((i,), m.astype(np.complex128), f"field {i}"))
    for (i, j) in sorted(model.couplings):
        jij, e2 = model.couplings[(i, j)]
        if jij == 0.0 or not np.any(e2 != 0.0):
            continue
        m = np.zeros((4, 4), dtype=np.complex128)
        for a in range(3):
            for b in range(3):
                if e2[a, b] != 0.0:
                    m += e2[a, b] * np.kron(PAULIS[a], PAULIS[b])
        terms.append(Term((i, j), jij * m, f"coupling {i},{j}"))
    return terms


def embed_operator(op: np.ndarray, targets: tuple[int, ...], n_qubits: int) -> np.ndarray:
    """Dense 2**n embedding of a k-qubit operator at the given qubits,
    by axis permutation of op (x) identity."""
    k = len(targets)
    op = np.asarray(op, dtype=np.complex128)
    full = np.kron(op, np.eye(1 << (n_qubits - k), dtype=np.complex128))
    axes = [t - 1 for t in targets]
    rest = [q for q in range(n_qubits) if q not in axes]
    perm = np.argsort(axes + rest)
    tens = full.reshape((2,) * (2 * n_qubits))
    tens = tens.transpose(list(perm) + [n_qubits + p for p in perm])
    return np.ascontiguousarray(tens).reshape(1 << n_qubits, 1 << n_qubits)


def build_dense(model: PauliCouplingModel, *, cap: int = DENSE_CAP) -> np.ndarray:
    """Full 2**n Hermitian matrix of the model (n <= cap)."""
    n = model.n_qubits
    if n > cap:
        raise ResourceLimitError(
            f"dense Hamiltonian for {n} qubits exceeds the {cap}-qubit cap "
            f"(requires {16 * (1 << (2 * n))} bytes)",
            required_bytes=16 * (1 << (2 * n)),
        )
    h = np.zeros((1 << n, 1 << n), dtype=np.complex128)
    for term in build_terms(model):
        h += embed_operator(term.matrix, term.targets, n)
    return h


def check_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if np.max(np.abs(h - h.conj().T)) > tol:
        raise NumericError("matrix is not Hermitian within tolerance")


def exact_evolve(h: np.ndarray, t: float, state: StateVector) -> StateVector:
    """exp(-i t H)|psi> via eigendecomposition H = V diag(w) V†."""
    h = np.asarray(h, dtype=np.complex128)
    if h.shape != (state.dim, state.dim):
        raise ValueError(
            f"Hamiltonian shape {h.shape} does not match a {state.n_qubits}-qubit state"
        )
    check_hermitian(h)
    w, v = np.linalg.eigh(h)
    coeffs = v.conj().T @ state.amplitudes
    out = v @ (np.exp(-1j * t * w) * coeffs)
    return StateVector(state.n_qubits, out)


def _exp_small(matrix: np.ndarray, scale: float) -> np.ndarray:
    """exp(-i * scale * matrix) of a small Hermitian matrix."""
    w, v = np.linalg.eigh(matrix)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


@dataclass
class TrotterPlan:
    order: str  # "1" | "2" | "4"
    t: float
    n: int
    terms: list[Term]

    def __post_init__(self):
        if self.order not in ("1", "2", "4"):
            raise ValueError(f"order must be 1, 2 or 4, got {self.order!r}")
        if self.n < 1:
            raise ValueError(f"slice count must be >= 1, got {self.n}")
        for term in self.terms:
            if len(term.targets) > 2:
                raise ValueError(
                    f"term {term.label!r} acts on {len(term.targets)} qubits; max 2"
                )


@dataclass
class _SliceOp:
    matrix: np.ndarray
    targets: tuple[int, ...]


def _union_support(head: Term, rest: list[Term]) -> tuple[int, ...]:
    qubits = set(head.targets)
    for term in rest:
        qubits.update(term.targets)
    return tuple(sorted(qubits))


def _embed_on(term: Term, support: tuple[int, ...]) -> np.ndarray:
    local = tuple(support.index(q) + 1 for q in term.targets)
    return embed_operator(term.matrix, local, len(support))


def _correction_op(head: Term, rest: list[Term], tau: float) -> _SliceOp:
    """exp(+i tau^3 C) with C = [H0 + 2 H1, [H0, H1]] / 24 built densely
    on the union support (Hermitian: commutator of Hermitian with
    anti-Hermitian)."""
    support = _union_support(head, rest)
    a = _embed_on(head, support)
    b = sum(_embed_on(term, support) for term in rest)
    m = a @ b - b @ a
    g = a + 2 * b
    c = (g @ m - m @ g) / 24.0
    return _SliceOp(_exp_small(c, -tau**3), support)


def _ops_order1(terms: list[Term], tau: float) -> list[_SliceOp]:
    if len(terms) == 1:
        return [_SliceOp(_exp_small(terms[0].matrix, tau), terms[0].targets)]
    return _ops_order1(terms[1:], tau) + [
        _SliceOp(_exp_small(terms[0].matrix, tau), terms[0].targets)
    ]


def _ops_order2(terms: list[Term], tau: float) -> list[_SliceOp]:
    if len(terms) == 1:
        return [_SliceOp(_exp_small(terms[0].matrix, tau), terms[0].targets)]
    half = _SliceOp(_exp_small(terms[0].matrix, tau / 2), terms[0].targets)
    return [half] + _ops_order2(terms[1:], tau) + [half]


def _ops_order4(
    terms: list[Term], tau: float, warnings: list[str]
) -> list[_SliceOp]:
    if len(terms) == 1:
        return [_SliceOp(_exp_small(terms[0].matrix, tau), terms[0].targets)]
    head, rest = terms[0], terms[1:]
    support = _union_support(head, rest)
    if len(rest) <= 2 and len(support) <= ORDER4_SUPPORT_CAP:
        half = _SliceOp(_exp_small(head.matrix, tau / 2), head.targets)
        inner = _ops_order4(rest, tau / 2, warnings)
        corr = _correction_op(head, rest, tau)
        return [half] + inner + [corr] + inner + [half]
    msg = (
        f"order-4 correction skipped above term {head.label!r} "
        f"(support {len(support)} qubits, {len(rest)} remaining terms); "
        "accuracy degrades to order 2 at this level"
    )
    if msg not in warnings:
        warnings.append(msg)
    half = _SliceOp(_exp_small(head.matrix, tau / 2), head.targets)
    return [half] + _ops_order4(rest, tau, warnings) + [half]


def build_slice_ops(plan: TrotterPlan) -> tuple[list[_SliceOp], list[str]]:
    """Small-unitary sequence for one slice of the product formula."""
    tau = plan.t / plan.n
    warnings: list[str] = []
    if not plan.terms:
        return [], warnings
    if plan.order == "1":
        ops = _ops_order1(plan.terms, tau)
    elif plan.order == "2":
        ops = _ops_order2(plan.terms, tau)
    else:
        ops = _ops_order4(plan.terms, tau, warnings)
    return ops, warnings


def trotter_evolve(
    plan: TrotterPlan, state: StateVector, *, workers: int = 1
) -> tuple[StateVector, list[str]]:
    """Apply the product-formula propagator; returns (state, warnings)."""
    ops, warnings = build_slice_ops(plan)
    out = state
    for _ in range(plan.n):
        for op in ops:
            out = apply_matrix(out, op.matrix, op.targets, workers=workers)
    return (out if ops else state.copy()), warnings


def exp_gate_execute(
    state: StateVector,
    model: PauliCouplingModel,
    t: float,
    n: int = 1,
    order: str = "2",
    *,
    dense_cap: int = DENSE_CAP,
    workers: int = 1,
) -> tuple[StateVector, list[str]]:
    """EXP gate: exact eigendecomposition route for small systems when
    requested, product formula otherwise."""
    if order == "exact":
        h = build_dense(model, cap=dense_cap)
        return exact_evolve(h, t, state), []
    plan = TrotterPlan(order=order, t=t, n=n, terms=build_terms(model))
    return trotter_evolve(plan, state, workers=workers)
