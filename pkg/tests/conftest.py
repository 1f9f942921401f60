"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's reshape/transpose
kernel: gate application walks basis indices with python bit arithmetic,
and dense operators are assembled from per-qubit Kronecker chains, so a
bug in the kernel cannot hide in its own verification.
"""

from __future__ import annotations

import numpy as np
import pytest

from qmlsim.hamiltonian import PauliCouplingModel

SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = (SX, SY, SZ)


def oracle_apply(amps: np.ndarray, u: np.ndarray, targets, n: int) -> np.ndarray:
    """Apply a 2**k unitary on target qubits by explicit index loops.

    Qubit i is bit (n - i) of the basis index (qubit 1 = MSB).
    """
    k = len(targets)
    positions = [n - t for t in targets]  # bit positions, first target = MSB of row
    out = np.zeros_like(amps)
    for b in range(len(amps)):
        row = 0
        for pos in positions:
            row = (row << 1) | ((b >> pos) & 1)
        # out[b] = sum_col U[row(b), col] * amps[b with target bits set to col]
        acc = 0.0 + 0.0j
        for col in range(1 << k):
            src = b
            for bit_idx, pos in enumerate(positions):
                bit = (col >> (k - 1 - bit_idx)) & 1
                src = (src & ~(1 << pos)) | (bit << pos)
            acc += u[row, col] * amps[src]
        out[b] = acc
    return out


def kron_embed(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """1 x ... x op x ... x 1 with op at position `qubit` (1-based)."""
    out = np.eye(1, dtype=np.complex128)
    for q in range(1, n + 1):
        out = np.kron(out, op if q == qubit else np.eye(2, dtype=np.complex128))
    return out


def oracle_model_dense(model: PauliCouplingModel) -> np.ndarray:
    """Eq-by-eq dense Hamiltonian from single-qubit Kronecker chains."""
    n = model.n_qubits
    h = np.zeros((1 << n, 1 << n), dtype=np.complex128)
    for (i, j), (jij, e2) in model.couplings.items():
        for a in range(3):
            for b in range(3):
                if e2[a, b]:
                    h += jij * e2[a, b] * (kron_embed(PAULI[a], i, n)
                                           @ kron_embed(PAULI[b], j, n))
    for i, e1 in model.fields.items():
        for a in range(3):
            if e1[a]:
                h += e1[a] * kron_embed(PAULI[a], i, n)
    return h


def random_state(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return amps / np.linalg.norm(amps)


def random_unitary(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_model(n: int, seed: int, *, chain_only: bool = False) -> PauliCouplingModel:
    """Seeded coupling model: every pair (or chain neighbors) plus fields."""
    rng = np.random.default_rng(seed)
    model = PauliCouplingModel(n)
    pairs = (
        [(i, i + 1) for i in range(1, n)]
        if chain_only
        else [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    )
    for (i, j) in pairs:
        model.add_coupling(i, j, rng.uniform(-1, 1), rng.uniform(-1, 1, (3, 3)))
    for i in range(1, n + 1):
        model.add_field(i, rng.uniform(-1, 1, 3))
    return model


@pytest.fixture
def bell_doc() -> bytes:
    return (
        b'<qml version="1.0">\n'
        b'  <job type="circuit" nqubits="2" seed="7">\n'
        b'    <step><gate kind="H" targets="1"/></step>\n'
        b'    <step><gate kind="CNOT" controls="1" targets="2"/></step>\n'
        b"  </job>\n"
        b"</qml>\n"
    )
