"""Dense state-vector storage and the k-qubit operator application kernel.

Index convention: basis index ``b`` is read as the bitstring b1 b2 ... bN
with qubit 1 the most significant bit.  Equivalently, reshaping the
amplitude array to shape (2,)*N puts qubit i on axis i-1, which is what
the kernel exploits.  All engines build on :func:`apply_kqubit_op` (or the
check-free :func:`apply_matrix` for internal structured gates).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import NumericError, ResourceLimitError

BYTES_PER_AMPLITUDE = 16  # complex128
DEFAULT_MEMORY_CAP = 4 * 1024**3  # 4 GiB, 28 qubits
MAX_QUBITS = 31

# Fixed block width for the kernel's column partitioning.  Blocks are a
# property of the problem, not of the worker count, so results are
# bitwise identical for any number of workers.
_KERNEL_BLOCK = 1 << 15

UNITARY_TOL = 1e-10


def memory_cap() -> int:
    """Configured amplitude-memory cap in bytes (env QMLSIM_MEMORY_CAP)."""
    raw = os.environ.get("QMLSIM_MEMORY_CAP")
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return DEFAULT_MEMORY_CAP


def required_bytes(n_qubits: int) -> int:
    return BYTES_PER_AMPLITUDE * (1 << n_qubits)


class StateVector:
    """An n-qubit pure state as a flat array of 2**n complex amplitudes."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be 1..{MAX_QUBITS}, got {n_qubits}")
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << n_qubits,):
            raise ValueError(
                f"expected {1 << n_qubits} amplitudes, got shape {amplitudes.shape}"
            )
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


def new_basis_state(
    n_qubits: int, index: int = 0, *, cap: int | None = None
) -> StateVector:
    """Computational basis state |index> on n_qubits qubits.

    Refuses to allocate past the memory cap and reports the byte demand,
    so callers see e.g. "requires 34359738368 bytes" for 31 qubits.
    """
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be 1..{MAX_QUBITS}, got {n_qubits}")
    need = required_bytes(n_qubits)
    limit = memory_cap() if cap is None else cap
    if need > limit:
        raise ResourceLimitError(
            f"{n_qubits}-qubit state requires {need} bytes "
            f"(cap is {limit} bytes)",
            required_bytes=need,
        )
    if not 0 <= index < (1 << n_qubits):
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def check_targets(n_qubits: int, targets) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits: {targets}")
    for t in targets:
        if not 1 <= t <= n_qubits:
            raise ValueError(f"target qubit {t} out of range 1..{n_qubits}")
    return targets


def is_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    eye = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix.conj().T @ matrix - eye)) <= tol)


def apply_matrix(
    state: StateVector,
    matrix: np.ndarray,
    targets,
    *,
    workers: int = 1,
) -> StateVector:
    """Apply a 2**k x 2**k matrix on the target qubits (no unitarity check).

    Used directly by structured/scalable gates and by Hermitian-operator
    application (matrix-free Hamiltonian products); gate code goes through
    :func:`apply_kqubit_op` which validates unitarity first.
    """
    targets = check_targets(state.n_qubits, targets)
    k = len(targets)
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (1 << k, 1 << k):
        raise ValueError(
            f"matrix shape {matrix.shape} does not match {k} target qubit(s)"
        )
    n = state.n_qubits
    axes = [t - 1 for t in targets]
    rest = [a for a in range(n) if a not in axes]
    perm = axes + rest
    tens = state.amplitudes.reshape((2,) * n).transpose(perm)
    cols = np.ascontiguousarray(tens.reshape(1 << k, -1))
    out = np.empty_like(cols)
    width = cols.shape[1]
    starts = range(0, width, _KERNEL_BLOCK)

    def block(c0: int) -> None:
        c1 = min(c0 + _KERNEL_BLOCK, width)
        np.matmul(matrix, cols[:, c0:c1], out=out[:, c0:c1])

    if workers > 1 and width > _KERNEL_BLOCK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(block, starts))
    else:
        for c0 in starts:
            block(c0)

    inv = np.argsort(perm)
    result = np.ascontiguousarray(
        out.reshape((2,) * n).transpose(inv)
    ).reshape(-1)
    return StateVector(n, result)


def apply_kqubit_op(
    state: StateVector,
    matrix: np.ndarray,
    targets,
    *,
    workers: int = 1,
) -> StateVector:
    """Apply a unitary on up to 3 target qubits.

    The matrix must satisfy U†U = I entrywise within 1e-10; non-unitary
    input is rejected rather than renormalized.
    """
    targets = check_targets(state.n_qubits, targets)
    if not 1 <= len(targets) <= 3:
        raise ValueError(f"apply_kqubit_op supports 1..3 targets, got {len(targets)}")
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (1 << len(targets), 1 << len(targets)):
        raise ValueError(
            f"matrix shape {matrix.shape} does not match {len(targets)} target qubit(s)"
        )
    if not is_unitary(matrix):
        raise NumericError(
            f"matrix on targets {targets} is not unitary within {UNITARY_TOL:g}"
        )
    return apply_matrix(state, matrix, targets, workers=workers)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b> = sum_i conj(a_i) b_i."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(
            f"dimension mismatch: {a.n_qubits} vs {b.n_qubits} qubits"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))
