"""Gate library: fixed small unitaries and scalable structured gates.

Fixed gates are plain matrices applied through the state-vector kernel.
Scalable gates (QFT, oracle, Grover, modular exponentiation) act on a
qubit register directly through index arithmetic so no 2**m matrix is
ever formed on the state-engine path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .statevec import StateVector, apply_matrix, check_targets, is_unitary

SQRT2 = math.sqrt(2.0)

# Pauli matrices, standard convention: sigma_y = [[0,-i],[i,0]].
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

FIXED_KINDS = frozenset(
    {"H", "X", "Y", "Z", "S", "T", "PHASE", "RX", "RY", "RZ",
     "CNOT", "CZ", "SWAP", "TOFFOLI", "FREDKIN", "CUSTOM1", "CUSTOM2"}
)
SCALABLE_KINDS = frozenset({"QFT", "INVQFT", "ORACLE", "GROVERSTEP", "GROVER", "MODULO"})
GATE_KINDS = FIXED_KINDS | SCALABLE_KINDS | {"EXP", "MEASURE"}

# kind -> (n_controls, n_targets); None means variable-length register.
FIXED_ARITY = {
    "H": (0, 1), "X": (0, 1), "Y": (0, 1), "Z": (0, 1), "S": (0, 1), "T": (0, 1),
    "PHASE": (0, 1), "RX": (0, 1), "RY": (0, 1), "RZ": (0, 1),
    "CNOT": (1, 1), "CZ": (1, 1), "SWAP": (0, 2),
    "TOFFOLI": (2, 1), "FREDKIN": (1, 2),
    "CUSTOM1": (0, 1), "CUSTOM2": (0, 2),
}
THETA_KINDS = frozenset({"PHASE", "RX", "RY", "RZ"})


@dataclass
class GateSpec:
    """One circuit element; which fields apply depends on ``kind``."""

    kind: str
    targets: tuple[int, ...] = ()
    controls: tuple[int, ...] = ()
    theta: float | None = None
    marked: tuple[int, ...] = ()
    iterations: int | None = None
    a: int | None = None
    modn: int | None = None
    xreg: tuple[int, ...] = ()
    yreg: tuple[int, ...] = ()
    matrix: np.ndarray | None = None
    # EXP fields; ``model`` is resolved from ``ham_ref`` or an inline block.
    ham_ref: str | None = None
    model: "object | None" = None
    t: float | None = None
    n_slices: int = 1
    order: str = "2"

    def support(self) -> frozenset[int]:
        """All qubits the gate touches (disjointness unit within a step)."""
        if self.kind == "MODULO":
            return frozenset(self.xreg) | frozenset(self.yreg)
        if self.kind == "EXP" and self.model is not None:
            return frozenset(self.model.touched_qubits())
        return frozenset(self.targets) | frozenset(self.controls)


@dataclass
class TimeStep:
    gates: list[GateSpec] = field(default_factory=list)


@dataclass
class Circuit:
    n_qubits: int
    steps: list[TimeStep] = field(default_factory=list)


def _phase(theta: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=np.complex128)


def _rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]],
        dtype=np.complex128,
    )


_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)


def _controlled(u: np.ndarray, n_controls: int) -> np.ndarray:
    dim = u.shape[0] << n_controls
    out = np.eye(dim, dtype=np.complex128)
    out[-u.shape[0]:, -u.shape[0]:] = u
    return out


def gate_matrix(spec: GateSpec) -> np.ndarray:
    """Matrix of a fixed-size gate on (controls + targets) qubit order.

    Control qubits come first (most significant), matching the CNOT
    matrix [[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]] on |control,target>.
    """
    kind = spec.kind
    if kind not in FIXED_KINDS:
        raise ValueError(f"gate kind {kind} has no fixed matrix (scalable)")
    if kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=np.complex128) / SQRT2
    if kind == "X":
        return SIGMA_X.copy()
    if kind == "Y":
        return SIGMA_Y.copy()
    if kind == "Z":
        return SIGMA_Z.copy()
    if kind == "S":
        return _phase(math.pi / 2)
    if kind == "T":
        return _phase(math.pi / 4)
    if kind in THETA_KINDS:
        if spec.theta is None:
            raise ValueError(f"{kind} gate requires theta")
        return {"PHASE": _phase, "RX": _rx, "RY": _ry, "RZ": _rz}[kind](spec.theta)
    if kind == "CNOT":
        return _CNOT.copy()
    if kind == "CZ":
        return _controlled(SIGMA_Z, 1)
    if kind == "SWAP":
        return _SWAP.copy()
    if kind == "TOFFOLI":
        return _controlled(SIGMA_X, 2)
    if kind == "FREDKIN":
        return _controlled(_SWAP, 1)
    if kind in ("CUSTOM1", "CUSTOM2"):
        if spec.matrix is None:
            raise ValueError(f"{kind} gate requires a matrix")
        m = np.asarray(spec.matrix, dtype=np.complex128)
        want = 2 if kind == "CUSTOM1" else 4
        if m.shape != (want, want):
            raise ValueError(f"{kind} matrix must be {want}x{want}, got {m.shape}")
        if not is_unitary(m):
            raise ValueError(f"{kind} matrix is not unitary within 1e-10")
        return m
    raise ValueError(f"unknown gate kind {kind}")


def _register_view(state: StateVector, register: tuple[int, ...]) -> np.ndarray:
    """Amplitudes copied into shape (2**m, rest) with the register as row
    index, register bits most-significant-first.  Always a fresh array:
    callers mutate it in place."""
    n = state.n_qubits
    axes = [q - 1 for q in register]
    rest = [a for a in range(n) if a not in axes]
    tens = state.amplitudes.reshape((2,) * n).transpose(axes + rest)
    cols = tens.reshape(1 << len(register), -1)
    if np.shares_memory(cols, state.amplitudes):
        cols = cols.copy()
    return np.ascontiguousarray(cols)


def _from_register_view(
    cols: np.ndarray, n: int, register: tuple[int, ...]
) -> StateVector:
    axes = [q - 1 for q in register]
    rest = [a for a in range(n) if a not in axes]
    inv = np.argsort(axes + rest)
    amps = np.ascontiguousarray(cols.reshape((2,) * n).transpose(inv)).reshape(-1)
    return StateVector(n, amps)


def apply_qft(state: StateVector, register, inverse: bool = False) -> StateVector:
    """Fourier transform F_jk = w^{jk} / sqrt(2**m), w = exp(2 pi i / 2**m),
    on the register (first register qubit = most significant bit of j)."""
    register = check_targets(state.n_qubits, register)
    m = len(register)
    cols = _register_view(state, register)
    scale = math.sqrt(1 << m)
    if inverse:
        cols = np.fft.fft(cols, axis=0) / scale
    else:
        cols = np.fft.ifft(cols, axis=0) * scale
    return _from_register_view(cols, state.n_qubits, register)


def _check_marked(marked, m: int) -> tuple[int, ...]:
    marked = tuple(sorted(int(x) for x in set(marked)))
    for x in marked:
        if not 0 <= x < (1 << m):
            raise ValueError(
                f"marked index {x} out of range for a {m}-qubit register"
            )
    return marked


def apply_oracle(state: StateVector, register, marked) -> StateVector:
    """Phase oracle: amplitudes of marked register basis states get -1."""
    register = check_targets(state.n_qubits, register)
    marked = _check_marked(marked, len(register))
    if not marked:
        return state.copy()
    cols = _register_view(state, register)
    cols[list(marked), :] *= -1
    return _from_register_view(cols, state.n_qubits, register)


def _diffuse(cols: np.ndarray) -> np.ndarray:
    # 2|u><u| - I with u the uniform register state
    mean2 = 2.0 * cols.mean(axis=0, keepdims=True)
    return mean2 - cols


def apply_grover_step(state: StateVector, register, marked) -> StateVector:
    """One Grover iteration: phase oracle followed by inversion about the
    register mean."""
    register = check_targets(state.n_qubits, register)
    marked = _check_marked(marked, len(register))
    cols = _register_view(state, register)
    if marked:
        cols[list(marked), :] *= -1
    cols = _diffuse(cols)
    return _from_register_view(cols, state.n_qubits, register)


def apply_grover(state: StateVector, register, marked, iterations: int) -> StateVector:
    """Repeat the Grover step; register preparation is the caller's job."""
    if iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {iterations}")
    out = state
    for _ in range(iterations):
        out = apply_grover_step(out, register, marked)
    return out if iterations else state.copy()


def powmod_table(a: int, n_exponents: int, modulus: int) -> np.ndarray:
    """a**x mod modulus for x = 0 .. 2**n_exponents - 1, vectorized
    square-and-multiply (safe for modulus < 2**31)."""
    exps = np.arange(1 << n_exponents, dtype=np.uint64)
    result = np.ones(1 << n_exponents, dtype=np.uint64)
    base = np.uint64(a % modulus)
    mod = np.uint64(modulus)
    for bit in range(n_exponents):
        hit = ((exps >> np.uint64(bit)) & np.uint64(1)).astype(bool)
        result[hit] = (result[hit] * base) % mod
        base = (base * base) % mod
    return result


def apply_modulo(
    state: StateVector, a: int, modn: int, x_register, y_register
) -> StateVector:
    """Basis permutation |x>|y> -> |x>|y XOR (a**x mod N)>.

    XOR with a value depending only on x is an involution on the
    y-register, so the map is unitary by construction.
    """
    x_register = check_targets(state.n_qubits, x_register)
    y_register = check_targets(state.n_qubits, y_register)
    if set(x_register) & set(y_register):
        raise ValueError("x and y registers overlap")
    if modn < 1:
        raise ValueError(f"modulus must be >= 1, got {modn}")
    ny = len(y_register)
    if (1 << ny) < modn:
        raise ValueError(
            f"y register of {ny} qubit(s) cannot hold residues mod {modn}"
        )
    if a < 0:
        raise ValueError(f"base must be >= 0, got {a}")
    nx = len(x_register)
    register = x_register + y_register
    cols = _register_view(state, register)  # (2**nx * 2**ny, rest)
    cols = cols.reshape(1 << nx, 1 << ny, -1)
    fx = powmod_table(a, nx, modn)
    ybase = np.arange(1 << ny, dtype=np.int64)
    out = np.empty_like(cols)
    # out[x, y] = in[x, y ^ f(x)] (gather == scatter: XOR is an involution)
    chunk = max(1, (1 << 22) // (1 << ny))
    for x0 in range(0, 1 << nx, chunk):
        x1 = min(x0 + chunk, 1 << nx)
        perm = ybase[None, :] ^ fx[x0:x1, None].astype(np.int64)
        out[x0:x1] = np.take_along_axis(cols[x0:x1], perm[:, :, None], axis=1)
    return _from_register_view(
        out.reshape(1 << (nx + ny), -1), state.n_qubits, register
    )


def apply_gate(state: StateVector, spec: GateSpec, *, workers: int = 1) -> StateVector:
    """Dispatch one non-EXP, non-MEASURE gate onto the state."""
    kind = spec.kind
    if kind in FIXED_KINDS:
        qubits = spec.controls + spec.targets
        return _checked_apply(state, gate_matrix(spec), qubits, workers)
    if kind == "QFT":
        return apply_qft(state, spec.targets, inverse=False)
    if kind == "INVQFT":
        return apply_qft(state, spec.targets, inverse=True)
    if kind == "ORACLE":
        return apply_oracle(state, spec.targets, spec.marked)
    if kind == "GROVERSTEP":
        return apply_grover_step(state, spec.targets, spec.marked)
    if kind == "GROVER":
        iterations = spec.iterations if spec.iterations is not None else 1
        return apply_grover(state, spec.targets, spec.marked, iterations)
    if kind == "MODULO":
        return apply_modulo(state, spec.a, spec.modn, spec.xreg, spec.yreg)
    raise ValueError(f"gate kind {kind} is not applied through apply_gate")


def _checked_apply(state, matrix, qubits, workers):
    from .statevec import apply_kqubit_op

    return apply_kqubit_op(state, matrix, qubits, workers=workers)
