"""Per-time-step derived quantities: Bloch vectors, basis entropy,
thresholded amplitude listing.

All functions are read-only on the state.  The entropy here is the
amplitude (basis) entropy -sum p_i log2 p_i over the full state, not a
subsystem von Neumann entropy.  Thresholding is on probability |c|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measurement import MeasurementRecord
from .statevec import StateVector

DEFAULT_THRESHOLD = 1e-4
_TINY = 1e-300


def bloch_vector(state: StateVector, qubit: int) -> np.ndarray:
    """(<sx>, <sy>, <sz>) for one qubit, by strided pair traversal
    (no dense sigma matrices)."""
    n = state.n_qubits
    if not 1 <= qubit <= n:
        raise ValueError(f"qubit {qubit} out of range 1..{n}")
    tens = state.amplitudes.reshape((2,) * n)
    pair = np.moveaxis(tens, qubit - 1, 0).reshape(2, -1)
    c0, c1 = pair[0], pair[1]
    cross = np.vdot(c0, c1)
    x = 2.0 * cross.real
    y = 2.0 * cross.imag
    z = float(np.vdot(c0, c0).real - np.vdot(c1, c1).real)
    return np.array([x, y, z])


def bloch_matrix(state: StateVector) -> np.ndarray:
    """n x 3 array of Bloch vectors for every qubit."""
    return np.array([bloch_vector(state, q) for q in range(1, state.n_qubits + 1)])


def entropy(state: StateVector) -> float:
    """-sum |c_i|^2 log2 |c_i|^2; terms below 1e-300 contribute zero."""
    p = state.probabilities()
    p = p[p > _TINY]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log2(p)).sum())


def phase_of(c: complex) -> float:
    """arg(c) in (-pi, pi]; phase of exact zero is 0."""
    if c == 0:
        return 0.0
    phi = math.atan2(c.imag, c.real)
    if phi <= -math.pi:
        phi = math.pi
    return phi


@dataclass(frozen=True)
class ListingEntry:
    index: int
    probability: float
    phase: float


def amplitude_listing(state: StateVector, threshold: float) -> list[ListingEntry]:
    """Basis states with probability >= threshold, descending by
    probability, ties broken by ascending index."""
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must be in [0, 1), got {threshold}")
    p = state.probabilities()
    keep = np.nonzero(p >= threshold)[0]
    entries = [
        ListingEntry(int(i), float(p[i]), phase_of(complex(state.amplitudes[i])))
        for i in keep
    ]
    entries.sort(key=lambda e: (-e.probability, e.index))
    return entries


@dataclass
class StepRecord:
    step_index: int
    bloch: np.ndarray  # (n_qubits, 3)
    listing: list[ListingEntry]
    entropy: float
    measurements: list[MeasurementRecord] = field(default_factory=list)


@dataclass
class Trace:
    engine: str
    seed: int
    threshold: float
    rng_name: str
    records: list[StepRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    # attached on request only (cross-validation); never serialized
    final_state: StateVector | None = None


def step_record(
    state: StateVector,
    step_index: int,
    threshold: float,
    measurements: list[MeasurementRecord] | None = None,
) -> StepRecord:
    return StepRecord(
        step_index=step_index,
        bloch=bloch_matrix(state),
        listing=amplitude_listing(state, threshold),
        entropy=entropy(state),
        measurements=list(measurements or []),
    )
