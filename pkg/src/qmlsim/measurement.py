"""Computational-basis measurement with seeded outcome selection.

One uniform draw per measurement; the outcome is picked by walking the
cumulative marginal in ascending bitstring order, so a trace is exactly
replayable from the recorded seed.  The RNG is counter-based
(numpy Philox 4x64-10) and owned by the engine run, one stream per job.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .statevec import StateVector, check_targets

RNG_NAME = "philox-4x64-10"
PROJECTION_GUARD = 1e-300


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass
class MeasurementRecord:
    step: int
    targets: tuple[int, ...]
    outcome: str  # bitstring, first target first
    probability: float
    draw_index: int | None = None  # position in the job's RNG stream


def measure(
    state: StateVector,
    targets,
    rng: np.random.Generator,
    *,
    step: int = 0,
    draw_index: int | None = None,
) -> tuple[MeasurementRecord, StateVector]:
    """Projective measurement of the target qubits.

    Returns the record (outcome, pre-collapse marginal probability) and
    the renormalized post-measurement state.
    """
    targets = check_targets(state.n_qubits, targets)
    k = len(targets)
    n = state.n_qubits
    axes = [t - 1 for t in targets]
    rest = [a for a in range(n) if a not in axes]
    perm = axes + rest
    tens = state.amplitudes.reshape((2,) * n).transpose(perm)
    rows = np.ascontiguousarray(tens.reshape(1 << k, -1))
    marginals = np.sum(np.abs(rows) ** 2, axis=1)
    total = marginals.sum()
    if total <= 0.0:
        raise NumericError("cannot measure a zero state")
    cumulative = np.cumsum(marginals / total)
    u = rng.random()
    outcome = int(np.searchsorted(cumulative, u, side="right"))
    outcome = min(outcome, (1 << k) - 1)
    p = float(marginals[outcome])
    if p < PROJECTION_GUARD:
        raise NumericError(
            f"measurement selected outcome {outcome:0{k}b} with probability {p:g}; "
            "internal inconsistency"
        )
    post = np.zeros_like(rows)
    post[outcome] = rows[outcome] / np.sqrt(p)
    inv = np.argsort(perm)
    amps = np.ascontiguousarray(
        post.reshape((2,) * n).transpose(inv)
    ).reshape(-1)
    record = MeasurementRecord(
        step=step,
        targets=targets,
        outcome=format(outcome, f"0{k}b"),
        probability=p,
        draw_index=draw_index,
    )
    return record, StateVector(n, amps)
