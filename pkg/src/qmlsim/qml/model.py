"""Language-independent job tree produced by the QML parser."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..gates import TimeStep
from ..hamiltonian import PauliCouplingModel

JOB_KINDS = ("circuit", "spectrum-full", "spectrum-margins")


@dataclass
class JobTree:
    kind: str
    n_qubits: int
    seed: int = 0
    threshold: float = 1e-4
    initial_state: int = 0
    steps: list[TimeStep] = field(default_factory=list)
    hamiltonians: dict[str, PauliCouplingModel] = field(default_factory=dict)
    # spectrum-kind jobs diagonalize this model
    hamiltonian: PauliCouplingModel | None = None
    spectrum_k: int = 4
    spectrum_tol: float = 1e-8
    spectrum_max_iter: int = 300
