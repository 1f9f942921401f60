"""qmlsim: quantum circuit / spin-Hamiltonian simulator with a QML job
language, an engine-selecting configurator, a CLI and an HTTP job service."""

from .errors import (
    Diagnostic,
    NumericError,
    ResourceLimitError,
    SimulationError,
    ValidationError,
)
from .statevec import StateVector, apply_kqubit_op, inner_product, new_basis_state

__all__ = [
    "Diagnostic",
    "NumericError",
    "ResourceLimitError",
    "SimulationError",
    "ValidationError",
    "StateVector",
    "apply_kqubit_op",
    "inner_product",
    "new_basis_state",
]

__version__ = "0.1.0"
