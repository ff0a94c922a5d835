"""Shared circuit fixtures."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT / 'src'))

from gsqc.models.circuit import Circuit, Gate
from gsqc.services.circuit_service import CircuitService

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


@pytest.fixture
def cnot_circuit() -> Circuit:
    """Two qubits on [1, 4]: Hadamard on qubit 1 at step 2, CNOT(1 -> 2) at step 3."""
    gates = (
        Gate.one(1, 1), Gate.one(1, 2),
        Gate.one(2, 1, HADAMARD), Gate.one(2, 2),
        Gate.two(3, 1, 2, CNOT),
        Gate.one(4, 1), Gate.one(4, 2),
    )
    return Circuit(M=2, N=4, o=(1, 1), f=(4, 4), gates=gates)


@pytest.fixture
def single_qubit_circuit() -> Circuit:
    """One qubit on [1, 2] with identity gates."""
    return Circuit(M=1, N=2, o=(1,), f=(2,), gates=(Gate.one(1, 1), Gate.one(2, 1)))


@pytest.fixture(scope="module")
def layered_circuit() -> Circuit:
    """Smallest 1-D layered circuit (M=3, n=2, N=17) with a Hadamard on qubit 2."""
    return CircuitService.build("1d", 3, 2, [Gate.one(3, 2, HADAMARD)])
