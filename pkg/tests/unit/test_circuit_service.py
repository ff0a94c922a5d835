"""Tests for circuit generation and validation."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT / 'src'))

from gsqc.exceptions import CircuitError
from gsqc.models.circuit import Gate, Layout
from gsqc.services.circuit_service import CircuitService

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]])


def test_depth_and_core_limit():
    """Test the net depth formula and the identity-padding limit."""
    assert CircuitService.depth(3, 2) == 17
    assert CircuitService.depth(5, 4) == 29
    assert CircuitService.core_limit(2) == 7


@pytest.mark.parametrize("M,n", [(4, 4), (1, 2), (3, 1), (5, 2)])
def test_check_parameters_rejects(M, n):
    """Test that even or small widths and odd or short depths are rejected."""
    with pytest.raises(CircuitError):
        CircuitService.check_parameters(M, n)


@pytest.mark.parametrize("layout", ["1d", "all-to-all"])
def test_generated_circuits_validate(layout):
    """Test that both generated layouts pass validation."""
    circuit = CircuitService.build(layout, 5, 4)
    report = CircuitService.validate_circuit(circuit)

    assert circuit.layout == Layout(layout)
    assert circuit.N == 29
    assert report.is_valid, report.violations


def test_1d_layout_windows():
    """Test origins, finals and the alternating pair pattern of the 1-D layout."""
    circuit = CircuitService.build_1d_circuit(3, 2)

    assert circuit.origins == (3, 1, 3)
    assert circuit.finals == (17, 15, 15)
    assert CircuitService.row_1d(5, 4) == [(5, 4), (3, 2)]
    assert CircuitService.row_1d(5, 6) == [(1, 2), (3, 4)]
    assert all(step % 2 == 0 for step in CircuitService.pair_table(circuit))


def test_all_to_all_round_robin():
    """Test that the step-4 series pairs its pivot with every other qubit."""
    rows = CircuitService.rows_all_to_all(5, 16)
    partners = set()
    for step in (4, 8, 12):
        for a, b in rows[step]:
            if 5 in (a, b):
                partners.add(b if a == 5 else a)

    assert partners == {2, 3, 4}
    assert rows[4] == [(5, 4), (2, 3)]
    assert rows[6] == [(1, 2), (3, 4)]


def test_core_gates_are_placed():
    """Test that a core gate replaces the identity in its slot."""
    circuit = CircuitService.build("1d", 3, 2, [Gate.one(3, 2, HADAMARD)])

    assert np.allclose(circuit.gate_at(2, 3).unitary, HADAMARD)
    assert CircuitService.validate_circuit(circuit).is_valid


@pytest.mark.parametrize("gate", [
    Gate.one(3, 1, HADAMARD),         # first gate of qubit 1
    Gate.one(9, 2, HADAMARD),         # past the core limit
    Gate.two(5, 1, 2),                # 2-qubit gate at an odd step
    Gate.one(2, 2, HADAMARD),         # idle even step
])
def test_core_gates_rejected(gate):
    """Test the layered-circuit gate rules."""
    with pytest.raises(CircuitError):
        CircuitService.build("1d", 3, 2, [gate])


def test_unknown_layout():
    """Test that custom circuits cannot be generated."""
    with pytest.raises(CircuitError):
        CircuitService.build("custom", 3, 2)


def test_validate_reports_identity_tail():
    """Test that a non-identity gate after the core limit is reported."""
    circuit = CircuitService.build("1d", 3, 2)
    gates = [Gate.one(g.time, 2, PAULI_X) if (g.time, g.qubits) == (11, (2,)) else g for g in circuit.gates]
    report = CircuitService.validate_circuit(circuit.with_gates(gates))

    assert not report.is_valid
    assert "identity-tail" in report.rules


def test_validate_reports_gaps_and_first_gate():
    """Test coverage and first-gate violations on a custom circuit."""
    circuit = CircuitService.build("1d", 3, 2)
    gates = [g for g in circuit.gates if (g.time, g.qubits) != (5, (2,))]
    gates = [Gate.one(1, 2, PAULI_X) if (g.time, g.qubits) == (1, (2,)) else g for g in gates]
    report = CircuitService.validate_circuit(circuit.with_gates(gates))

    assert "coverage" in report.rules
    assert "first-gate" in report.rules


def test_identity_circuit():
    """Test that the identity circuit keeps every slot."""
    circuit = CircuitService.build("1d", 3, 2, [Gate.one(3, 2, HADAMARD)])
    identity = CircuitService.identity_circuit(circuit)

    assert identity.is_identity
    assert len(identity.gates) == len(circuit.gates)
    assert identity.origins == circuit.origins


def test_chain_array_generator():
    """Test the gate-graph generator circuit."""
    circuit = CircuitService.build_chain_array(5, 6)

    assert circuit.origins == (2, 1, 2, 1, 2)
    assert circuit.finals == (6, 5, 6, 5, 6)
    assert circuit.pairs_at(3) == frozenset({frozenset({1, 2}), frozenset({3, 4})})
    assert circuit.pairs_at(4) == frozenset({frozenset({2, 3}), frozenset({4, 5})})

    with pytest.raises(CircuitError):
        CircuitService.build_chain_array(5, 5)
