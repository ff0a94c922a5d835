"""Tests for the history ground state."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT / 'src'))

from gsqc.exceptions import BasisError
from gsqc.models.operators import Schedule
from gsqc.services.groundstate_service import GroundStateService
from gsqc.services.hamiltonian_service import HamiltonianService


@pytest.mark.parametrize("lam", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_ground_state_is_annihilated(cnot_circuit, lam):
    """Test H(lambda) psi_0 = 0 on the propagation space."""
    space = GroundStateService.propagation_space(cnot_circuit)
    op = HamiltonianService.assemble(cnot_circuit, lam, space)
    state = GroundStateService.history_ground_state(cnot_circuit, lam, space)

    assert state.norm == pytest.approx(1.0)
    assert np.linalg.norm(op.apply(state.amplitudes)) < 1e-10


def test_ground_state_on_full_basis(cnot_circuit):
    """Test the ground state re-expressed on the unrestricted basis."""
    op = HamiltonianService.assemble(cnot_circuit, 0.8)
    state = GroundStateService.history_ground_state(cnot_circuit, 0.8, op.space)

    assert state.space.size == 100
    assert np.linalg.norm(op.apply(state.amplitudes)) < 1e-10


def test_ground_state_at_zero_is_all_rest(cnot_circuit):
    """Test that with every schedule off all qubits stay at rest."""
    state = GroundStateService.history_ground_state(cnot_circuit, 0.0)

    assert GroundStateService.rest_occupation(state, 1) == pytest.approx(1.0)
    assert GroundStateService.rest_occupation(state, 2) == pytest.approx(1.0)


def test_ground_state_carries_the_circuit_output(cnot_circuit):
    """Test that the final-step amplitudes hold the Bell state."""
    state = GroundStateService.history_ground_state(cnot_circuit, 1.0)
    positions, bits = state.space.positions, state.space.bits
    final = np.all(positions == 4, axis=1)
    probabilities = {tuple(b): p for b, p in zip(bits[final], state.probabilities[final])}

    assert probabilities[(0, 0)] == pytest.approx(probabilities[(1, 1)])
    assert probabilities[(0, 0)] > 0.0
    assert probabilities[(0, 1)] == pytest.approx(0.0, abs=1e-20)
    assert probabilities[(1, 0)] == pytest.approx(0.0, abs=1e-20)


def test_occupations_sum_to_one(cnot_circuit):
    """Test that the occupations of one qubit form a distribution."""
    state = GroundStateService.history_ground_state(cnot_circuit, 0.6)
    rows = GroundStateService.occupation_rows(state, 0.6)
    qubit_one = [row[3] for row in rows if row[1] == 1]

    assert len(rows) == 10
    assert sum(qubit_one) == pytest.approx(1.0)

    with pytest.raises(BasisError):
        GroundStateService.occupation(state, 1, 5)


@pytest.mark.parametrize("lam", [0.2, 0.5, 0.9])
def test_rest_occupation_closed_form(layered_circuit, lam):
    """Test the rest occupation of the active qubit against its closed form."""
    state = GroundStateService.history_ground_state(layered_circuit, lam)
    active = Schedule(M=3).active_qubit(lam)
    measured = GroundStateService.rest_occupation(state, active)

    assert measured == pytest.approx(GroundStateService.closed_form_occupation(layered_circuit, lam), abs=1e-8)
    assert measured >= 1.0 / layered_circuit.N
