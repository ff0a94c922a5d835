"""Tests for data models."""

import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

# Add src to path
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT / 'src'))

from gsqc.exceptions import PathCertificateError, ScheduleError
from gsqc.models.circuit import Circuit, Gate, Layout
from gsqc.models.graphs import PathFamily, SignedFunction
from gsqc.models.operators import Schedule, smoothstep, smoothstep_derivative
from gsqc.models.run_config import LambdaGrid, RunConfig

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def test_gate_defaults_to_identity():
    """Test gate constructors without a matrix."""
    gate = Gate.one(2, 1)
    assert gate.is_identity
    assert not gate.is_pair
    assert gate.kind == "one-qubit"

    pair = Gate.two(4, 1, 2)
    assert pair.is_identity
    assert pair.is_pair
    assert pair.partner(1) == 2
    assert pair.partner(2) == 1


def test_gate_rejects_non_unitary():
    """Test that a non-unitary matrix is rejected."""
    with pytest.raises(ValidationError):
        Gate.one(1, 1, np.array([[1, 1], [0, 1]]))


def test_gate_rejects_repeated_qubit():
    """Test that a 2-qubit gate needs two distinct qubits."""
    with pytest.raises(ValidationError):
        Gate.two(2, 3, 3)


def test_gate_reversed_qubits_are_normalized():
    """Test that (b, a) ordering permutes the matrix basis."""
    gate = Gate.two(2, 2, 1, CNOT)

    assert gate.qubits == (1, 2)
    # control moved from the first to the second qubit
    expected = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]])
    assert np.allclose(gate.unitary, expected)


def test_gate_json_aliases():
    """Test gate parsing from the t/q/u JSON form."""
    gate = Gate.model_validate({"t": 3, "q": [1], "u": [[0, 0], [1, 0], [1, 0], [0, 0]]})

    assert gate.time == 3
    assert np.allclose(gate.unitary, np.array([[0, 1], [1, 0]]))


def test_circuit_windows():
    """Test origin, rest, final and radix accessors."""
    circuit = Circuit(M=2, N=4, o=(1, 2), f=(4, 3), gates=(Gate.one(1, 1), Gate.one(2, 2)))

    assert circuit.layout == Layout.CUSTOM
    assert circuit.rest(1) == 0
    assert circuit.rest(2) == 1
    assert circuit.radix(1) == 5
    assert circuit.radix(2) == 3
    assert circuit.gate_at(1, 1) is not None
    assert circuit.gate_at(1, 2) is None


def test_circuit_collisions_and_pairs():
    """Test slot collisions and pair lookups."""
    gates = (Gate.one(1, 1), Gate.two(1, 1, 2), Gate.two(3, 1, 2))
    circuit = Circuit(M=2, N=3, o=(1, 1), f=(3, 3), gates=gates)

    assert circuit.collisions == [(1, 1)]
    assert circuit.pair_steps(2, 1) == [1, 3]
    assert circuit.pairs_at(3) == frozenset({frozenset({1, 2})})


def test_smoothstep_values():
    """Test the quintic ramp and its derivative."""
    assert smoothstep(-0.5) == 0.0
    assert smoothstep(0.5) == pytest.approx(0.5)
    assert smoothstep(2.0) == 1.0
    assert smoothstep_derivative(0.5) == pytest.approx(30 * 0.25 * 0.25)
    assert smoothstep_derivative(1.5) == 0.0


def test_schedule_turns_qubits_on_in_order():
    """Test the staggered schedule and its active qubit."""
    schedule = Schedule(M=3)

    assert np.allclose(schedule.values(0.0), [0, 0, 0])
    assert np.allclose(schedule.values(1 / 3), [1, 0, 0])
    assert np.allclose(schedule.values(0.5), [1, 0.5, 0])
    assert np.allclose(schedule.values(1.0), [1, 1, 1])
    assert schedule.active_qubit(0.0) == 1
    assert schedule.active_qubit(0.5) == 2
    assert schedule.active_qubit(1.0) == 3


def test_schedule_out_of_range():
    """Test that lambda outside [0, 1] is rejected."""
    with pytest.raises(ScheduleError):
        Schedule(M=3).values(1.2)
    with pytest.raises(ScheduleError):
        Schedule(M=3).active_qubit(-0.1)


def test_signed_function_labels():
    """Test the median split into P and N."""
    vertices = tuple((i,) for i in range(1, 7))
    phi = SignedFunction(vertices, np.array([-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]))

    assert phi.median == 1.0
    assert list(phi.labels) == [-1, -1, -1, 1, 1, 1]
    assert phi.label_of[(4,)] == 1


def test_signed_function_median_is_a_value():
    """Test the median is the |V|/2-th sorted value rather than a midpoint."""
    vertices = tuple((i,) for i in range(1, 5))
    phi = SignedFunction(vertices, np.array([4.0, 1.0, 3.0, 2.0]))

    assert phi.median == 3.0
    assert list(phi.psi) == [1.0, -2.0, 0.0, -1.0]
    assert list(phi.labels) == [1, -1, 1, -1]

    odd = SignedFunction(vertices[:3], np.array([5.0, 1.0, 3.0]))
    assert odd.median == 3.0


def test_signed_function_median_ties():
    """Test that values at the median fill the short side in vertex order."""
    vertices = tuple((i,) for i in range(1, 5))
    phi = SignedFunction(vertices, np.array([0.0, 0.0, 1.0, -1.0]))

    assert list(phi.labels) == [1, -1, 1, -1]


def test_signed_function_preconditions():
    """Test odd vertex counts and nonzero sums are rejected."""
    with pytest.raises(PathCertificateError):
        SignedFunction(((1,), (2,), (3,)), np.array([1.0, 0.0, -1.0]))
    with pytest.raises(PathCertificateError):
        SignedFunction(((1,), (2,)), np.array([1.0, 1.0]))


def test_path_family_congestion():
    """Test congestion counts both directions of an edge."""
    vertices = ((1,), (2,))
    family = PathFamily(vertices, np.array([[0, 1], [1, 0]]))

    assert family.horizon == 1
    assert family.congestion == 2
    assert family.brute_force_congestion() == 2
    assert family.trajectory(0) == [(1,), (2,)]
    assert family.rows() == [[[1], [2]], [[2], [1]]]


def test_lambda_grid_parse():
    """Test parsing and evaluating a lambda grid."""
    grid = LambdaGrid.parse("0:1:5")

    assert grid.values() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert str(grid) == "0:1:5"
    assert LambdaGrid.parse("0.3:0.9:1").values() == [0.3]

    with pytest.raises(ValueError):
        LambdaGrid.parse("0:1")


def test_run_config_rejects_bad_grid():
    """Test that a malformed lambda grid fails validation."""
    with pytest.raises(ValidationError):
        RunConfig(command="gap-scan", lambda_grid="0:2:3")
