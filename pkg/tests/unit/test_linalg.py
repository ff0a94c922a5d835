"""Tests for the dense linear-algebra helpers."""

import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

# Add src to path
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT / 'src'))

from gsqc.utils.linalg import embed, gershgorin_lower, is_unitary, operator_norm

PAULI_X = np.array([[0, 1], [1, 0]])
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])


def test_embed_orders_qubits_most_significant_first():
    """Test single-qubit embeddings against Kronecker products."""
    assert np.allclose(embed(PAULI_X, [1], 2), np.kron(PAULI_X, np.eye(2)))
    assert np.allclose(embed(PAULI_X, [2], 2), np.kron(np.eye(2), PAULI_X))
    assert np.allclose(embed(PAULI_X, [2], 3), np.kron(np.kron(np.eye(2), PAULI_X), np.eye(2)))


def test_embed_two_qubit_targets():
    """Test that target order selects the control of a CNOT."""
    assert np.allclose(embed(CNOT, [1, 2], 2), CNOT)
    assert np.allclose(embed(CNOT, [2, 1], 2), SWAP @ CNOT @ SWAP)


def test_is_unitary():
    """Test the unitarity check."""
    assert is_unitary(CNOT)
    assert not is_unitary(np.array([[1, 0], [0, 0.5]]))


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31 - 1),
    targets=st.sampled_from([[1], [2], [3], [1, 2], [3, 1], [2, 3]]),
)
def test_embedding_preserves_unitarity(seed, targets):
    """Test every embedded Haar-random gate stays unitary."""
    gate = unitary_group.rvs(2 ** len(targets), random_state=seed)

    assert is_unitary(gate, tol=1e-10)
    assert is_unitary(embed(gate, targets, 3), tol=1e-10)


def test_operator_norm():
    """Test the exact norm below the threshold and the 1-norm bound above it."""
    diagonal = np.array([1.0, -3.0, 2.0])
    assert operator_norm(np.diag(diagonal)) == pytest.approx(3.0)
    assert operator_norm(sp.diags(diagonal, format='csr')) == pytest.approx(3.0)

    chain = sp.diags([np.ones(9), np.ones(9)], [-1, 1], format='csr')
    assert operator_norm(chain, dense_threshold=4) == pytest.approx(2.0)
    assert operator_norm(sp.csr_matrix((0, 0))) == 0.0


def test_gershgorin_lower_bounds_the_spectrum():
    """Test the disc bound sits at or below the smallest eigenvalue, dense and sparse."""
    matrix = np.array([[2.0, -1.0, 0.0], [-1.0, -3.0, 0.5], [0.0, 0.5, 1.0]])

    assert gershgorin_lower(matrix) == pytest.approx(-4.5)
    assert gershgorin_lower(sp.csr_matrix(matrix)) == pytest.approx(-4.5)
    assert gershgorin_lower(matrix) <= np.linalg.eigvalsh(matrix)[0]

    chain = sp.diags([np.ones(9), np.ones(9)], [-1, 1], format='csr')
    assert gershgorin_lower(chain) == pytest.approx(-2.0)
    assert gershgorin_lower(sp.csr_matrix((0, 0))) == 0.0
