"""Small dense linear-algebra helpers on 2^M-dimensional bit spaces."""

from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


def is_unitary(matrix: np.ndarray, tol: float = 1e-12) -> bool:
    """U^dagger U = identity within tol (entrywise)."""
    matrix = np.asarray(matrix)
    identity = np.eye(matrix.shape[0])
    return bool(np.allclose(matrix.conj().T @ matrix, identity, atol=tol, rtol=0.0))


def embed(op: np.ndarray, targets: Sequence[int], M: int) -> np.ndarray:
    """Lift a 1- or 2-qubit matrix onto M qubits; qubit 1 is the most significant bit.

    For two targets (a, b) the matrix index is 2*b_a + b_b.
    """
    k = len(targets)
    dim = 2 ** M
    columns = np.eye(dim, dtype=complex).reshape([2] * M + [dim])
    tensor = np.asarray(op, dtype=complex).reshape([2] * (2 * k))
    axes = [t - 1 for t in targets]
    out = np.tensordot(tensor, columns, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(dim, dim)


def operator_norm(matrix, dense_threshold: int = 4096) -> float:
    """Spectral norm of a Hermitian matrix; the induced 1-norm (an upper bound) above the threshold."""
    if matrix.shape[0] == 0:
        return 0.0
    if sp.issparse(matrix):
        if matrix.shape[0] > dense_threshold:
            return float(spla.norm(matrix, ord=1))
        matrix = matrix.toarray()
    return float(np.linalg.norm(np.asarray(matrix), ord=2))


def gershgorin_lower(matrix) -> float:
    """Lower end of the Gershgorin discs of a Hermitian matrix: no eigenvalue lies below it."""
    if matrix.shape[0] == 0:
        return 0.0
    if sp.issparse(matrix):
        diagonal = matrix.diagonal().real
        row_sums = np.asarray(abs(matrix).sum(axis=1)).ravel()
    else:
        matrix = np.asarray(matrix)
        diagonal = np.diag(matrix).real
        row_sums = np.abs(matrix).sum(axis=1)
    return float(np.min(diagonal - (row_sums - np.abs(diagonal))))
