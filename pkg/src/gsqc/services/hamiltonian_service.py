"""Sparse assembly of the circuit Hamiltonian H(lambda)."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from ..config import solver_config
from ..exceptions import OperatorError
from ..models.circuit import Circuit
from ..models.operators import EnergyScale, Schedule, SparseOperator, Space
from ..utils.linalg import is_unitary, operator_norm
from .basis_service import BasisService

logger = logging.getLogger(__name__)

TERM_KINDS = ("one-qubit", "two-qubit", "init", "penalty", "quiescence")


class _Triplets:
    """Coordinate buffer compressed once with duplicate summation."""

    def __init__(self, dimension: int):
        self.dimension = dimension
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []

    def add(self, rows: np.ndarray, cols: np.ndarray, vals) -> None:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            return
        self.rows.append(rows)
        self.cols.append(np.asarray(cols, dtype=np.int64))
        self.vals.append(np.broadcast_to(np.asarray(vals, dtype=complex), rows.shape).copy())

    def to_csr(self) -> sp.csr_matrix:
        shape = (self.dimension, self.dimension)
        if not self.rows:
            return sp.csr_matrix(shape, dtype=complex)
        coo = sp.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=shape,
        )
        matrix = coo.tocsr()
        matrix.sum_duplicates()
        matrix.eliminate_zeros()
        return matrix


def _check_window(circuit: Circuit, qubit: int, step: int) -> None:
    if not 1 <= qubit <= circuit.M:
        raise OperatorError(f"qubit {qubit} outside 1..{circuit.M}")
    if not circuit.origin(qubit) <= step <= circuit.final(qubit):
        raise OperatorError(
            f"step {step} outside the window [{circuit.origin(qubit)}, {circuit.final(qubit)}] of qubit {qubit}"
        )


def _add_hop(acc: _Triplets, space: Space, qubits: Sequence[int], step: int,
             matrix: np.ndarray, E: float) -> None:
    """E [C+_i - C+_{i-1} U+][C_i - U C_{i-1}] for one qubit or a pair moving together."""
    basis = space.basis
    cols = [q - 1 for q in qubits]
    positions, bits, keys = space.positions, space.bits, space.keys
    here = np.ones(space.size, dtype=bool)
    before = np.ones(space.size, dtype=bool)
    for a in cols:
        here &= positions[:, a] == step
        before &= positions[:, a] == step - 1
    here = np.flatnonzero(here)
    acc.add(here, here, E)

    source = np.flatnonzero(before)
    if source.size == 0:
        return
    k = len(cols)
    weights = basis.bit_weights[cols]
    # local bit index 2*b_a + b_b with the lower qubit first
    local = bits[np.ix_(source, cols)] @ (2 ** np.arange(k - 1, -1, -1))
    base = keys[source] - bits[np.ix_(source, cols)] @ weights
    stride = int(basis.position_strides[cols].sum())
    gram = matrix.conj().T @ matrix
    for target_local in range(2 ** k):
        target_bits = np.array([(target_local >> (k - 1 - j)) & 1 for j in range(k)])
        shifted = base + int(target_bits @ weights)
        diag_vals = E * gram[target_local, local]
        rows = space.lookup(shifted)
        keep = (rows >= 0) & (diag_vals != 0)
        acc.add(rows[keep], source[keep], diag_vals[keep])

        hop_vals = -E * matrix[target_local, local]
        rows = space.lookup(shifted + stride)
        keep = (rows >= 0) & (hop_vals != 0)
        acc.add(rows[keep], source[keep], hop_vals[keep])
        acc.add(source[keep], rows[keep], np.conj(hop_vals[keep]))


def _diagonal(mask: np.ndarray, value: float) -> sp.csr_matrix:
    return sp.diags(np.where(mask, value, 0.0).astype(complex), format='csr')


def _penalty_counts(circuit: Circuit, positions: np.ndarray) -> np.ndarray:
    """Number of 2-qubit gates whose step separates the two qubits of each tuple."""
    counts = np.zeros(positions.shape[0], dtype=np.int64)
    for gate in circuit.pair_gates:
        a, b = gate.qubits
        counts += (positions[:, a - 1] < gate.time) != (positions[:, b - 1] < gate.time)
    return counts


@dataclass(frozen=True, eq=False)
class HamiltonianSkeleton:
    """lambda-independent pieces of H(lambda) over a fixed space.

    H(lambda) = static + sum_A (entry_in_A + lambda_A^2 entry_rest_A - lambda_A entry_hop_A)
              + sum_{A>=2} (1 - lambda_{A-1}^3) quiescence_A
    """

    circuit: Circuit
    space: Space
    scale: EnergyScale
    schedule: Schedule
    static: sp.csr_matrix
    entry_in: tuple[sp.csr_matrix, ...]
    entry_rest: tuple[sp.csr_matrix, ...]
    entry_hop: tuple[sp.csr_matrix, ...]
    quiescence: tuple[sp.csr_matrix, ...]
    meta: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return self.circuit.M

    def entry_term(self, qubit: int, value: float) -> sp.csr_matrix:
        """h^{o_A}_A(value * I)."""
        a = qubit - 1
        return (self.entry_in[a] + value ** 2 * self.entry_rest[a] - value * self.entry_hop[a]).tocsr()

    def weighted(self, values: np.ndarray) -> sp.csr_matrix:
        """H for explicit per-qubit schedule values."""
        matrix = self.static.copy()
        for a in range(self.M):
            matrix = matrix + self.entry_term(a + 1, float(values[a]))
        for a in range(1, self.M):
            weight = 1.0 - float(values[a - 1]) ** 3
            if weight != 0.0:
                matrix = matrix + weight * self.quiescence[a]
        return matrix.tocsr()

    def at(self, lam: float) -> SparseOperator:
        return SparseOperator(self.weighted(self.schedule.values(lam)), self.space)

    def without_entry(self, lam: float, qubit: int) -> SparseOperator:
        """H(lambda) - h^{o_A}_A(lambda_A I)."""
        values = self.schedule.values(lam)
        matrix = self.weighted(values) - self.entry_term(qubit, float(values[qubit - 1]))
        return SparseOperator(matrix.tocsr(), self.space)


class HamiltonianService:
    """Service for schedules, Hamiltonian terms and assembled operators."""

    @staticmethod
    def schedule_eval(lam: float, M: int, shifted: bool = True) -> tuple[float, ...]:
        """Per-qubit schedule values (lambda_1, ..., lambda_M)."""
        return tuple(float(v) for v in Schedule(M=M, shifted=shifted).values(lam))

    @staticmethod
    def build_term(kind: str, space: Space, qubits: Sequence[int], step: Optional[int] = None,
                   matrix: Optional[np.ndarray] = None, factor: float = 1.0,
                   scale: Optional[EnergyScale] = None) -> SparseOperator:
        """Single Hamiltonian term over a space.

        one-qubit / two-qubit: hop from step-1 to step with matrix ``factor * U``;
        init: E on the rest site with bit 1; penalty: E on tuples separated by a gate at step;
        quiescence: E whenever the qubit has left its rest site.
        """
        if kind not in TERM_KINDS:
            raise OperatorError(f"unknown term kind {kind!r}")
        circuit = space.circuit
        E = (scale or EnergyScale()).E
        qubits = tuple(sorted(qubits))
        positions, bits = space.positions, space.bits
        acc = _Triplets(space.size)

        if kind in ("one-qubit", "two-qubit"):
            expected = 1 if kind == "one-qubit" else 2
            if len(qubits) != expected or step is None:
                raise OperatorError(f"{kind} term needs {expected} qubit(s) and a step")
            for q in qubits:
                _check_window(circuit, q, step)
            dim = 2 ** expected
            unitary = np.eye(dim) if matrix is None else np.asarray(matrix, dtype=complex)
            if unitary.shape != (dim, dim) or not is_unitary(unitary, solver_config.unitary_tol):
                raise OperatorError(f"{kind} term needs a {dim}x{dim} unitary matrix")
            _add_hop(acc, space, qubits, step, factor * unitary, E)
            return SparseOperator(acc.to_csr(), space)

        a = qubits[0] - 1
        if kind == "init":
            mask = (positions[:, a] == circuit.rest(a + 1)) & (bits[:, a] == 1)
        elif kind == "quiescence":
            mask = positions[:, a] >= circuit.origin(a + 1)
        else:
            if len(qubits) != 2 or step is None:
                raise OperatorError("penalty term needs two qubits and a gate step")
            for q in qubits:
                _check_window(circuit, q, step)
            b = qubits[1] - 1
            mask = (positions[:, a] < step) != (positions[:, b] < step)
        return SparseOperator(_diagonal(mask, E), space)

    @staticmethod
    def penalty_operator(circuit: Circuit, space: Space, scale: Optional[EnergyScale] = None) -> SparseOperator:
        """Sum of all pair penalties (diagonal)."""
        E = (scale or EnergyScale()).E
        counts = _penalty_counts(circuit, space.positions)
        return SparseOperator(sp.diags((E * counts).astype(complex), format='csr'), space)

    @staticmethod
    def skeleton(circuit: Circuit, space: Optional[Space] = None, scale: Optional[EnergyScale] = None,
                 shifted: bool = True) -> HamiltonianSkeleton:
        """Assemble every lambda-independent piece once."""
        space = space if space is not None else BasisService.enumerate_basis(circuit)
        scale = scale or EnergyScale()
        E = scale.E
        positions, bits = space.positions, space.bits
        acc = _Triplets(space.size)
        for gate in circuit.gates:
            if gate.is_pair:
                _add_hop(acc, space, gate.qubits, gate.time, gate.unitary, E)
            elif gate.time != circuit.origin(gate.qubits[0]):
                _add_hop(acc, space, gate.qubits, gate.time, gate.unitary, E)
        for a in range(circuit.M):
            init = (positions[:, a] == circuit.rest(a + 1)) & (bits[:, a] == 1)
            acc.add(np.flatnonzero(init), np.flatnonzero(init), E)
        penalties = E * _penalty_counts(circuit, positions)
        hit = np.flatnonzero(penalties)
        acc.add(hit, hit, penalties[hit])
        static = acc.to_csr()

        entry_in, entry_rest, entry_hop, quiescence = [], [], [], []
        for a in range(circuit.M):
            origin = circuit.origin(a + 1)
            entry_in.append(_diagonal(positions[:, a] == origin, E))
            entry_rest.append(_diagonal(positions[:, a] == origin - 1, E))
            hop = _Triplets(space.size)
            _add_hop(hop, space, (a + 1,), origin, np.eye(2), E)
            # keep only the off-diagonal part: -E * hop entries
            off = hop.to_csr()
            off = off - sp.diags(off.diagonal(), format='csr')
            entry_hop.append((-off).tocsr())
            quiescence.append(_diagonal(positions[:, a] >= origin, E))
        logger.debug("skeleton over %d states, static nnz %d", space.size, static.nnz)
        return HamiltonianSkeleton(
            circuit=circuit, space=space, scale=scale, schedule=Schedule(M=circuit.M, shifted=shifted),
            static=static, entry_in=tuple(entry_in), entry_rest=tuple(entry_rest),
            entry_hop=tuple(entry_hop), quiescence=tuple(quiescence),
        )

    @staticmethod
    def assemble(circuit: Circuit, lam: float, space: Optional[Space] = None,
                 scale: Optional[EnergyScale] = None, shifted: bool = True) -> SparseOperator:
        """H(lambda) over a space (full basis by default)."""
        return HamiltonianService.skeleton(circuit, space, scale, shifted).at(lam)

    @staticmethod
    def derivative_norms(circuit: Circuit, lam: float, step: float = 1e-3,
                         space: Optional[Space] = None,
                         skeleton: Optional[HamiltonianSkeleton] = None) -> tuple[float, float]:
        """Finite-difference norms of dH/dlambda and d^2H/dlambda^2 at lambda."""
        skeleton = skeleton or HamiltonianService.skeleton(circuit, space)
        centre = min(max(lam, step), 1.0 - step)
        below, mid, above = (skeleton.at(centre - step).matrix, skeleton.at(centre).matrix,
                             skeleton.at(centre + step).matrix)
        first = (above - below) / (2.0 * step)
        second = (above - 2.0 * mid + below) / step ** 2
        threshold = solver_config.dense_threshold
        return operator_norm(first, threshold), operator_norm(second, threshold)
