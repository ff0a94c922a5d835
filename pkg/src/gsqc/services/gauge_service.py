"""Identity-gate gauging and the swap conjugations relating the 1-D and all-to-all layouts."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..config import solver_config
from ..exceptions import GaugeError
from ..models.circuit import Circuit
from ..models.operators import SparseOperator, Space, StateVector
from ..models.reports import EquivalenceReport, EquivalenceStage, SpectralDeviation
from ..utils.linalg import embed, is_unitary
from .basis_service import BasisService
from .circuit_service import CircuitService, Pair
from .hamiltonian_service import HamiltonianService
from .spectra_service import SpectraService

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GaugeMap:
    """Per-position bit unitaries V(i_1, ..., i_M), evaluated on demand.

    V applies the gate layers 1, 2, ... in order; a 1-qubit gate at step j counts once its
    qubit has reached j, a 2-qubit gate only once both of its qubits have.
    """

    circuit: Circuit
    _cache: dict = field(default_factory=dict, repr=False)

    def matrix(self, positions: Sequence[int]) -> np.ndarray:
        key = tuple(int(p) for p in positions)
        if key not in self._cache:
            M = self.circuit.M
            value = np.eye(2 ** M, dtype=complex)
            for gate in sorted(self.circuit.gates, key=lambda g: (g.time, g.qubits)):
                if all(key[q - 1] >= gate.time for q in gate.qubits):
                    value = embed(gate.unitary, gate.qubits, M) @ value
            self._cache[key] = value
        return self._cache[key]

    def is_unitary(self, positions: Sequence[int]) -> bool:
        return is_unitary(self.matrix(positions), solver_config.unitary_tol)

    def operator(self, space: Space) -> sp.csr_matrix:
        """Block-diagonal unitary U with U|pos, b> = sum_b' V(pos)[b', b] |pos, b'>."""
        M = space.M
        weights = space.basis.bit_weights
        rows, cols, vals = [], [], []
        local = space.bits @ weights
        for s in range(space.size):
            v = self.matrix(space.positions[s])
            base = int(space.keys[s]) - int(local[s])
            targets = space.lookup(base + np.arange(2 ** M))
            column = v[:, local[s]]
            keep = (targets >= 0) & (column != 0)
            rows.append(targets[keep])
            cols.append(np.full(int(keep.sum()), s))
            vals.append(column[keep])
        if not rows:
            return sp.csr_matrix((space.size, space.size), dtype=complex)
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(space.size, space.size),
        ).tocsr()

    def apply(self, state: StateVector) -> StateVector:
        return StateVector(state.space, self.operator(state.space) @ state.amplitudes)


class GaugeService:
    """Service for gauge maps, swap conjugations and the layout equivalence audit."""

    @staticmethod
    def identity_gauge(circuit: Circuit) -> tuple[Circuit, GaugeMap]:
        """Identity-gate circuit with the map U such that H_identity = U^dagger H U."""
        return CircuitService.identity_circuit(circuit), GaugeMap(circuit)

    @staticmethod
    def gauge_operator(op: SparseOperator, gauge: GaugeMap) -> SparseOperator:
        """U^dagger op U."""
        unitary = gauge.operator(op.space)
        return SparseOperator((unitary.conj().T @ op.matrix @ unitary).tocsr(), op.space)

    @staticmethod
    def swap_permutation(space: Space, A: int, B: int, k: int) -> np.ndarray:
        """Image index of every state under W: rails A and B exchanged when both sit at k or later.

        States whose exchanged positions fall outside a window, or outside the space, are fixed.
        """
        circuit = space.circuit
        if A == B:
            raise GaugeError("a swap needs two distinct qubits")
        for q in (A, B):
            if not 1 <= q <= circuit.M or not circuit.rest(q) <= k <= circuit.final(q):
                raise GaugeError(f"step {k} outside the window of qubit {q}")
        a, b = A - 1, B - 1
        positions, bits = space.positions.copy(), space.bits.copy()
        active = (positions[:, a] >= k) & (positions[:, b] >= k)
        positions[:, [a, b]] = positions[:, [b, a]]
        bits[:, [a, b]] = bits[:, [b, a]]
        basis = space.basis
        fits = active & np.all((positions >= basis.rests) & (positions - basis.rests < basis.radices), axis=1)
        image = np.arange(space.size)
        if np.any(fits):
            offsets = positions[fits] - basis.rests
            keys = offsets @ basis.position_strides + bits[fits] @ basis.bit_weights
            found = space.lookup(keys)
            moved = np.flatnonzero(fits)
            image[moved[found >= 0]] = found[found >= 0]
        return image

    @staticmethod
    def swap_conjugate(op: SparseOperator, A: int, B: int, k: int, space: Optional[Space] = None) -> SparseOperator:
        """W^dagger op W for the rail exchange W of qubits A and B from step k on."""
        space = space if space is not None else op.space
        if space.size != op.dimension:
            raise GaugeError(f"operator of dimension {op.dimension} on a space of {space.size} states")
        image = GaugeService.swap_permutation(space, A, B, k)
        w = sp.csr_matrix((np.ones(space.size), (image, np.arange(space.size))), shape=(space.size,) * 2)
        return SparseOperator((w.T @ op.matrix @ w).tocsr(), space)

    @staticmethod
    def swap_chain(M: int, N: int) -> list[tuple[int, str, list[Pair]]]:
        """(step k, kind, swapped pairs) in the order the stages are applied to the state.

        W stages sit at k = 6, 10, ... and exchange (3,4), (5,6), ..., (M-2, M-1);
        V stages sit at k = 8, 12, ... and exchange (2,3), (4,5), ..., (M-3, M-2).
        """
        chain = []
        for k in range(6, N - 4, 2):
            if k % 4 == 2:
                chain.append((k, "W", [(a, a + 1) for a in range(3, M - 1, 2)]))
            else:
                chain.append((k, "V", [(a, a + 1) for a in range(2, M - 2, 2)]))
        return [stage for stage in chain if stage[2]]

    @staticmethod
    def transformed_rows(M: int, last_step: int, stages: Sequence[tuple[int, str, list[Pair]]]) -> dict[int, list[list[int]]]:
        """1-D rows after conjugation by the given stages (outermost first)."""
        table = {}
        for step, pairs in CircuitService.rows_1d(M, last_step).items():
            relabelled = [list(p) for p in pairs]
            for k, _, swaps in reversed(stages):
                if step < k:
                    continue
                for a, b in swaps:
                    relabelled = [[b if q == a else a if q == b else q for q in p] for p in relabelled]
            table[step] = sorted(sorted(p) for p in relabelled)
        return table

    @staticmethod
    def map_positions(positions: np.ndarray, bits: np.ndarray,
                      stages: Sequence[tuple[int, str, list[Pair]]]) -> tuple[np.ndarray, np.ndarray]:
        """Apply the stage exchanges to (n, M) position and bit arrays, first stage first."""
        positions, bits = positions.copy(), bits.copy()
        for k, _, swaps in stages:
            for a, b in swaps:
                active = (positions[:, a - 1] >= k) & (positions[:, b - 1] >= k)
                for arr in (positions, bits):
                    left = arr[active, a - 1].copy()
                    arr[active, a - 1] = arr[active, b - 1]
                    arr[active, b - 1] = left
        return positions, bits

    @staticmethod
    def verify_all_to_all_equivalence(M: int, n: int, tol: float = 1e-9,
                                      lambda_grid: Sequence[float] = (0.3, 0.7, 1.0),
                                      spectra: bool = True, levels: int = 6) -> EquivalenceReport:
        """Audit the swap chain: stage-by-stage pairing tables and restricted spectra."""
        one_d = CircuitService.build_1d_circuit(M, n)
        all_to_all = CircuitService.build_all_to_all_circuit(M, n)
        N = one_d.N
        target = {step: sorted(sorted(p) for p in pairs)
                  for step, pairs in CircuitService.rows_all_to_all(M, N - 3).items()}
        chain = GaugeService.swap_chain(M, N)

        report = EquivalenceReport(M=M, n=n, tol=tol)
        for index in range(1, len(chain) + 1):
            k, kind, swaps = chain[index - 1]
            table = GaugeService.transformed_rows(M, N - 3, chain[:index])
            matched = 2
            for step in sorted(table):
                if table[step] != target[step]:
                    break
                matched = step
            mismatches = []
            if matched < min(k + 2, N - 3):
                mismatches.append(f"stage {index} (k={k}) matches only through step {matched}")
            report.stages.append(EquivalenceStage(
                index=index, step=k, kind=kind, swapped_pairs=[list(p) for p in swaps],
                table=table, matched_through=matched, mismatches=mismatches,
            ))
        final = GaugeService.transformed_rows(M, N - 3, chain)
        report.final_table_match = final == target

        if spectra:
            for lam in lambda_grid:
                report.spectra.append(GaugeService._compare_spectra(one_d, all_to_all, chain, lam, levels))
        logger.info("equivalence M=%d n=%d: tables %s, max deviation %.3e", M, n,
                    "match" if report.final_table_match else "differ", report.max_deviation)
        return report

    @staticmethod
    def _compare_spectra(one_d: Circuit, all_to_all: Circuit, chain, lam: float, levels: int) -> SpectralDeviation:
        """H(lambda) of both layouts on every time-valid tuple and bit pattern, pulled through the chain."""
        spaces = []
        for circuit in (one_d, all_to_all):
            basis = BasisService.enumerate_basis(circuit)
            spaces.append(BasisService.penalty_free_space(basis))
        space_1d, space_a2a = spaces
        h_1d = HamiltonianService.assemble(one_d, lam, space_1d).matrix
        h_a2a = HamiltonianService.assemble(all_to_all, lam, space_a2a).matrix

        positions, bits = GaugeService.map_positions(space_a2a.positions, space_a2a.bits, chain)
        basis_1d = space_1d.basis
        inside = np.all((positions >= basis_1d.rests) & (positions - basis_1d.rests < basis_1d.radices), axis=1)
        image = np.full(space_a2a.size, -1)
        keys = (positions[inside] - basis_1d.rests) @ basis_1d.position_strides + bits[inside] @ basis_1d.bit_weights
        image[inside] = space_1d.lookup(keys)
        dimension = space_a2a.size
        if space_1d.size != dimension or np.any(image < 0) or np.unique(image).size != dimension:
            logger.warning("penalty-free spaces do not correspond at lambda=%s", lam)
            return SpectralDeviation(lam=lam, dimension=dimension, matrix_deviation=float('inf'),
                                     eigen_deviation=float('inf'))
        pulled = h_1d[image][:, image]
        diff = (pulled - h_a2a).tocoo()
        matrix_deviation = float(np.abs(diff.data).max()) if diff.nnz else 0.0

        if dimension <= solver_config.dense_threshold:
            eig_1d = sla.eigvalsh(h_1d.toarray())
            eig_a2a = sla.eigvalsh(h_a2a.toarray())
        else:
            k = min(levels, dimension)
            eig_1d = np.array([p.value for p in SpectraService.extremal_eigs(h_1d, k=k, lower_bound=0.0)])
            eig_a2a = np.array([p.value for p in SpectraService.extremal_eigs(h_a2a, k=k, lower_bound=0.0)])
        eigen_deviation = float(np.max(np.abs(eig_1d - eig_a2a))) if dimension else 0.0
        return SpectralDeviation(lam=lam, dimension=dimension, matrix_deviation=matrix_deviation,
                                 eigen_deviation=eigen_deviation)
