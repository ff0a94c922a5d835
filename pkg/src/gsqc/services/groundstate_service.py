"""History ground state of H(lambda) built by forward propagation."""

import logging
from typing import Optional

import numpy as np

from ..models.circuit import Circuit
from ..models.operators import Schedule, Space, StateVector
from ..models.spaces import SubBasis
from .basis_service import BasisService

logger = logging.getLogger(__name__)


class GroundStateService:
    """Service for the zero-energy ground state and its occupations."""

    @staticmethod
    def propagation_space(circuit: Circuit) -> SubBasis:
        """Time-valid positions times all bit patterns: the support of every ground state."""
        basis = BasisService.enumerate_basis(circuit)
        return BasisService.penalty_free_space(basis)

    @staticmethod
    def history_ground_state(circuit: Circuit, lam: float, space: Optional[Space] = None,
                             shifted: bool = True, reverse_within_layer: bool = False) -> StateVector:
        """Exact ground state of H(lambda), normalized.

        Amplitudes are fixed layer by layer in the total displacement sum_A (i_A - rest_A):
        each state copies its predecessor through the gate of its most advanced qubit
        (lambda_A * I on the entry step), starting from 1 on the all-rest, all-zero state.
        """
        work = GroundStateService.propagation_space(circuit)
        values = Schedule(M=circuit.M, shifted=shifted).values(lam)
        basis = work.basis
        positions, bits, keys = work.positions, work.bits, work.keys
        rests = basis.rests
        offsets = positions - rests
        layers = offsets.sum(axis=1)
        amplitudes = np.zeros(work.size, dtype=complex)

        # most advanced qubit (lowest index on ties); rest sites are never chosen
        ranked = np.where(offsets > 0, positions, np.iinfo(np.int64).min)
        chosen = np.argmax(ranked, axis=1)
        advanced = positions[np.arange(work.size), chosen]

        start = np.flatnonzero((layers == 0) & (bits.sum(axis=1) == 0))
        amplitudes[start] = 1.0

        for layer in range(1, int(layers.max(initial=0)) + 1):
            in_layer = np.flatnonzero(layers == layer)
            groups = sorted({(int(chosen[s]), int(advanced[s])) for s in in_layer})
            if reverse_within_layer:
                groups.reverse()
            for a, step in groups:
                members = in_layer[(chosen[in_layer] == a) & (advanced[in_layer] == step)]
                qubit = a + 1
                gate = circuit.gate_at(qubit, step)
                if step == circuit.origin(qubit):
                    cols, matrix = [a], float(values[a]) * np.eye(2)
                elif gate is not None and gate.is_pair:
                    cols, matrix = [q - 1 for q in gate.qubits], gate.unitary
                    partner = gate.partner(qubit) - 1
                    members = members[positions[members, partner] == step]
                elif gate is not None:
                    cols, matrix = [a], gate.unitary
                else:
                    continue
                amplitudes[members] = GroundStateService._propagate(
                    work, amplitudes, members, cols, matrix
                )

        state = StateVector(work, amplitudes).normalized()
        logger.debug("ground state at lambda=%s over %d states", lam, work.size)
        if space is not None and space is not work:
            return state.on(space)
        return state

    @staticmethod
    def _propagate(space: SubBasis, amplitudes: np.ndarray, members: np.ndarray,
                   cols: list[int], matrix: np.ndarray) -> np.ndarray:
        """psi(.., i, b, ..) = sum_beta U[b, beta] psi(.., i-1, beta, ..)."""
        basis = space.basis
        k = len(cols)
        weights = basis.bit_weights[cols]
        local_bits = space.bits[np.ix_(members, cols)]
        local = local_bits @ (2 ** np.arange(k - 1, -1, -1))
        base = space.keys[members] - local_bits @ weights - int(basis.position_strides[cols].sum())
        result = np.zeros(members.size, dtype=complex)
        for source_local in range(2 ** k):
            source_bits = np.array([(source_local >> (k - 1 - j)) & 1 for j in range(k)])
            rows = space.lookup(base + int(source_bits @ weights))
            found = rows >= 0
            contribution = np.zeros(members.size, dtype=complex)
            contribution[found] = amplitudes[rows[found]]
            result += matrix[local, source_local] * contribution
        return result

    @staticmethod
    def occupation(state: StateVector, qubit: int, step: int, bit: Optional[int] = None) -> float:
        """Probability that qubit A sits at step i (with bit b when given)."""
        return state.occupation(qubit, step, bit)

    @staticmethod
    def rest_occupation(state: StateVector, qubit: int) -> float:
        """Probability of qubit A at its rest site with bit 0."""
        return state.occupation(qubit, state.space.circuit.rest(qubit), 0)

    @staticmethod
    def closed_form_occupation(circuit: Circuit, lam: float, shifted: bool = True) -> float:
        """Closed-form rest occupation of the active qubit on layered circuits.

        1/(1 + 3 lambda_A^2) while A < M, and 1/(1 + (N-4) lambda_M^2) for the last qubit.
        """
        schedule = Schedule(M=circuit.M, shifted=shifted)
        active = schedule.active_qubit(lam)
        value = float(schedule.values(lam)[active - 1])
        reach = 3 if active < circuit.M else circuit.N - 4
        return 1.0 / (1.0 + reach * value ** 2)

    @staticmethod
    def occupation_rows(state: StateVector, lam: float) -> list[list]:
        """CSV rows (lambda, A, i, probability) over every qubit window."""
        circuit = state.space.circuit
        rows = []
        for qubit in range(1, circuit.M + 1):
            for step in range(circuit.rest(qubit), circuit.final(qubit) + 1):
                rows.append([lam, qubit, step, state.occupation(qubit, step)])
        return rows
