"""Basis enumeration, sectors and the time-valid (penalty-free) configurations."""

import itertools
import logging
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ..config import solver_config
from ..exceptions import BasisError
from ..models.circuit import Circuit
from ..models.spaces import Basis, SubBasis, VertexSet

logger = logging.getLogger(__name__)

BitSpec = Union[str, Sequence[int], None]


class BasisService:
    """Service for bases, sub-bases and vertex sets."""

    @staticmethod
    def enumerate_basis(circuit: Circuit) -> Basis:
        """Full mixed-radix basis (positions outer, bits inner)."""
        basis = Basis(circuit)
        logger.debug("basis of %d states (%d position tuples)", basis.size, basis.position_count)
        return basis

    @staticmethod
    def bit_patterns(M: int, bits: BitSpec, zero_qubits: Iterable[int] = ()) -> np.ndarray:
        """Bit indices matching a spec: None (all), "all-zero", one pattern or a list of them."""
        zero_mask = sum(2 ** (M - q) for q in zero_qubits)
        if bits is None:
            patterns = np.arange(2 ** M, dtype=np.int64)
        elif isinstance(bits, str):
            if bits != "all-zero":
                raise BasisError(f"unknown bit spec {bits!r}")
            patterns = np.zeros(1, dtype=np.int64)
        else:
            rows = np.atleast_2d(np.asarray(bits, dtype=np.int64))
            if rows.shape[1] != M or np.any((rows != 0) & (rows != 1)):
                raise BasisError(f"bit pattern must hold {M} zeros or ones")
            patterns = rows @ (2 ** np.arange(M - 1, -1, -1))
        return patterns[(patterns & zero_mask) == 0]

    @staticmethod
    def position_product(circuit: Circuit, choices: Sequence[Sequence[int]]) -> np.ndarray:
        """All position tuples from per-qubit candidate lists, lexicographic."""
        count = int(np.prod([len(c) for c in choices]))
        if count > solver_config.max_states:
            raise BasisError(f"{count} position tuples exceed GSQC_MAX_STATES")
        if count == 0:
            return np.zeros((0, circuit.M), dtype=np.int64)
        grids = np.meshgrid(*[np.asarray(c, dtype=np.int64) for c in choices], indexing='ij')
        return np.stack([g.ravel() for g in grids], axis=1)

    @staticmethod
    def space_from_positions(basis: Basis, positions: np.ndarray, bits: BitSpec = None,
                             zero_qubits: Iterable[int] = (), tag: str = "custom") -> SubBasis:
        """Sub-basis spanned by the given position tuples times the selected bit patterns."""
        patterns = BasisService.bit_patterns(basis.M, bits, zero_qubits)
        if positions.shape[0] == 0 or patterns.size == 0:
            return SubBasis(basis, np.zeros(0, dtype=np.int64), tag=tag)
        pos_keys = (positions - basis.rests) @ basis.position_strides
        keys = (pos_keys[:, None] + patterns[None, :]).ravel()
        if keys.size > solver_config.max_states:
            raise BasisError(f"{keys.size} states exceed GSQC_MAX_STATES")
        return SubBasis(basis, keys, tag=tag)

    @staticmethod
    def sector(basis: Basis, bits: BitSpec = "all-zero", active: Optional[int] = None) -> SubBasis:
        """States with the given bits whose qubits B > active sit at rest with bit 0."""
        circuit = basis.circuit
        M = circuit.M
        active = M if active is None else active
        if not 0 <= active <= M:
            raise BasisError(f"active prefix {active} outside [0, {M}]")
        pinned = range(active + 1, M + 1)
        if bits is not None and not isinstance(bits, str):
            pattern = np.asarray(bits)
            if pattern.ndim == 1 and any(pattern[b - 1] for b in pinned):
                raise BasisError("empty sector: a pinned qubit is asked to carry bit 1")
        choices = [
            list(range(circuit.rest(a), circuit.final(a) + 1)) if a <= active else [circuit.rest(a)]
            for a in range(1, M + 1)
        ]
        positions = BasisService.position_product(circuit, choices)
        space = BasisService.space_from_positions(basis, positions, bits, zero_qubits=pinned,
                                                  tag=f"sector(active={active})")
        if space.size == 0:
            raise BasisError("empty sector")
        return space

    @staticmethod
    def penalty_free_vertices(circuit: Circuit, pinned: Optional[dict[int, int]] = None,
                              off_rest: Iterable[int] = (), at_rest: Iterable[int] = ()) -> VertexSet:
        """Time-valid position tuples: no pair (A, B) straddles one of its 2-qubit gates.

        Tuples are grown qubit by qubit; each new column is filtered against every earlier
        qubit it shares gates with, so only consistent prefixes survive.
        """
        pinned = dict(pinned or {})
        off_rest, at_rest = set(off_rest), set(at_rest)
        M = circuit.M
        steps: dict[tuple[int, int], np.ndarray] = {}
        for gate in circuit.pair_gates:
            steps.setdefault(gate.qubits, []).append(gate.time)
        steps = {key: np.asarray(sorted(v)) for key, v in steps.items()}

        def candidates(a: int) -> np.ndarray:
            if a in pinned:
                return np.array([pinned[a]], dtype=np.int64)
            if a in at_rest:
                return np.array([circuit.rest(a)], dtype=np.int64)
            low = circuit.origin(a) if a in off_rest else circuit.rest(a)
            return np.arange(low, circuit.final(a) + 1, dtype=np.int64)

        tuples = candidates(1).reshape(-1, 1)
        for b in range(2, M + 1):
            column = candidates(b)
            grown = np.hstack([np.repeat(tuples, column.size, axis=0),
                               np.tile(column, tuples.shape[0]).reshape(-1, 1)])
            keep = np.ones(grown.shape[0], dtype=bool)
            for a in range(1, b):
                gate_steps = steps.get((a, b))
                if gate_steps is None:
                    continue
                side_a = np.searchsorted(gate_steps, grown[:, a - 1], side='right')
                side_b = np.searchsorted(gate_steps, grown[:, b - 1], side='right')
                keep &= side_a == side_b
            tuples = grown[keep]
            if tuples.shape[0] > solver_config.max_states:
                raise BasisError("penalty-free enumeration exceeds GSQC_MAX_STATES")
        logger.debug("%d time-valid tuples for M=%d N=%d", tuples.shape[0], M, circuit.N)
        return VertexSet(circuit, tuples, pinned=pinned or None)

    @staticmethod
    def brute_force_vertices(circuit: Circuit) -> list[tuple[int, ...]]:
        """Reference enumeration: filter every position tuple against every pair gate."""
        ranges = [range(circuit.rest(a), circuit.final(a) + 1) for a in range(1, circuit.M + 1)]
        gates = [(g.qubits[0], g.qubits[1], g.time) for g in circuit.pair_gates]
        found = []
        for positions in itertools.product(*ranges):
            if all(not (positions[a - 1] < j <= positions[b - 1] or positions[b - 1] < j <= positions[a - 1])
                   for a, b, j in gates):
                found.append(positions)
        return found

    @staticmethod
    def penalty_free_space(basis: Basis, bits: BitSpec = None, off_rest: Iterable[int] = (),
                           at_rest: Iterable[int] = (), zero_qubits: Iterable[int] = (),
                           vertices: Optional[VertexSet] = None) -> SubBasis:
        """Time-valid tuples of the basis circuit times the selected bit patterns."""
        off_rest, at_rest = tuple(off_rest), tuple(at_rest)
        if vertices is None:
            vertices = BasisService.penalty_free_vertices(basis.circuit, off_rest=off_rest,
                                                          at_rest=at_rest)
        else:
            positions = vertices.positions
            keep = np.ones(positions.shape[0], dtype=bool)
            for a in off_rest:
                keep &= positions[:, a - 1] != basis.circuit.rest(a)
            for a in at_rest:
                keep &= positions[:, a - 1] == basis.circuit.rest(a)
            vertices = VertexSet(basis.circuit, positions[keep])
        tag = f"penalty-free(off={list(off_rest)}, rest={list(at_rest)})"
        return BasisService.space_from_positions(basis, vertices.positions, bits, zero_qubits, tag=tag)

    @staticmethod
    def complement(space: SubBasis, within: SubBasis) -> SubBasis:
        """States of ``within`` that are not in ``space``."""
        keys = np.setdiff1d(within.keys, space.keys, assume_unique=True)
        return SubBasis(within.basis, keys, tag=f"complement({space.tag})")

    @staticmethod
    def vertex_rows(vertices: VertexSet) -> list[list[int]]:
        """CSV rows i_1,...,i_M."""
        return [list(t) for t in vertices.tuples()]
