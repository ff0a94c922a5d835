"""Occupation basis models: one particle (i_A, b_A) per qubit rail."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional

import numpy as np

from ..config import solver_config
from ..exceptions import BasisError
from .circuit import Circuit

MAX_BASIS_STATES = 2 ** 31


@dataclass(frozen=True)
class BasisState:
    """Positions i_A and bits b_A, qubit 1 first."""

    positions: tuple[int, ...]
    bits: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Basis:
    """Lazy mixed-radix enumeration of the unrestricted basis.

    The dense index is ``pos_index * 2**M + bits_index`` with qubit 1 as the most
    significant digit of both parts, so positions are the outer loop and bits the inner.
    """

    circuit: Circuit

    def __post_init__(self):
        if self.size > MAX_BASIS_STATES:
            raise BasisError(f"basis of {self.size} states exceeds the 2^31 index guard")

    @property
    def M(self) -> int:
        return self.circuit.M

    @cached_property
    def radices(self) -> np.ndarray:
        return np.array([self.circuit.radix(a) for a in range(1, self.M + 1)], dtype=np.int64)

    @cached_property
    def rests(self) -> np.ndarray:
        return np.array([self.circuit.rest(a) for a in range(1, self.M + 1)], dtype=np.int64)

    @cached_property
    def position_strides(self) -> np.ndarray:
        """Key increment for moving qubit A one step forward."""
        strides = np.ones(self.M, dtype=np.int64)
        for a in range(self.M - 2, -1, -1):
            strides[a] = strides[a + 1] * self.radices[a + 1]
        return strides * (2 ** self.M)

    @cached_property
    def bit_weights(self) -> np.ndarray:
        return np.array([2 ** (self.M - 1 - a) for a in range(self.M)], dtype=np.int64)

    @cached_property
    def position_count(self) -> int:
        return int(np.prod([int(r) for r in self.radices]))

    @property
    def size(self) -> int:
        return self.position_count * 2 ** self.M

    @property
    def basis(self) -> 'Basis':
        return self

    def encode(self, positions: np.ndarray, bits: np.ndarray) -> np.ndarray:
        """Keys of position/bit arrays shaped (n, M)."""
        positions = np.atleast_2d(np.asarray(positions, dtype=np.int64))
        bits = np.atleast_2d(np.asarray(bits, dtype=np.int64))
        offsets = positions - self.rests
        if np.any(offsets < 0) or np.any(offsets >= self.radices):
            raise BasisError("position outside its qubit window")
        return offsets @ self.position_strides + bits @ self.bit_weights

    def decode(self, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Positions and bits, each shaped (n, M), of an array of keys."""
        keys = np.asarray(keys, dtype=np.int64)
        bits_index = keys % (2 ** self.M)
        pos_index = keys // (2 ** self.M)
        positions = np.empty((keys.size, self.M), dtype=np.int64)
        bits = np.empty((keys.size, self.M), dtype=np.int64)
        for a in range(self.M - 1, -1, -1):
            positions[:, a] = pos_index % self.radices[a] + self.rests[a]
            pos_index = pos_index // self.radices[a]
            bits[:, a] = (bits_index >> (self.M - 1 - a)) & 1
        return positions, bits

    def index(self, state: BasisState) -> int:
        return int(self.encode(np.array([state.positions]), np.array([state.bits]))[0])

    def state(self, index: int) -> BasisState:
        if not 0 <= index < self.size:
            raise BasisError(f"index {index} outside basis of size {self.size}")
        positions, bits = self.decode(np.array([index]))
        return BasisState(tuple(int(p) for p in positions[0]), tuple(int(b) for b in bits[0]))

    def _materialise_guard(self) -> None:
        if self.size > solver_config.max_states:
            raise BasisError(
                f"materialising {self.size} states exceeds GSQC_MAX_STATES={solver_config.max_states}"
            )

    @cached_property
    def keys(self) -> np.ndarray:
        self._materialise_guard()
        return np.arange(self.size, dtype=np.int64)

    @cached_property
    def positions(self) -> np.ndarray:
        return self.decode(self.keys)[0]

    @cached_property
    def bits(self) -> np.ndarray:
        return self.decode(self.keys)[1]

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.int64)
        return np.where((keys >= 0) & (keys < self.size), keys, -1)

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[BasisState]:
        for index in range(self.size):
            yield self.state(index)


@dataclass(frozen=True, eq=False)
class SubBasis:
    """Sorted selection of parent-basis keys with a tag naming its predicate."""

    basis: Basis
    keys: np.ndarray
    tag: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        keys = np.unique(np.asarray(self.keys, dtype=np.int64))
        object.__setattr__(self, 'keys', keys)

    @property
    def M(self) -> int:
        return self.basis.M

    @property
    def circuit(self) -> Circuit:
        return self.basis.circuit

    @property
    def size(self) -> int:
        return int(self.keys.size)

    @cached_property
    def _decoded(self) -> tuple[np.ndarray, np.ndarray]:
        return self.basis.decode(self.keys)

    @property
    def positions(self) -> np.ndarray:
        return self._decoded[0]

    @property
    def bits(self) -> np.ndarray:
        return self._decoded[1]

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        """Local indices of parent keys, -1 where absent."""
        keys = np.asarray(keys, dtype=np.int64)
        if self.size == 0:
            return np.full(keys.shape, -1, dtype=np.int64)
        where = np.searchsorted(self.keys, keys)
        where = np.clip(where, 0, self.size - 1)
        return np.where(self.keys[where] == keys, where, -1)

    def __len__(self) -> int:
        return self.size


@dataclass(frozen=True, eq=False)
class VertexSet:
    """Lexicographically sorted time-valid position tuples of a circuit."""

    circuit: Circuit
    positions: np.ndarray
    pinned: Optional[dict] = None

    def __len__(self) -> int:
        return int(self.positions.shape[0])

    def tuples(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in row) for row in self.positions]

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {t: k for k, t in enumerate(self.tuples())}

    def __contains__(self, item: tuple[int, ...]) -> bool:
        return tuple(item) in self.index
