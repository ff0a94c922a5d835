"""Gate-model circuit data models."""

from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

# Basis order of a 2-qubit matrix is 2*b_low + b_high; swapping the qubit order permutes it.
_PAIR_SWAP = np.array([0, 2, 1, 3])


def _as_pairs(matrix: Any) -> tuple[tuple[float, float], ...]:
    """Flatten a square complex matrix into row-major (re, im) pairs."""
    if isinstance(matrix, np.ndarray):
        flat = np.asarray(matrix, dtype=complex).ravel()
        return tuple((float(z.real), float(z.imag)) for z in flat)
    pairs = []
    for entry in matrix:
        if isinstance(entry, (list, tuple)):
            pairs.append((float(entry[0]), float(entry[1])))
        else:
            z = complex(entry)
            pairs.append((z.real, z.imag))
    return tuple(pairs)


class Layout(str, Enum):
    """Circuit layout tag."""

    ONE_D = "1d"
    ALL_TO_ALL = "all-to-all"
    CUSTOM = "custom"


class Gate(BaseModel):
    """One- or two-qubit gate placed at a time step."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    time: int = Field(alias='t', ge=1)
    qubits: tuple[int, ...] = Field(alias='q')
    matrix: tuple[tuple[float, float], ...] = Field(alias='u')

    @model_validator(mode='before')
    @classmethod
    def _normalize(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        qkey = 'q' if 'q' in data else 'qubits'
        ukey = 'u' if 'u' in data else 'matrix'
        qubits = tuple(int(q) for q in data.get(qkey, ()))
        matrix = data.get(ukey, ())
        if ukey in data:
            pairs = _as_pairs(matrix)
            if len(qubits) == 2 and qubits[0] > qubits[1] and len(pairs) == 16:
                u = np.array([complex(re, im) for re, im in pairs]).reshape(4, 4)
                pairs = _as_pairs(u[np.ix_(_PAIR_SWAP, _PAIR_SWAP)])
            data[ukey] = pairs
        if len(qubits) == 2:
            qubits = tuple(sorted(qubits))
        data[qkey] = qubits
        return data

    @field_validator('qubits')
    @classmethod
    def _check_qubits(cls, qubits: tuple[int, ...]) -> tuple[int, ...]:
        if len(qubits) not in (1, 2):
            raise ValueError("a gate acts on one or two qubits")
        if any(q < 1 for q in qubits):
            raise ValueError("qubit indices are 1-based")
        if len(qubits) == 2 and qubits[0] == qubits[1]:
            raise ValueError("two-qubit gates need two distinct qubits")
        return qubits

    @model_validator(mode='after')
    def _check_unitary(self) -> 'Gate':
        dim = 2 ** len(self.qubits)
        if len(self.matrix) != dim * dim:
            raise ValueError(f"expected a {dim}x{dim} matrix, got {len(self.matrix)} entries")
        u = self.unitary
        if not np.allclose(u.conj().T @ u, np.eye(dim), atol=1e-12, rtol=0.0):
            raise ValueError(f"gate at step {self.time} on {self.qubits} is not unitary")
        return self

    @classmethod
    def one(cls, time: int, qubit: int, matrix: Any = None) -> 'Gate':
        """Build a 1-qubit gate; identity when no matrix is given."""
        return cls(t=time, q=(qubit,), u=np.eye(2) if matrix is None else np.asarray(matrix, dtype=complex))

    @classmethod
    def two(cls, time: int, a: int, b: int, matrix: Any = None) -> 'Gate':
        """Build a 2-qubit gate on (a, b) with matrix index 2*b_a + b_b."""
        return cls(t=time, q=(a, b), u=np.eye(4) if matrix is None else np.asarray(matrix, dtype=complex))

    @property
    def kind(self) -> str:
        return "one-qubit" if len(self.qubits) == 1 else "two-qubit"

    @property
    def is_pair(self) -> bool:
        return len(self.qubits) == 2

    @property
    def unitary(self) -> np.ndarray:
        dim = 2 ** len(self.qubits)
        return np.array([complex(re, im) for re, im in self.matrix]).reshape(dim, dim)

    @property
    def is_identity(self) -> bool:
        return bool(np.allclose(self.unitary, np.eye(2 ** len(self.qubits)), atol=1e-12, rtol=0.0))

    def partner(self, qubit: int) -> Optional[int]:
        """Other qubit of a 2-qubit gate."""
        if not self.is_pair:
            return None
        a, b = self.qubits
        return b if qubit == a else a


class Circuit(BaseModel):
    """Circuit data: width M, depth N, per-qubit windows and the gate list."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    M: int = Field(ge=1)
    N: int = Field(ge=1)
    n: Optional[int] = None
    layout: Layout = Layout.CUSTOM
    origins: tuple[int, ...] = Field(alias='o')
    finals: tuple[int, ...] = Field(alias='f')
    gates: tuple[Gate, ...] = ()

    _slots: dict = PrivateAttr(default_factory=dict)
    _collisions: list = PrivateAttr(default_factory=list)

    def model_post_init(self, __context: Any) -> None:
        slots: dict[tuple[int, int], Gate] = {}
        collisions: list[tuple[int, int]] = []
        for gate in self.gates:
            for qubit in gate.qubits:
                key = (qubit, gate.time)
                if key in slots:
                    collisions.append(key)
                slots[key] = gate
        self._slots = slots
        self._collisions = collisions

    def origin(self, qubit: int) -> int:
        return self.origins[qubit - 1]

    def final(self, qubit: int) -> int:
        return self.finals[qubit - 1]

    def rest(self, qubit: int) -> int:
        """Rest site o_A - 1."""
        return self.origins[qubit - 1] - 1

    def radix(self, qubit: int) -> int:
        """Number of positions of a qubit, rest site included."""
        return self.finals[qubit - 1] - self.origins[qubit - 1] + 2

    def gate_at(self, qubit: int, step: int) -> Optional[Gate]:
        return self._slots.get((qubit, step))

    @property
    def collisions(self) -> list[tuple[int, int]]:
        """Slots (qubit, step) claimed by more than one gate."""
        return list(self._collisions)

    @property
    def pair_gates(self) -> list[Gate]:
        return sorted((g for g in self.gates if g.is_pair), key=lambda g: (g.time, g.qubits))

    def pair_steps(self, a: int, b: int) -> list[int]:
        """Steps at which qubits a and b share a 2-qubit gate."""
        key = tuple(sorted((a, b)))
        return [g.time for g in self.pair_gates if g.qubits == key]

    def pairs_at(self, step: int) -> frozenset[frozenset[int]]:
        """Unordered qubit pairs coupled at a step."""
        return frozenset(frozenset(g.qubits) for g in self.gates if g.is_pair and g.time == step)

    @property
    def is_identity(self) -> bool:
        return all(g.is_identity for g in self.gates)

    def with_gates(self, gates: list[Gate]) -> 'Circuit':
        """Copy of the circuit with a replaced gate list."""
        return Circuit(M=self.M, N=self.N, n=self.n, layout=self.layout,
                       o=self.origins, f=self.finals, gates=tuple(gates))

    def to_json_dict(self) -> dict[str, Any]:
        return self.model_dump(mode='json', by_alias=True)


class Violation(BaseModel):
    """A single violated circuit invariant."""

    rule: str
    qubit: Optional[int] = None
    step: Optional[int] = None
    message: str


class ValidationReport(BaseModel):
    """Circuit validation result; empty iff every invariant holds."""

    violations: list[Violation] = Field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    @property
    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}
