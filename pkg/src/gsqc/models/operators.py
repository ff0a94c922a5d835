"""Operator, schedule and state models."""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, Field

from ..exceptions import BasisError, ScheduleError
from .spaces import Basis, SubBasis

Space = Union[Basis, SubBasis]


def smoothstep(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Quintic ramp F(x) = 10x^3 - 15x^4 + 6x^5, clamped to 0 below and 1 above [0, 1]."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    value = x ** 3 * (10.0 - 15.0 * x + 6.0 * x ** 2)
    return float(value) if value.ndim == 0 else value


def smoothstep_derivative(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """F'(x) = 30x^2(1 - x)^2 inside [0, 1], zero outside."""
    x = np.asarray(x, dtype=float)
    inside = (x >= 0.0) & (x <= 1.0)
    value = np.where(inside, 30.0 * x ** 2 * (1.0 - x) ** 2, 0.0)
    return float(value) if value.ndim == 0 else value


class EnergyScale(BaseModel):
    """Energy prefactor of every Hamiltonian term."""

    E: float = Field(1.0, gt=0)


class Schedule(BaseModel):
    """Per-qubit turn-on schedule lambda -> (lambda_1, ..., lambda_M).

    With ``shifted`` (default) lambda_A = F(M*lambda - (A-1)), so qubit A finishes exactly at
    lambda = A/M. ``shifted=False`` gives the unshifted F(M*lambda - A).
    """

    M: int = Field(ge=1)
    shifted: bool = True

    def _arguments(self, lam: float) -> np.ndarray:
        if not 0.0 <= lam <= 1.0:
            raise ScheduleError(f"lambda={lam} outside [0, 1]")
        offset = 1 if self.shifted else 0
        return self.M * lam - (np.arange(1, self.M + 1) - offset)

    def values(self, lam: float) -> np.ndarray:
        return np.asarray(smoothstep(self._arguments(lam)), dtype=float).reshape(self.M)

    def derivatives(self, lam: float) -> np.ndarray:
        """d lambda_A / d lambda."""
        return self.M * np.asarray(smoothstep_derivative(self._arguments(lam))).reshape(self.M)

    def active_qubit(self, lam: float) -> int:
        """A(lambda) = floor(M*lambda) + 1, capped at M."""
        if not 0.0 <= lam <= 1.0:
            raise ScheduleError(f"lambda={lam} outside [0, 1]")
        return min(int(np.floor(self.M * lam + 1e-12)) + 1, self.M)


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Hermitian operator over a basis or sub-basis, stored as CSR."""

    matrix: sp.csr_matrix
    space: Space

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def hermiticity_error(self) -> float:
        diff = (self.matrix - self.matrix.conj().T).tocoo()
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0

    @property
    def is_hermitian(self) -> bool:
        return self.hermiticity_error() <= 1e-12

    @property
    def is_real(self) -> bool:
        return not np.any(np.abs(self.matrix.data.imag) > 0.0)

    def as_real_if_possible(self) -> sp.csr_matrix:
        return self.matrix.real.tocsr() if self.is_real else self.matrix

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ vector

    def expectation(self, vector: np.ndarray) -> float:
        return float(np.real(np.vdot(vector, self.matrix @ vector)))

    def __add__(self, other: 'SparseOperator') -> 'SparseOperator':
        if other.space is not self.space:
            raise BasisError("operators live on different spaces")
        return SparseOperator((self.matrix + other.matrix).tocsr(), self.space)

    def __sub__(self, other: 'SparseOperator') -> 'SparseOperator':
        if other.space is not self.space:
            raise BasisError("operators live on different spaces")
        return SparseOperator((self.matrix - other.matrix).tocsr(), self.space)

    def scaled(self, factor: float) -> 'SparseOperator':
        return SparseOperator((self.matrix * factor).tocsr(), self.space)

    def dump_lines(self) -> list[str]:
        """Header "dim,nnz" followed by "row,col,re,im" triplets in row-major order."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        lines = [f"{self.dimension},{coo.nnz}"]
        for k in order:
            z = coo.data[k]
            lines.append(f"{coo.row[k]},{coo.col[k]},{z.real:.15g},{z.imag:.15g}")
        return lines


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over a space."""

    space: Space
    amplitudes: np.ndarray

    @cached_property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> 'StateVector':
        if self.norm == 0.0:
            return self
        return StateVector(self.space, self.amplitudes / self.norm)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def occupation(self, qubit: int, step: int, bit: Optional[int] = None) -> float:
        """Probability of qubit A sitting at step i (with bit b when given)."""
        circuit = self.space.circuit
        if not circuit.rest(qubit) <= step <= circuit.final(qubit):
            raise BasisError(f"step {step} outside the window of qubit {qubit}")
        mask = self.space.positions[:, qubit - 1] == step
        if bit is not None:
            mask &= self.space.bits[:, qubit - 1] == bit
        return float(self.probabilities[mask].sum() / max(self.norm ** 2, 1e-300))

    def on(self, space: Space) -> 'StateVector':
        """Re-express the state on another space of the same basis (missing keys dropped)."""
        target = space.lookup(self.space.keys)
        amplitudes = np.zeros(space.size, dtype=complex)
        present = target >= 0
        amplitudes[target[present]] = self.amplitudes[present]
        return StateVector(space, amplitudes)

    def overlap(self, other: 'StateVector') -> complex:
        """<self|other> after aligning keys."""
        aligned = other.on(self.space) if other.space is not self.space else other
        return complex(np.vdot(self.amplitudes, aligned.amplitudes))

    def fidelity(self, other: 'StateVector') -> float:
        value = abs(self.overlap(other)) ** 2
        return float(value / max((self.norm * other.norm) ** 2, 1e-300))


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with its eigenvector and residual."""

    value: float
    vector: np.ndarray
    residual: float = 0.0
