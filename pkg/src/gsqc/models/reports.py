"""Report models emitted by scans, certificates, evolutions and the verify suite."""

from typing import Any, ClassVar, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr


class GapPoint(BaseModel):
    """Spectral data at one lambda."""

    lam: float
    active_qubit: int
    e0: float
    e1_full: float
    gap: float
    e1_reduced: Optional[float] = None
    occupation: Optional[float] = None
    bound_occupation: Optional[float] = None
    bound_closed_form: Optional[float] = None
    residual: float = 0.0


class GapScan(BaseModel):
    """Gap scan over a lambda grid."""

    M: int
    N: int
    layout: str
    points: list[GapPoint] = Field(default_factory=list)

    @property
    def min_gap(self) -> float:
        return min(p.gap for p in self.points)

    @property
    def occupation_bound(self) -> Optional[float]:
        bounds = [p.bound_occupation for p in self.points if p.bound_occupation is not None]
        return min(bounds) if bounds else None

    CSV_HEADER: ClassVar[list[str]] = ["lambda", "e0", "e1_full", "gap", "e1_reduced", "occupation", "bound_occupation", "bound_closed_form"]

    def csv_rows(self) -> list[list[Any]]:
        return [
            [p.lam, p.e0, p.e1_full, p.gap, p.e1_reduced, p.occupation, p.bound_occupation, p.bound_closed_form]
            for p in self.points
        ]


class EquivalenceStage(BaseModel):
    """One conjugation of the swap chain and the pairing table it produces."""

    index: int
    step: int
    kind: str
    swapped_pairs: list[list[int]]
    table: dict[int, list[list[int]]]
    matched_through: int
    mismatches: list[str] = Field(default_factory=list)


class SpectralDeviation(BaseModel):
    """Penalty-free restricted comparison at one lambda."""

    lam: float
    dimension: int
    matrix_deviation: float
    eigen_deviation: float


class EquivalenceReport(BaseModel):
    """1-D to all-to-all equivalence audit."""

    M: int
    n: int
    tol: float
    stages: list[EquivalenceStage] = Field(default_factory=list)
    spectra: list[SpectralDeviation] = Field(default_factory=list)
    final_table_match: bool = False

    @property
    def max_deviation(self) -> float:
        return max((max(s.matrix_deviation, s.eigen_deviation) for s in self.spectra), default=0.0)

    @property
    def passed(self) -> bool:
        staged = all(not stage.mismatches for stage in self.stages)
        return self.final_table_match and staged and self.max_deviation <= self.tol


class ConditionCheck(BaseModel):
    """Outcome of one path-family condition."""

    name: str
    passed: bool
    witness: Optional[str] = None


class CertifiedBound(BaseModel):
    """Verified path certificate and the spectral lower bound it yields."""

    graph: dict[str, Any]
    vertices: int
    horizon: int
    congestion: int
    congestion_cap: Optional[int] = None
    bound: float
    sharp_bound: float
    E: float = 1.0
    valid: bool
    conditions: list[ConditionCheck]
    rayleigh: Optional[float] = None
    paths: Optional[list[list[list[int]]]] = None


class EvolutionCheckpoint(BaseModel):
    """State diagnostics at one time of an evolution."""

    t: float
    lam: float
    overlap: float
    norm: float


class EvolutionResult(BaseModel):
    """Outcome of an adiabatic evolution."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    total_time: float
    steps: int
    fidelity: float
    norm_drift: float
    checkpoints: list[EvolutionCheckpoint] = Field(default_factory=list)

    _final_state: Optional[np.ndarray] = PrivateAttr(default=None)

    @property
    def infidelity(self) -> float:
        return max(0.0, 1.0 - self.fidelity)

    @property
    def final_state(self) -> Optional[np.ndarray]:
        return self._final_state

    CSV_HEADER: ClassVar[list[str]] = ["t", "lambda", "overlap_with_instantaneous_ground", "norm"]

    def csv_rows(self) -> list[list[Any]]:
        return [[c.t, c.lam, c.overlap, c.norm] for c in self.checkpoints]


class ExcitationBound(BaseModel):
    """Adiabatic excitation bound, full expression and the simplified cap."""

    M: int
    g_min: float
    total_time: float
    E: float = 1.0
    full: float
    simplified: float

    @property
    def simplified_dominates(self) -> bool:
        return self.full <= self.simplified


class VerifyCheck(BaseModel):
    """One entry of the theorem suite."""

    name: str
    passed: bool
    detail: dict[str, Any] = Field(default_factory=dict)


class VerifyReport(BaseModel):
    """Result of the full theorem suite for one instance."""

    run_id: str
    config: dict[str, Any]
    checks: list[VerifyCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]
