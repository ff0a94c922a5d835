"""Eigenvalues, spectral gaps and the analytic gap bounds of H(lambda)."""

import asyncio
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..config import app_config, solver_config
from ..exceptions import CircuitError, SpectralError
from ..models.circuit import Circuit, Layout
from ..models.operators import EigenPair, EnergyScale, Schedule, SparseOperator
from ..models.reports import GapPoint, GapScan
from ..models.spaces import Basis, SubBasis
from ..utils.linalg import gershgorin_lower
from .basis_service import BasisService
from .circuit_service import CircuitService
from .groundstate_service import GroundStateService
from .hamiltonian_service import HamiltonianService, HamiltonianSkeleton

logger = logging.getLogger(__name__)

Operand = Union[SparseOperator, sp.spmatrix, np.ndarray]


@dataclass(frozen=True)
class GapResult:
    """Two lowest levels of H(lambda) and the block that set the gap."""

    lam: float
    e0: float
    e1: float
    gap: float
    block: str
    residual: float = 0.0


@dataclass(frozen=True, eq=False)
class SpectralWorkspace:
    """Spaces and skeletons of one circuit, cached across lambda points.

    Work happens on the identity-gauged circuit, where every bit pattern is conserved.
    Only the all-zero and single-bit patterns are kept: setting further bits only adds
    rest-site penalties, so higher patterns never undercut their single-bit subsets.
    """

    circuit: Circuit
    scale: EnergyScale = field(default_factory=EnergyScale)
    shifted: bool = True

    @property
    def M(self) -> int:
        return self.circuit.M

    @property
    def schedule(self) -> Schedule:
        return Schedule(M=self.M, shifted=self.shifted)

    @cached_property
    def gauged(self) -> Circuit:
        return CircuitService.identity_circuit(self.circuit)

    @cached_property
    def basis(self) -> Basis:
        return BasisService.enumerate_basis(self.gauged)

    @cached_property
    def patterns(self) -> np.ndarray:
        rows = [[0] * self.M] + [[int(a == b) for b in range(self.M)] for a in range(self.M)]
        return np.array(rows, dtype=np.int64)

    @cached_property
    def space(self) -> SubBasis:
        return BasisService.penalty_free_space(self.basis, bits=self.patterns)

    @cached_property
    def skeleton(self) -> HamiltonianSkeleton:
        return HamiltonianService.skeleton(self.gauged, self.space, self.scale, self.shifted)

    @cached_property
    def pattern_index(self) -> np.ndarray:
        return self.space.bits @ self.basis.bit_weights

    @cached_property
    def at_rest(self) -> np.ndarray:
        return self.space.positions == self.basis.rests

    def block(self, pattern: int, off_rest: Iterable[int], pinned: Iterable[int]) -> np.ndarray:
        """Local indices of one invariant block: a bit pattern with pinned qubits at or off rest."""
        off_rest = set(off_rest)
        mask = self.pattern_index == pattern
        for qubit in pinned:
            at_rest = self.at_rest[:, qubit - 1]
            mask &= ~at_rest if qubit in off_rest else at_rest
        return np.flatnonzero(mask)

    @cached_property
    def complement_skeleton(self) -> Optional[HamiltonianSkeleton]:
        """Skeleton on the time-invalid states, where every level is at least E."""
        choices = [range(self.gauged.rest(a), self.gauged.final(a) + 1) for a in range(1, self.M + 1)]
        positions = BasisService.position_product(self.gauged, choices)
        everything = BasisService.space_from_positions(self.basis, positions, bits=self.patterns)
        rest = BasisService.complement(self.space, everything)
        if rest.size == 0:
            return None
        return HamiltonianService.skeleton(self.gauged, rest, self.scale, self.shifted)

    def warm(self) -> 'SpectralWorkspace':
        """Build the cached skeleton before concurrent use."""
        _ = self.skeleton, self.pattern_index, self.at_rest
        return self


def _as_matrix(op: Operand):
    if isinstance(op, SparseOperator):
        return op.matrix
    return op


def _unconverged_residual(matrix, values: np.ndarray, vectors: Optional[np.ndarray],
                          start: np.ndarray) -> float:
    """Largest residual among partially converged pairs, else the Rayleigh residual of the start vector."""
    if vectors is not None and len(values):
        vectors = np.asarray(vectors).reshape(matrix.shape[0], -1)
        return max(float(np.linalg.norm(matrix @ v - e * v)) for e, v in zip(values, vectors.T))
    v = start / np.linalg.norm(start)
    image = matrix @ v
    return float(np.linalg.norm(image - np.vdot(v, image).real * v))


class SpectraService:
    """Service for eigensolves, gaps and gap bounds."""

    @staticmethod
    def extremal_eigs(op: Operand, k: int = 1, tol: Optional[float] = None,
                      seed: Optional[int] = None, lower_bound: Optional[float] = None) -> list[EigenPair]:
        """k smallest eigenpairs, dense below the dense threshold, shift-invert Lanczos above.

        The shift sits just below ``lower_bound`` (the Gershgorin bound when omitted, 0 for a
        positive semidefinite operator), so the largest eigenvalues
        of the inverted operator are the k smallest of ``op`` for any sign of the spectrum.
        Every returned pair satisfies ``||Hv - ev|| <= tol * max(1, |e|)``, or the roundoff
        floor of the solve when that is larger.
        """
        matrix = _as_matrix(op)
        dim = matrix.shape[0]
        tol = solver_config.eig_tol if tol is None else tol
        if k < 1 or dim < k:
            raise ValueError(f"cannot take {k} eigenpairs of a {dim}-dimensional operator")

        if not sp.issparse(matrix) or dim <= solver_config.dense_threshold or k >= dim - 1:
            dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
            values, vectors = sla.eigh(dense, subset_by_index=[0, k - 1])
            norm = float(np.abs(dense).sum(axis=0).max(initial=0.0))
            logger.debug("dense eigh of dimension %d", dim)
        else:
            rng = np.random.default_rng(app_config.seed if seed is None else seed)
            v0 = rng.standard_normal(dim)
            if np.iscomplexobj(matrix.data) and np.any(matrix.data.imag):
                v0 = v0 + 1j * rng.standard_normal(dim)
            else:
                matrix = matrix.real
            matrix = matrix.tocsc()
            norm = float(spla.norm(matrix, ord=1))
            bound = gershgorin_lower(matrix) if lower_bound is None else lower_bound
            sigma = bound - 1e-2 * max(1.0, abs(bound))
            # ARPACK's tolerance is relative to the inverted operator.
            shifted_norm = norm + abs(sigma)
            try:
                values, vectors = spla.eigsh(
                    matrix, k=k, sigma=sigma, which='LM', v0=v0,
                    tol=max(tol / max(1.0, shifted_norm), 1e-14), maxiter=solver_config.max_iterations,
                )
            except spla.ArpackNoConvergence as exc:
                residual = _unconverged_residual(matrix, exc.eigenvalues, exc.eigenvectors, v0)
                raise SpectralError(
                    f"eigsh converged {len(exc.eigenvalues)} of {k} pairs of dimension {dim}",
                    residual=residual,
                ) from exc
            order = np.argsort(values)
            values, vectors = values[order], vectors[:, order]
            logger.debug("shift-invert eigsh of dimension %d at sigma %.3e", dim, sigma)

        # roundoff floor of a backward-stable solve
        floor = 1e3 * np.finfo(float).eps * max(1.0, norm)
        pairs = []
        for value, vector in zip(values, vectors.T):
            residual = float(np.linalg.norm(matrix @ vector - value * vector))
            if residual > max(max(tol, 1e-12) * max(1.0, abs(value)), floor):
                raise SpectralError(f"eigenpair residual {residual:.3e} above tolerance", residual=residual)
            pairs.append(EigenPair(float(value), vector, residual))
        return pairs

    @staticmethod
    def _block_levels(matrix: sp.csr_matrix, index: np.ndarray, k: int) -> list[EigenPair]:
        block = matrix[index][:, index]
        return SpectraService.extremal_eigs(block, k=min(k, index.size), lower_bound=0.0)

    @staticmethod
    def gap(circuit: Circuit, lam: float, workspace: Optional[SpectralWorkspace] = None) -> GapResult:
        """epsilon_1 - epsilon_0 of H(lambda) from its invariant blocks.

        The ground block (all bits zero, pinned qubits at rest) contributes its second level;
        every other block its lowest. Blocks whose quiescence floor already exceeds the best
        candidate are skipped.
        """
        ws = workspace or SpectralWorkspace(circuit)
        E = ws.scale.E
        values = ws.schedule.values(lam)
        matrix = ws.skeleton.weighted(values)
        pinned = [q for q in range(1, ws.M + 1) if values[q - 1] == 0.0]

        ground = SpectraService._block_levels(matrix, ws.block(0, (), pinned), 2)
        e0 = ground[0].value
        best = ground[1].value - e0 if len(ground) > 1 else np.inf
        best_block = "ground"
        residual = max(p.residual for p in ground)

        candidates = []
        for pattern in range(ws.patterns.shape[0]):
            key = int(ws.patterns[pattern] @ ws.basis.bit_weights)
            for size in range(len(pinned) + 1):
                for off in itertools.combinations(pinned, size):
                    if key == 0 and not off:
                        continue
                    floor = sum(E * (1.0 - values[q - 2] ** 3) for q in off if q >= 2)
                    candidates.append((floor, key, off))
        candidates.sort(key=lambda c: (c[0], c[1], c[2]))

        for floor, key, off in candidates:
            if floor - e0 >= best:
                break
            index = ws.block(key, off, pinned)
            if index.size == 0:
                continue
            level = SpectraService._block_levels(matrix, index, 1)[0]
            residual = max(residual, level.residual)
            if level.value - e0 < best:
                best = level.value - e0
                best_block = f"bits={key} off_rest={list(off)}"

        if best >= E * (1.0 - 1e-9) and ws.complement_skeleton is not None:
            outside = ws.complement_skeleton.weighted(values)
            level = SpectraService.extremal_eigs(outside, k=1, lower_bound=0.0)[0]
            if level.value - e0 < best:
                best, best_block = level.value - e0, "time-invalid"

        logger.debug("gap at lambda=%s: %.6e from %s", lam, best, best_block)
        return GapResult(lam=lam, e0=e0, e1=e0 + best, gap=best, block=best_block, residual=residual)

    @staticmethod
    def e1_operator(circuit: Circuit, lam: float,
                    workspace: Optional[SpectralWorkspace] = None) -> tuple[sp.csr_matrix, int]:
        """H(lambda) - h^{o_A}_A(lambda_A I) on all-zero bits with qubits B > A pinned at rest."""
        ws = workspace or SpectralWorkspace(circuit)
        active = ws.schedule.active_qubit(lam)
        op = ws.skeleton.without_entry(lam, active).matrix
        index = ws.block(0, (), range(active + 1, ws.M + 1))
        return op[index][:, index].tocsr(), active

    @staticmethod
    def e1(circuit: Circuit, lam: float, workspace: Optional[SpectralWorkspace] = None) -> float:
        """Lowest eigenvalue above the two-dimensional kernel of the active-qubit operator."""
        ws = workspace or SpectralWorkspace(circuit)
        block, active = SpectraService.e1_operator(circuit, lam, ws)
        levels = SpectraService.extremal_eigs(block, k=min(3, block.shape[0]), lower_bound=0.0)
        threshold = solver_config.kernel_threshold * ws.scale.E
        kernel = sum(1 for p in levels if p.value <= threshold)
        if kernel != 2 or len(levels) < 3:
            raise SpectralError(
                f"kernel of dimension {kernel} (expected 2) at lambda={lam}, qubit {active}"
            )
        return levels[2].value

    @staticmethod
    def sum_bound(e0: float, e1: float, expectations: Sequence[float], norm_dh: float) -> float:
        """Lower bound on the ground energy of h + dh from the levels of h.

        min over ground states of e0 + (e1-e0) x / ((e1-e0) + x + ||dh||), x = <psi0|dh|psi0>.
        """
        if e1 < e0:
            raise ValueError(f"e1={e1} below e0={e0}")
        if not expectations:
            raise ValueError("at least one ground-state expectation is required")
        if any(x < 0 for x in expectations):
            raise ValueError("expectations of a positive perturbation must be nonnegative")
        if any(x > norm_dh * (1 + 1e-12) for x in expectations):
            raise ValueError("an expectation exceeds the perturbation norm")
        spread = e1 - e0
        bounds = []
        for x in expectations:
            denominator = spread + x + norm_dh
            bounds.append(e0 if denominator == 0 else e0 + spread * x / denominator)
        return float(min(bounds))

    @staticmethod
    def occupation_bound_point(circuit: Circuit, lam: float, workspace: Optional[SpectralWorkspace] = None) -> tuple[float, float, float]:
        """(e1, rest occupation of the active qubit, (1/4) e1 occupation)."""
        ws = workspace or SpectralWorkspace(circuit)
        e1 = SpectraService.e1(circuit, lam, ws)
        active = ws.schedule.active_qubit(lam)
        state = GroundStateService.history_ground_state(circuit, lam, shifted=ws.shifted)
        occupation = GroundStateService.rest_occupation(state, active)
        return e1, occupation, 0.25 * e1 * occupation

    @staticmethod
    def occupation_gap_bound(circuit: Circuit, lambda_grid: Sequence[float],
                             workspace: Optional[SpectralWorkspace] = None) -> float:
        """min over the grid of (1/4) e1(lambda) * rest occupation of the active qubit."""
        if not lambda_grid:
            raise ValueError("occupation bound needs a non-empty lambda grid")
        ws = workspace or SpectralWorkspace(circuit)
        return float(min(SpectraService.occupation_bound_point(circuit, lam, ws)[2] for lam in lambda_grid))

    @staticmethod
    def gap_bound_1d(M: int, N: int, E: float = 1.0) -> float:
        """E / ((12M(N+2M-4)+1)(4(N+4M-4)+1)(2N)) for a layered configuration."""
        half = (N - 3) / 2 - M
        if M < 3 or M % 2 == 0 or N % 2 == 0 or half < 0 or half % 2 or half / 2 < M - 1:
            raise CircuitError(f"(M={M}, N={N}) is not a layered configuration")
        return E / ((12 * M * (N + 2 * M - 4) + 1) * (4 * (N + 4 * M - 4) + 1) * (2 * N))

    @staticmethod
    def scan_point(circuit: Circuit, lam: float, workspace: SpectralWorkspace) -> GapPoint:
        gap = SpectraService.gap(circuit, lam, workspace)
        e1, occupation, bound = SpectraService.occupation_bound_point(circuit, lam, workspace)
        closed = None
        if circuit.layout in (Layout.ONE_D, Layout.ALL_TO_ALL):
            closed = SpectraService.gap_bound_1d(circuit.M, circuit.N, workspace.scale.E)
        point = GapPoint(
            lam=lam, active_qubit=workspace.schedule.active_qubit(lam), e0=gap.e0, e1_full=gap.e1,
            gap=gap.gap, e1_reduced=e1, occupation=occupation, bound_occupation=bound, bound_closed_form=closed,
            residual=gap.residual,
        )
        logger.info("lambda=%.6g gap=%.6e occupation bound=%.6e", lam, gap.gap, bound)
        return point

    @staticmethod
    def scan(circuit: Circuit, lambda_grid: Sequence[float],
             workspace: Optional[SpectralWorkspace] = None) -> GapScan:
        """Gap and occupation-bound data on every grid point, in grid order."""
        ws = (workspace or SpectralWorkspace(circuit)).warm()
        points = [SpectraService.scan_point(circuit, lam, ws) for lam in lambda_grid]
        return GapScan(M=circuit.M, N=circuit.N, layout=circuit.layout.value, points=points)

    @staticmethod
    async def scan_async(circuit: Circuit, lambda_grid: Sequence[float],
                         workspace: Optional[SpectralWorkspace] = None,
                         threads: Optional[int] = None) -> GapScan:
        """Concurrent scan, at most ``threads`` grid points in flight; results in grid order."""
        ws = (workspace or SpectralWorkspace(circuit)).warm()
        semaphore = asyncio.Semaphore(threads or app_config.threads)

        async def _point(lam: float) -> GapPoint:
            async with semaphore:
                return await asyncio.to_thread(SpectraService.scan_point, circuit, lam, ws)

        points = await asyncio.gather(*[_point(lam) for lam in lambda_grid])
        return GapScan(M=circuit.M, N=circuit.N, layout=circuit.layout.value, points=list(points))
