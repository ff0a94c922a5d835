"""Adiabatic evolution under H(t/T), the excitation bound and output-measurement checks."""

import asyncio
import logging
import math
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..config import app_config
from ..exceptions import EvolutionError
from ..models.circuit import Circuit
from ..models.operators import EnergyScale, StateVector
from ..models.reports import EvolutionCheckpoint, EvolutionResult, ExcitationBound
from ..utils.linalg import operator_norm
from .groundstate_service import GroundStateService
from .hamiltonian_service import HamiltonianService

logger = logging.getLogger(__name__)

NORM_DRIFT_BUDGET = 1e-8


class AdiabaticService:
    """Service for time evolution and the adiabatic and output-probability bounds."""

    @staticmethod
    def default_steps(total_time: float, norm: float) -> int:
        """ceil(50 * T * ||H||), at least one step."""
        return max(1, math.ceil(50.0 * total_time * norm))

    @staticmethod
    def evolve(circuit: Circuit, total_time: float, steps: Optional[int] = None, checkpoints: int = 10,
               scale: Optional[EnergyScale] = None, shifted: bool = True) -> EvolutionResult:
        """Integrate i d psi/dt = H(t/T) psi from the lambda=0 ground state.

        Crank-Nicolson with the Hamiltonian at each step midpoint; the result reports the
        fidelity with the lambda=1 ground state.
        """
        if total_time < 0:
            raise ValueError(f"total time must be nonnegative, got {total_time}")
        space = GroundStateService.propagation_space(circuit)
        skeleton = HamiltonianService.skeleton(circuit, space, scale, shifted)
        psi = GroundStateService.history_ground_state(circuit, 0.0, space, shifted).amplitudes.copy()
        target = GroundStateService.history_ground_state(circuit, 1.0, space, shifted)

        if total_time == 0:
            fidelity = StateVector(space, psi).fidelity(target)
            checkpoint = EvolutionCheckpoint(t=0.0, lam=0.0, overlap=fidelity, norm=float(np.linalg.norm(psi)))
            result = EvolutionResult(total_time=0.0, steps=0, fidelity=fidelity, norm_drift=0.0,
                                     checkpoints=[checkpoint])
            result._final_state = psi
            return result

        if steps is None:
            steps = AdiabaticService.default_steps(total_time, operator_norm(skeleton.at(1.0).matrix))
        dt = total_time / steps
        every = max(1, steps // max(1, checkpoints))
        identity = sp.identity(space.size, dtype=complex, format='csc')
        records = [AdiabaticService._checkpoint(circuit, space, psi, 0.0, 0.0, shifted)]
        drift = 0.0

        for k in range(steps):
            h = skeleton.at((k + 0.5) / steps).matrix
            forward = (identity - 0.5j * dt * h).tocsc()
            backward = (identity + 0.5j * dt * h).tocsc()
            psi = spla.splu(backward).solve(forward @ psi)
            drift = max(drift, abs(float(np.linalg.norm(psi)) - 1.0))
            if drift > NORM_DRIFT_BUDGET:
                raise EvolutionError(f"norm drift {drift:.3e} at step {k + 1}; use more steps")
            if (k + 1) % every == 0 or k + 1 == steps:
                lam = (k + 1) / steps
                records.append(AdiabaticService._checkpoint(circuit, space, psi, lam * total_time, lam, shifted))

        fidelity = StateVector(space, psi).fidelity(target)
        logger.info("evolution T=%g over %d steps: fidelity %.12f, drift %.2e", total_time, steps, fidelity, drift)
        result = EvolutionResult(total_time=total_time, steps=steps, fidelity=fidelity, norm_drift=drift,
                                 checkpoints=records)
        result._final_state = psi
        return result

    @staticmethod
    def _checkpoint(circuit: Circuit, space, psi: np.ndarray, t: float, lam: float,
                    shifted: bool) -> EvolutionCheckpoint:
        ground = GroundStateService.history_ground_state(circuit, lam, space, shifted)
        overlap = StateVector(space, psi).fidelity(ground)
        return EvolutionCheckpoint(t=t, lam=lam, overlap=overlap, norm=float(np.linalg.norm(psi)))

    @staticmethod
    async def evolve_many_async(circuit: Circuit, times: Iterable[float], steps: Optional[int] = None,
                                threads: Optional[int] = None) -> list[EvolutionResult]:
        """Independent evolutions for several total times on worker threads."""
        semaphore = asyncio.Semaphore(threads or app_config.threads)

        async def _one(total_time: float) -> EvolutionResult:
            async with semaphore:
                return await asyncio.to_thread(AdiabaticService.evolve, circuit, total_time, steps)

        return list(await asyncio.gather(*(_one(t) for t in times)))

    @staticmethod
    def excitation_bound(M: int, g_min: float, total_time: float, E: float = 1.0) -> ExcitationBound:
        """((24M + 63M^2) E / g^2 + 1008 M^2 E^2 / g^3) / T and its cap 1095 M^2 E^2 / (T g^3)."""
        if M < 1 or g_min <= 0 or total_time <= 0 or E <= 0:
            raise ValueError(f"bound needs M >= 1 and positive g, T, E; got M={M}, g={g_min}, T={total_time}")
        full = ((24 * M + 63 * M ** 2) * E / g_min ** 2 + 1008 * M ** 2 * E ** 2 / g_min ** 3) / total_time
        simplified = 1095 * M ** 2 * E ** 2 / (total_time * g_min ** 3)
        return ExcitationBound(M=M, g_min=g_min, total_time=total_time, E=E, full=full, simplified=simplified)

    @staticmethod
    def runtime_prescription(M: int, N: int, E: float = 1.0) -> float:
        """Evolution time 4e12 M^5 N^9 / E that the gap bound asks for."""
        return 4e12 * M ** 5 * N ** 9 / E

    @staticmethod
    def output_window(circuit: Circuit) -> int:
        """Length (N - 3)/2 + M of the output region at the end of the circuit."""
        return (circuit.N - 3) // 2 + circuit.M

    @staticmethod
    def output_probability(state: StateVector, circuit: Optional[Circuit] = None) -> float:
        """Probability that every qubit sits within the last (N - 3)/2 + M steps."""
        circuit = circuit or state.space.circuit
        first = circuit.N - AdiabaticService.output_window(circuit) + 1
        inside = np.all(state.space.positions >= first, axis=1)
        return float(state.probabilities[inside].sum() / max(state.norm ** 2, 1e-300))

    @staticmethod
    def qubit_tail_probability(state: StateVector, circuit: Optional[Circuit] = None) -> float:
        """Probability of qubit M on the last (N - 1)/2 - (M - 1) positions of its window."""
        circuit = circuit or state.space.circuit
        M = circuit.M
        tail = (circuit.N - 1) // 2 - (M - 1)
        first = circuit.final(M) - tail + 1
        inside = state.space.positions[:, M - 1] >= first
        return float(state.probabilities[inside].sum() / max(state.norm ** 2, 1e-300))

    @staticmethod
    def tail_closed_form(N: int, M: int) -> float:
        """((N - 1)/2 - (M - 1)) / (N - 3), the lower bound on the qubit-M tail."""
        return ((N - 1) / 2 - (M - 1)) / (N - 3)
