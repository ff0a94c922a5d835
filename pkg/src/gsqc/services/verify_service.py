"""Theorem suite run by the `verify` command."""

import logging
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from ..models.circuit import Circuit, Gate
from ..models.graphs import SignedFunction
from ..models.operators import Schedule
from ..models.reports import VerifyCheck, VerifyReport
from ..models.run_config import RunConfig
from ..utils.uuid_utils import generate_run_uuid
from .adiabatic_service import AdiabaticService
from .basis_service import BasisService
from .certificate_service import CertificateService
from .circuit_service import CircuitService
from .gauge_service import GaugeService
from .graph_service import GraphService
from .groundstate_service import GroundStateService
from .hamiltonian_service import HamiltonianService
from .spectra_service import SpectraService, SpectralWorkspace

logger = logging.getLogger(__name__)

SLACK = 1e-12
RESIDUAL_TOL = 1e-10


class VerifyService:
    """Service running every theorem check on one generated instance."""

    @staticmethod
    def scrambled_core_gates(circuit: Circuit, seed: int) -> list[Gate]:
        """Seeded Haar-random gates on every slot that may hold a non-identity gate."""
        limit = CircuitService.core_limit(circuit.n)
        gates = []
        for k, gate in enumerate(sorted(circuit.gates, key=lambda g: (g.time, g.qubits))):
            if gate.time > limit:
                continue
            if not gate.is_pair and (gate.time % 2 == 0 or gate.time == circuit.origin(gate.qubits[0])):
                continue
            unitary = unitary_group.rvs(4 if gate.is_pair else 2, random_state=seed + k)
            if gate.is_pair:
                gates.append(Gate.two(gate.time, *gate.qubits, unitary))
            else:
                gates.append(Gate.one(gate.time, gate.qubits[0], unitary))
        return gates

    @staticmethod
    def check_ground_state(circuit: Circuit, grid: Sequence[float]) -> VerifyCheck:
        """||H psi_0|| vanishes, the lowest eigenvalue is 0 and the next one is positive."""
        space = GroundStateService.propagation_space(circuit)
        skeleton = HamiltonianService.skeleton(circuit, space)
        worst_residual, worst_energy, lowest_second = 0.0, 0.0, float('inf')
        for lam in grid:
            h = skeleton.at(lam)
            state = GroundStateService.history_ground_state(circuit, lam, space)
            worst_residual = max(worst_residual, float(np.linalg.norm(h.apply(state.amplitudes))))
            pairs = SpectraService.extremal_eigs(h, k=2, lower_bound=0.0)
            worst_energy = max(worst_energy, abs(pairs[0].value))
            lowest_second = min(lowest_second, pairs[1].value)
        passed = worst_residual <= RESIDUAL_TOL and worst_energy <= RESIDUAL_TOL and lowest_second > 0
        return VerifyCheck(name="ground-state", passed=passed, detail={
            "max_residual": worst_residual, "max_ground_energy": worst_energy,
            "min_second_level": lowest_second,
        })

    @staticmethod
    def check_gauge(circuit: Circuit, lam: float = 0.6, tol: float = 1e-9) -> VerifyCheck:
        """U^dagger H U equals the identity-gate Hamiltonian on the propagation space."""
        identity, gauge = GaugeService.identity_gauge(circuit)
        space = GroundStateService.propagation_space(circuit)
        gauged = GaugeService.gauge_operator(HamiltonianService.assemble(circuit, lam, space), gauge)
        plain_space = BasisService.penalty_free_space(BasisService.enumerate_basis(identity))
        plain = HamiltonianService.assemble(identity, lam, plain_space)
        diff = (gauged.matrix - plain.matrix).tocoo()
        deviation = float(np.abs(diff.data).max()) if diff.nnz else 0.0
        return VerifyCheck(name="identity-gauge", passed=deviation <= tol,
                           detail={"lambda": lam, "max_deviation": deviation})

    @staticmethod
    def check_occupations(circuit: Circuit, grid: Sequence[float]) -> VerifyCheck:
        """Rest occupation of the active qubit matches the closed form and stays above 1/N."""
        schedule = Schedule(M=circuit.M)
        worst, lowest = 0.0, float('inf')
        for lam in grid:
            state = GroundStateService.history_ground_state(circuit, lam)
            active = schedule.active_qubit(lam)
            measured = GroundStateService.rest_occupation(state, active)
            worst = max(worst, abs(measured - GroundStateService.closed_form_occupation(circuit, lam)))
            lowest = min(lowest, measured)
        passed = worst <= 1e-8 and lowest >= 1.0 / circuit.N
        return VerifyCheck(name="rest-occupation", passed=passed,
                           detail={"max_deviation": worst, "min_occupation": lowest})

    @staticmethod
    def check_gap_ordering(circuit: Circuit, grid: Sequence[float]) -> VerifyCheck:
        """Exact gap above the occupation bound at every point, minimum above the closed form."""
        scan = SpectraService.scan(circuit, grid, SpectralWorkspace(circuit))
        violations = [p.lam for p in scan.points if p.bound_occupation is not None and p.gap < p.bound_occupation - SLACK]
        closed = SpectraService.gap_bound_1d(circuit.M, circuit.N)
        passed = not violations and scan.min_gap > closed - SLACK
        return VerifyCheck(name="gap-ordering", passed=passed, detail={
            "min_gap": scan.min_gap, "min_occupation_bound": scan.occupation_bound,
            "closed_form_bound": closed, "violations": violations,
        })

    @staticmethod
    def check_equivalence(M: int, n: int, tol: float) -> VerifyCheck:
        """Swap chain relates the 1-D and all-to-all layouts stage by stage and spectrally."""
        report = GaugeService.verify_all_to_all_equivalence(M, n, tol=tol)
        return VerifyCheck(name="layout-equivalence", passed=report.passed, detail={
            "stages": len(report.stages), "final_table_match": report.final_table_match,
            "max_deviation": report.max_deviation,
        })

    @staticmethod
    def check_output(circuit: Circuit) -> VerifyCheck:
        """The lambda=1 ground state is found in the output region with probability at least 1/3."""
        state = GroundStateService.history_ground_state(circuit, 1.0)
        probability = AdiabaticService.output_probability(state, circuit)
        tail = AdiabaticService.qubit_tail_probability(state, circuit)
        closed = AdiabaticService.tail_closed_form(circuit.N, circuit.M)
        passed = probability >= 1 / 3 and tail >= closed - 1e-10 and closed > 1 / 3
        return VerifyCheck(name="output-probability", passed=passed, detail={
            "probability": probability, "qubit_tail": tail, "tail_closed_form": closed,
        })

    @staticmethod
    def check_path_certificate() -> VerifyCheck:
        """Chain certificate on six vertices against its exact Rayleigh quotient and Fiedler value."""
        g = GraphService.build_chain(6)
        phi = SignedFunction(tuple(g.vertices), np.array([-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]))
        result = CertificateService.certify(g, phi)
        fiedler = GraphService.fiedler(g)
        passed = result.valid and result.bound <= (result.rayleigh or 0.0) and result.bound <= fiedler
        return VerifyCheck(name="path-certificate", passed=passed, detail={
            "bound": result.bound, "rayleigh": result.rayleigh, "fiedler": fiedler,
        })

    @staticmethod
    def check_adiabatic(circuit: Circuit, min_gap: float) -> VerifyCheck:
        """Excitation bound and run-time prescription, evaluated rather than simulated."""
        prescription = AdiabaticService.runtime_prescription(circuit.M, circuit.N)
        bound = AdiabaticService.excitation_bound(circuit.M, min_gap, prescription)
        return VerifyCheck(name="adiabatic-bound", passed=bound.simplified_dominates, detail={
            "runtime_prescription": prescription, "full": bound.full, "simplified": bound.simplified,
            "simulated": False,
        })

    @staticmethod
    def run(config: RunConfig, progress: Optional[Callable[[VerifyCheck], None]] = None) -> VerifyReport:
        """Every check on the configured instance, in a fixed order."""
        layout, M, n = config.layout or "1d", config.M, config.n
        grid = config.grid.values()
        base = CircuitService.build(layout, M, n)
        circuit = CircuitService.build(layout, M, n, VerifyService.scrambled_core_gates(base, config.seed))
        report = VerifyReport(run_id=generate_run_uuid(config), config=config.model_dump(mode='json'))

        steps: list[Callable[[], VerifyCheck]] = [
            lambda: VerifyService.check_ground_state(circuit, grid),
            lambda: VerifyService.check_gauge(circuit),
            lambda: VerifyService.check_occupations(circuit, grid),
            lambda: VerifyService.check_gap_ordering(circuit, grid),
            lambda: VerifyService.check_equivalence(M, n, config.tol),
            lambda: VerifyService.check_output(circuit),
            VerifyService.check_path_certificate,
        ]
        for step in steps:
            check = step()
            report.checks.append(check)
            if progress:
                progress(check)
        min_gap = report.checks[3].detail["min_gap"]
        check = VerifyService.check_adiabatic(circuit, min_gap)
        report.checks.append(check)
        if progress:
            progress(check)
        logger.info("verify %s M=%d n=%d: %d/%d checks passed", layout, M, n,
                    sum(c.passed for c in report.checks), len(report.checks))
        return report
