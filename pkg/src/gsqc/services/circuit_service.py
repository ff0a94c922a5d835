"""Circuit generation and validation for the 1-D, all-to-all and chain-array layouts."""

import logging
from typing import Iterable, Optional

import numpy as np

from ..exceptions import CircuitError
from ..models.circuit import Circuit, Gate, Layout, ValidationReport, Violation

logger = logging.getLogger(__name__)

Pair = tuple[int, int]


class CircuitService:
    """Service building and checking gate-model circuits."""

    @staticmethod
    def depth(M: int, n: int) -> int:
        """Net depth N = 2(2n+M)+3."""
        return 2 * (2 * n + M) + 3

    @staticmethod
    def core_limit(n: int) -> int:
        """Last step that may carry a non-identity gate; later steps are identity padding."""
        return 2 * n + 3

    @staticmethod
    def check_parameters(M: int, n: int) -> None:
        if M < 3 or M % 2 == 0:
            raise CircuitError(f"M must be odd and at least 3, got {M}")
        if n % 2 or n < M - 1:
            raise CircuitError(f"n must be even and at least M-1={M - 1}, got {n}")

    @staticmethod
    def row_1d(M: int, step: int) -> list[Pair]:
        """Pairs of the 1-D layout at even step 2j+2 (top qubit first)."""
        j = (step - 2) // 2
        if j % 2:
            return [(a, a - 1) for a in range(M, 2, -2)]
        return [(a, a + 1) for a in range(1, M - 1, 2)]

    @staticmethod
    def rows_all_to_all(M: int, last_step: int) -> dict[int, list[Pair]]:
        """Round-robin rows for steps 4..last_step.

        Each series keeps its top-left qubit fixed and rotates the others clockwise
        every four steps; the step-4 series pivots on M, the step-6 series on 1.
        """
        top4 = [M] + list(range(M - 3, 1, -2))
        bottom4 = [M - 1] + list(range(M - 2, 2, -2))
        top6 = list(range(1, M - 1, 2))
        bottom6 = list(range(2, M, 2))
        rows: dict[int, list[Pair]] = {}
        series = {4: (top4, bottom4), 6: (top6, bottom6)}
        for step in range(4, last_step + 1, 2):
            start = 4 if step % 4 == 0 else 6
            top, bottom = series[start]
            rows[step] = list(zip(top, bottom))
            if len(top) > 1:
                top, bottom = [top[0], bottom[0]] + top[1:-1], bottom[1:] + [top[-1]]
            series[start] = (top, bottom)
        return rows

    @staticmethod
    def rows_1d(M: int, last_step: int) -> dict[int, list[Pair]]:
        return {step: CircuitService.row_1d(M, step) for step in range(4, last_step + 1, 2)}

    @staticmethod
    def _layered(M: int, n: int, layout: Layout, rows: dict[int, list[Pair]],
                 finals: list[int], core_gates: Optional[Iterable[Gate]]) -> Circuit:
        N = CircuitService.depth(M, n)
        origins = [1 if a % 2 == 0 else 3 for a in range(1, M + 1)]
        partner_at: dict[tuple[int, int], int] = {}
        for step, pairs in rows.items():
            for a, b in pairs:
                partner_at[(a, step)] = b
                partner_at[(b, step)] = a

        slots: dict[tuple[int, tuple[int, ...]], Gate] = {}
        for a in range(1, M + 1):
            for step in range(origins[a - 1], finals[a - 1] + 1):
                if (a, step) in partner_at:
                    b = partner_at[(a, step)]
                    key = (step, tuple(sorted((a, b))))
                    if key not in slots:
                        slots[key] = Gate.two(step, a, b)
                else:
                    slots[(step, (a,))] = Gate.one(step, a)

        limit = CircuitService.core_limit(n)
        for gate in core_gates or ():
            key = (gate.time, gate.qubits)
            if gate.is_pair and gate.time % 2:
                raise CircuitError(
                    f"2-qubit gate on {gate.qubits} at odd step {gate.time} violates layer parity"
                )
            if key not in slots:
                raise CircuitError(f"no {gate.kind} slot for qubits {gate.qubits} at step {gate.time}")
            if not gate.is_identity:
                if gate.time > limit:
                    raise CircuitError(
                        f"non-identity gate at step {gate.time}; steps after {limit} are identity padding"
                    )
                if not gate.is_pair:
                    a = gate.qubits[0]
                    if gate.time == origins[a - 1]:
                        raise CircuitError(f"first gate of qubit {a} must stay the identity")
                    if gate.time % 2 == 0:
                        raise CircuitError(
                            f"qubit {a} is idle at even step {gate.time}; only identities are allowed"
                        )
            slots[key] = gate

        gates = tuple(slots[key] for key in sorted(slots))
        circuit = Circuit(M=M, N=N, n=n, layout=layout, o=tuple(origins), f=tuple(finals),
                          gates=gates)
        logger.debug("built %s circuit M=%d n=%d N=%d with %d gates", layout.value, M, n, N, len(gates))
        return circuit

    @staticmethod
    def build_1d_circuit(M: int, n: int, core_gates: Optional[Iterable[Gate]] = None) -> Circuit:
        """1-D nearest-neighbour layout."""
        CircuitService.check_parameters(M, n)
        N = CircuitService.depth(M, n)
        finals = [N - 2 if (a % 2 == 0 or a == M) else N for a in range(1, M + 1)]
        rows = CircuitService.rows_1d(M, N - 3)
        return CircuitService._layered(M, n, Layout.ONE_D, rows, finals, core_gates)

    @staticmethod
    def build_all_to_all_circuit(M: int, n: int, core_gates: Optional[Iterable[Gate]] = None) -> Circuit:
        """All-to-all round-robin layout."""
        CircuitService.check_parameters(M, n)
        N = CircuitService.depth(M, n)
        rows = CircuitService.rows_all_to_all(M, N - 3)
        tail_tops = {top for top, _ in rows[N - 3]}
        finals = [N if a in tail_tops else N - 2 for a in range(1, M + 1)]
        return CircuitService._layered(M, n, Layout.ALL_TO_ALL, rows, finals, core_gates)

    @staticmethod
    def build(layout: str, M: int, n: int, core_gates: Optional[Iterable[Gate]] = None) -> Circuit:
        if layout == Layout.ONE_D.value:
            return CircuitService.build_1d_circuit(M, n, core_gates)
        if layout == Layout.ALL_TO_ALL.value:
            return CircuitService.build_all_to_all_circuit(M, n, core_gates)
        raise CircuitError(f"layout {layout!r} has no generator; load a custom circuit from JSON")

    @staticmethod
    def build_chain_array(M: int, N: int) -> Circuit:
        """Identity circuit whose time-valid configurations form the M-dimensional gate graph.

        Odd qubits occupy steps [1, N] and even qubits [0, N-1]. Odd steps couple
        (1,2), (3,4), ... while qubit M idles; even steps couple (2,3), (4,5), ... while
        qubit 1 idles. The first gates of odd qubits beyond qubit 1 are 2-qubit gates,
        so this circuit is a graph generator rather than a valid GSQC input.
        """
        if M < 3 or M % 2 == 0:
            raise CircuitError(f"M must be odd and at least 3, got {M}")
        if N < 4 or N % 2:
            raise CircuitError(f"N must be even and at least 4, got {N}")
        origins = [2 if a % 2 else 1 for a in range(1, M + 1)]
        finals = [N if a % 2 else N - 1 for a in range(1, M + 1)]
        slots: dict[tuple[int, tuple[int, ...]], Gate] = {}
        for a in range(1, M + 1):
            for step in range(origins[a - 1], finals[a - 1] + 1):
                if 3 <= step <= N - 1 and step % 2 == 1 and a < M:
                    b = a + 1 if a % 2 else a - 1
                elif 2 <= step <= N - 2 and step % 2 == 0 and a > 1:
                    b = a + 1 if a % 2 == 0 else a - 1
                else:
                    slots[(step, (a,))] = Gate.one(step, a)
                    continue
                key = (step, tuple(sorted((a, b))))
                slots.setdefault(key, Gate.two(step, a, b))
        gates = tuple(slots[key] for key in sorted(slots))
        return Circuit(M=M, N=N, layout=Layout.CUSTOM, o=tuple(origins), f=tuple(finals), gates=gates)

    @staticmethod
    def identity_circuit(circuit: Circuit) -> Circuit:
        """Same slots and windows with every gate replaced by the identity."""
        gates = [Gate.two(g.time, *g.qubits) if g.is_pair else Gate.one(g.time, g.qubits[0])
                 for g in circuit.gates]
        return circuit.with_gates(gates)

    @staticmethod
    def pair_table(circuit: Circuit) -> dict[int, list[list[int]]]:
        """Sorted pairs per step, for reports."""
        table: dict[int, list[list[int]]] = {}
        for gate in circuit.pair_gates:
            table.setdefault(gate.time, []).append(list(gate.qubits))
        return {step: sorted(pairs) for step, pairs in sorted(table.items())}

    @staticmethod
    def validate_circuit(circuit: Circuit) -> ValidationReport:
        """List every violated invariant; empty iff the circuit is well formed."""
        violations: list[Violation] = []
        M, N = circuit.M, circuit.N

        if len(circuit.origins) != M or len(circuit.finals) != M:
            violations.append(Violation(rule="shape", message="one origin and final step per qubit"))
            return ValidationReport(violations=violations)

        for a in range(1, M + 1):
            o, f = circuit.origin(a), circuit.final(a)
            if not 1 <= o <= f <= N:
                violations.append(Violation(rule="window", qubit=a,
                                            message=f"window [{o}, {f}] outside [1, {N}]"))

        for a, step in circuit.collisions:
            violations.append(Violation(rule="collision", qubit=a, step=step,
                                        message="more than one gate acts at this step"))

        for gate in circuit.gates:
            for a in gate.qubits:
                if a > M:
                    violations.append(Violation(rule="qubit-range", qubit=a, step=gate.time,
                                                message=f"qubit index above M={M}"))
                elif not circuit.origin(a) <= gate.time <= circuit.final(a):
                    violations.append(Violation(rule="outside-window", qubit=a, step=gate.time,
                                                message="gate outside the qubit window"))
            u = gate.unitary
            if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-12, rtol=0.0):
                violations.append(Violation(rule="unitary", qubit=gate.qubits[0], step=gate.time,
                                            message="gate matrix is not unitary"))

        for a in range(1, M + 1):
            for step in range(circuit.origin(a), circuit.final(a) + 1):
                if circuit.gate_at(a, step) is None:
                    violations.append(Violation(rule="coverage", qubit=a, step=step,
                                                message="no gate acts at this step"))
            first = circuit.gate_at(a, circuit.origin(a))
            if first is not None and (first.is_pair or not first.is_identity):
                violations.append(Violation(rule="first-gate", qubit=a, step=circuit.origin(a),
                                            message="first gate must be identity"))

        if circuit.layout in (Layout.ONE_D, Layout.ALL_TO_ALL):
            violations.extend(CircuitService._layout_violations(circuit))
        return ValidationReport(violations=violations)

    @staticmethod
    def _layout_violations(circuit: Circuit) -> list[Violation]:
        M, N, n = circuit.M, circuit.N, circuit.n
        found: list[Violation] = []
        if M < 3 or M % 2 == 0:
            found.append(Violation(rule="layout-width", message=f"M={M} must be odd and at least 3"))
            return found
        if n is None or n % 2 or n < M - 1:
            found.append(Violation(rule="layout-depth", message=f"n={n} must be even and at least M-1"))
            return found
        if N != CircuitService.depth(M, n):
            found.append(Violation(rule="layout-depth",
                                   message=f"N={N} differs from 2(2n+M)+3={CircuitService.depth(M, n)}"))
            return found

        for gate in circuit.pair_gates:
            if gate.time % 2:
                found.append(Violation(rule="layer-parity", qubit=gate.qubits[0], step=gate.time,
                                       message="2-qubit gate at an odd step"))

        if circuit.layout == Layout.ONE_D:
            rows = CircuitService.rows_1d(M, N - 3)
        else:
            rows = CircuitService.rows_all_to_all(M, N - 3)
        for step in range(1, N + 1):
            expected = frozenset(frozenset(p) for p in rows.get(step, []))
            if circuit.pairs_at(step) != expected:
                found.append(Violation(rule="pair-pattern", step=step,
                                       message=f"pairs differ from the {circuit.layout.value} pattern"))

        reference = CircuitService.build(circuit.layout.value, M, n)
        for a in range(1, M + 1):
            if (circuit.origin(a), circuit.final(a)) != (reference.origin(a), reference.final(a)):
                found.append(Violation(rule="layout-window", qubit=a,
                                       message=f"window differs from [{reference.origin(a)}, {reference.final(a)}]"))

        limit = CircuitService.core_limit(n)
        for gate in circuit.gates:
            if gate.time > limit and not gate.is_identity:
                found.append(Violation(rule="identity-tail", qubit=gate.qubits[0], step=gate.time,
                                       message=f"non-identity gate after step {limit}"))
        return found
