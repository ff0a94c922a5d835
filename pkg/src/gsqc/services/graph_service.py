"""Graphs of time-valid configurations, Rayleigh quotients and Fiedler values."""

import itertools
import logging
from typing import Any, Mapping, Sequence, Union

import networkx as nx
import numpy as np
import scipy.linalg as sla

from ..config import solver_config
from ..exceptions import CircuitError, PathCertificateError
from ..models.circuit import Circuit
from ..models.graphs import LabGraph, Vertex
from .basis_service import BasisService
from .circuit_service import CircuitService
from .spectra_service import SpectraService

logger = logging.getLogger(__name__)

GRAPH_KINDS = ("chain", "grid", "gate-graph", "from-circuit")


class GraphService:
    """Service for building lab graphs and evaluating their spectral functionals."""

    @staticmethod
    def build_chain(n1: int) -> LabGraph:
        """Path graph on (1,), ..., (n1,)."""
        if n1 < 1:
            raise ValueError(f"chain length must be positive, got {n1}")
        graph = nx.path_graph([(i,) for i in range(1, n1 + 1)])
        return LabGraph(kind="chain", graph=graph, axes=(tuple(range(1, n1 + 1)),),
                        params={"n1": n1}, horizons=(n1,), congestion_cap=n1)

    @staticmethod
    def build_grid(*sizes: int) -> LabGraph:
        """Cartesian product of chains with 1-based coordinates."""
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError(f"grid sizes must be positive, got {sizes}")
        axes = tuple(tuple(range(1, s + 1)) for s in sizes)
        graph = nx.Graph()
        graph.add_nodes_from(itertools.product(*axes))
        for vertex in list(graph.nodes):
            for alpha, size in enumerate(sizes):
                if vertex[alpha] < size:
                    graph.add_edge(vertex, vertex[:alpha] + (vertex[alpha] + 1,) + vertex[alpha + 1:])
        return LabGraph(kind="grid", graph=graph, axes=axes, params={"sizes": list(sizes)},
                        horizons=tuple(sizes), congestion_cap=max(sizes))

    @staticmethod
    def build_gate_graph(M: int, N: int) -> LabGraph:
        """Time-valid configurations of the chain-array circuit in exchange coordinates.

        i_alpha in {0, 1} for alpha < M counts the offset of k_alpha above the lowest
        value allowed by k_{alpha+1}; i_M = k_M.
        """
        circuit = CircuitService.build_chain_array(M, N)
        vertices = BasisService.penalty_free_vertices(circuit)
        graph = GraphService._relabelled_graph(circuit, vertices.positions)
        horizons = tuple(2 * alpha for alpha in range(1, M)) + (2 * M * N,)
        return GraphService._lab_graph("gate-graph", graph, {"M": M, "N": N}, horizons,
                                       2 * (N + 2 * M - 2), stride=1)

    @staticmethod
    def build_circuit_graph(circuit: Circuit) -> LabGraph:
        """Configurations with the last qubit off rest, relabelled to i_alpha in {0, 1, 2, 3}."""
        M, N = circuit.M, circuit.N
        if M < 2:
            raise CircuitError("the circuit graph needs at least two qubits")
        vertices = BasisService.penalty_free_vertices(circuit, off_rest=(M,))
        graph = GraphService._relabelled_graph(circuit, vertices.positions)
        horizons = tuple(24 * alpha for alpha in range(1, M)) + (6 * M * (N - 2),)
        params = {"M": M, "N": N, "layout": circuit.layout.value}
        return GraphService._lab_graph("from-circuit", graph, params, horizons,
                                       2 * (N + 4 * M - 4), stride=2)

    @staticmethod
    def build_graph(kind: str, **params: Any) -> LabGraph:
        """Dispatch on the graph kind: chain(n1), grid(sizes), gate-graph(M, N), from-circuit(circuit)."""
        if kind == "chain":
            return GraphService.build_chain(int(params["n1"]))
        if kind == "grid":
            return GraphService.build_grid(*(int(s) for s in params["sizes"]))
        if kind == "gate-graph":
            return GraphService.build_gate_graph(int(params["M"]), int(params["N"]))
        if kind == "from-circuit":
            circuit = params.get("circuit")
            if circuit is None:
                circuit = CircuitService.build(params.get("layout", "1d"), int(params["M"]), int(params["n"]))
            return GraphService.build_circuit_graph(circuit)
        raise ValueError(f"unknown graph kind {kind!r}; expected one of {', '.join(GRAPH_KINDS)}")

    @staticmethod
    def circuit_edges(circuit: Circuit, positions: np.ndarray) -> list[tuple[int, int]]:
        """Index pairs of configurations joined by one hop of the circuit Hamiltonian.

        A hop advances one qubit through a 1-qubit gate (the entry step included) or both
        qubits of a 2-qubit gate when they sit together just before it.
        """
        lookup = {tuple(int(p) for p in row): k for k, row in enumerate(positions)}
        edges = []
        for k, row in enumerate(positions):
            for a in range(1, circuit.M + 1):
                step = int(row[a - 1]) + 1
                if step > circuit.final(a):
                    continue
                gate = circuit.gate_at(a, step)
                target = list(row)
                if gate is not None and gate.is_pair:
                    b = gate.partner(a)
                    if b < a or row[b - 1] != row[a - 1]:
                        continue
                    target[b - 1] += 1
                target[a - 1] += 1
                other = lookup.get(tuple(int(p) for p in target))
                if other is not None:
                    edges.append((k, other))
        return edges

    @staticmethod
    def exchange_coordinates(positions: np.ndarray) -> np.ndarray:
        """i_alpha = k_alpha - min{k_alpha : k_{alpha+1}} for alpha < M; the last column is kept."""
        coords = positions.copy()
        for a in range(positions.shape[1] - 1):
            upper = positions[:, a + 1]
            base = np.full(int(upper.max()) + 1, np.iinfo(np.int64).max)
            np.minimum.at(base, upper, positions[:, a])
            coords[:, a] = positions[:, a] - base[upper]
        return coords

    @staticmethod
    def _relabelled_graph(circuit: Circuit, positions: np.ndarray) -> nx.Graph:
        coords = GraphService.exchange_coordinates(positions)
        labels = [tuple(int(c) for c in row) for row in coords]
        if len(set(labels)) != len(labels):
            raise CircuitError("exchange coordinates are not injective on this circuit")
        graph = nx.Graph()
        for label, row in zip(labels, positions):
            graph.add_node(label, positions=tuple(int(p) for p in row))
        graph.add_edges_from((labels[i], labels[j]) for i, j in GraphService.circuit_edges(circuit, positions))
        return graph

    @staticmethod
    def _lab_graph(kind: str, graph: nx.Graph, params: dict, horizons: tuple[int, ...],
                   cap: int, stride: int) -> LabGraph:
        vertices = np.array(sorted(graph.nodes))
        axes = tuple(tuple(int(v) for v in np.unique(vertices[:, a])) for a in range(vertices.shape[1]))
        lab = LabGraph(kind=kind, graph=graph, axes=axes, params=params, horizons=horizons,
                       congestion_cap=cap, stride=stride)
        if not lab.is_product:
            logger.warning("%s graph %s is not a full product of its axes", kind, params)
        logger.info("%s graph %s: %d vertices, %d edges", kind, params, lab.order, lab.size)
        return lab

    @staticmethod
    def vertex_values(g: LabGraph, psi: Union[Mapping[Vertex, float], Sequence[float], np.ndarray]) -> np.ndarray:
        """Values in g.vertices order from a mapping or an ordered sequence."""
        if isinstance(psi, Mapping):
            return np.array([float(psi[v]) for v in g.vertices])
        values = np.asarray(psi, dtype=float)
        if values.shape != (g.order,):
            raise ValueError(f"expected {g.order} values, got shape {values.shape}")
        return values

    @staticmethod
    def rayleigh(g: LabGraph, psi: Union[Mapping[Vertex, float], Sequence[float], np.ndarray],
                 E: float = 1.0) -> float:
        """E * sum over edges |psi(i) - psi(i')|^2 / sum |psi(i)|^2."""
        values = GraphService.vertex_values(g, psi)
        norm = float(values @ values)
        if norm == 0.0:
            raise PathCertificateError("the Rayleigh quotient of the zero function is undefined")
        index = g.index
        edges = np.array([(index[u], index[v]) for u, v in g.graph.edges], dtype=np.int64).reshape(-1, 2)
        diff = values[edges[:, 0]] - values[edges[:, 1]]
        return E * float(diff @ diff) / norm

    @staticmethod
    def laplacian(g: LabGraph):
        return nx.laplacian_matrix(g.graph, nodelist=g.vertices).astype(float)

    @staticmethod
    def laplacian_spectrum(g: LabGraph) -> np.ndarray:
        return sla.eigvalsh(GraphService.laplacian(g).toarray())

    @staticmethod
    def fiedler(g: LabGraph, E: float = 1.0) -> float:
        """Second-smallest Laplacian eigenvalue, in units of E."""
        if g.order < 2:
            raise ValueError("the Fiedler value needs at least two vertices")
        if g.order <= solver_config.dense_threshold:
            return E * float(GraphService.laplacian_spectrum(g)[1])
        pairs = SpectraService.extremal_eigs(GraphService.laplacian(g).tocsr(), k=2, lower_bound=0.0)
        return E * float(pairs[1].value)

    @staticmethod
    def chain_gap(n1: int, E: float = 1.0) -> float:
        """Closed-form Fiedler value of the path graph on n1 vertices."""
        return 2.0 * E * (1.0 - np.cos(np.pi / n1))
