"""Graph, signed-function and path-family models for path certificates."""

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Optional, Sequence

import networkx as nx
import numpy as np

from ..exceptions import PathCertificateError

Vertex = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class LabGraph:
    """Unit-weight graph on integer coordinate tuples.

    ``axes`` lists the sorted values of every coordinate; ``horizons`` are the stage lengths
    of the level-by-level path construction (axis 1 first) and ``stride`` the sweep stride
    of gate graphs (0 when every unit move is a direct edge).
    """

    kind: str
    graph: nx.Graph
    axes: tuple[tuple[int, ...], ...]
    params: dict = field(default_factory=dict)
    horizons: tuple[int, ...] = ()
    congestion_cap: Optional[int] = None
    stride: int = 0

    @cached_property
    def vertices(self) -> list[Vertex]:
        return sorted(self.graph.nodes)

    @cached_property
    def index(self) -> dict[Vertex, int]:
        return {v: k for k, v in enumerate(self.vertices)}

    @property
    def order(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def size(self) -> int:
        return self.graph.number_of_edges()

    @property
    def dimension(self) -> int:
        return len(self.axes)

    @cached_property
    def is_product(self) -> bool:
        """Every combination of axis values is a vertex."""
        expected = int(np.prod([len(axis) for axis in self.axes]))
        return expected == self.order

    def has_edge(self, u: Vertex, v: Vertex) -> bool:
        return self.graph.has_edge(u, v)

    def spec(self) -> dict[str, Any]:
        return {"kind": self.kind, **self.params}


@dataclass(frozen=True, eq=False)
class SignedFunction:
    """Real function on the vertices with its median split into P (+1) and N (-1)."""

    vertices: tuple[Vertex, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, 'values', values)
        if values.shape != (len(self.vertices),):
            raise PathCertificateError("one value per vertex is required")
        if len(self.vertices) % 2:
            raise PathCertificateError(f"vertex count {len(self.vertices)} is odd")
        scale = max(1.0, float(np.abs(values).sum()))
        if abs(values.sum()) > 1e-12 * scale:
            raise PathCertificateError(f"function does not sum to zero (sum={values.sum():.3e})")

    @classmethod
    def from_mapping(cls, mapping: dict[Vertex, float]) -> 'SignedFunction':
        vertices = tuple(sorted(mapping))
        return cls(vertices, np.array([mapping[v] for v in vertices]))

    @cached_property
    def median(self) -> float:
        """The |V|/2-th smallest value (0-based), the upper middle one for even |V|."""
        return float(np.sort(self.values)[len(self.values) // 2])

    @cached_property
    def psi(self) -> np.ndarray:
        return self.values - self.median

    @cached_property
    def labels(self) -> np.ndarray:
        """+1 for P, -1 for N; zeros of psi fill whichever side balances, in vertex order."""
        tol = 1e-12 * max(1.0, float(np.abs(self.values).max(initial=0.0)))
        labels = np.where(self.psi > tol, 1, np.where(self.psi < -tol, -1, 0))
        half = len(self.vertices) // 2
        missing_plus = half - int((labels == 1).sum())
        if missing_plus < 0 or int((labels == -1).sum()) > half:
            raise PathCertificateError("median split cannot be balanced")
        for k in np.flatnonzero(labels == 0):
            if missing_plus > 0:
                labels[k] = 1
                missing_plus -= 1
            else:
                labels[k] = -1
        return labels

    @cached_property
    def label_of(self) -> dict[Vertex, int]:
        return {v: int(s) for v, s in zip(self.vertices, self.labels)}


@dataclass(frozen=True, eq=False)
class PathFamily:
    """Path map P(i, t) stored as vertex indices, shape (T+1, |V|)."""

    vertices: tuple[Vertex, ...]
    table: np.ndarray
    congestion_cap: Optional[int] = None
    construction: str = "custom"

    @property
    def horizon(self) -> int:
        return int(self.table.shape[0]) - 1

    def position(self, vertex: Vertex, t: int) -> Vertex:
        return self.vertices[int(self.table[t, self.vertices.index(vertex)])]

    def trajectory(self, start: int) -> list[Vertex]:
        return [self.vertices[int(k)] for k in self.table[:, start]]

    @cached_property
    def edge_usage(self) -> Counter:
        """Traversals per undirected edge (vertex-index pair), both directions counted."""
        src = self.table[:-1].ravel()
        dst = self.table[1:].ravel()
        moving = src != dst
        low = np.minimum(src[moving], dst[moving])
        high = np.maximum(src[moving], dst[moving])
        codes, counts = np.unique(low * len(self.vertices) + high, return_counts=True)
        n = len(self.vertices)
        return Counter({(int(c // n), int(c % n)): int(k) for c, k in zip(codes, counts)})

    @property
    def congestion(self) -> int:
        return max(self.edge_usage.values(), default=0)

    def brute_force_congestion(self) -> int:
        """Congestion by an explicit loop over every (path, step)."""
        usage: dict[frozenset, int] = {}
        for start in range(self.table.shape[1]):
            for t in range(self.horizon):
                a, b = int(self.table[t, start]), int(self.table[t + 1, start])
                if a != b:
                    key = frozenset((a, b))
                    usage[key] = usage.get(key, 0) + 1
        return max(usage.values(), default=0)

    def rows(self) -> list[list[list[int]]]:
        """Full path table as nested coordinate lists, one row per time step."""
        return [[list(self.vertices[int(k)]) for k in row] for row in self.table]
