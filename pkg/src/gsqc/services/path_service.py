"""Level-by-level path families for the certifier.

A family is planned on the axis-index grid of a product-shaped graph: axis 1 is routed
first in time with the chain map, every later axis with a balancing shuffle. Gate graphs
realise each unit move along an axis by a sweep through the lower coordinates.
"""

import logging
from typing import Optional

import networkx as nx
import numpy as np

from ..exceptions import PathConstructionError
from ..models.graphs import LabGraph, PathFamily, SignedFunction, Vertex

logger = logging.getLogger(__name__)

# (i_{beta-1}, i_beta) -> moves that carry `stride` units from coordinate beta-1 to beta
TRANSFER_MOVES: dict[int, dict[tuple[int, int], list[tuple[int, int]]]] = {
    1: {(1, 0): [(0, 1)]},
    2: {
        (2, 0): [(2, 1), (3, 1), (0, 2)],
        (3, 0): [(3, 1), (0, 2), (1, 2)],
        (2, 1): [(3, 1), (0, 2), (0, 3)],
        (3, 1): [(0, 2), (1, 2), (1, 3)],
    },
}


def final_moves(stride: int, low: int, value: int) -> Optional[list[tuple[int, int]]]:
    """Moves of (i_{alpha-1}, i_alpha) that advance i_alpha by one, or None."""
    if stride == 1 and low == 1:
        return [(0, value + 1)]
    if stride == 2 and low == 2:
        return [(3, value), (0, value + 1)]
    if stride == 2 and low == 3:
        return [(0, value + 1), (1, value + 1)]
    return None


class _Detour(Exception):
    """Raised inside the sweep when a planned move is not an edge."""


class SweepRouter:
    """Unit moves along one axis of a graph, keeping every other coordinate fixed.

    Direct edges are used when present. Otherwise the lower coordinates are raised by
    a downward sweep of transfers followed by an upward sweep, and the final move hands
    the surplus to the moving axis. Moves the sweep cannot place fall back to a shortest
    path with all higher coordinates fixed.
    """

    def __init__(self, g: LabGraph):
        self.g = g
        self.stride = g.stride
        self.detours = 0
        self._cache: dict[tuple[Vertex, int], list[Vertex]] = {}

    @staticmethod
    def shift(x: Vertex, axis: int, delta: int) -> Vertex:
        return x[:axis - 1] + (x[axis - 1] + delta,) + x[axis:]

    def advance(self, x: Vertex, axis: int) -> list[Vertex]:
        """Path from x (excluded) to x + e_axis."""
        key = (x, axis)
        if key not in self._cache:
            target = self.shift(x, axis, 1)
            if target not in self.g.graph:
                raise PathConstructionError(f"{target} is not a vertex", witness=(x, axis))
            try:
                path = self._sweep(x, target, axis)
            except _Detour:
                path = self._detour(x, target, axis)
            self._cache[key] = path
        return list(self._cache[key])

    def retreat(self, x: Vertex, axis: int) -> list[Vertex]:
        """Path from x (excluded) to x - e_axis, the reversed advance."""
        below = self.shift(x, axis, -1)
        forward = [below] + self.advance(below, axis)
        return forward[::-1][1:]

    def move(self, x: Vertex, axis: int, value: int) -> list[Vertex]:
        """Unit moves until coordinate `axis` equals value."""
        path, cur = [], x
        while cur[axis - 1] != value:
            step = self.advance(cur, axis) if value > cur[axis - 1] else self.retreat(cur, axis)
            path.extend(step)
            cur = step[-1]
        return path

    def _sweep(self, x: Vertex, target: Vertex, axis: int) -> list[Vertex]:
        if self.g.has_edge(x, target):
            return [target]
        if self.stride == 0 or axis == 1:
            raise _Detour
        path: list[Vertex] = []
        if x[axis - 2] < self.stride:
            cur = self._raise(x, axis - 1, path)
            cur = self._pair_moves(cur, axis, final_moves(self.stride, cur[axis - 2], cur[axis - 1]), path)
        else:
            cur = self._pair_moves(x, axis, final_moves(self.stride, x[axis - 2], x[axis - 1]), path)
            cur = self._raise(cur, axis - 1, path)
        if cur != target:
            raise _Detour
        return path

    def _step(self, cur: Vertex, nxt: Vertex, path: list[Vertex]) -> Vertex:
        if not self.g.has_edge(cur, nxt):
            raise _Detour
        path.append(nxt)
        return nxt

    def _pair_moves(self, cur: Vertex, axis: int, moves: Optional[list[tuple[int, int]]],
                    path: list[Vertex]) -> Vertex:
        if moves is None:
            raise _Detour
        for low, high in moves:
            nxt = cur[:axis - 2] + (low, high) + cur[axis:]
            cur = self._step(cur, nxt, path)
        return cur

    def _transfer(self, cur: Vertex, axis: int, path: list[Vertex]) -> Vertex:
        moves = TRANSFER_MOVES[self.stride].get((cur[axis - 2], cur[axis - 1]))
        return self._pair_moves(cur, axis, moves, path)

    def _direct(self, cur: Vertex, axis: int, path: list[Vertex]) -> Optional[Vertex]:
        chain = [self.shift(cur, axis, k) for k in range(1, self.stride + 1)]
        previous = cur
        for nxt in chain:
            if not self.g.has_edge(previous, nxt):
                return None
            previous = nxt
        path.extend(chain)
        return chain[-1]

    def _raise(self, x: Vertex, axis: int, path: list[Vertex]) -> Vertex:
        """Raise coordinate `axis` by the stride and restore every lower coordinate."""
        s = self.stride
        cur, level = x, axis
        while True:
            reached = self._direct(cur, level, path)
            if reached is not None:
                cur = reached
                break
            if level == 1:
                raise _Detour
            if cur[level - 2] >= s:
                cur = self._transfer(cur, level, path)
            level -= 1
        for upper in range(level + 1, axis + 1):
            if cur[upper - 2] - x[upper - 2] >= s:
                cur = self._transfer(cur, upper, path)
        if cur != self.shift(x, axis, s):
            raise _Detour
        return cur

    def _detour(self, x: Vertex, target: Vertex, axis: int) -> list[Vertex]:
        fixed = x[axis:]
        view = nx.subgraph_view(self.g.graph, filter_node=lambda v: v[axis:] == fixed)
        try:
            nodes = nx.shortest_path(view, x, target)
        except (nx.NetworkXNoPath, nx.NodeNotFound) as exc:
            raise PathConstructionError(
                f"no path from {x} to {target} with coordinates above {axis} fixed", witness=(x, target)
            ) from exc
        self.detours += 1
        logger.debug("shortest-path detour %s -> %s (%d steps)", x, target, len(nodes) - 1)
        return nodes[1:]


class PathService:
    """Service constructing path families for chains, grids and gate graphs."""

    @staticmethod
    def chain_targets(labels: np.ndarray) -> np.ndarray:
        """Odd positions (1-based) go to the P vertices in order, even ones to the N vertices."""
        plus = np.flatnonzero(labels == 1)
        minus = np.flatnonzero(labels == -1)
        if plus.size != minus.size or plus.size + minus.size != labels.size:
            raise PathConstructionError("chain labels are not balanced")
        targets = np.empty(labels.size, dtype=np.int64)
        targets[0::2] = plus
        targets[1::2] = minus
        return targets

    @staticmethod
    def shuffle_last_axis(labels: np.ndarray) -> np.ndarray:
        """New last-axis index for every cell so that each last-axis value sees balanced signs.

        Values are filled in increasing order from the pool of unused cells of each fibre.
        Fibres with only P (or only N) left take their lowest cell; the mixed fibres, in
        order, take N cells until the N count reaches half and P cells after that.
        """
        n = labels.shape[-1]
        flat = labels.reshape(-1, n)
        count = flat.shape[0]
        if count % 2:
            raise PathConstructionError(f"cross-sections of {count} vertices cannot be balanced")
        half = count // 2
        available = np.ones(flat.shape, dtype=bool)
        target = np.empty(flat.shape, dtype=np.int64)
        for value in range(n):
            plus = available & (flat == 1)
            minus = available & (flat == -1)
            only_plus = ~minus.any(axis=1)
            only_minus = ~plus.any(axis=1)
            mixed = ~(only_plus | only_minus)
            wanted = half - int(only_minus.sum())
            if wanted < 0 or wanted > int(mixed.sum()):
                raise PathConstructionError(f"no balanced assignment for value {value}", witness=(value,))
            taken = 0
            for row in range(count):
                if mixed[row]:
                    pool = minus[row] if taken < wanted else plus[row]
                    taken += 1
                else:
                    pool = available[row]
                k = int(np.argmax(pool))
                target[row, value] = k
                available[row, k] = False
        return target.reshape(labels.shape)

    @staticmethod
    def label_grid(g: LabGraph, phi: SignedFunction) -> np.ndarray:
        """P/N labels laid out on the axis-index grid of a product graph."""
        if tuple(phi.vertices) != tuple(g.vertices):
            raise PathConstructionError("the function is not defined on the graph vertices")
        if not g.is_product:
            raise PathConstructionError(f"{g.kind} graph is not a product of its axes")
        shape = tuple(len(axis) for axis in g.axes)
        return np.asarray(phi.labels).reshape(shape)

    @staticmethod
    def construct_jshuffle(g: LabGraph, phi: SignedFunction, axis: Optional[int] = None) -> dict[Vertex, int]:
        """Shuffled coordinate along `axis` (default the last) for every vertex."""
        axis = g.dimension if axis is None else axis
        if not 1 <= axis <= g.dimension:
            raise ValueError(f"axis {axis} outside 1..{g.dimension}")
        labels = np.moveaxis(PathService.label_grid(g, phi), axis - 1, -1)
        shuffled = np.moveaxis(PathService.shuffle_last_axis(labels), -1, axis - 1)
        values = g.axes[axis - 1]
        return {v: values[int(k)] for v, k in zip(g.vertices, shuffled.ravel())}

    @staticmethod
    def waypoints(labels: np.ndarray) -> np.ndarray:
        """Axis-index position of every start cell after each stage, shape (*shape, d+1, d).

        Within each last-axis slice the lower axes are solved recursively on the labels the
        shuffle will bring in, then the last coordinate moves to its shuffled value.
        """
        d = labels.ndim
        shape = labels.shape
        out = np.empty(shape + (d + 1, d), dtype=np.int64)
        if d == 1:
            out[:, 0, 0] = np.arange(shape[0])
            out[:, 1, 0] = PathService.chain_targets(labels)
            return out
        shuffled = PathService.shuffle_last_axis(labels)
        for value in range(shape[-1]):
            column = shuffled[..., value:value + 1]
            sub = PathService.waypoints(np.take_along_axis(labels, column, axis=-1)[..., 0])
            reached = sub[..., -1, :]
            moved = shuffled[tuple(reached[..., a] for a in range(d - 1)) + (value,)]
            out[..., value, :d, :d - 1] = sub
            out[..., value, :d, d - 1] = value
            out[..., value, d, :d - 1] = reached
            out[..., value, d, d - 1] = moved
        return out

    @staticmethod
    def construct_paths(g: LabGraph, phi: SignedFunction, construction: Optional[str] = None) -> PathFamily:
        """Family P(i, t) following the waypoints, every stage padded to its horizon."""
        labels = PathService.label_grid(g, phi)
        plan = PathService.waypoints(labels)
        router = SweepRouter(g)
        d = g.dimension
        axes = g.axes

        segments: list[list[list[Vertex]]] = []
        for cell in np.ndindex(labels.shape):
            points = [tuple(axes[a][int(k)] for a, k in enumerate(row)) for row in plan[cell]]
            stages = []
            for alpha in range(1, d + 1):
                stages.append(router.move(points[alpha - 1], alpha, points[alpha][alpha - 1]))
                if stages[-1] and stages[-1][-1] != points[alpha]:
                    raise PathConstructionError("stage ended off its waypoint", witness=(points[0], alpha))
            segments.append(stages)

        horizons = list(g.horizons) if g.horizons else [0] * d
        for alpha in range(d):
            longest = max((len(s[alpha]) for s in segments), default=0)
            if longest > horizons[alpha]:
                logger.warning("stage %d needs %d steps, horizon %d extended", alpha + 1, longest, horizons[alpha])
                horizons[alpha] = longest
        T = sum(horizons)

        index = g.index
        table = np.empty((T + 1, g.order), dtype=np.int64)
        for cell, stages in zip(np.ndindex(labels.shape), segments):
            start = tuple(axes[a][k] for a, k in enumerate(cell))
            column = [start]
            for alpha, steps in enumerate(stages):
                column.extend(steps)
                column.extend([column[-1]] * (horizons[alpha] - len(steps)))
            table[:, index[start]] = [index[v] for v in column]

        if router.detours:
            logger.info("%d unit moves used shortest-path detours", router.detours)
        logger.info("%s family: T=%d over %d vertices", g.kind, T, g.order)
        return PathFamily(vertices=tuple(g.vertices), table=table, congestion_cap=g.congestion_cap,
                          construction=construction or g.kind)

    @staticmethod
    def construct_path_chain(g: LabGraph, phi: SignedFunction) -> PathFamily:
        if g.dimension != 1:
            raise PathConstructionError(f"chain construction on a {g.dimension}-dimensional graph")
        return PathService.construct_paths(g, phi, construction="chain")

    @staticmethod
    def construct_path_product(g: LabGraph, phi: SignedFunction) -> PathFamily:
        return PathService.construct_paths(g, phi, construction="product")

    @staticmethod
    def construct_sweep_path(g: LabGraph, phi: SignedFunction) -> PathFamily:
        if g.stride == 0:
            raise PathConstructionError(f"{g.kind} graph has no sweep stride")
        return PathService.construct_paths(g, phi, construction="sweep")

    @staticmethod
    def sweep_advance(g: LabGraph, vertex: Vertex, axis: int) -> list[Vertex]:
        """Unit advance of one coordinate, every other coordinate restored."""
        return SweepRouter(g).advance(tuple(vertex), axis)

    @staticmethod
    def construct(g: LabGraph, phi: SignedFunction) -> PathFamily:
        if g.kind == "chain":
            return PathService.construct_path_chain(g, phi)
        if g.stride:
            return PathService.construct_sweep_path(g, phi)
        return PathService.construct_path_product(g, phi)
