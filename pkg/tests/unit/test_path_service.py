"""Tests for level-by-level path construction."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT / 'src'))

from gsqc.exceptions import PathConstructionError
from gsqc.models.graphs import SignedFunction
from gsqc.services.graph_service import GraphService
from gsqc.services.path_service import PathService, SweepRouter, final_moves

# rows i2 = 1..4, columns i1 = 1..4; median 0.3
GRID_VALUES = [
    [0.6, -1.0, -0.6, 0.2],
    [0.4, -0.5, 0.6, 0.3],
    [1.3, -0.3, 1.2, 0.4],
    [-1.3, -1.0, -1.1, 0.8],
]


@pytest.fixture
def chain_phi():
    g = GraphService.build_chain(6)
    return g, SignedFunction(tuple(g.vertices), np.array([-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]))


@pytest.fixture
def grid_phi():
    g = GraphService.build_grid(4, 4)
    mapping = {(i1 + 1, i2 + 1): GRID_VALUES[i2][i1] for i1 in range(4) for i2 in range(4)}
    return g, SignedFunction.from_mapping(mapping)


def test_chain_targets():
    """Test odd starts go to P vertices and even starts to N vertices, in order."""
    targets = PathService.chain_targets(np.array([-1, -1, -1, 1, 1, 1]))

    assert targets.tolist() == [3, 0, 4, 1, 5, 2]

    with pytest.raises(PathConstructionError):
        PathService.chain_targets(np.array([1, 1, -1, 1]))


def test_chain_family(chain_phi):
    """Test the chain family: endpoints, horizon and congestion."""
    g, phi = chain_phi
    family = PathService.construct(g, phi)

    assert family.construction == "chain"
    assert family.horizon == 6
    assert [family.position((i,), 6)[0] for i in range(1, 7)] == [4, 1, 5, 2, 6, 3]
    assert family.congestion == 4
    assert family.congestion_cap == 6


def test_shuffle_first_slice(grid_phi):
    """Test the shuffled sources for i2 = 1 of the grid example."""
    g, phi = grid_phi
    shuffled = PathService.construct_jshuffle(g, phi)

    assert [shuffled[(i1, 1)] for i1 in range(1, 5)] == [4, 1, 2, 2]
    signs = [phi.label_of[(i1, shuffled[(i1, 1)])] for i1 in range(1, 5)]
    assert signs == [-1, -1, 1, 1]


def test_shuffle_is_balanced_and_bijective(grid_phi):
    """Test every slice is balanced and every fibre is permuted."""
    g, phi = grid_phi
    shuffled = PathService.construct_jshuffle(g, phi)

    for i1 in range(1, 5):
        assert sorted(shuffled[(i1, i2)] for i2 in range(1, 5)) == [1, 2, 3, 4]
    for i2 in range(1, 5):
        assert sum(phi.label_of[(i1, shuffled[(i1, i2)])] for i1 in range(1, 5)) == 0


def test_shuffle_first_axis(grid_phi):
    """Test shuffling along a non-last axis."""
    g, phi = grid_phi
    shuffled = PathService.construct_jshuffle(g, phi, axis=1)

    for i2 in range(1, 5):
        assert sorted(shuffled[(i1, i2)] for i1 in range(1, 5)) == [1, 2, 3, 4]
    with pytest.raises(ValueError):
        PathService.construct_jshuffle(g, phi, axis=3)


def test_shuffle_rejects_odd_cross_sections():
    """Test that an odd number of fibres cannot be balanced."""
    with pytest.raises(PathConstructionError):
        PathService.shuffle_last_axis(np.array([[1, -1], [1, -1], [-1, 1]]))


def test_waypoints_end_on_a_balanced_matching(grid_phi):
    """Test the final waypoints form a permutation of the grid cells."""
    g, phi = grid_phi
    labels = PathService.label_grid(g, phi)
    plan = PathService.waypoints(labels)

    assert plan.shape == (4, 4, 3, 2)
    starts = plan[..., 0, :].reshape(-1, 2)
    ends = plan[..., 2, :].reshape(-1, 2)
    assert sorted(map(tuple, starts.tolist())) == sorted(map(tuple, ends.tolist()))
    assert len({tuple(e) for e in ends.tolist()}) == 16


def test_grid_family_fits_its_horizons(grid_phi):
    """Test the grid family needs no horizon extension."""
    g, phi = grid_phi
    family = PathService.construct(g, phi)

    assert family.construction == "product"
    assert family.horizon == 8
    assert family.congestion <= 4
    assert family.congestion == family.brute_force_congestion()


def test_label_grid_rejects_foreign_function(grid_phi):
    """Test labels must live on the graph vertices."""
    g, _ = grid_phi
    chain = GraphService.build_chain(16)
    phi = SignedFunction(tuple(chain.vertices), np.array([1.0, -1.0] * 8))

    with pytest.raises(PathConstructionError):
        PathService.label_grid(g, phi)


def test_final_moves():
    """Test the hand-over moves for both strides."""
    assert final_moves(1, 1, 3) == [(0, 4)]
    assert final_moves(2, 2, 0) == [(3, 0), (0, 1)]
    assert final_moves(2, 3, 0) == [(0, 1), (1, 1)]
    assert final_moves(1, 0, 3) is None


def test_sweep_advance_on_gate_graph():
    """Test the unit advance of the last coordinate through the lower ones."""
    g = GraphService.build_gate_graph(5, 6)
    path = PathService.sweep_advance(g, (0, 0, 1, 0, 3), 5)

    assert path == [
        (0, 0, 0, 1, 3),
        (1, 0, 0, 1, 3),
        (0, 1, 0, 1, 3),
        (0, 0, 1, 1, 3),
        (0, 0, 1, 0, 4),
    ]


def test_router_moves_use_edges():
    """Test that retreats and multi-unit moves stay on graph edges."""
    g = GraphService.build_gate_graph(5, 6)
    router = SweepRouter(g)
    start = (0, 0, 1, 0, 3)
    for path, goal in ((router.move(start, 5, 6), 6), (router.move(start, 5, 1), 1)):
        previous = start
        for vertex in path:
            assert g.has_edge(previous, vertex)
            previous = vertex
        assert previous == start[:4] + (goal,)


def test_gate_graph_family():
    """Test the sweep family of the gate graph."""
    g = GraphService.build_gate_graph(5, 6)
    phi = SignedFunction(tuple(g.vertices), np.array([1.0, -1.0] * 48))
    family = PathService.construct(g, phi)

    assert family.construction == "sweep"
    assert family.horizon >= 80
    assert family.congestion_cap == 28
