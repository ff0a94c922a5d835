"""Tests for lab graphs and their spectral functionals."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT / 'src'))

from gsqc.exceptions import PathCertificateError
from gsqc.services.graph_service import GraphService


def test_chain_and_grid_shapes():
    """Test vertex and edge counts of chains and grids."""
    chain = GraphService.build_chain(6)
    grid = GraphService.build_grid(4, 4)

    assert (chain.order, chain.size) == (6, 5)
    assert chain.vertices[0] == (1,)
    assert chain.congestion_cap == 6
    assert (grid.order, grid.size) == (16, 24)
    assert grid.is_product
    assert grid.horizons == (4, 4)
    assert grid.has_edge((1, 1), (1, 2))
    assert not grid.has_edge((1, 1), (2, 2))


def test_build_graph_dispatch():
    """Test the kind dispatcher and its error."""
    assert GraphService.build_graph("chain", n1=4).order == 4
    assert GraphService.build_graph("grid", sizes=[2, 3]).order == 6

    with pytest.raises(ValueError):
        GraphService.build_graph("torus", n1=4)
    with pytest.raises(ValueError):
        GraphService.build_chain(0)


def test_gate_graph_is_a_product():
    """Test the gate graph of the chain-array circuit in exchange coordinates."""
    g = GraphService.build_gate_graph(5, 6)

    assert g.order == 96
    assert g.is_product
    assert g.axes[:4] == ((0, 1),) * 4
    assert g.axes[4] == (1, 2, 3, 4, 5, 6)
    assert g.horizons == (2, 4, 6, 8, 60)
    assert g.congestion_cap == 28
    assert g.stride == 1
    # raw positions are kept on the nodes
    assert len(g.graph.nodes[(0, 0, 1, 0, 3)]["positions"]) == 5


def test_gate_graph_hops():
    """Test that a unit sweep of the gate graph uses circuit hops."""
    g = GraphService.build_gate_graph(5, 6)

    assert g.has_edge((0, 0, 1, 0, 3), (0, 0, 0, 1, 3))
    assert g.has_edge((0, 0, 1, 1, 3), (0, 0, 1, 0, 4))


def test_circuit_graph():
    """Test the graph of the smallest layered circuit."""
    g = GraphService.build_graph("from-circuit", M=3, n=2)

    assert g.order == 208
    assert g.is_product
    assert g.axes[0] == (0, 1, 2, 3)
    assert g.horizons == (24, 48, 270)
    assert sum(g.horizons) == 342
    assert g.congestion_cap == 50
    assert g.has_edge((2, 0, 5), (2, 1, 5))
    assert g.has_edge((2, 1, 5), (3, 1, 5))
    assert g.has_edge((3, 1, 5), (0, 2, 5))


def test_exchange_coordinates():
    """Test the relabelling i_alpha = k_alpha - min k_alpha given k_{alpha+1}."""
    positions = np.array([[1, 3], [2, 3], [2, 4], [3, 4]])
    coords = GraphService.exchange_coordinates(positions)

    assert coords.tolist() == [[0, 3], [1, 3], [0, 4], [1, 4]]


def test_rayleigh_quotient():
    """Test the Rayleigh quotient on small functions."""
    chain = GraphService.build_chain(2)

    assert GraphService.rayleigh(chain, [1.0, -1.0]) == pytest.approx(2.0)
    assert GraphService.rayleigh(chain, {(1,): 1.0, (2,): -1.0}, E=3.0) == pytest.approx(6.0)
    assert GraphService.rayleigh(GraphService.build_chain(5), np.ones(5)) == 0.0

    with pytest.raises(PathCertificateError):
        GraphService.rayleigh(chain, [0.0, 0.0])
    with pytest.raises(ValueError):
        GraphService.rayleigh(chain, [1.0, 0.0, -1.0])


def test_fiedler_values():
    """Test Fiedler values against closed forms."""
    assert GraphService.fiedler(GraphService.build_chain(6)) == pytest.approx(2 * (1 - np.cos(np.pi / 6)))
    assert GraphService.fiedler(GraphService.build_chain(6)) == pytest.approx(GraphService.chain_gap(6))
    # the product spectrum is set by the longest factor
    assert GraphService.fiedler(GraphService.build_grid(4, 3)) == pytest.approx(GraphService.chain_gap(4))
    assert GraphService.fiedler(GraphService.build_chain(4), E=2.0) == pytest.approx(2 * GraphService.chain_gap(4))


def test_laplacian_spectrum_of_grid():
    """Test the full Laplacian spectrum of a small grid."""
    spectrum = GraphService.laplacian_spectrum(GraphService.build_grid(2, 2))

    assert spectrum.tolist() == pytest.approx([0.0, 2.0, 2.0, 4.0], abs=1e-12)
