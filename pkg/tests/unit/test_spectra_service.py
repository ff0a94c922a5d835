"""Tests for eigensolves, gaps and gap bounds."""

import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# Add src to path
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT / 'src'))

from gsqc.exceptions import CircuitError, SpectralError
from gsqc.services.hamiltonian_service import HamiltonianService
from gsqc.services.spectra_service import SpectraService, SpectralWorkspace


def test_extremal_eigs_dense():
    """Test the dense branch on a small diagonal matrix."""
    pairs = SpectraService.extremal_eigs(np.diag([3.0, 1.0, 2.0]), k=2)

    assert [p.value for p in pairs] == pytest.approx([1.0, 2.0])
    assert abs(pairs[0].vector[1]) == pytest.approx(1.0)

    with pytest.raises(ValueError):
        SpectraService.extremal_eigs(np.diag([1.0, 2.0]), k=3)


def test_extremal_eigs_shift_invert():
    """Test the sparse branch on an operator above the dense threshold."""
    n = 5000
    diagonal = np.concatenate([[0.5, 0.0], np.linspace(1.0, 10.0, n - 2)])
    pairs = SpectraService.extremal_eigs(sp.diags(diagonal, format='csr'), k=2, seed=1)

    assert pairs[0].value == pytest.approx(0.0, abs=1e-9)
    assert pairs[1].value == pytest.approx(0.5)
    assert abs(pairs[0].vector[1]) == pytest.approx(1.0)


def test_extremal_eigs_indefinite_sparse():
    """Test the sparse branch returns the smallest levels when some lie far below zero."""
    n = 5000
    diagonal = np.linspace(0.0, 1.0, n)
    diagonal[100] = -10.0
    pairs = SpectraService.extremal_eigs(sp.diags(diagonal, format='csr'), k=1, seed=1)

    assert pairs[0].value == pytest.approx(-10.0)
    assert abs(pairs[0].vector[100]) == pytest.approx(1.0)

    diagonal = np.linspace(1.0, 10.0, n)
    diagonal[[7, 100]] = [0.0, -10.0]
    pairs = SpectraService.extremal_eigs(sp.diags(diagonal, format='csr'), k=2, seed=1)

    assert [p.value for p in pairs] == pytest.approx([-10.0, 0.0], abs=1e-9)


def test_extremal_eigs_indefinite_tridiagonal():
    """Test a coupled indefinite operator against the exact tridiagonal spectrum."""
    n = 5000
    main = np.linspace(-3.0, 5.0, n)
    off = np.full(n - 1, 0.5)
    matrix = sp.diags([off, main, off], [-1, 0, 1], format='csr')
    pairs = SpectraService.extremal_eigs(matrix, k=3, seed=2)
    exact = sla.eigvalsh_tridiagonal(main, off, select='i', select_range=(0, 2))

    assert [p.value for p in pairs] == pytest.approx(exact.tolist(), abs=1e-8)
    assert exact[0] < -3.0


def test_extremal_eigs_residuals_within_tolerance():
    """Test every returned pair meets tol * max(1, |e|) on an operator of large norm."""
    n = 5000
    diagonal = np.concatenate([[500.0, 0.0], np.linspace(1e3, 1e4, n - 2)])
    matrix = sp.diags(diagonal, format='csr')
    pairs = SpectraService.extremal_eigs(matrix, k=2, seed=1, tol=1e-8)

    assert [p.value for p in pairs] == pytest.approx([0.0, 500.0], abs=1e-7)
    for pair in pairs:
        residual = np.linalg.norm(matrix @ pair.vector - pair.value * pair.vector)
        assert pair.residual == pytest.approx(residual, abs=1e-15)
        assert residual <= 1e-8 * max(1.0, abs(pair.value))


def test_extremal_eigs_rejects_residual_above_tolerance(monkeypatch):
    """Test a pair that misses tol * max(1, |e|) is rejected however large the operator norm."""
    n = 5000
    diagonal = np.concatenate([[0.0], np.linspace(1e3, 1e4, n - 1)])
    vector = np.zeros((n, 1))
    vector[0, 0] = 1.0

    def inaccurate(*args, **kwargs):
        return np.array([1e-8]), vector

    monkeypatch.setattr(spla, "eigsh", inaccurate)
    with pytest.raises(SpectralError) as excinfo:
        SpectraService.extremal_eigs(sp.diags(diagonal, format='csr'), k=1, tol=1e-10)

    assert excinfo.value.residual == pytest.approx(1e-8)


def test_extremal_eigs_reports_residual_without_convergence(monkeypatch):
    """Test an unconverged Lanczos run raises with the residual it reached."""
    n = 5000
    diagonal = np.concatenate([[0.5], np.linspace(1.0, 2.0, n - 1)])
    vector = np.zeros((n, 1))
    vector[0, 0] = 1.0

    def partial(*args, **kwargs):
        raise spla.ArpackNoConvergence("ARPACK error -1: No convergence", np.array([0.3]), vector)

    monkeypatch.setattr(spla, "eigsh", partial)
    with pytest.raises(SpectralError, match="converged 1 of 2") as excinfo:
        SpectraService.extremal_eigs(sp.diags(diagonal, format='csr'), k=2)

    assert excinfo.value.residual == pytest.approx(0.2)

    def nothing(*args, **kwargs):
        raise spla.ArpackNoConvergence("ARPACK error -1: No convergence", np.zeros(0), np.zeros((n, 0)))

    monkeypatch.setattr(spla, "eigsh", nothing)
    with pytest.raises(SpectralError) as excinfo:
        SpectraService.extremal_eigs(sp.diags(diagonal, format='csr'), k=2)

    assert excinfo.value.residual is not None
    assert 0.0 < excinfo.value.residual < np.inf


@pytest.mark.parametrize("lam", [0.3, 0.7, 1.0])
def test_gap_matches_dense_spectrum(cnot_circuit, lam):
    """Test the block-wise gap against full diagonalisation."""
    dense = sla.eigvalsh(HamiltonianService.assemble(cnot_circuit, lam).dense())
    result = SpectraService.gap(cnot_circuit, lam)

    assert result.e0 == pytest.approx(0.0, abs=1e-10)
    assert result.gap == pytest.approx(dense[1] - dense[0], abs=1e-8)
    assert result.gap > 0.0


def test_sum_bound():
    """Test the perturbative lower bound and its input checks."""
    assert SpectraService.sum_bound(0.0, 1.0, [0.5], 1.0) == pytest.approx(0.2)
    assert SpectraService.sum_bound(0.0, 1.0, [0.5, 0.0], 1.0) == 0.0

    with pytest.raises(ValueError):
        SpectraService.sum_bound(1.0, 0.5, [0.1], 1.0)
    with pytest.raises(ValueError):
        SpectraService.sum_bound(0.0, 1.0, [], 1.0)
    with pytest.raises(ValueError):
        SpectraService.sum_bound(0.0, 1.0, [-0.1], 1.0)
    with pytest.raises(ValueError):
        SpectraService.sum_bound(0.0, 1.0, [2.0], 1.0)


def test_gap_bound_1d_closed_form():
    """Test the layered-circuit closed form."""
    assert SpectraService.gap_bound_1d(3, 17) == pytest.approx(1 / 2_352_290)
    assert SpectraService.gap_bound_1d(3, 17, E=2.0) == pytest.approx(2 / 2_352_290)

    with pytest.raises(CircuitError):
        SpectraService.gap_bound_1d(3, 16)
    with pytest.raises(CircuitError):
        SpectraService.gap_bound_1d(4, 17)


def test_scan_orders_the_bounds(layered_circuit):
    """Test exact gap >= occupation bound >= closed form on a small grid."""
    grid = [0.2, 0.5, 0.9]
    scan = SpectraService.scan(layered_circuit, grid, SpectralWorkspace(layered_circuit))

    assert [p.lam for p in scan.points] == grid
    assert [p.active_qubit for p in scan.points] == [1, 2, 3]
    for point in scan.points:
        assert point.gap >= point.bound_occupation - 1e-12
        assert point.bound_closed_form == pytest.approx(1 / 2_352_290)
    assert scan.min_gap > SpectraService.gap_bound_1d(3, 17)
    assert len(scan.csv_rows()) == 3


def test_occupation_gap_bound_is_the_grid_minimum(layered_circuit):
    """Test the occupation bound over a grid sits below every exact gap on it."""
    grid = [0.3, 0.7]
    ws = SpectralWorkspace(layered_circuit)
    bound = SpectraService.occupation_gap_bound(layered_circuit, grid, ws)
    points = [SpectraService.occupation_bound_point(layered_circuit, lam, ws) for lam in grid]

    assert bound == min(p[2] for p in points)
    assert 0.0 < bound <= min(SpectraService.gap(layered_circuit, lam, ws).gap for lam in grid) + 1e-12

    with pytest.raises(ValueError):
        SpectraService.occupation_gap_bound(layered_circuit, [])


@pytest.mark.asyncio
async def test_scan_async_keeps_grid_order(layered_circuit):
    """Test that the concurrent scan returns points in grid order."""
    grid = [0.9, 0.1, 0.5]
    scan = await SpectraService.scan_async(layered_circuit, grid, threads=2)

    assert [p.lam for p in scan.points] == grid
    assert scan.occupation_bound == min(p.bound_occupation for p in scan.points)


def test_e1_is_positive(layered_circuit):
    """Test that the reduced operator has a two-dimensional kernel and a positive next level."""
    assert SpectraService.e1(layered_circuit, 0.5) > 0.0
