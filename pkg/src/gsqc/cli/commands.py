"""Command-line interface commands."""

import asyncio
import os
import sys
import traceback
from typing import Optional

import click
import numpy as np

from ..config import app_config, configure_logging
from ..exceptions import GSQCError
from ..models.circuit import Circuit, Layout
from ..models.reports import VerifyCheck
from ..models.run_config import LambdaGrid, RunConfig
from ..services.adiabatic_service import AdiabaticService
from ..services.basis_service import BasisService
from ..services.certificate_service import CertificateService
from ..services.circuit_service import CircuitService
from ..services.graph_service import GRAPH_KINDS, GraphService
from ..services.groundstate_service import GroundStateService
from ..services.hamiltonian_service import HamiltonianService
from ..services.spectra_service import SpectraService, SpectralWorkspace
from ..services.verify_service import VerifyService
from ..utils.json_processor import JSONProcessor
from ..utils.uuid_utils import generate_artifact_name

LAYOUTS = [layout.value for layout in Layout]


def circuit_options(func):
    """Shared circuit-source options."""
    func = click.option('--circuit-file', type=click.Path(exists=True, dir_okay=False),
                        help='Circuit JSON (required for the custom layout)')(func)
    func = click.option('--n', 'n', type=int, default=2, show_default=True, help='Core depth parameter n')(func)
    func = click.option('--M', 'M', type=int, default=3, show_default=True, help='Number of qubits M')(func)
    func = click.option('--layout', type=click.Choice(LAYOUTS), default='1d', show_default=True,
                        help='Circuit layout')(func)
    return func


def output_options(func):
    func = click.option('--out', type=click.Path(dir_okay=False), help='Output file (default under GSQC_OUTPUT_DIR)')(func)
    func = click.option('--seed', type=int, default=None, help='Random seed (default GSQC_SEED)')(func)
    return func


def _artifact_path(config: RunConfig, suffix: str) -> str:
    return config.out or os.path.join(app_config.output_dir, generate_artifact_name(config, suffix))


async def _load_circuit(layout: str, M: int, n: int, circuit_file: Optional[str]) -> Circuit:
    if circuit_file:
        return await JSONProcessor().load_circuit_json(circuit_file)
    if layout == Layout.CUSTOM.value:
        raise click.UsageError("the custom layout needs --circuit-file")
    return CircuitService.build(layout, M, n)


def _lambda_grid(ctx: click.Context, param: click.Parameter, value: str) -> str:
    try:
        LambdaGrid.parse(value)
    except ValueError as e:
        raise click.BadParameter(str(e), ctx=ctx, param=param) from e
    return value


def _fail(message: str, error: Exception) -> None:
    click.echo(f"❌ {message}: {error}")
    if app_config.debug or not isinstance(error, GSQCError):
        click.echo(traceback.format_exc())
    sys.exit(1)


@click.group()
def main():
    """GSQC lab CLI - build circuits, scan gaps, certify paths and run the theorem suite."""
    configure_logging()


@main.command()
@circuit_options
@output_options
@click.option('--validate/--no-validate', default=True, help='Check every circuit invariant before writing')
def build(layout: str, M: int, n: int, circuit_file: Optional[str], seed: Optional[int], out: Optional[str],
          validate: bool):
    """Build a circuit and write its JSON."""
    asyncio.run(_build(layout, M, n, circuit_file, seed, out, validate))


async def _build(layout, M, n, circuit_file, seed, out, validate):
    try:
        config = RunConfig(command='build', layout=layout, M=M, n=n, circuit_file=circuit_file,
                           seed=app_config.seed if seed is None else seed, out=out)
        click.echo(f"🔧 Building {layout} circuit M={M} n={n}...")
        circuit = await _load_circuit(layout, M, n, circuit_file)
        if validate:
            report = CircuitService.validate_circuit(circuit)
            if not report.is_valid:
                for violation in report.violations:
                    click.echo(f"   ⚠️  {violation.rule}: {violation.message}")
                click.echo(f"❌ Circuit has {len(report.violations)} violations")
                sys.exit(1)
        path = await JSONProcessor().save_circuit_json(circuit, _artifact_path(config, '.json'))
        click.echo(f"✅ Circuit N={circuit.N} with {len(circuit.gates)} gates")
        click.echo(f"💾 Saved to {path}")
    except click.UsageError:
        raise
    except Exception as e:
        _fail("Error building circuit", e)


@main.command()
@circuit_options
@output_options
@click.option('--lam', type=float, default=1.0, show_default=True, help='Schedule parameter lambda')
@click.option('--levels', type=int, default=4, show_default=True, help='Number of eigenvalues')
@click.option('--dump-operator', type=click.Path(dir_okay=False), help='Write H(lambda) triplets here')
def spectrum(layout, M, n, circuit_file, seed, out, lam, levels, dump_operator):
    """Lowest eigenvalues of H(lambda) on the penalty-free subspace."""
    asyncio.run(_spectrum(layout, M, n, circuit_file, seed, out, lam, levels, dump_operator))


async def _spectrum(layout, M, n, circuit_file, seed, out, lam, levels, dump_operator):
    try:
        config = RunConfig(command='spectrum', layout=layout, M=M, n=n, circuit_file=circuit_file,
                           seed=app_config.seed if seed is None else seed, out=out,
                           lambda_grid=f"{lam}:{lam}:1", options={'levels': levels})
        circuit = await _load_circuit(layout, M, n, circuit_file)
        space = GroundStateService.propagation_space(circuit)
        click.echo(f"🔍 H({lam:g}) on {space.size} penalty-free states...")
        h = HamiltonianService.assemble(circuit, lam, space)
        pairs = SpectraService.extremal_eigs(h, k=min(levels, space.size), seed=config.seed,
                                             lower_bound=0.0)
        rows = [[k, pair.value, pair.residual] for k, pair in enumerate(pairs)]
        for k, value, residual in rows:
            click.echo(f"   E_{k} = {value:.15g}  (residual {residual:.2e})")
        processor = JSONProcessor()
        path = await processor.save_csv(["level", "energy", "residual"], rows, _artifact_path(config, '.csv'))
        click.echo(f"💾 Saved to {path}")
        if dump_operator:
            await processor.save_operator_dump(h, dump_operator)
            click.echo(f"💾 Operator written to {dump_operator}")
    except click.UsageError:
        raise
    except Exception as e:
        _fail("Error computing spectrum", e)


@main.command('gap-scan')
@circuit_options
@output_options
@click.option('--lambda-grid', default='0:1:11', show_default=True, callback=_lambda_grid,
              help='Grid a:b:steps')
@click.option('--occupations', type=click.Path(dir_okay=False), help='Also write rest-site occupations here')
def gap_scan(layout, M, n, circuit_file, seed, out, lambda_grid, occupations):
    """Spectral gap and its lower bounds over a lambda grid."""
    asyncio.run(_gap_scan(layout, M, n, circuit_file, seed, out, lambda_grid, occupations))


async def _gap_scan(layout, M, n, circuit_file, seed, out, lambda_grid, occupations):
    try:
        config = RunConfig(command='gap-scan', layout=layout, M=M, n=n, circuit_file=circuit_file,
                           seed=app_config.seed if seed is None else seed, out=out, lambda_grid=lambda_grid)
        circuit = await _load_circuit(layout, M, n, circuit_file)
        grid = config.grid.values()
        click.echo(f"📊 Scanning {len(grid)} points on {layout} M={circuit.M} N={circuit.N}...")
        scan = await SpectraService.scan_async(circuit, grid, SpectralWorkspace(circuit))
        processor = JSONProcessor()
        path = await processor.save_csv(scan.CSV_HEADER, scan.csv_rows(), _artifact_path(config, '.csv'))
        click.echo(f"✅ Minimum gap {scan.min_gap:.15g}")
        if scan.occupation_bound is not None:
            click.echo(f"   Occupation bound minimum {scan.occupation_bound:.15g}")
        bound = scan.points[0].bound_closed_form if scan.points else None
        if bound is not None:
            click.echo(f"   Closed-form bound {bound:.15g}")
        click.echo(f"💾 Saved to {path}")
        if occupations:
            rows = []
            for lam in grid:
                state = GroundStateService.history_ground_state(circuit, lam)
                rows.extend(GroundStateService.occupation_rows(state, lam))
            await processor.save_csv(["lambda", "qubit", "step", "probability"], rows, occupations)
            click.echo(f"💾 Occupations written to {occupations}")
    except click.UsageError:
        raise
    except Exception as e:
        _fail("Error scanning gap", e)


@main.command('certify-path')
@output_options
@click.option('--graph', 'kind', type=click.Choice(list(GRAPH_KINDS)), required=True, help='Graph family')
@click.option('--n1', type=int, default=6, show_default=True, help='Chain length')
@click.option('--sizes', default='4,4', show_default=True, help='Grid sizes, comma separated')
@click.option('--M', 'M', type=int, default=3, show_default=True, help='Gate-graph or circuit qubits')
@click.option('--N', 'N', type=int, default=6, show_default=True, help='Gate-graph depth')
@click.option('--n', 'n', type=int, default=2, show_default=True, help='Circuit core depth (from-circuit)')
@click.option('--phi-file', type=click.Path(exists=True, dir_okay=False), help='Signed function JSON')
@click.option('--random-phi', type=int, default=0, help='Certify this many seeded random functions instead')
@click.option('--include-paths', is_flag=True, help='Store the full path table in the certificate')
def certify_path(seed, out, kind, n1, sizes, M, N, n, phi_file, random_phi, include_paths):
    """Certify a Rayleigh lower bound with an explicit path family."""
    asyncio.run(_certify_path(seed, out, kind, n1, sizes, M, N, n, phi_file, random_phi, include_paths))


async def _certify_path(seed, out, kind, n1, sizes, M, N, n, phi_file, random_phi, include_paths):
    try:
        seed = app_config.seed if seed is None else seed
        params = {'n1': n1, 'sizes': [int(s) for s in sizes.split(',')], 'M': M, 'N': N, 'n': n}
        config = RunConfig(command='certify-path', seed=seed, out=out,
                           options={'graph': kind, **params, 'phi_file': phi_file, 'random_phi': random_phi})
        g = GraphService.build_graph(kind, **params)
        click.echo(f"📋 {kind} graph: {g.order} vertices, {g.size} edges")
        processor = JSONProcessor()

        if random_phi:
            rng = np.random.default_rng(seed)
            functions = [CertificateService.random_signed_function(g, rng) for _ in range(random_phi)]
            results = await CertificateService.certify_many_async(g, functions)
            fiedler = GraphService.fiedler(g)
            unsound = [k for k, r in enumerate(results)
                       if not r.valid or r.bound > (r.rayleigh or 0.0) or r.bound > fiedler]
            payload = {'graph': g.spec(), 'fiedler': fiedler, 'count': len(results),
                       'bound': results[0].bound if results else None, 'failures': unsound}
            path = await processor.save_json(payload, _artifact_path(config, '.json'))
            click.echo(f"{'✅' if not unsound else '❌'} {len(results) - len(unsound)}/{len(results)} certificates sound")
            click.echo(f"💾 Saved to {path}")
            if unsound:
                sys.exit(1)
            return

        if phi_file:
            phi = await processor.load_signed_function(phi_file, g.vertices)
        else:
            phi = CertificateService.random_signed_function(g, np.random.default_rng(seed))
        result = CertificateService.certify(g, phi, include_paths=include_paths)
        for check in result.conditions:
            mark = '✅' if check.passed else '❌'
            click.echo(f"   {mark} {check.name}" + (f": {check.witness}" if check.witness else ""))
        click.echo(f"📊 T={result.horizon} B={result.congestion} bound={result.bound:.15g}")
        if result.rayleigh is not None:
            click.echo(f"   Rayleigh quotient {result.rayleigh:.15g}")
        path = await processor.save_json(result, _artifact_path(config, '.json'))
        click.echo(f"💾 Saved to {path}")
        if not result.valid:
            sys.exit(1)
    except click.UsageError:
        raise
    except Exception as e:
        _fail("Error certifying paths", e)


@main.command()
@circuit_options
@output_options
@click.option('--time', 'times', type=float, multiple=True, default=(10.0,), show_default=True,
              help='Total evolution time (repeatable)')
@click.option('--steps', type=int, default=None, help='Integration steps (default 50*T*||H||)')
def evolve(layout, M, n, circuit_file, seed, out, times, steps):
    """Adiabatic evolution from the lambda=0 ground state."""
    asyncio.run(_evolve(layout, M, n, circuit_file, seed, out, times, steps))


async def _evolve(layout, M, n, circuit_file, seed, out, times, steps):
    try:
        config = RunConfig(command='evolve', layout=layout, M=M, n=n, circuit_file=circuit_file,
                           seed=app_config.seed if seed is None else seed, out=out,
                           options={'times': list(times), 'steps': steps})
        circuit = await _load_circuit(layout, M, n, circuit_file)
        click.echo(f"⏱️  Evolving {len(times)} schedule(s) on M={circuit.M} N={circuit.N}...")
        results = await AdiabaticService.evolve_many_async(circuit, times, steps)
        rows = []
        for result in results:
            click.echo(f"   T={result.total_time:g}: fidelity {result.fidelity:.15g}, "
                       f"{result.steps} steps, drift {result.norm_drift:.2e}")
            rows.extend([result.total_time] + row for row in result.csv_rows())
        header = ["total_time"] + results[0].CSV_HEADER if results else []
        path = await JSONProcessor().save_csv(header, rows, _artifact_path(config, '.csv'))
        click.echo(f"💾 Saved to {path}")
    except click.UsageError:
        raise
    except Exception as e:
        _fail("Error evolving", e)


@main.command()
@click.option('--layout', type=click.Choice([Layout.ONE_D.value, Layout.ALL_TO_ALL.value]), default='1d',
              show_default=True, help='Generated layout')
@click.option('--M', 'M', type=int, default=3, show_default=True, help='Number of qubits M')
@click.option('--n', 'n', type=int, default=2, show_default=True, help='Core depth parameter n')
@click.option('--lambda-grid', default='0:1:11', show_default=True, callback=_lambda_grid,
              help='Grid a:b:steps')
@click.option('--tol', type=float, default=1e-9, show_default=True, help='Spectral comparison tolerance')
@click.option('--dump-vertices', type=click.Path(dir_okay=False), help='Write the time-valid tuples here')
@output_options
def verify(layout, M, n, lambda_grid, tol, dump_vertices, seed, out):
    """Run the full theorem suite on one instance; nonzero exit on any failure."""
    asyncio.run(_verify(layout, M, n, lambda_grid, tol, dump_vertices, seed, out))


async def _verify(layout, M, n, lambda_grid, tol, dump_vertices, seed, out):
    try:
        config = RunConfig(command='verify', layout=layout, M=M, n=n, lambda_grid=lambda_grid, tol=tol,
                           seed=app_config.seed if seed is None else seed, out=out)
        click.echo(f"🔍 Verifying {layout} M={M} n={n}...")

        def progress(check: VerifyCheck) -> None:
            click.echo(f"   {'✅' if check.passed else '❌'} {check.name}")

        report = await asyncio.to_thread(VerifyService.run, config, progress)
        processor = JSONProcessor()
        path = await processor.save_json(report, _artifact_path(config, '.json'))
        if dump_vertices:
            vertices = BasisService.penalty_free_vertices(CircuitService.build(layout, M, n))
            header = [f"i{a}" for a in range(1, M + 1)]
            await processor.save_csv(header, BasisService.vertex_rows(vertices), dump_vertices)
            click.echo(f"💾 Vertices written to {dump_vertices}")
        click.echo("📋 Run-time prescription evaluated only, not simulated")
        click.echo(f"💾 Saved to {path}")
        if not report.passed:
            click.echo(f"❌ Failed checks: {', '.join(report.failed())}")
            sys.exit(1)
        click.echo("✅ All checks passed")
    except click.UsageError:
        raise
    except Exception as e:
        _fail("Error verifying", e)


if __name__ == '__main__':
    main()
