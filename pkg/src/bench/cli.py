#!/usr/bin/env python3
"""
🚀 vem-adapt command line
generate / solve / adapt / bench / convergence pipelines with CSV, JSON and SVG outputs

Exit codes: 0 converged (or check passed), 2 iteration cap reached, 1 error.
"""

import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import click
import numpy as np
from loguru import logger

from ..adapt.driver import AdaptCaps, AdaptiveDriver
from ..adapt.targets import AdaptTarget
from ..core.config import MESH_TYPES, AdaptConfig, load_config
from ..core.errors import VemAdaptError
from ..core.logging_setup import ErrorContext, add_file_sink, configure_logging
from ..estimation.energy import estimate_errors
from ..mesh.generation import generate_mesh
from ..mesh.mesh_io import read_mesh
from ..mesh.polymesh import PolyMesh
from ..ui.display import AdaptDisplay
from ..vem.assembly import assemble_and_solve, element_stresses
from ..vem.material import MaterialParams, constitutive_matrix, von_mises
from .convergence import convergence_rate, uniform_refinement_run
from .outputs import SnapshotWriter, write_svg
from .problems import BENCHMARKS, BenchmarkSpec, build_punch, linear_field, uniaxial_stress

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CAP = 2

BENCH_CHOICES = [b.replace("_", "-") for b in BENCHMARKS]
PASS_TOL = 1e-10
LOG_FILE_NAME = "vem_adapt.log"


# =============================================================================
# Shared options
# =============================================================================

def _settings(ctx: click.Context) -> AdaptConfig:
    return ctx.obj["config"]


def _override(config: AdaptConfig, **values) -> AdaptConfig:
    """CLI flags given explicitly replace the configured defaults"""
    for key, value in values.items():
        if value is not None:
            setattr(config, key, value)
    config.__post_init__()
    errors = config.validate()
    if errors:
        raise click.UsageError("; ".join(errors))
    return config


def mesh_options(func: Callable) -> Callable:
    func = click.option("--bench", "bench", type=click.Choice(BENCH_CHOICES), default="l-domain",
                        show_default=True, help="Benchmark problem")(func)
    func = click.option("--mesh", "mesh_type", type=click.Choice(MESH_TYPES), default=None,
                        help="Mesh type [config: voronoi]")(func)
    func = click.option("--initial-elements", type=int, default=None, help="Initial element count")(func)
    func = click.option("--seed", type=int, default=None, help="Random seed")(func)
    func = click.option("--regime", type=click.Choice(["plane-strain", "plane-stress"]), default=None,
                        help="Plane regime")(func)
    func = click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Output directory")(func)
    func = click.option("--svg", type=click.Choice(["on", "off"]), default=None, help="Write SVG plots")(func)
    return func


def target_options(func: Callable) -> Callable:
    func = click.option("--target-error", type=float, default=None, help="Relative error target in percent")(func)
    func = click.option("--target-elements", type=int, default=None, help="Element count target")(func)
    func = click.option("--target-nodes", type=int, default=None, help="Node count target")(func)
    func = click.option("--max-iter", type=int, default=None, help="Iteration cap")(func)
    return func


def parse_target(target_error: Optional[float], target_elements: Optional[int],
                 target_nodes: Optional[int]) -> AdaptTarget:
    given = [(k, v) for k, v in (("--target-error", target_error), ("--target-elements", target_elements),
                                 ("--target-nodes", target_nodes)) if v is not None]
    if not given:
        raise click.UsageError("One of --target-error, --target-elements or --target-nodes is required")
    if len(given) > 1:
        raise click.UsageError(f"Conflicting targets: {', '.join(k for k, _ in given)}")
    try:
        if target_error is not None:
            return AdaptTarget.rel_error(target_error)
        if target_elements is not None:
            return AdaptTarget.elements(target_elements)
        return AdaptTarget.nodes(target_nodes)
    except (VemAdaptError, ValueError) as e:
        raise click.UsageError(str(e)) from e


def _apply_mesh_flags(ctx, mesh_type, initial_elements, seed, regime, out_dir, svg, max_iter=None) -> AdaptConfig:
    return _override(
        _settings(ctx), mesh_type=mesh_type, initial_elements=initial_elements, seed=seed,
        regime=regime, out_dir=out_dir, svg=None if svg is None else svg == "on", max_iter=max_iter,
    )


def _initial_mesh(config: AdaptConfig, domain, mesh_path: Optional[str] = None) -> PolyMesh:
    if mesh_path:
        mesh = read_mesh(mesh_path)
        if mesh.domain is None:
            mesh.domain = domain
        return mesh
    return generate_mesh(domain, config.initial_elements, config.mesh_type, config.seed,
                         config.lloyd_max_iter, config.lloyd_tol)


def _caps(config: AdaptConfig) -> AdaptCaps:
    return AdaptCaps(config.max_iter, config.refine_lloyd_max_iter, config.refine_lloyd_tol)


def _adapt_once(config: AdaptConfig, mesh: PolyMesh, domain, loads, target: AdaptTarget, out_dir: Path,
                title: str):
    writer = SnapshotWriter(out_dir, config.svg)
    driver = AdaptiveDriver(mesh, domain, MaterialParams.from_config(config), loads, target,
                            config.mesh_type, config.seed, _caps(config), writer)
    sink = add_file_sink(out_dir / LOG_FILE_NAME)
    try:
        with ErrorContext(f"Adaptive run \"{title}\""):
            result = driver.run()
    finally:
        logger.remove(sink)
    result.history.write_csv(out_dir / "history.csv")
    AdaptDisplay().show_history(result.history, title)
    return result


# =============================================================================
# Commands
# =============================================================================

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="JSON configuration file")
@click.option("--log-level", type=click.Choice(["error", "warning", "info", "debug"], case_sensitive=False),
              default=None, help="Log level [env: VEM_ADAPT_LOG]")
@click.version_option("1.0.0", prog_name="vem-adapt")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], log_level: Optional[str]):
    """🧮 Adaptive virtual element meshes for 2D linear elasticity"""
    config = load_config(config_path) if config_path else AdaptConfig()
    configure_logging(log_level or (config.log_level if config_path else None))
    ctx.ensure_object(dict)
    ctx.obj["config"] = config


@cli.command()
@mesh_options
@click.pass_context
def generate(ctx, bench, mesh_type, initial_elements, seed, regime, out_dir, svg):
    """🧱 Generate an initial mesh and write it as JSON (and SVG)"""
    config = _apply_mesh_flags(ctx, mesh_type, initial_elements, seed, regime, out_dir, svg)
    domain, _ = BenchmarkSpec.named(bench).build(1)
    mesh = generate_mesh(domain, config.initial_elements, config.mesh_type, config.seed,
                         config.lloyd_max_iter, config.lloyd_tol)
    writer = SnapshotWriter(config.out_dir, config.svg, colour_by_error=False)
    writer(0, mesh)
    click.echo(f"{mesh.n_elements} elements, {mesh.n_used_nodes} nodes -> {writer.written[0]}")
    return EXIT_OK


@cli.command()
@mesh_options
@click.option("--mesh-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Solve on this mesh JSON instead of generating one")
@click.pass_context
def solve(ctx, bench, mesh_type, initial_elements, seed, regime, out_dir, svg, mesh_file):
    """⚙️ Solve once and report the estimated energy error"""
    config = _apply_mesh_flags(ctx, mesh_type, initial_elements, seed, regime, out_dir, svg)
    domain, loads = BenchmarkSpec.named(bench).build(1)
    mesh = _initial_mesh(config, domain, mesh_file)
    domain = mesh.domain
    material = MaterialParams.from_config(config)
    D = constitutive_matrix(material)
    solution = assemble_and_solve(mesh, domain, material, loads)
    report = estimate_errors(mesh, solution, D, predictions=False)
    if config.svg:
        out = Path(config.out_dir)
        write_svg(mesh, out / "error.svg", report.element_norms, title="Element error")
        write_svg(mesh, out / "von_mises.svg", von_mises(element_stresses(mesh, solution, D), material),
                  label="von Mises", title="von Mises stress")
    click.echo(f"elements={mesh.n_elements} nodes={mesh.n_used_nodes} energy={report.energy:.6e} "
               f"error={report.energy_error:.6e} rel_error={100.0 * report.rel_error:.4f}%")
    return EXIT_OK


@cli.command()
@mesh_options
@target_options
@click.option("--mesh-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Start from this mesh JSON")
@click.pass_context
def adapt(ctx, bench, mesh_type, initial_elements, seed, regime, out_dir, svg,
          target_error, target_elements, target_nodes, max_iter, mesh_file):
    """🔁 Adapt the mesh of a benchmark toward an error, element or node target"""
    target = parse_target(target_error, target_elements, target_nodes)
    config = _apply_mesh_flags(ctx, mesh_type, initial_elements, seed, regime, out_dir, svg, max_iter)
    domain, loads = BenchmarkSpec.named(bench).build(1)
    mesh = _initial_mesh(config, domain, mesh_file)
    domain = mesh.domain
    result = _adapt_once(config, mesh, domain, loads, target, Path(config.out_dir), f"{bench} {target}")
    return EXIT_OK if result.converged else EXIT_CAP


@cli.command()
@click.argument("name", type=click.Choice(BENCH_CHOICES))
@click.option("--mesh", "mesh_type", type=click.Choice(MESH_TYPES), default=None, help="Mesh type")
@click.option("--initial-elements", type=int, default=None, help="Initial element count")
@click.option("--seed", type=int, default=None, help="Random seed")
@click.option("--regime", type=click.Choice(["plane-strain", "plane-stress"]), default=None)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
@click.option("--svg", type=click.Choice(["on", "off"]), default=None)
@click.option("--cycles", type=int, default=1, show_default=True, help="Punch load cycles")
@target_options
@click.pass_context
def bench(ctx, name, mesh_type, initial_elements, seed, regime, out_dir, svg, cycles,
          target_error, target_elements, target_nodes, max_iter):
    """🏗️ Run a benchmark pipeline (the punch adapts once per load cycle)"""
    config = _apply_mesh_flags(ctx, mesh_type, initial_elements, seed, regime, out_dir, svg, max_iter)
    spec = BenchmarkSpec.named(name, cycles)
    if spec.name in ("patch_test", "uniaxial") and target_error is None and target_elements is None \
            and target_nodes is None:
        return _verify(config, spec)
    target = parse_target(target_error, target_elements, target_nodes)
    out = Path(config.out_dir)

    if spec.name != "punch":
        domain, loads = spec.build(1)
        mesh = _initial_mesh(config, domain)
        result = _adapt_once(config, mesh, domain, loads, target, out, f"{name} {target}")
        return EXIT_OK if result.converged else EXIT_CAP

    # the mesh carries over from one load cycle to the next; only the boundary conditions change
    domain, _ = build_punch(1)
    mesh = _initial_mesh(config, domain)
    all_converged = True
    for cycle in range(1, spec.cycles + 1):
        domain, loads = build_punch(cycle)
        mesh.domain = domain
        logger.info(f"🏗️ Punch cycle {cycle}/{spec.cycles}")
        result = _adapt_once(config, mesh, domain, loads, target, out / f"cycle_{cycle:02d}",
                             f"punch cycle {cycle}")
        mesh = result.mesh
        all_converged &= result.converged
    return EXIT_OK if all_converged else EXIT_CAP


def _verify(config: AdaptConfig, spec: BenchmarkSpec) -> int:
    """Single solve of a problem with a known linear solution"""
    domain, loads = spec.build(1)
    material = MaterialParams.from_config(config)
    D = constitutive_matrix(material)
    mesh = _initial_mesh(config, domain)
    solution = assemble_and_solve(mesh, domain, material, loads)
    report = estimate_errors(mesh, solution, D, predictions=False)
    used = mesh.used_nodes()
    if spec.name == "patch_test":
        deviation = float(np.abs(solution.u[used] - linear_field()(mesh.nodes[used])).max())
    else:
        expected = uniaxial_stress(spec.displacement, material)
        deviation = float(np.abs(report.sigma_h[:, 1] - expected).max() / abs(expected))
    if config.svg:
        write_svg(mesh, Path(config.out_dir) / "mesh_0000.svg", report.element_norms, title=spec.name)
    passed = deviation <= PASS_TOL and report.rel_error <= PASS_TOL
    click.echo(f"{spec.name}: max deviation {deviation:.3e}, rel_error {100.0 * report.rel_error:.3e}% "
               f"-> {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_ERROR


@cli.command()
@click.option("--bench", "bench_name", type=click.Choice(BENCH_CHOICES + ["manufactured"]),
              default="manufactured", show_default=True)
@click.option("--mesh", "mesh_type", type=click.Choice(MESH_TYPES), default="structured", show_default=True)
@click.option("--initial-elements", type=int, default=16, show_default=True)
@click.option("--levels", type=int, default=4, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
@click.pass_context
def convergence(ctx, bench_name, mesh_type, initial_elements, levels, seed, out_dir):
    """📉 Uniform refinement study and observed convergence rate"""
    config = _override(_settings(ctx), seed=seed, out_dir=out_dir)
    frame = uniform_refinement_run(bench_name.replace("-", "_"), mesh_type, levels, initial_elements,
                                   MaterialParams.from_config(config), config.seed, config.lloyd_max_iter)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out / "convergence.csv", index=False, float_format="%.17g")
    column = "exact_error" if bench_name == "manufactured" else "energy_error"
    rate = convergence_rate(frame, column) if levels > 1 else None
    AdaptDisplay().show_convergence(frame, rate)
    return EXIT_OK


# =============================================================================
# Entry points
# =============================================================================

def run_cli(args: Optional[Sequence[str]] = None) -> int:
    """Run the command line and map the outcome to an exit code"""
    try:
        rv = cli.main(args=list(args) if args is not None else None, prog_name="vem-adapt",
                      standalone_mode=False)
    except click.exceptions.Abort:
        logger.info("🛑 Stopped by user")
        return EXIT_ERROR
    except click.ClickException as e:
        e.show()
        return EXIT_ERROR
    except (VemAdaptError, OSError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_ERROR
    return rv if isinstance(rv, int) else EXIT_OK


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
