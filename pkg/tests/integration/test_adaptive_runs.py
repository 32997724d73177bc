#!/usr/bin/env python3
"""
🧪 Integration tests for the adaptive loop
🔍 Every iteration must leave a conforming mesh that still solves exactly for linear fields
"""

from functools import lru_cache

import numpy as np
import pytest

from src.adapt.driver import AdaptCaps, AdaptiveDriver, run_adaptation
from src.adapt.targets import AdaptTarget, element_error_bounds, mesh_tolerance
from src.bench.cli import EXIT_CAP, EXIT_OK, run_cli
from src.bench.convergence import loglog_slope, uniform_refinement_run
from src.bench.problems import PUNCH_SIZE, build_l_domain, build_patch_test, build_punch, linear_field, punch_span
from src.mesh.coarsen import coarsen_batch, patch_eligible
from src.mesh.generation import generate_mesh
from src.mesh.polymesh import check_conformity
from src.mesh.refine import refine_batch
from src.vem.assembly import assemble_and_solve
from src.vem.material import MaterialParams


class _ConformityWatch:
    """Snapshot callback recording violations and element counts"""

    def __init__(self):
        self.violations = {}
        self.counts = []

    def __call__(self, it, mesh, report):
        self.counts.append(mesh.n_elements)
        problems = check_conformity(mesh)
        if problems:
            self.violations[it] = problems


class TestEditedMeshes:
    """🧪 Linear reproduction survives refinement and coarsening"""

    @pytest.mark.parametrize("mode", ["structured", "voronoi"])
    def test_patch_test_after_edits(self, material, mode):
        domain, loads = build_patch_test()
        mesh = generate_mesh(domain, 25, mode, rng_seed=3, max_iter=10)
        refine_batch(mesh, range(0, mesh.n_elements, 3), mode, rng_seed=5)
        nodes = [v for v in range(mesh.n_nodes) if patch_eligible(mesh, domain, v)][:5]
        coarsen_batch(mesh, nodes, domain)
        assert check_conformity(mesh) == []

        solution = assemble_and_solve(mesh, domain, material, loads)
        used = mesh.used_nodes()
        assert np.max(np.abs(solution.u[used] - linear_field()(mesh.nodes[used]))) <= 1e-10


class TestErrorTarget:
    """🧪 Relative error targets"""

    def test_error_decreases_on_l_domain(self, material):
        domain, loads = build_l_domain()
        mesh = generate_mesh(domain, 12, "structured", rng_seed=0, max_iter=10)
        watch = _ConformityWatch()
        before = mesh.n_elements
        driver = AdaptiveDriver(mesh, domain, material, loads, AdaptTarget.rel_error(5.0), "structured",
                                rng_seed=1, caps=AdaptCaps(max_iter=4), snapshot=watch)
        result = driver.run()
        records = list(result.history)
        assert watch.violations == {}
        assert [r.iter for r in records] == list(range(len(records)))
        assert records[-1].rel_error < records[0].rel_error
        assert records[-1].n_el > records[0].n_el
        assert mesh.n_elements == before

    def test_deterministic_history(self, material):
        domain, loads = build_l_domain()
        mesh = generate_mesh(domain, 20, "voronoi", rng_seed=4, max_iter=10)
        target, caps = AdaptTarget.rel_error(5.0), AdaptCaps(max_iter=2)
        first = AdaptiveDriver(mesh, domain, material, loads, target, "voronoi", rng_seed=9, caps=caps).run()
        second_mesh, second = run_adaptation(mesh, domain, material, loads, target, "voronoi", rng_seed=9, caps=caps)
        assert first.history.to_frame().equals(second.to_frame())
        assert first.mesh.n_elements == second_mesh.n_elements

    def test_cap_reached_is_reported(self, material):
        domain, loads = build_l_domain()
        mesh = generate_mesh(domain, 12, "structured", rng_seed=0, max_iter=10)
        driver = AdaptiveDriver(mesh, domain, material, loads, AdaptTarget.rel_error(0.5), "structured",
                                caps=AdaptCaps(max_iter=1))
        result = driver.run()
        assert not result.converged
        assert len(result.history) == 2
        assert "cap" in result.history.message


class TestResourceTarget:
    """🧪 Element and node targets"""

    def test_element_target_grows_mesh(self, material):
        domain, loads = build_l_domain()
        mesh = generate_mesh(domain, 16, "structured", rng_seed=0, max_iter=10)
        watch = _ConformityWatch()
        driver = AdaptiveDriver(mesh, domain, material, loads, AdaptTarget.elements(60), "structured",
                                caps=AdaptCaps(max_iter=8), snapshot=watch)
        result = driver.run()
        assert watch.violations == {}
        assert watch.counts[1] > watch.counts[0]
        assert driver.count_reached
        held = result.history.phase_records("phase2")
        assert held
        assert all(abs(r.n_el - 60) <= 6 for r in held), [r.n_el for r in held]

    def test_phase_is_final_when_snapshot_runs(self, material):
        domain, loads = build_l_domain()
        mesh = generate_mesh(domain, 16, "structured", rng_seed=0, max_iter=10)
        seen = []
        driver = AdaptiveDriver(mesh, domain, material, loads, AdaptTarget.elements(60), "structured",
                                caps=AdaptCaps(max_iter=5),
                                snapshot=lambda it, m, r: seen.append(driver.history.last.phase))
        result = driver.run()
        assert seen == [r.phase for r in result.history]
        assert "phase2" in seen

    def test_target_met_on_entry(self, material):
        domain, loads = build_l_domain()
        mesh = generate_mesh(domain, 16, "structured", rng_seed=0, max_iter=10)
        driver = AdaptiveDriver(mesh, domain, material, loads, AdaptTarget.elements(mesh.n_elements), "structured",
                                caps=AdaptCaps(max_iter=0))
        result = driver.run()
        assert result.history.records[0].phase == "phase2"

    def test_node_target_is_converted(self, material):
        domain, loads = build_l_domain()
        mesh = generate_mesh(domain, 16, "voronoi", rng_seed=0, max_iter=10)
        driver = AdaptiveDriver(mesh, domain, material, loads, AdaptTarget.nodes(200), "voronoi",
                                caps=AdaptCaps(max_iter=0))
        assert driver.element_target > 16
        result = driver.run()
        assert len(result.history) == 1


# =============================================================================
# Benchmark-scale runs
# =============================================================================

MATERIAL = MaterialParams(E=1.0, nu=0.3, regime="plane_strain")
ERROR_TARGETS = (4.0, 3.0, 2.0)
DENSITIES = (50, 100, 200)
RUN_SEED = 42


class _AreaWatch(_ConformityWatch):
    """Also tracks the worst relative drift of the covered area"""

    def __init__(self, area: float):
        super().__init__()
        self.area = area
        self.worst_area_drift = 0.0

    def __call__(self, it, mesh, report):
        super().__call__(it, mesh, report)
        drift = abs(mesh.areas().sum() - self.area) / self.area
        self.worst_area_drift = max(self.worst_area_drift, drift)


@lru_cache(maxsize=None)
def _l_domain_run(mode: str, initial: int, kind: str, value: float):
    domain, loads = build_l_domain()
    mesh = generate_mesh(domain, initial, mode, rng_seed=RUN_SEED)
    target = {"error": AdaptTarget.rel_error, "elements": AdaptTarget.elements, "nodes": AdaptTarget.nodes}[kind]
    watch = _AreaWatch(domain.area)
    result = AdaptiveDriver(mesh, domain, MATERIAL, loads, target(value), mode, rng_seed=RUN_SEED,
                            snapshot=watch).run()
    return result, watch


def _assert_invariants(watch: _AreaWatch):
    assert watch.violations == {}
    assert watch.worst_area_drift <= 1e-9


@pytest.mark.slow
class TestErrorTargetRuns:
    """🧪 L-domain error targets across densities and mesh types (minutes)"""

    @pytest.mark.parametrize("mode", ["structured", "voronoi"])
    @pytest.mark.parametrize("target", ERROR_TARGETS)
    def test_target_attained(self, mode, target):
        result, watch = _l_domain_run(mode, 100, "error", target)
        _assert_invariants(watch)
        assert result.converged, result.history.message
        assert abs(result.history.last.rel_error - target) / target <= mesh_tolerance(mode) + 1e-12

    @pytest.mark.parametrize("mode", ["structured", "voronoi"])
    @pytest.mark.parametrize("target", ERROR_TARGETS)
    def test_error_evenly_spread(self, mode, target):
        result, _ = _l_domain_run(mode, 100, "error", target)
        last = result.history.last
        bounds = element_error_bounds(last.working_target / 100.0 * last.energy, last.n_el)
        lower = 0.8 * bounds.lower if mode == "voronoi" else bounds.lower
        assert last.max_elem_err_trim5 <= bounds.upper
        assert last.min_elem_err_trim5 >= lower
        assert abs(last.mean_elem_err - last.median_elem_err) <= 0.15 * last.median_elem_err

    @pytest.mark.parametrize("mode", ["structured", "voronoi"])
    def test_initial_density_independent(self, mode):
        finals = []
        for initial in DENSITIES:
            result, watch = _l_domain_run(mode, initial, "error", 3.0)
            _assert_invariants(watch)
            assert result.converged, f"{initial} elements: {result.history.message}"
            finals.append(result.history.last.n_v)
        assert (max(finals) - min(finals)) / min(finals) <= 0.10, finals

    @pytest.mark.parametrize("mode", ["structured", "voronoi"])
    def test_adaptive_slope_beats_uniform(self, mode):
        finals = [_l_domain_run(mode, 100, "error", target)[0].history.last for target in ERROR_TARGETS]
        adaptive = loglog_slope([r.n_v for r in finals], [r.energy_error for r in finals])
        uniform = uniform_refinement_run("l_domain", mode, levels=4, initial_elements=50,
                                         material=MATERIAL, rng_seed=RUN_SEED)
        assert adaptive < loglog_slope(uniform["n_v"], uniform["energy_error"])


@pytest.mark.slow
class TestResourceTargetRuns:
    """🧪 Element and node count targets at benchmark scale"""

    @pytest.mark.parametrize("count", [250, 1000])
    def test_element_target(self, count):
        result, watch = _l_domain_run("structured", 100, "elements", count)
        _assert_invariants(watch)
        assert result.converged, result.history.message
        assert abs(result.history.last.n_el - count) / count <= 0.01 + 1e-12
        phase1 = [r.n_el for r in result.history.phase_records("phase1")]
        assert all(abs(b - count) <= abs(a - count) for a, b in zip(phase1, phase1[1:]))

    @pytest.mark.parametrize("count", [1000, 2000])
    def test_node_target(self, count):
        result, watch = _l_domain_run("voronoi", 100, "nodes", count)
        _assert_invariants(watch)
        assert result.converged, result.history.message
        assert abs(result.history.last.n_v - count) / count <= 0.02 + 1e-12


@pytest.mark.slow
class TestPunchCycles:
    """🧪 Refinement follows the active punch over six load cycles"""

    def test_refinement_migrates(self):
        domain, _ = build_punch(1)
        mesh = generate_mesh(domain, 100, "structured", rng_seed=RUN_SEED)
        for cycle in range(1, 7):
            domain, loads = build_punch(cycle)
            mesh.domain = domain
            watch = _AreaWatch(domain.area)
            result = AdaptiveDriver(mesh, domain, MATERIAL, loads, AdaptTarget.rel_error(5.0), "structured",
                                    rng_seed=RUN_SEED + cycle, snapshot=watch).run()
            _assert_invariants(watch)
            assert result.converged, f"cycle {cycle}: {result.history.message}"
            assert abs(result.history.last.rel_error - 5.0) / 5.0 <= 0.01 + 1e-12

            mesh = result.mesh
            lo, hi = punch_span(cycle)
            smallest = mesh.element_centroid(int(np.argmin(mesh.areas())))
            assert np.linalg.norm(smallest - np.array([0.5 * (lo + hi), PUNCH_SIZE])) <= 0.5


@pytest.mark.slow
class TestRepeatability:
    """🧪 Identical seeds give identical files"""

    def test_history_csv_is_bit_identical(self, tmp_path):
        args = ["adapt", "--bench", "l-domain", "--mesh", "voronoi", "--initial-elements", "50",
                "--seed", "7", "--target-error", "4", "--svg", "off"]
        for name in ("first", "second"):
            assert run_cli(args + ["--out-dir", str(tmp_path / name)]) in (EXIT_OK, EXIT_CAP)
        first = (tmp_path / "first" / "history.csv").read_bytes()
        assert first == (tmp_path / "second" / "history.csv").read_bytes()
