"""
🧪 Unit tests for assembly, boundary data and the linear solve
"""

import numpy as np
import pytest

from src.bench.problems import build_patch_test, build_uniaxial, linear_field, uniaxial_stress
from src.core.errors import ConstraintError, PreconditionError
from src.mesh.domain import BoundarySegment, BoundaryTag, DomainSpec
from src.mesh.generation import generate_mesh
from src.mesh.polymesh import PolyMesh
from src.vem.assembly import (
    Loads,
    assemble_and_solve,
    assemble_stiffness,
    dirichlet_data,
    element_stress,
    element_stresses,
    load_vector,
    strain_energy,
)
from src.vem.material import MaterialParams, constitutive_matrix

PATCH_STRAIN = np.array([0.3, -0.4, 0.3])


class TestPatchTest:
    """🧪 Linear fields are reproduced to round-off"""

    def test_structured_grid(self, make_grid, material, patch_problem):
        domain, loads = patch_problem
        mesh = make_grid(3, domain=domain)
        solution = assemble_and_solve(mesh, domain, material, loads)
        assert np.allclose(solution.u, linear_field()(mesh.nodes), atol=1e-12)
        D = constitutive_matrix(material)
        assert np.allclose(element_stresses(mesh, solution, D), D @ PATCH_STRAIN, atol=1e-12)
        assert solution.residual <= 1e-12

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_voronoi_mesh(self, material, seed):
        domain, loads = build_patch_test()
        mesh = generate_mesh(domain, 30, "voronoi", rng_seed=seed, max_iter=10)
        solution = assemble_and_solve(mesh, domain, material, loads)
        assert np.max(np.abs(solution.u - linear_field()(mesh.nodes))) <= 1e-10

    def test_hanging_node_mesh(self, material):
        domain, loads = build_patch_test()
        nodes = np.array([[0, 0], [0.5, 0], [1, 0], [0, 1], [0.5, 1], [1, 1], [0.5, 0.5], [1, 0.5]], dtype=float)
        mesh = PolyMesh(nodes, [[0, 1, 4, 3], [1, 2, 7, 6], [6, 7, 5, 4]], domain)
        mesh.conformize()
        solution = assemble_and_solve(mesh, domain, material, loads)
        assert np.allclose(solution.u, linear_field()(mesh.nodes), atol=1e-12)


class TestUniaxial:
    """🧪 Roller-supported square under imposed stretch"""

    def test_stress_matches_closed_form(self, make_grid, material):
        domain, loads = build_uniaxial(0.5)
        mesh = make_grid(4, domain=domain)
        solution = assemble_and_solve(mesh, domain, material, loads)
        stress = element_stresses(mesh, solution, constitutive_matrix(material))
        assert np.allclose(stress[:, 1], uniaxial_stress(0.5, material), rtol=1e-10)
        assert np.allclose(stress[:, [0, 2]], 0.0, atol=1e-10)


class TestBoundaryData:
    """🧪 Constraints and nodal loads"""

    def test_corner_node_takes_union_of_constraints(self, make_grid):
        domain, loads = build_uniaxial(0.5)
        mesh = make_grid(2, domain=domain)
        mask, values = dirichlet_data(mesh, domain, loads)
        assert mask[0] and mask[1]
        top_right = 8
        assert not mask[2 * top_right] and mask[2 * top_right + 1]
        assert values[2 * top_right + 1] == pytest.approx(0.5)

    def test_edge_traction_split_between_end_nodes(self, make_grid):
        square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        segments = [
            BoundarySegment(square[0], square[1], BoundaryTag.DIRICHLET_XY, (0.0, 0.0)),
            BoundarySegment(square[1], square[2]),
            BoundarySegment(square[2], square[3], BoundaryTag.NEUMANN, (0.0, -2.0)),
            BoundarySegment(square[3], square[0]),
        ]
        domain = DomainSpec.from_segments(segments)
        mesh = make_grid(2, domain=domain)
        f = load_vector(mesh, domain, Loads())
        assert f[1::2].sum() == pytest.approx(-2.0)
        assert f[2 * 7 + 1] == pytest.approx(-1.0)
        assert f[2 * 6 + 1] == pytest.approx(-0.5)

    def test_body_force_lumped_on_vertices(self, make_grid, unit_square):
        mesh = make_grid(2, domain=unit_square)
        f = load_vector(mesh, unit_square, Loads(body_force=(0.0, -4.0)))
        assert f[1::2].sum() == pytest.approx(-4.0)
        assert f[2 * 4 + 1] == pytest.approx(-1.0)

    def test_free_domain_leaves_rigid_mode(self, make_grid, unit_square, material):
        mesh = make_grid(2, domain=unit_square)
        with pytest.raises(ConstraintError) as info:
            assemble_and_solve(mesh, unit_square, material)
        assert info.value.mode == "x-translation"

    def test_rollers_only_on_bottom(self, make_grid, material):
        square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        segments = [BoundarySegment(square[0], square[1], BoundaryTag.DIRICHLET_Y, (None, 0.0))]
        segments += [BoundarySegment(square[k], square[(k + 1) % 4]) for k in (1, 2, 3)]
        domain = DomainSpec.from_segments(segments)
        with pytest.raises(ConstraintError) as info:
            assemble_and_solve(make_grid(2, domain=domain), domain, material)
        assert info.value.mode == "x-translation"

    def test_domain_required(self, make_grid, material):
        with pytest.raises(PreconditionError):
            assemble_and_solve(make_grid(2), None, material)


class TestStress:
    """🧪 Element stress and energy"""

    def test_single_element_stress(self, material):
        mesh = PolyMesh([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]])
        u = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
        D = constitutive_matrix(material)
        assert np.allclose(element_stress(mesh, 0, u, D), [material.lam + 2 * material.mu, material.lam, 0.0])

    def test_energy_matches_quadratic_form(self, make_grid, material, patch_problem):
        domain, loads = patch_problem
        mesh = make_grid(2, domain=domain)
        solution = assemble_and_solve(mesh, domain, material, loads)
        K, matrices = assemble_stiffness(mesh, constitutive_matrix(material))
        assert strain_energy(mesh, solution, matrices) == pytest.approx(solution.energy, rel=1e-10)
        D = constitutive_matrix(material)
        assert solution.energy == pytest.approx(0.5 * PATCH_STRAIN @ D @ PATCH_STRAIN, rel=1e-10)

    def test_plane_stress_changes_solution(self, make_grid):
        domain, loads = build_uniaxial(0.1)
        mesh = make_grid(2, domain=domain)
        strain = assemble_and_solve(mesh, domain, MaterialParams(regime="plane_strain"), loads)
        stress = assemble_and_solve(mesh, domain, MaterialParams(regime="plane_stress"), loads)
        assert not np.allclose(strain.u, stress.u)
