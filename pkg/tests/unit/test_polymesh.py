"""
🧪 Unit tests for the polygonal mesh container
"""

import numpy as np
import pytest

from src.core.errors import TopologyError
from src.mesh.polymesh import PolyMesh, check_conformity, element_area, element_centroid, node_patch


def _stepped_mesh():
    """One tall element on the left, two squares on the right; node 6 hangs on the left element"""
    nodes = np.array([
        [0.0, 0.0], [1.0, 0.0], [2.0, 0.0],
        [0.0, 2.0], [1.0, 2.0], [2.0, 2.0],
        [1.0, 1.0], [2.0, 1.0],
    ])
    elements = [[0, 1, 4, 3], [1, 2, 7, 6], [6, 7, 5, 4]]
    return PolyMesh(nodes, elements)


class TestQueries:
    """🧪 Areas, centroids and patches"""

    def test_unit_square_area(self):
        mesh = PolyMesh([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]])
        assert element_area(mesh, 0) == pytest.approx(1.0)
        assert np.allclose(element_centroid(mesh, 0), [0.5, 0.5])

    def test_triangle(self):
        mesh = PolyMesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]])
        assert element_area(mesh, 0) == pytest.approx(0.5)
        assert np.allclose(element_centroid(mesh, 0), [1.0 / 3.0, 1.0 / 3.0])

    def test_collinear_vertex_changes_nothing(self):
        mesh = PolyMesh([[0, 0], [0.5, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3, 4]])
        assert element_area(mesh, 0) == pytest.approx(1.0)
        assert np.allclose(element_centroid(mesh, 0), [0.5, 0.5])

    def test_degenerate_cycle_raises(self):
        mesh = PolyMesh([[0, 0], [1, 0], [0, 1]], [[0, 1]])
        with pytest.raises(TopologyError):
            element_area(mesh, 0)
        with pytest.raises(TopologyError):
            element_centroid(mesh, 0)

    def test_node_patches_of_2x2_grid(self, make_grid):
        mesh = make_grid(2)
        assert node_patch(mesh, 4) == {0, 1, 2, 3}
        assert node_patch(mesh, 0) == {0}
        assert node_patch(mesh, 1) == {0, 1}

    def test_boundary_edges_of_grid(self, make_grid):
        mesh = make_grid(2)
        edges = mesh.boundary_edges()
        assert len(edges) == 8
        for a, b, e in edges:
            cycle = mesh.elements[e]
            assert cycle[(cycle.index(a) + 1) % len(cycle)] == b


class TestConformity:
    """🧪 Invariant diagnosis and repair"""

    def test_grid_is_conforming(self, make_grid):
        assert check_conformity(make_grid(3)) == []

    def test_hanging_node_reported(self):
        violations = check_conformity(_stepped_mesh())
        assert [v.invariant for v in violations] == ["hanging-node"]
        assert violations[0].ids == (0, 6)

    def test_conformize_inserts_hanging_node(self):
        mesh = _stepped_mesh()
        assert mesh.conformize() == 1
        assert mesh.elements[0] == [0, 1, 6, 4, 3]
        assert check_conformity(mesh) == []

    def test_duplicate_nodes_reported(self):
        mesh = PolyMesh([[0, 0], [1, 0], [1, 1], [0, 1], [1, 1e-13], [2, 0], [2, 1]],
                        [[0, 1, 2, 3], [4, 5, 6, 2]])
        kinds = [v.invariant for v in check_conformity(mesh)]
        assert kinds.count("duplicate-node") == 1

    def test_clockwise_element_reported(self):
        mesh = PolyMesh([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 3, 2, 1]])
        assert [v.invariant for v in check_conformity(mesh)] == ["orientation"]

    def test_area_coverage_checked_against_domain(self, make_grid, unit_square):
        mesh = make_grid(2, domain=unit_square)
        assert check_conformity(mesh) == []
        mesh.remove_elements([0])
        mesh.compact()
        assert "area-coverage" in [v.invariant for v in check_conformity(mesh)]


class TestMutation:
    """🧪 Element and node bookkeeping"""

    def test_remove_elements_remap(self, make_grid):
        mesh = make_grid(2)
        remap = mesh.remove_elements([1, 2])
        assert list(remap) == [0, -1, -1, 1]
        assert mesh.n_elements == 2

    def test_compact_drops_orphans(self, make_grid):
        mesh = make_grid(2)
        mesh.remove_elements([3])
        remap = mesh.compact()
        assert mesh.n_nodes == 8
        assert remap[8] == -1
        assert check_conformity(mesh) == []

    def test_caches_follow_mutation(self, make_grid):
        mesh = make_grid(2)
        assert len(mesh.node_elements()[4]) == 4
        mesh.add_nodes([[2.0, 0.5]])
        mesh.append_element([2, 9, 5])
        assert mesh.node_elements()[9] == [4]
        assert mesh.node_tree().n == 10

    def test_copy_is_independent(self, make_grid):
        mesh = make_grid(2)
        clone = mesh.copy()
        clone.nodes[4] = [0.4, 0.4]
        clone.elements[0].append(8)
        assert np.allclose(mesh.nodes[4], [0.5, 0.5])
        assert mesh.elements[0] == [0, 1, 4, 3]
