"""
🧪 Unit tests for nodal stress recovery
"""

import numpy as np

from src.estimation.recovery import fit_at_node, recover_stress
from src.mesh.polymesh import PolyMesh


def _linear_stress(points):
    x, y = points[:, 0], points[:, 1]
    return np.column_stack([1.0 + 2.0 * x, -y, 0.5 * x - 0.25 * y])


class TestRecovery:
    """🧪 Least-squares patch fits"""

    def test_constant_stress_recovered_exactly(self, make_grid):
        mesh = make_grid(3)
        sigma_h = np.tile([1.0, 2.0, 3.0], (mesh.n_elements, 1))
        assert np.allclose(recover_stress(mesh, sigma_h), [1.0, 2.0, 3.0])

    def test_linear_field_reproduced_at_every_node(self, make_grid):
        mesh = make_grid(3)
        sigma_h = _linear_stress(mesh.centroids())
        assert np.allclose(recover_stress(mesh, sigma_h), _linear_stress(mesh.nodes))

    def test_corner_patch_is_enlarged(self, make_grid):
        mesh = make_grid(3)
        sigma_h = _linear_stress(mesh.centroids())
        corner = recover_stress(mesh, sigma_h)[0]
        assert not np.allclose(corner, sigma_h[0])
        assert np.allclose(corner, _linear_stress(mesh.nodes[[0]])[0])

    def test_single_element_falls_back_to_mean(self):
        mesh = PolyMesh([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]])
        recovered = recover_stress(mesh, np.array([[4.0, 5.0, 6.0]]))
        assert np.allclose(recovered, [4.0, 5.0, 6.0])

    def test_collinear_samples_rejected(self):
        samples = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        assert fit_at_node(np.zeros(2), samples, np.ones((3, 3))) is None
        assert fit_at_node(np.zeros(2), samples[:2], np.ones((2, 3))) is None
