"""
🧪 Shared fixtures: hand-built grid meshes, standard domains and material
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to the path for imports
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.bench.problems import build_l_domain, build_patch_test  # noqa: E402
from src.mesh.domain import DomainSpec  # noqa: E402
from src.mesh.polymesh import PolyMesh  # noqa: E402
from src.vem.material import MaterialParams  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full adaptive runs (minutes)")


def grid_mesh(nx: int, ny: int = None, width: float = 1.0, height: float = 1.0,
              domain: DomainSpec = None) -> PolyMesh:
    """nx x ny rectangle of axis-aligned quads; node (i, j) has index j * (nx + 1) + i"""
    ny = nx if ny is None else ny
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    def node(i, j):
        return j * (nx + 1) + i

    elements = [[node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)]
                for j in range(ny) for i in range(nx)]
    return PolyMesh(nodes, elements, domain)


@pytest.fixture
def unit_square() -> DomainSpec:
    return DomainSpec(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


@pytest.fixture
def make_grid():
    return grid_mesh


@pytest.fixture
def material() -> MaterialParams:
    return MaterialParams(E=1.0, nu=0.3, regime="plane_strain")


@pytest.fixture
def l_problem():
    return build_l_domain()


@pytest.fixture
def patch_problem():
    return build_patch_test()
