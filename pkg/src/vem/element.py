"""
⚙️ First-order virtual element: projection, consistency and stabilization matrices

Degrees of freedom of an element with n vertices are ordered
(u0x, u0y, u1x, u1y, ...) following the counter-clockwise vertex cycle.
"""

from dataclasses import dataclass

import numpy as np

from ..core.errors import DegenerateElementError, TopologyError
from ..mesh.geometry import polygon_centroid, polygon_diameter, signed_area
from ..mesh.polymesh import PolyMesh

CONDITION_LIMIT = 1e12


@dataclass
class ElementStiffness:
    K_c: np.ndarray
    K_s: np.ndarray
    B: np.ndarray
    Dmat: np.ndarray
    area: float

    @property
    def K(self) -> np.ndarray:
        return self.K_c + self.K_s


def projection_matrix(coords: np.ndarray) -> np.ndarray:
    """Voigt strain of the projected displacement: strain = B @ d

    Edge integrals of the linear boundary traces are exact with the trapezoid
    rule, which collapses to the vertex-neighbour differences below.
    """
    n = len(coords)
    if n < 3:
        raise TopologyError(f"Element has {n} vertices")
    edges = np.roll(coords, -1, axis=0) - coords
    if np.any(np.hypot(edges[:, 0], edges[:, 1]) == 0.0):
        raise TopologyError("Element has a zero-length edge")
    area = signed_area(coords)
    if not area > 0.0:
        raise DegenerateElementError(f"Element area is {area:.3e} (collinear or clockwise vertices)")
    nxt = np.roll(coords, -1, axis=0)
    prv = np.roll(coords, 1, axis=0)
    qx = (nxt[:, 1] - prv[:, 1]) / (2.0 * area)
    qy = (prv[:, 0] - nxt[:, 0]) / (2.0 * area)
    B = np.zeros((3, 2 * n))
    B[0, 0::2] = qx
    B[1, 1::2] = qy
    B[2, 0::2] = qy
    B[2, 1::2] = qx
    return B


def projection_operator(mesh: PolyMesh, elem_id: int) -> np.ndarray:
    return projection_matrix(mesh.coords(elem_id))


def monomial_dofs(coords: np.ndarray) -> np.ndarray:
    """Vertex values of the six scaled linear monomial displacement fields (2n x 6)"""
    n = len(coords)
    centre = polygon_centroid(coords)
    h = polygon_diameter(coords)
    xi = (coords - centre) / h
    Dm = np.zeros((2 * n, 6))
    Dm[0::2, 0] = 1.0
    Dm[0::2, 1] = xi[:, 0]
    Dm[0::2, 2] = xi[:, 1]
    Dm[1::2, 3] = 1.0
    Dm[1::2, 4] = xi[:, 0]
    Dm[1::2, 5] = xi[:, 1]
    return Dm


def stiffness_from_coords(coords: np.ndarray, D: np.ndarray) -> ElementStiffness:
    B = projection_matrix(coords)
    area = signed_area(coords)
    K_c = area * B.T @ D @ B

    Dm = monomial_dofs(coords)
    G = Dm.T @ Dm
    if np.linalg.cond(G) > CONDITION_LIMIT:
        raise DegenerateElementError("Element vertices cannot carry a linear field (collinear geometry)")
    projector = Dm @ np.linalg.solve(G, Dm.T)
    mu = D[2, 2]
    K_s = mu * (np.eye(len(Dm)) - projector)
    return ElementStiffness(K_c, K_s, B, Dm, area)


def element_matrices(mesh: PolyMesh, elem_id: int, D: np.ndarray) -> ElementStiffness:
    """K_c = |E| B^T D B plus the projector stabilization scaled by the shear modulus"""
    try:
        return stiffness_from_coords(mesh.coords(elem_id), D)
    except (TopologyError, DegenerateElementError) as e:
        raise type(e)(f"Element {elem_id}: {e}") from e


def element_dofs(cycle) -> np.ndarray:
    cycle = np.asarray(cycle, dtype=int)
    dofs = np.empty(2 * len(cycle), dtype=int)
    dofs[0::2] = 2 * cycle
    dofs[1::2] = 2 * cycle + 1
    return dofs
