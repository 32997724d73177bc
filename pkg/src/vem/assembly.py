"""
⚙️ Global assembly, boundary conditions and the sparse solve
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import norm as sparse_norm
from scipy.sparse.linalg import splu

from ..core.errors import ConstraintError, NumericError, PreconditionError
from ..mesh.domain import DomainSpec
from ..mesh.polymesh import PolyMesh
from .element import ElementStiffness, element_dofs, element_matrices, projection_matrix
from .material import MaterialParams, constitutive_matrix

RESIDUAL_TOL = 1e-12
REFINEMENT_STEPS = 2

VectorField = Callable[[np.ndarray], np.ndarray]


@dataclass
class Loads:
    """Body force and optional position-dependent Dirichlet data

    ``body_force`` is a constant vector or a callable mapping (n, 2) points to
    (n, 2) forces. ``prescribed`` overrides the constant values stored on the
    Dirichlet segments with a field evaluated at each constrained node.
    """
    body_force: Union[Tuple[float, float], VectorField] = (0.0, 0.0)
    prescribed: Optional[VectorField] = None

    def body_at(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if callable(self.body_force):
            return np.asarray(self.body_force(points), dtype=float).reshape(-1, 2)
        return np.tile(np.asarray(self.body_force, dtype=float), (len(points), 1))

    @property
    def has_body_force(self) -> bool:
        return callable(self.body_force) or any(self.body_force)


@dataclass
class SolutionField:
    """Nodal displacements (n_nodes x 2) and the bookkeeping of the solve"""
    u: np.ndarray
    constrained: np.ndarray
    residual: float = 0.0
    energy: float = 0.0
    stiffness: List[ElementStiffness] = field(default_factory=list, repr=False)

    @property
    def dofs(self) -> np.ndarray:
        return self.u.reshape(-1)

    def element_dofs(self, mesh: PolyMesh, elem_id: int) -> np.ndarray:
        return self.dofs[element_dofs(mesh.elements[elem_id])]


def assemble_stiffness(mesh: PolyMesh, D: np.ndarray) -> Tuple[csr_matrix, List[ElementStiffness]]:
    """Scatter element matrices into the global stiffness (duplicates summed in element order)"""
    rows, cols, vals = [], [], []
    matrices = []
    for e, cycle in enumerate(mesh.elements):
        km = element_matrices(mesh, e, D)
        matrices.append(km)
        dofs = element_dofs(cycle)
        rows.append(np.repeat(dofs, len(dofs)))
        cols.append(np.tile(dofs, len(dofs)))
        vals.append(km.K.ravel())
    n = 2 * mesh.n_nodes
    K = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    return K, matrices


def dirichlet_data(mesh: PolyMesh, domain: DomainSpec, loads: Loads) -> Tuple[np.ndarray, np.ndarray]:
    """Constrained dof mask and prescribed values; a node takes the union of its segments' constraints"""
    n = mesh.n_nodes
    mask = np.zeros(2 * n, dtype=bool)
    values = np.zeros(2 * n)
    for v, hits in enumerate(domain.segments_at(mesh.nodes)):
        for k in hits:
            seg = domain.segments[k]
            if seg.tag.fixes_x:
                mask[2 * v] = True
                values[2 * v] = seg.value[0] or 0.0
            if seg.tag.fixes_y:
                mask[2 * v + 1] = True
                values[2 * v + 1] = seg.value[1] or 0.0
    if loads.prescribed is not None and mask.any():
        field_values = np.asarray(loads.prescribed(mesh.nodes), dtype=float).reshape(-1)
        values[mask] = field_values[mask]
    # nodes no element uses carry no stiffness
    unused = np.repeat(~mesh.used_nodes(), 2)
    mask |= unused
    values[unused] = 0.0
    return mask, values


def load_vector(mesh: PolyMesh, domain: DomainSpec, loads: Loads) -> np.ndarray:
    """Consistent nodal loads: half of each edge traction to its end nodes, |E|/n_v body force per vertex"""
    f = np.zeros(2 * mesh.n_nodes)
    tags = domain.segments_at(mesh.nodes)
    for a, b, _ in mesh.boundary_edges():
        common = set(tags[a]) & set(tags[b])
        if not common:
            continue
        seg = domain.segments[min(common)]
        t = seg.applied_traction()
        if not t.any():
            continue
        half = 0.5 * float(np.linalg.norm(mesh.nodes[b] - mesh.nodes[a])) * t
        f[2 * a:2 * a + 2] += half
        f[2 * b:2 * b + 2] += half
    if loads.has_body_force:
        for e, cycle in enumerate(mesh.elements):
            weight = mesh.element_area(e) / len(cycle)
            body = loads.body_at(mesh.nodes[cycle]) * weight
            np.add.at(f, 2 * np.asarray(cycle), body[:, 0])
            np.add.at(f, 2 * np.asarray(cycle) + 1, body[:, 1])
    return f


def check_rigid_modes(mesh: PolyMesh, mask: np.ndarray):
    """Raise ConstraintError when the constrained dofs cannot stop every rigid motion"""
    used = mesh.used_nodes()
    centre = mesh.nodes[used].mean(axis=0)
    scale = max(float(np.ptp(mesh.nodes[used], axis=0).max()), 1e-300)
    local = (mesh.nodes - centre) / scale
    modes = np.zeros((2 * mesh.n_nodes, 3))
    modes[0::2, 0] = 1.0
    modes[1::2, 1] = 1.0
    modes[0::2, 2] = -local[:, 1]
    modes[1::2, 2] = local[:, 0]
    modes[~np.repeat(used, 2)] = 0.0
    restricted = modes[mask & np.repeat(used, 2)]
    names = ("x-translation", "y-translation", "rotation")
    if len(restricted) == 0:
        raise ConstraintError(names[0])
    _, s, vt = np.linalg.svd(restricted, full_matrices=True)
    if len(s) < 3 or s[-1] <= 1e-10 * s[0]:
        free = vt[-1]
        raise ConstraintError(names[int(np.argmax(np.abs(free)))])


def _solve_reduced(K: csr_matrix, rhs: np.ndarray) -> Tuple[np.ndarray, float]:
    try:
        lu = splu(K.tocsc())
    except RuntimeError as e:
        raise NumericError(f"Stiffness factorisation failed: {e}") from e
    x = lu.solve(rhs)
    scale = sparse_norm(K, 1)

    def backward_error(x: np.ndarray) -> float:
        r = rhs - K @ x
        denom = scale * np.linalg.norm(x) + np.linalg.norm(rhs)
        return float(np.linalg.norm(r) / denom) if denom > 0.0 else 0.0

    err = backward_error(x)
    for _ in range(REFINEMENT_STEPS):
        if err <= RESIDUAL_TOL:
            break
        x = x + lu.solve(rhs - K @ x)
        err = backward_error(x)
    if not np.all(np.isfinite(x)) or err > RESIDUAL_TOL:
        raise NumericError(f"Linear solve stalled at relative residual {err:.3e}")
    return x, err


def assemble_and_solve(mesh: PolyMesh, domain: Optional[DomainSpec] = None,
                       material: Optional[MaterialParams] = None, loads: Optional[Loads] = None) -> SolutionField:
    """Solve K u = f with Dirichlet dofs eliminated"""
    domain = domain if domain is not None else mesh.domain
    if domain is None:
        raise PreconditionError("A domain with boundary segments is required to solve")
    material = material or MaterialParams()
    loads = loads or Loads()
    D = constitutive_matrix(material)

    K, matrices = assemble_stiffness(mesh, D)
    f = load_vector(mesh, domain, loads)
    mask, values = dirichlet_data(mesh, domain, loads)
    check_rigid_modes(mesh, mask)

    free = ~mask
    u = values.copy()
    residual = 0.0
    if free.any():
        K_ff = K[free][:, free]
        rhs = f[free] - K[free][:, mask] @ values[mask]
        u[free], residual = _solve_reduced(K_ff, rhs)
    energy = 0.5 * float(u @ (K @ u))
    logger.debug(f"⚙️ Solved {int(free.sum())} free dofs, residual {residual:.2e}, energy {energy:.6e}")
    return SolutionField(u.reshape(-1, 2), mask, residual, energy, matrices)


def element_stress(mesh: PolyMesh, elem_id: int, u: Union[SolutionField, np.ndarray], D: np.ndarray) -> np.ndarray:
    """Constant Voigt stress D (B d) of one element"""
    flat = u.dofs if isinstance(u, SolutionField) else np.asarray(u).reshape(-1)
    d = flat[element_dofs(mesh.elements[elem_id])]
    return D @ (projection_matrix(mesh.coords(elem_id)) @ d)


def element_stresses(mesh: PolyMesh, u: Union[SolutionField, np.ndarray], D: np.ndarray) -> np.ndarray:
    if isinstance(u, SolutionField) and len(u.stiffness) == mesh.n_elements:
        flat = u.dofs
        return np.array([D @ (km.B @ flat[element_dofs(c)]) for km, c in zip(u.stiffness, mesh.elements)])
    return np.array([element_stress(mesh, e, u, D) for e in range(mesh.n_elements)])


def strain_energy(mesh: PolyMesh, u: Union[SolutionField, np.ndarray], matrices: Sequence[ElementStiffness]) -> float:
    """Sum of element energies 1/2 d^T (K_c + K_s) d"""
    flat = u.dofs if isinstance(u, SolutionField) else np.asarray(u).reshape(-1)
    total = 0.0
    for km, cycle in zip(matrices, mesh.elements):
        d = flat[element_dofs(cycle)]
        total += 0.5 * float(d @ km.K @ d)
    return total
