"""
🔍 Energy-norm error estimates: element, global and patch-coarsening prediction
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.stats import trimboth

from ..core.errors import UndefinedRelativeError
from ..mesh.polymesh import PolyMesh
from ..vem.assembly import SolutionField, element_stresses
from ..vem.material import compliance_matrix
from .recovery import recover_stress

TRIM_FRACTION = 0.05


@dataclass
class ErrorReport:
    """Per-element and global error quantities of one solve"""
    e: np.ndarray
    U: np.ndarray
    sigma_h: np.ndarray
    sigma_star: np.ndarray
    areas: np.ndarray
    energy_error: float
    energy: float
    rel_error: float
    patch_prediction: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def element_norms(self) -> np.ndarray:
        return np.sqrt(self.e / 2.0)

    @property
    def n_elements(self) -> int:
        return len(self.e)


def _quadratic_sum(diff: np.ndarray, compliance: np.ndarray) -> float:
    return float(np.einsum("ij,jk,ik->", diff, compliance, diff))


def element_error(mesh: PolyMesh, elem_id: int, sigma_star: np.ndarray, sigma_h: np.ndarray,
                  D: np.ndarray) -> Tuple[float, float, float]:
    """(e_i, U_i, ||e_i||) by nodal quadrature over the element vertices"""
    compliance = compliance_matrix(D)
    cycle = mesh.elements[elem_id]
    weight = mesh.element_area(elem_id) / len(cycle)
    star = sigma_star[cycle]
    e = weight * _quadratic_sum(star - sigma_h, compliance)
    U = weight * _quadratic_sum(star, compliance)
    return e, U, float(np.sqrt(e / 2.0))


def element_errors(mesh: PolyMesh, sigma_star: np.ndarray, sigma_h: np.ndarray, D: np.ndarray,
                   areas: np.ndarray = None) -> Tuple[np.ndarray, np.ndarray]:
    compliance = compliance_matrix(D)
    areas = mesh.areas() if areas is None else areas
    e = np.empty(mesh.n_elements)
    U = np.empty(mesh.n_elements)
    for i, cycle in enumerate(mesh.elements):
        weight = areas[i] / len(cycle)
        star = sigma_star[cycle]
        e[i] = weight * _quadratic_sum(star - sigma_h[i], compliance)
        U[i] = weight * _quadratic_sum(star, compliance)
    return e, U


def global_error(e: Sequence[float], U: Sequence[float]) -> Tuple[float, float, float]:
    """(||e||, ||U||, ||e||/||U||) from element contributions"""
    error = float(np.sqrt(np.sum(e) / 2.0))
    energy = float(np.sqrt(np.sum(U) / 2.0))
    if energy == 0.0:
        raise UndefinedRelativeError("Relative error is undefined: the recovered elastic energy is zero")
    return error, energy, error / energy


def predict_patch_error(mesh: PolyMesh, node_id: int, sigma_star: np.ndarray, sigma_h: np.ndarray,
                        D: np.ndarray, areas: np.ndarray = None) -> float:
    """Error the merged patch of node_id would carry with the area-weighted patch stress"""
    areas = mesh.areas() if areas is None else areas
    return _patch_prediction(mesh, mesh.node_elements()[node_id], sigma_star, sigma_h,
                             compliance_matrix(D), areas)


def _patch_prediction(mesh: PolyMesh, patch: Sequence[int], sigma_star: np.ndarray, sigma_h: np.ndarray,
                      compliance: np.ndarray, areas: np.ndarray) -> float:
    weights = areas[patch]
    patch_area = float(weights.sum())
    mean_stress = weights @ sigma_h[patch] / patch_area
    nodes = mesh.patch_nodes(patch)
    e_p = patch_area / len(nodes) * _quadratic_sum(sigma_star[nodes] - mean_stress, compliance)
    return float(np.sqrt(e_p / 2.0))


def patch_predictions(mesh: PolyMesh, sigma_star: np.ndarray, sigma_h: np.ndarray, D: np.ndarray,
                      areas: np.ndarray = None) -> np.ndarray:
    """||e_p|| for every node; NaN for nodes no element uses"""
    areas = mesh.areas() if areas is None else areas
    compliance = compliance_matrix(D)
    table = mesh.node_elements()
    out = np.full(mesh.n_nodes, np.nan)
    for v, patch in enumerate(table):
        if patch:
            out[v] = _patch_prediction(mesh, patch, sigma_star, sigma_h, compliance, areas)
    return out


def estimate_errors(mesh: PolyMesh, solution: SolutionField, D: np.ndarray,
                    predictions: bool = True) -> ErrorReport:
    """Recovery, element errors, global error and (optionally) patch predictions in one pass"""
    areas = mesh.areas()
    centroids = mesh.centroids()
    sigma_h = element_stresses(mesh, solution, D)
    sigma_star = recover_stress(mesh, sigma_h, areas, centroids)
    e, U = element_errors(mesh, sigma_star, sigma_h, D, areas)
    error, energy, rel = global_error(e, U)
    report = ErrorReport(e, U, sigma_h, sigma_star, areas, error, energy, rel)
    if predictions:
        report.patch_prediction = patch_predictions(mesh, sigma_star, sigma_h, D, areas)
    logger.debug(f"🔍 ||e|| = {error:.6e}, ||U|| = {energy:.6e}, relative {100.0 * rel:.4f}%")
    return report


def error_distribution(norms, trim: float = TRIM_FRACTION) -> Dict[str, float]:
    """Trimmed extremes, mean, median and quartiles of the element error norms"""
    values = norms.element_norms if isinstance(norms, ErrorReport) else np.asarray(norms, dtype=float)
    trimmed = np.sort(trimboth(np.sort(values), trim))
    if len(trimmed) == 0:
        trimmed = values
    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    return {
        "max_elem_err_trim5": float(trimmed.max()),
        "min_elem_err_trim5": float(trimmed.min()),
        "mean_elem_err": float(values.mean()),
        "median_elem_err": float(median),
        "q1": float(q1),
        "q3": float(q3),
    }


# midpoint rule on the centroid fan, exact for quadratic integrands
_EDGE_MIDPOINTS = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])


def exact_energy_error(mesh: PolyMesh, solution: SolutionField,
                       stress_field: Callable[[np.ndarray], np.ndarray], D: np.ndarray) -> float:
    """sqrt(1/2 integral of (s_exact - s_h)^T D^-1 (s_exact - s_h)) against a known stress field"""
    compliance = compliance_matrix(D)
    sigma_h = element_stresses(mesh, solution, D)
    total = 0.0
    for i, cycle in enumerate(mesh.elements):
        coords = mesh.nodes[cycle]
        centre = mesh.element_centroid(i)
        nxt = np.roll(coords, -1, axis=0)
        tri_area = 0.5 * ((coords[:, 0] - centre[0]) * (nxt[:, 1] - centre[1])
                          - (nxt[:, 0] - centre[0]) * (coords[:, 1] - centre[1]))
        for corner_a, corner_b, area in zip(coords, nxt, tri_area):
            verts = np.array([centre, corner_a, corner_b])
            points = _EDGE_MIDPOINTS @ verts
            diff = np.asarray(stress_field(points), dtype=float).reshape(-1, 3) - sigma_h[i]
            total += area / 3.0 * _quadratic_sum(diff, compliance)
    return float(np.sqrt(total / 2.0))
