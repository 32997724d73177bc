"""
🔍 Nodal stress recovery by least-squares patch fitting

Element stresses are sampled at element centroids and fitted with a linear
polynomial over the patch of each node; the fit evaluated at the node is the
recovered stress.
"""

from typing import Optional

import numpy as np
from loguru import logger

from ..core.errors import EstimationError
from ..mesh.geometry import bounding_diameter
from ..mesh.polymesh import PolyMesh

FIT_CONDITION_LIMIT = 1e12
MAX_ENLARGEMENTS = 2
MIN_SAMPLES = 3


def fit_at_node(node: np.ndarray, samples: np.ndarray, values: np.ndarray) -> Optional[np.ndarray]:
    """Linear least-squares fit of values at samples, evaluated at node; None if ill-posed"""
    if len(samples) < MIN_SAMPLES:
        return None
    h = bounding_diameter(samples)
    if h == 0.0:
        return None
    local = (samples - node) / h
    P = np.column_stack([np.ones(len(samples)), local])
    A = P.T @ P
    if np.linalg.cond(A) > FIT_CONDITION_LIMIT:
        return None
    coeffs = np.linalg.solve(A, P.T @ values)
    # coordinates are centred on the node, so the constant term is the nodal value
    return coeffs[0]


def recover_stress(mesh: PolyMesh, element_stresses: np.ndarray,
                   areas: Optional[np.ndarray] = None, centroids: Optional[np.ndarray] = None) -> np.ndarray:
    """Recovered Voigt stress at every node (zeros for nodes no element uses)"""
    sigma_h = np.asarray(element_stresses, dtype=float)
    areas = mesh.areas() if areas is None else areas
    centroids = mesh.centroids() if centroids is None else centroids
    table = mesh.node_elements()
    recovered = np.zeros((mesh.n_nodes, sigma_h.shape[1]))
    fallbacks = 0

    for v in range(mesh.n_nodes):
        patch = table[v]
        if not patch:
            continue
        node = mesh.nodes[v]
        value = None
        for enlargement in range(MAX_ENLARGEMENTS + 1):
            if enlargement:
                patch = sorted(mesh.element_neighbours(patch))
            value = fit_at_node(node, centroids[patch], sigma_h[patch])
            if value is not None:
                break
        if value is None:
            weights = areas[patch]
            total = float(weights.sum())
            if not total > 0.0:
                raise EstimationError(f"Stress recovery failed at node {v}: patch has no area")
            value = weights @ sigma_h[patch] / total
            fallbacks += 1
        recovered[v] = value

    if fallbacks:
        logger.debug(f"🔍 {fallbacks} nodes used the area-weighted mean stress")
    return recovered
