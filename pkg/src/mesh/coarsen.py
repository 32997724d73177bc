"""
🧹 Patch coarsening: convex hull merge with edge straightening

A node's patch is replaced by one element bounded by the convex hull of the
patch nodes. Nodes of surrounding elements that end up inside the hull are
pushed onto the hull boundary. Every operation is planned on a dry run first,
so a rejected patch leaves the mesh untouched.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.spatial import QhullError
from shapely.geometry import Polygon

from ..core.errors import CoarseningFailure
from .domain import DomainSpec
from .geometry import (
    convex_hull_indices,
    inside_convex,
    is_simple_polygon,
    nearest_boundary_point,
    signed_area,
)
from .polymesh import PolyMesh

AREA_RELATIVE_TOL = 1e-9


@dataclass
class CoarsenPlan:
    node_id: int
    patch: List[int]
    cycle: List[int]
    moves: Dict[int, np.ndarray] = field(default_factory=dict)
    merges: Dict[int, int] = field(default_factory=dict)
    neighbour_cycles: Dict[int, List[int]] = field(default_factory=dict)


def _close_cycle(cycle: List[int]) -> List[int]:
    out: List[int] = []
    for v in cycle:
        if not out or out[-1] != v:
            out.append(v)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def _valid_cycle(coords: np.ndarray, ids: List[int]) -> bool:
    return len(ids) >= 3 and len(set(ids)) == len(ids) and signed_area(coords) > 0.0 and is_simple_polygon(coords)


def _protected_hits(domain: DomainSpec, points: np.ndarray, tol: float) -> np.ndarray:
    protected = domain.protected_points()
    if len(points) == 0:
        return np.zeros(0, dtype=bool)
    d = np.linalg.norm(points[:, None, :] - protected[None, :, :], axis=2)
    return d.min(axis=1) <= tol


def _hull_inside_domain(domain: DomainSpec, hull: np.ndarray) -> bool:
    poly = Polygon(hull)
    if domain.polygon.contains(poly):
        return True
    return poly.difference(domain.polygon).area <= 1e-9 * poly.area


def plan_coarsening(mesh: PolyMesh, node_id: int, domain: Optional[DomainSpec] = None) -> CoarsenPlan:
    """Dry run of coarsen_patch; raises CoarseningFailure naming the first rule the patch breaks"""
    domain = domain if domain is not None else mesh.domain
    tol = mesh.merge_tol
    table = mesh.node_elements()
    patch = sorted(table[node_id])
    if len(patch) < 2:
        raise CoarseningFailure(f"Node {node_id}: patch has {len(patch)} element(s)")
    patch_set = set(patch)

    if domain is not None and _protected_hits(domain, mesh.nodes[[node_id]], tol)[0]:
        raise CoarseningFailure(f"Node {node_id} is a corner of the domain geometry")

    patch_nodes = mesh.patch_nodes(patch)
    try:
        hull_local = convex_hull_indices(mesh.nodes[patch_nodes])
    except QhullError as e:
        raise CoarseningFailure(f"Node {node_id}: patch hull is degenerate") from e
    hull_ids = [patch_nodes[i] for i in hull_local]
    hull = mesh.nodes[hull_ids]
    if node_id in hull_ids:
        raise CoarseningFailure(f"Node {node_id} would survive as a hull corner")

    # the geometry of the problem domain must not change
    if domain is not None:
        if not _hull_inside_domain(domain, hull):
            raise CoarseningFailure(f"Node {node_id}: hull leaves the domain")
        if np.any(inside_convex(domain.protected_points(), hull) > tol):
            raise CoarseningFailure(f"Node {node_id}: hull covers a domain corner")
    elif any(len(owners) == 1 and owners[0] in patch_set for owners in mesh.edge_elements().values()):
        raise CoarseningFailure(f"Node {node_id}: boundary patch on a mesh without domain")

    centre = hull.mean(axis=0)
    radius = float(np.linalg.norm(hull - centre, axis=1).max()) + tol
    candidates = np.array(sorted(mesh.node_tree().query_ball_point(centre, radius)), dtype=int)
    used = np.array([bool(table[v]) for v in candidates], dtype=bool)
    candidates = candidates[used]
    depth = inside_convex(mesh.nodes[candidates], hull)
    outside_patch = np.array([any(e not in patch_set for e in table[v]) for v in candidates], dtype=bool)
    if domain is not None:
        protected = _protected_hits(domain, mesh.nodes[candidates], tol)
    else:
        protected = np.zeros(len(candidates), dtype=bool)

    # anchors: nodes that stay on the hull boundary as vertices of the new element
    hull_set = set(hull_ids)
    anchors: List[Tuple[int, np.ndarray]] = [(v, mesh.nodes[v]) for v in hull_ids]
    for v, d, keep in zip(candidates, depth, outside_patch | protected):
        v = int(v)
        if v in hull_set or not keep or abs(d) > tol:
            continue
        foot, _, _ = nearest_boundary_point(mesh.nodes[v], hull)
        if np.linalg.norm(foot - mesh.nodes[v]) <= tol:
            anchors.append((v, mesh.nodes[v]))

    moves: Dict[int, np.ndarray] = {}
    merges: Dict[int, int] = {}
    for v, d, keep in zip(candidates, depth, outside_patch):
        v = int(v)
        if d <= tol or not keep:
            continue
        foot, _, _ = nearest_boundary_point(mesh.nodes[v], hull)
        target = next((a for a, p in anchors if np.linalg.norm(p - foot) <= tol), None)
        if target is None:
            moves[v] = foot
            anchors.append((v, foot))
        else:
            merges[v] = target

    def position(v: int) -> np.ndarray:
        return moves[v] if v in moves else mesh.nodes[v]

    # new element: anchors ordered along the hull
    keyed = []
    for v, p in anchors:
        if v in hull_set:
            keyed.append((hull_ids.index(v), 0.0, v))
        else:
            _, k, t = nearest_boundary_point(p, hull)
            keyed.append((k, t, v))
    keyed.sort()
    cycle = _close_cycle([v for _, _, v in keyed])
    if not _valid_cycle(np.array([position(v) for v in cycle]), cycle):
        raise CoarseningFailure(f"Node {node_id}: merged element is not a simple polygon")

    touched = set(moves) | set(merges)
    neighbour_cycles: Dict[int, List[int]] = {}
    for e in sorted({e for v in touched for e in table[v]} - patch_set):
        new_cycle = _close_cycle([merges.get(v, v) for v in mesh.elements[e]])
        if not _valid_cycle(np.array([position(v) for v in new_cycle]), new_cycle):
            raise CoarseningFailure(f"Node {node_id}: straightening would invert element {e}")
        neighbour_cycles[e] = new_cycle

    hull_coords = np.array([position(v) for v in cycle])
    _check_tiling(mesh, node_id, patch, hull_coords, neighbour_cycles, position, tol)
    return CoarsenPlan(node_id, patch, cycle, moves, merges, neighbour_cycles)


def _check_tiling(mesh: PolyMesh, node_id: int, patch: List[int], hull_coords: np.ndarray,
                  neighbour_cycles: Dict[int, List[int]], position, tol: float):
    """The merged element and the straightened neighbours must cover exactly what they replace"""
    before = sum(mesh.element_area(e) for e in patch) + sum(mesh.element_area(e) for e in neighbour_cycles)
    hull_area = signed_area(hull_coords)
    straightened = {e: np.array([position(v) for v in c]) for e, c in neighbour_cycles.items()}
    after = hull_area + sum(signed_area(coords) for coords in straightened.values())
    perimeter = float(np.linalg.norm(np.roll(hull_coords, -1, axis=0) - hull_coords, axis=1).sum())
    slack = AREA_RELATIVE_TOL * before + tol * perimeter
    if abs(after - before) > slack:
        raise CoarseningFailure(f"Node {node_id}: straightening changes the covered area by {after - before:.3e}")

    hull_poly = Polygon(hull_coords)
    for e, coords in straightened.items():
        if hull_poly.intersection(Polygon(coords)).area > slack:
            raise CoarseningFailure(f"Node {node_id}: straightened element {e} overlaps the merged element")


def patch_eligible(mesh: PolyMesh, domain: Optional[DomainSpec], node_id: int) -> bool:
    """True when the patch of node_id can be merged without changing the domain geometry"""
    try:
        plan_coarsening(mesh, node_id, domain)
    except CoarseningFailure as e:
        logger.debug(f"🧹 {e}")
        return False
    return True


def commit_coarsening(mesh: PolyMesh, plan: CoarsenPlan) -> Tuple[int, np.ndarray]:
    for v, p in plan.moves.items():
        mesh.nodes[v] = p
    for e, cycle in plan.neighbour_cycles.items():
        mesh.elements[e] = cycle
    remap = mesh.remove_elements(plan.patch)
    new_id = mesh.append_element(plan.cycle)
    affected = mesh.element_neighbours([new_id])
    mesh.conformize(affected)
    return new_id, remap


def coarsen_patch(mesh: PolyMesh, node_id: int, domain: Optional[DomainSpec] = None,
                  compact: bool = True) -> Tuple[int, np.ndarray]:
    """Merge the patch of node_id into one element

    Returns the new element id and the old -> new element index map (-1 for
    merged elements). Orphaned nodes are removed unless ``compact`` is False.
    """
    plan = plan_coarsening(mesh, node_id, domain)
    new_id, remap = commit_coarsening(mesh, plan)
    if compact:
        mesh.compact()
    logger.debug(f"🧹 Node {node_id}: {len(plan.patch)} elements -> 1 ({len(plan.moves)} moved, "
                 f"{len(plan.merges)} merged)")
    return new_id, remap


def coarsen_batch(mesh: PolyMesh, node_ids: Iterable[int],
                  domain: Optional[DomainSpec] = None) -> Tuple[np.ndarray, List[int]]:
    """Coarsen patches in the given order, skipping any that overlap an earlier one

    Returns the old -> new element index map for the whole batch (-1 for merged
    elements) and the centre nodes whose patches were merged. Node indices refer
    to the mesh as passed in; nodes are compacted once at the end.
    """
    remap = np.arange(mesh.n_elements)
    created: set = set()
    done: List[int] = []
    for node in node_ids:
        node = int(node)
        if node >= mesh.n_nodes or not mesh.node_elements()[node]:
            continue
        if mesh.node_patch(node) & created:
            logger.debug(f"🧹 Node {node}: patch overlaps an element merged in this batch")
            continue
        try:
            new_id, step = coarsen_patch(mesh, node, domain, compact=False)
        except CoarseningFailure as e:
            logger.warning(f"⚠️ Coarsening skipped: {e}")
            continue
        remap = np.where(remap >= 0, step[np.maximum(remap, 0)], -1)
        created = {int(step[c]) for c in created} | {new_id}
        done.append(node)
    mesh.compact()
    if done:
        logger.debug(f"🧹 Coarsened {len(done)} patches, {mesh.n_elements} elements remain")
    return remap, done
