"""
🔪 Element refinement by Voronoi sub-tessellation

The parent keeps its id (it becomes the last child); the remaining children are
appended, so refining a batch in ascending order never invalidates later ids.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

import numpy as np
import shapely
from loguru import logger
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from shapely.geometry import Polygon

from ..core.errors import DegenerateSeedError, RefinementFailure
from .generation import MESH_MODES, lloyd_region, uniform_points, voronoi_cells
from .geometry import is_simple_polygon, project_to_segment, signed_area
from .polymesh import PolyMesh

CHILD_AREA_FRACTION = 1e-12
REFINE_LLOYD_MAX_ITER = 20
REFINE_LLOYD_TOL = 1e-3


@dataclass
class RefinePlan:
    """Children of one parent, ready to be committed"""
    parent: int
    new_points: np.ndarray
    children: List[List[int]]


def corner_flags(coords: np.ndarray, tol: float) -> np.ndarray:
    """True at vertices where the outline actually turns (hanging nodes are False)"""
    n = len(coords)
    flags = np.zeros(n, dtype=bool)
    for i in range(n):
        _, dist = project_to_segment(coords[i][None, :], coords[i - 1], coords[(i + 1) % n])
        flags[i] = dist[0] > tol
    return flags


def corner_count(coords: np.ndarray, tol: float) -> int:
    return max(int(corner_flags(coords, tol).sum()), 3)


def _structured_seeds(parent: Polygon, k: int, rng: np.random.Generator) -> np.ndarray:
    g = int(np.ceil(np.sqrt(k)))
    xmin, ymin, xmax, ymax = parent.bounds
    xs = xmin + (np.arange(g) + 0.5) * (xmax - xmin) / g
    ys = ymin + (np.arange(g) + 0.5) * (ymax - ymin) / g
    gx, gy = np.meshgrid(xs, ys)
    points = np.column_stack([gx.ravel(), gy.ravel()])
    points = points[shapely.contains_xy(parent, points[:, 0], points[:, 1])]
    if len(points) < 2:
        return uniform_points(parent, k, rng)
    return points


def child_seeds(mesh: PolyMesh, elem_id: int, mode: str, rng_seed: int) -> np.ndarray:
    coords = mesh.coords(elem_id)
    parent = Polygon(coords)
    shapely.prepare(parent)
    rng = np.random.default_rng([rng_seed, elem_id])
    if mode == "structured":
        return _structured_seeds(parent, corner_count(coords, mesh.merge_tol), rng)
    return uniform_points(parent, len(coords), rng)


def _cluster(points: np.ndarray, tol: float) -> np.ndarray:
    m = len(points)
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    _, labels = connected_components(graph, directed=False)
    return labels


def _space_along_edges(coords: np.ndarray, new_points: np.ndarray, edges: List[int],
                       on_edge: Dict[int, List[Tuple[float, int]]]):
    n = len(coords)
    for k in edges:
        hits = sorted(on_edge.get(k, []))
        a, b = coords[k], coords[(k + 1) % n]
        for j, (_, idx) in enumerate(hits):
            new_points[idx] = a + (j + 1) / (len(hits) + 1) * (b - a)


def space_edge_nodes(coords: np.ndarray, cycle: List[int], new_points: np.ndarray,
                     on_edge: Dict[int, List[Tuple[float, int]]], tol: float) -> Dict[int, int]:
    """Spread new boundary nodes evenly between the corners of each parent side

    ``on_edge`` maps a cycle edge to the (parameter, new point index) pairs found
    on it; ``new_points`` is updated in place. A new node landing within tol of
    a hanging vertex of the side is merged into it. When even spacing would
    carry a new node past a hanging vertex, that side is spaced edge by edge
    instead. Returns merged new point index -> existing node id.
    """
    n = len(coords)
    corners = np.where(corner_flags(coords, tol))[0]
    if len(corners) < 3:
        corners = np.arange(n)
    merged: Dict[int, int] = {}
    for c, start in enumerate(corners):
        end = int(corners[(c + 1) % len(corners)])
        edges = [(int(start) + j) % n for j in range((end - start) % n)]
        hits = [idx for k in edges for _, idx in on_edge.get(k, [])]
        if not hits:
            continue
        a, b = coords[start], coords[end]
        margin = tol / float(np.linalg.norm(b - a))
        hanging = edges[1:]
        s_hang = project_to_segment(coords[hanging], a, b)[0] if hanging else np.zeros(0)
        s_new = project_to_segment(new_points[hits], a, b)[0]
        targets = np.arange(1, len(hits) + 1) / (len(hits) + 1)

        placed: Dict[int, float] = {}
        for rank, i in enumerate(np.argsort(s_new, kind="stable")):
            lo = min(s_new[i], targets[rank]) + margin
            hi = max(s_new[i], targets[rank]) - margin
            if np.any((s_hang > lo) & (s_hang < hi)):
                break
            placed[hits[i]] = float(targets[rank])
        if len(placed) < len(hits):
            _space_along_edges(coords, new_points, edges, on_edge)
            continue

        for idx, t in placed.items():
            near = np.where(np.abs(s_hang - t) <= margin)[0]
            if len(near):
                merged[idx] = cycle[hanging[int(near[0])]]
            new_points[idx] = a + t * (b - a)
    return merged


def plan_refinement(mesh: PolyMesh, elem_id: int, mode: str = "voronoi", rng_seed: int = 0,
                    max_iter: int = REFINE_LLOYD_MAX_ITER, tol: float = REFINE_LLOYD_TOL) -> RefinePlan:
    """Compute the children of an element without touching the mesh"""
    if mode not in MESH_MODES:
        raise RefinementFailure(f"Unknown mesh mode '{mode}'")
    cycle = mesh.elements[elem_id]
    coords = mesh.nodes[cycle]
    parent_area = signed_area(coords)
    eps = mesh.merge_tol
    parent = Polygon(coords)

    seeds = child_seeds(mesh, elem_id, mode, rng_seed)
    try:
        seeds = lloyd_region(parent, seeds, max_iter, tol, eps)
        cells = voronoi_cells(parent, seeds, eps)
    except DegenerateSeedError as e:
        raise RefinementFailure(f"Element {elem_id}: {e}") from e

    points = np.vstack(cells)
    labels = _cluster(points, eps)
    n_parent = len(cycle)

    # classify every distinct cell vertex: existing parent vertex, point on a parent edge, or interior
    node_of: Dict[int, int] = {}
    new_points: List[np.ndarray] = []
    on_edge: Dict[int, List[tuple]] = {}
    tree = cKDTree(coords)
    for i, lab in enumerate(labels):
        if lab in node_of:
            continue
        p = points[i]
        dist, k = tree.query(p)
        if dist <= eps:
            node_of[lab] = cycle[k]
            continue
        new_index = len(new_points)
        new_points.append(p.copy())
        node_of[lab] = -(new_index + 1)
        for k in range(n_parent):
            t, d = project_to_segment(p[None, :], coords[k], coords[(k + 1) % n_parent])
            if d[0] <= eps:
                on_edge.setdefault(k, []).append((float(t[0]), new_index))
                break

    new_points = np.array(new_points).reshape(-1, 2)
    merged = space_edge_nodes(coords, cycle, new_points, on_edge, eps)
    if merged:
        keep = [i for i in range(len(new_points)) if i not in merged]
        renumber = {old: new for new, old in enumerate(keep)}
        for lab, v in node_of.items():
            if v < 0:
                old = -v - 1
                node_of[lab] = merged[old] if old in merged else -(renumber[old] + 1)
        new_points = new_points[keep]

    children = []
    offset = 0
    for cell in cells:
        ids = [node_of[lab] for lab in labels[offset:offset + len(cell)]]
        offset += len(cell)
        child = [ids[0]]
        for v in ids[1:]:
            if v != child[-1]:
                child.append(v)
        if len(child) > 1 and child[0] == child[-1]:
            child.pop()
        children.append(child)

    def position(v: int) -> np.ndarray:
        return mesh.nodes[v] if v >= 0 else new_points[-v - 1]

    total = 0.0
    for child in children:
        child_coords = np.array([position(v) for v in child])
        if len(child) < 3 or len(set(child)) != len(child):
            raise RefinementFailure(f"Element {elem_id}: child collapsed to {len(set(child))} vertices")
        area = signed_area(child_coords)
        if area < CHILD_AREA_FRACTION * parent_area or not is_simple_polygon(child_coords):
            raise RefinementFailure(f"Element {elem_id}: degenerate child (area {area:.3e})")
        total += area
    if abs(total - parent_area) > 1e-9 * parent_area:
        raise RefinementFailure(f"Element {elem_id}: children cover {total!r} of {parent_area!r}")

    return RefinePlan(elem_id, new_points, children)


def commit_refinement(mesh: PolyMesh, plan: RefinePlan) -> List[int]:
    neighbours = mesh.element_neighbours([plan.parent]) - {plan.parent}
    new_ids = mesh.add_nodes(plan.new_points) if len(plan.new_points) else []

    def resolve(v: int) -> int:
        return v if v >= 0 else new_ids[-v - 1]

    appended = [mesh.append_element([resolve(v) for v in child]) for child in plan.children]
    # the parent is still present here so its nodes count as used during conformize
    mesh.conformize(list(neighbours) + appended)
    last = appended.pop()
    mesh.elements[plan.parent] = mesh.elements.pop(last)
    mesh.touch()
    return [plan.parent] + appended


def refine_element(mesh: PolyMesh, elem_id: int, mode: str = "voronoi", rng_seed: int = 0,
                   max_iter: int = REFINE_LLOYD_MAX_ITER, tol: float = REFINE_LLOYD_TOL) -> List[int]:
    """Split one element into Voronoi children; returns the child ids (the first reuses elem_id)"""
    plan = plan_refinement(mesh, elem_id, mode, rng_seed, max_iter, tol)
    children = commit_refinement(mesh, plan)
    logger.debug(f"🔪 Element {elem_id} -> {len(children)} children")
    return children


def refine_batch(mesh: PolyMesh, elem_ids: Iterable[int], mode: str = "voronoi", rng_seed: int = 0,
                 max_iter: int = REFINE_LLOYD_MAX_ITER, tol: float = REFINE_LLOYD_TOL) -> Dict[int, List[int]]:
    """Refine several elements in ascending id order; failed elements are skipped"""
    out: Dict[int, List[int]] = {}
    for e in sorted(set(int(i) for i in elem_ids)):
        try:
            out[e] = refine_element(mesh, e, mode, rng_seed, max_iter, tol)
        except RefinementFailure as exc:
            logger.warning(f"⚠️ Refinement skipped: {exc}")
    if out:
        logger.debug(f"🔪 Refined {len(out)} elements into {sum(len(c) for c in out.values())} children")
    return out


def uniform_refine(mesh: PolyMesh, mode: str = "voronoi", rng_seed: int = 0) -> Dict[int, List[int]]:
    return refine_batch(mesh, range(mesh.n_elements), mode, rng_seed)
