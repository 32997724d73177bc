"""
🧱 Initial mesh generation: seed placement, bounded Voronoi tessellation, Lloyd smoothing
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
import shapely
from loguru import logger
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from shapely.geometry import Point, Polygon

from ..core.errors import CapacityError, DegenerateSeedError, PreconditionError
from .domain import DomainSpec
from .geometry import (
    bounding_diameter,
    clip_halfplane,
    drop_repeated_vertices,
    polygon_centroid,
    polygon_coords,
    signed_area,
)
from .polymesh import PolyMesh

MAX_SEEDS = 1_000_000
MESH_MODES = ("structured", "voronoi")


@dataclass
class SeedSet:
    points: np.ndarray
    rng_seed: int = 0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.points)


def _seed_array(seeds: Union[SeedSet, np.ndarray, Sequence]) -> np.ndarray:
    if isinstance(seeds, SeedSet):
        return seeds.points
    return np.asarray(seeds, dtype=float).reshape(-1, 2)


def _grid_module(coords: np.ndarray, lo: float, span: float, limit: int = 64) -> int:
    """Smallest division count putting every outline coordinate on a grid line"""
    fractions = (coords - lo) / span
    for m in range(1, limit + 1):
        scaled = fractions * m
        if np.all(np.abs(scaled - np.round(scaled)) < 1e-9):
            return m
    return 1


def _nearest_multiple(value: float, module: int) -> int:
    return max(module, int(round(value / module)) * module)


def generate_seeds(domain: DomainSpec, n: int, mode: str = "voronoi", rng_seed: int = 0) -> SeedSet:
    """Structured grid cell centres or uniform random points inside the domain"""
    if n < 1:
        raise PreconditionError(f"Seed count must be at least 1, got {n}")
    if n > MAX_SEEDS:
        raise CapacityError(f"Seed count {n} exceeds the limit of {MAX_SEEDS}")
    if mode not in MESH_MODES:
        raise PreconditionError(f"Unknown mesh mode '{mode}'")

    xmin, ymin, xmax, ymax = domain.bounds
    width, height = xmax - xmin, ymax - ymin

    if mode == "structured":
        h = np.sqrt(domain.area / n)
        corners = domain.protected_points()
        nx = _nearest_multiple(width / h, _grid_module(corners[:, 0], xmin, width))
        ny = _nearest_multiple(height / h, _grid_module(corners[:, 1], ymin, height))
        xs = xmin + (np.arange(nx) + 0.5) * width / nx
        ys = ymin + (np.arange(ny) + 0.5) * height / ny
        gx, gy = np.meshgrid(xs, ys)
        points = np.column_stack([gx.ravel(), gy.ravel()])
        points = points[domain.contains(points)]
        logger.debug(f"🧱 Structured grid {nx}x{ny}, {len(points)} seeds inside the domain")
        return SeedSet(points, rng_seed)

    points = uniform_points(domain.polygon, n, np.random.default_rng(rng_seed))
    return SeedSet(points, rng_seed)


def uniform_points(region: Polygon, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points drawn uniformly inside a polygon by bounding-box rejection"""
    xmin, ymin, xmax, ymax = region.bounds
    chunks = []
    found = 0
    while found < n:
        batch = rng.uniform((xmin, ymin), (xmax, ymax), size=(max(2 * n, 16), 2))
        batch = batch[shapely.contains_xy(region, batch[:, 0], batch[:, 1])]
        chunks.append(batch)
        found += len(batch)
    return np.vstack(chunks)[:n]


def _split_pieces(geom, seed: np.ndarray) -> Tuple[Polygon, List[Polygon]]:
    """Polygon component of a clipping result holding (or nearest to) the seed, plus the rest"""
    if isinstance(geom, Polygon):
        return geom, []
    pieces = [g for g in getattr(geom, "geoms", []) if isinstance(g, Polygon) and g.area > 0.0]
    if not pieces:
        return Polygon(), []
    point = Point(seed)
    keep = min(pieces, key=lambda g: (g.distance(point), -g.area))
    return keep, [g for g in pieces if g is not keep]


def _absorb_leftovers(polys: List[Polygon], leftovers: List[Polygon], tol: float) -> List[Polygon]:
    """Hand each detached clipping piece to the cell sharing most of its boundary"""
    for piece in leftovers:
        best, best_len = None, tol
        for i, poly in enumerate(polys):
            if not poly.intersects(piece):
                continue
            shared = poly.boundary.intersection(piece.boundary).length
            if shared > best_len:
                best, best_len = i, shared
        if best is None:
            logger.warning("⚠️ Detached Voronoi piece has no neighbouring cell; area is lost")
            continue
        merged = polys[best].union(piece)
        if isinstance(merged, Polygon):
            polys[best] = merged
    return polys


def voronoi_cells(region: Polygon, seeds: np.ndarray, tol: float) -> List[np.ndarray]:
    """Voronoi cell of each seed clipped to a (possibly non-convex) region

    Each cell starts as the padded bounding box of the region and is cut by the
    bisectors of the nearest seeds; the neighbour set grows until every seed
    outside it is provably too far away to cut the cell.
    """
    seeds = np.asarray(seeds, dtype=float)
    n = len(seeds)
    minx, miny, maxx, maxy = region.bounds
    pad = 0.1 * float(np.hypot(maxx - minx, maxy - miny))
    box = np.array([[minx - pad, miny - pad], [maxx + pad, miny - pad],
                    [maxx + pad, maxy + pad], [minx - pad, maxy + pad]])
    tree = cKDTree(seeds) if n > 1 else None
    shapely.prepare(region)

    polys: List[Polygon] = []
    leftovers: List[Polygon] = []
    for i in range(n):
        cell = box
        if tree is not None:
            k = min(n, 12)
            while True:
                dists, idx = tree.query(seeds[i], k)
                cell = box
                for j in idx[1:]:
                    normal = seeds[j] - seeds[i]
                    if np.dot(normal, normal) <= tol * tol:
                        raise DegenerateSeedError(f"Seeds {i} and {j} coincide")
                    cell = clip_halfplane(cell, normal, float(np.dot(normal, 0.5 * (seeds[i] + seeds[j]))))
                radius = float(np.linalg.norm(cell - seeds[i], axis=1).max()) if len(cell) else 0.0
                if k >= n or dists[-1] >= 2.0 * radius:
                    break
                k = min(n, 2 * k)

        if len(cell) < 3:
            raise DegenerateSeedError(f"Voronoi cell of seed {i} is empty")
        poly = Polygon(cell)
        if not region.contains(poly):
            poly, rest = _split_pieces(region.intersection(poly), seeds[i])
            leftovers.extend(rest)
        if poly.is_empty or poly.area <= 0.0:
            raise DegenerateSeedError(f"Voronoi cell of seed {i} has zero area after clipping")
        polys.append(poly)

    if leftovers:
        polys = _absorb_leftovers(polys, leftovers, tol)

    cells = []
    for i, poly in enumerate(polys):
        coords = drop_repeated_vertices(polygon_coords(poly), tol)
        if len(coords) < 3 or signed_area(coords) <= 0.0:
            raise DegenerateSeedError(f"Voronoi cell of seed {i} collapsed after clipping")
        cells.append(coords)
    return cells


def mesh_from_cells(cells: Sequence[np.ndarray], tol: float, domain: DomainSpec = None) -> PolyMesh:
    """Merge cell vertices closer than tol into shared nodes and build a conforming mesh"""
    points = np.vstack(cells)
    m = len(points)
    tree = cKDTree(points)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    _, labels = connected_components(graph, directed=False)

    # number nodes by first appearance so the result is order-deterministic
    order = {}
    node_of = np.empty(m, dtype=int)
    first = []
    for i, lab in enumerate(labels):
        if lab not in order:
            order[lab] = len(first)
            first.append(i)
        node_of[i] = order[lab]
    nodes = points[first]

    elements = []
    offset = 0
    for cell in cells:
        ids = node_of[offset:offset + len(cell)]
        offset += len(cell)
        cycle = [int(ids[0])]
        for v in ids[1:]:
            if v != cycle[-1]:
                cycle.append(int(v))
        if len(cycle) > 1 and cycle[0] == cycle[-1]:
            cycle.pop()
        elements.append(cycle)

    mesh = PolyMesh(nodes, elements, domain)
    mesh.conformize()
    return mesh


def bounded_voronoi(domain: DomainSpec, seeds: Union[SeedSet, np.ndarray]) -> PolyMesh:
    """One element per seed: its Voronoi cell clipped to the domain"""
    points = _seed_array(seeds)
    if len(points) == 0:
        raise PreconditionError("At least one seed is required")
    cells = voronoi_cells(domain.polygon, points, domain.merge_tol)
    return mesh_from_cells(cells, domain.merge_tol, domain)


def lloyd_region(region: Polygon, seeds: np.ndarray, max_iter: int, tol: float, merge_tol: float) -> np.ndarray:
    """Move seeds to their clipped-cell centroids until the largest move is below tol * diameter"""
    current = np.array(seeds, dtype=float)
    if max_iter <= 0 or len(current) == 0:
        return current
    diameter = bounding_diameter(np.asarray(region.exterior.coords))
    for it in range(max_iter):
        cells = voronoi_cells(region, current, merge_tol)
        proposed = np.array([polygon_centroid(c) for c in cells])
        # a centroid of a non-convex cell may fall outside the region; keep that seed put
        outside = ~shapely.contains_xy(region, proposed[:, 0], proposed[:, 1])
        proposed[outside] = current[outside]
        shift = float(np.linalg.norm(proposed - current, axis=1).max())
        if shift < tol * diameter:
            logger.debug(f"🔁 Lloyd converged after {it + 1} iterations (max shift {shift:.2e})")
            break
        current = proposed
    return current


def lloyd_smooth(domain: DomainSpec, seeds: Union[SeedSet, np.ndarray],
                 max_iter: int = 100, tol: float = 1e-3) -> SeedSet:
    rng_seed = seeds.rng_seed if isinstance(seeds, SeedSet) else 0
    points = _seed_array(seeds)
    if max_iter <= 0:
        return SeedSet(points.copy(), rng_seed)
    smoothed = lloyd_region(domain.polygon, points, max_iter, tol, domain.merge_tol)
    return SeedSet(smoothed, rng_seed)


def generate_mesh(domain: DomainSpec, n: int, mode: str = "voronoi", rng_seed: int = 0,
                  max_iter: int = 100, tol: float = 1e-3) -> PolyMesh:
    """Seeds, smoothing and tessellation in one call"""
    seeds = generate_seeds(domain, n, mode, rng_seed)
    seeds = lloyd_smooth(domain, seeds, max_iter, tol)
    mesh = bounded_voronoi(domain, seeds)
    logger.info(f"🧱 Generated {mode} mesh: {mesh.n_elements} elements, {mesh.n_nodes} nodes")
    return mesh
