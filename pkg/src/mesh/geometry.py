"""
Planar geometry primitives shared by the mesh modules

Polygons are (n, 2) float arrays listed counter-clockwise without a repeated
closing vertex.
"""

from typing import Optional, Tuple

import numpy as np
import shapely
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist
from shapely.geometry import Polygon
from shapely.geometry.polygon import orient


def signed_area(coords: np.ndarray) -> float:
    """Shoelace area, positive for counter-clockwise cycles"""
    x = coords[:, 0]
    y = coords[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_centroid(coords: np.ndarray) -> np.ndarray:
    """Area-weighted centroid of a simple polygon"""
    x = coords[:, 0]
    y = coords[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    if area == 0.0:
        return coords.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return np.array([cx, cy])


def polygon_diameter(coords: np.ndarray) -> float:
    """Largest vertex-to-vertex distance"""
    if len(coords) < 2:
        return 0.0
    return float(pdist(coords).max())


def bounding_diameter(coords: np.ndarray) -> float:
    """Diagonal of the axis-aligned bounding box"""
    span = coords.max(axis=0) - coords.min(axis=0)
    return float(np.hypot(span[0], span[1]))


def project_to_segment(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Segment parameter t (clamped to [0, 1]) and distance of each point to segment ab"""
    points = np.atleast_2d(points)
    ab = b - a
    length2 = float(np.dot(ab, ab))
    if length2 == 0.0:
        return np.zeros(len(points)), np.linalg.norm(points - a, axis=1)
    t = np.clip((points - a) @ ab / length2, 0.0, 1.0)
    foot = a + t[:, None] * ab
    return t, np.linalg.norm(points - foot, axis=1)


def clip_halfplane(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon to {x : normal . x <= offset}"""
    if len(poly) == 0:
        return poly
    side = poly @ normal - offset
    if np.all(side <= 0.0):
        return poly
    if np.all(side > 0.0):
        return poly[:0]
    out = []
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        p, q = poly[i], poly[j]
        sp, sq = side[i], side[j]
        if sp <= 0.0:
            out.append(p)
        if (sp <= 0.0) != (sq <= 0.0):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.asarray(out)


def drop_repeated_vertices(coords: np.ndarray, tol: float) -> np.ndarray:
    """Remove consecutive vertices closer than tol (cyclically)"""
    if len(coords) == 0:
        return coords
    keep = [coords[0]]
    for p in coords[1:]:
        if np.linalg.norm(p - keep[-1]) > tol:
            keep.append(p)
    if len(keep) > 1 and np.linalg.norm(keep[0] - keep[-1]) <= tol:
        keep.pop()
    return np.asarray(keep)


def polygon_coords(poly: Polygon) -> np.ndarray:
    """Counter-clockwise exterior coordinates without the closing vertex"""
    ccw = orient(poly, sign=1.0)
    return np.asarray(ccw.exterior.coords)[:-1, :2]


def is_simple_polygon(coords: np.ndarray) -> bool:
    """True for a non-self-intersecting ring with at least three vertices"""
    if len(coords) < 3:
        return False
    return bool(shapely.is_valid(Polygon(coords)))


def convex_hull_indices(points: np.ndarray) -> np.ndarray:
    """Indices of the strictly convex hull vertices, counter-clockwise"""
    hull = ConvexHull(points)
    return np.asarray(hull.vertices)


def inside_convex(points: np.ndarray, hull: np.ndarray) -> np.ndarray:
    """Signed distance of each point to the boundary of a CCW convex polygon (positive inside)"""
    points = np.atleast_2d(points)
    edges = np.roll(hull, -1, axis=0) - hull
    lengths = np.linalg.norm(edges, axis=1)
    normals = np.column_stack([-edges[:, 1], edges[:, 0]]) / lengths[:, None]
    dist = (points[:, None, :] - hull[None, :, :]) * normals[None, :, :]
    return dist.sum(axis=2).min(axis=1)


def nearest_boundary_point(point: np.ndarray, hull: np.ndarray) -> Tuple[np.ndarray, int, float]:
    """Closest point on the boundary of a closed polygon; also returns edge index and parameter"""
    best: Optional[Tuple[np.ndarray, int, float]] = None
    best_dist = np.inf
    n = len(hull)
    for k in range(n):
        a, b = hull[k], hull[(k + 1) % n]
        t, dist = project_to_segment(point[None, :], a, b)
        if dist[0] < best_dist:
            best_dist = dist[0]
            best = (a + t[0] * (b - a), k, float(t[0]))
    return best
