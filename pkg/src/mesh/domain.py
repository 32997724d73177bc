"""
Problem geometry: outline polygon and tagged boundary segments
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
import shapely
from shapely.geometry import Polygon

from ..core.errors import PreconditionError
from .geometry import bounding_diameter, project_to_segment, signed_area

# Node duplication tolerance relative to the domain diameter
MERGE_RELATIVE_TOL = 1e-9


class BoundaryTag(str, Enum):
    DIRICHLET_X = "DirichletX"
    DIRICHLET_Y = "DirichletY"
    DIRICHLET_XY = "DirichletXY"
    NEUMANN = "Neumann"
    FREE = "Free"

    @property
    def fixes_x(self) -> bool:
        return self in (BoundaryTag.DIRICHLET_X, BoundaryTag.DIRICHLET_XY)

    @property
    def fixes_y(self) -> bool:
        return self in (BoundaryTag.DIRICHLET_Y, BoundaryTag.DIRICHLET_XY)

    @property
    def is_dirichlet(self) -> bool:
        return self.fixes_x or self.fixes_y


@dataclass
class BoundarySegment:
    """A straight piece of the outline with its boundary condition

    ``value`` holds prescribed displacements (None for a free component) on
    Dirichlet segments and the traction vector on Neumann segments.
    ``traction`` loads the unconstrained component of a Dirichlet segment.
    """
    start: Tuple[float, float]
    end: Tuple[float, float]
    tag: BoundaryTag = BoundaryTag.FREE
    value: Tuple[Optional[float], Optional[float]] = (None, None)
    traction: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self.tag = BoundaryTag(self.tag)
        self.start = (float(self.start[0]), float(self.start[1]))
        self.end = (float(self.end[0]), float(self.end[1]))
        self.value = tuple(None if v is None else float(v) for v in self.value)
        self.traction = (float(self.traction[0]), float(self.traction[1]))

    @property
    def length(self) -> float:
        return float(np.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1]))

    def applied_traction(self) -> np.ndarray:
        """Traction acting on this segment (zero where the component is prescribed)"""
        if self.tag == BoundaryTag.NEUMANN:
            return np.array([self.value[0] or 0.0, self.value[1] or 0.0])
        t = np.array(self.traction)
        if self.tag.fixes_x:
            t[0] = 0.0
        if self.tag.fixes_y:
            t[1] = 0.0
        return t

    def distance(self, points: np.ndarray) -> np.ndarray:
        _, dist = project_to_segment(points, np.array(self.start), np.array(self.end))
        return dist


@dataclass(eq=False)
class DomainSpec:
    """Possibly non-convex polygonal domain with a boundary segment partition"""
    outline: np.ndarray
    segments: List[BoundarySegment] = field(default_factory=list)

    def __post_init__(self):
        self.outline = np.asarray(self.outline, dtype=float)
        if len(self.outline) < 3:
            raise PreconditionError("Domain outline needs at least three vertices")
        if signed_area(self.outline) < 0.0:
            self.outline = self.outline[::-1].copy()
        if not shapely.is_valid(Polygon(self.outline)):
            raise PreconditionError("Domain outline is not a simple polygon")
        if not self.segments:
            n = len(self.outline)
            self.segments = [
                BoundarySegment(tuple(self.outline[i]), tuple(self.outline[(i + 1) % n]))
                for i in range(n)
            ]

    @classmethod
    def from_segments(cls, segments: Sequence[BoundarySegment]) -> "DomainSpec":
        """Chain segments end-to-start into the outline they partition"""
        if not segments:
            raise PreconditionError("At least one boundary segment is required")
        remaining = list(segments)
        chain = [remaining.pop(0)]
        scale = max(s.length for s in segments)
        while remaining:
            tail = np.array(chain[-1].end)
            for k, seg in enumerate(remaining):
                if np.linalg.norm(np.array(seg.start) - tail) <= 1e-12 * scale:
                    chain.append(remaining.pop(k))
                    break
            else:
                raise PreconditionError("Boundary segments do not form a closed outline")
        points = [np.array(s.start) for s in chain]
        outline = _drop_collinear(np.asarray(points))
        return cls(outline=outline, segments=list(segments))

    @cached_property
    def polygon(self) -> Polygon:
        poly = Polygon(self.outline)
        shapely.prepare(poly)
        return poly

    @property
    def area(self) -> float:
        return signed_area(self.outline)

    @property
    def diameter(self) -> float:
        return bounding_diameter(self.outline)

    @property
    def merge_tol(self) -> float:
        return MERGE_RELATIVE_TOL * self.diameter

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        lo = self.outline.min(axis=0)
        hi = self.outline.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def protected_points(self) -> np.ndarray:
        """Outline corners and segment end points: geometry the mesh must keep"""
        pts = [self.outline]
        pts.append(np.array([s.start for s in self.segments]))
        pts.append(np.array([s.end for s in self.segments]))
        stacked = np.vstack(pts)
        return np.unique(np.round(stacked, 14), axis=0)

    def contains(self, points: np.ndarray, strict: bool = True) -> np.ndarray:
        points = np.atleast_2d(points)
        inside = shapely.contains_xy(self.polygon, points[:, 0], points[:, 1])
        if strict:
            return inside
        on_edge = self.boundary_distance(points) <= self.merge_tol
        return inside | on_edge

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        n = len(self.outline)
        dist = np.full(len(points), np.inf)
        for i in range(n):
            _, d = project_to_segment(points, self.outline[i], self.outline[(i + 1) % n])
            dist = np.minimum(dist, d)
        return dist

    def segments_at(self, points: np.ndarray) -> List[List[int]]:
        """Indices of the segments each point lies on (within the merge tolerance)"""
        points = np.atleast_2d(points)
        tol = self.merge_tol
        hits = [seg.distance(points) <= tol for seg in self.segments]
        return [[k for k, hit in enumerate(hits) if hit[i]] for i in range(len(points))]


def _drop_collinear(points: np.ndarray) -> np.ndarray:
    keep = []
    n = len(points)
    for i in range(n):
        a, b, c = points[i - 1], points[i], points[(i + 1) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        scale = max(np.linalg.norm(b - a) * np.linalg.norm(c - b), 1e-300)
        if abs(cross) > 1e-12 * scale:
            keep.append(b)
    return np.asarray(keep)
