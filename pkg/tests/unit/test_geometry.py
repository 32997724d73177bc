"""
🧪 Unit tests for planar geometry primitives and the problem domain
"""

import numpy as np
import pytest

from src.core.errors import PreconditionError
from src.mesh.domain import BoundarySegment, BoundaryTag, DomainSpec
from src.mesh.geometry import (
    clip_halfplane,
    convex_hull_indices,
    inside_convex,
    is_simple_polygon,
    nearest_boundary_point,
    project_to_segment,
    signed_area,
)

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


class TestPrimitives:
    """🧪 Areas, projections, clipping"""

    def test_orientation_sign(self):
        assert signed_area(SQUARE) == pytest.approx(1.0)
        assert signed_area(SQUARE[::-1]) == pytest.approx(-1.0)

    def test_projection(self):
        t, dist = project_to_segment(np.array([[0.5, 1.0], [2.0, 0.0]]), SQUARE[0], SQUARE[1])
        assert np.allclose(t, [0.5, 1.0])
        assert np.allclose(dist, [1.0, 1.0])

    def test_clip_halfplane_halves_square(self):
        clipped = clip_halfplane(SQUARE, np.array([1.0, 0.0]), 0.5)
        assert signed_area(clipped) == pytest.approx(0.5)
        assert clipped[:, 0].max() == pytest.approx(0.5)

    def test_clip_away_everything(self):
        assert len(clip_halfplane(SQUARE, np.array([1.0, 0.0]), -1.0)) == 0

    def test_bow_tie_is_not_simple(self):
        assert is_simple_polygon(SQUARE)
        assert not is_simple_polygon(SQUARE[[0, 2, 1, 3]])

    def test_hull_skips_collinear_points(self):
        points = np.vstack([SQUARE, [[0.5, 0.0], [0.5, 0.5]]])
        assert sorted(convex_hull_indices(points)) == [0, 1, 2, 3]

    def test_inside_convex_signed_distance(self):
        depth = inside_convex(np.array([[0.5, 0.5], [0.5, 0.0], [0.5, -0.25]]), SQUARE)
        assert np.allclose(depth, [0.5, 0.0, -0.25])

    def test_nearest_boundary_point(self):
        foot, k, t = nearest_boundary_point(np.array([0.9, 0.5]), SQUARE)
        assert np.allclose(foot, [1.0, 0.5])
        assert k == 1
        assert t == pytest.approx(0.5)


class TestDomain:
    """🧪 Outline, segments and protected points"""

    def test_clockwise_outline_is_reoriented(self):
        domain = DomainSpec(SQUARE[::-1])
        assert domain.area == pytest.approx(1.0)

    def test_self_intersecting_outline_rejected(self):
        with pytest.raises(PreconditionError):
            DomainSpec(SQUARE[[0, 2, 1, 3]])

    def test_from_segments_drops_collinear_breaks(self):
        segments = [
            BoundarySegment((0, 0), (0.5, 0), BoundaryTag.DIRICHLET_Y, (None, 0.0)),
            BoundarySegment((0.5, 0), (1, 0), BoundaryTag.FREE),
            BoundarySegment((1, 0), (1, 1)),
            BoundarySegment((1, 1), (0, 1)),
            BoundarySegment((0, 1), (0, 0)),
        ]
        domain = DomainSpec.from_segments(segments)
        assert len(domain.outline) == 4
        protected = {tuple(p) for p in domain.protected_points()}
        assert (0.5, 0.0) in protected

    def test_open_chain_rejected(self):
        with pytest.raises(PreconditionError):
            DomainSpec.from_segments([BoundarySegment((0, 0), (1, 0)), BoundarySegment((1, 0), (1, 1))])

    def test_segments_at_corner(self, l_problem):
        domain, _ = l_problem
        hits = domain.segments_at(np.array([[0.0, 0.0], [0.5, 0.0], [0.5, 0.5]]))
        assert len(hits[0]) == 2
        assert len(hits[1]) == 1
        assert hits[2] == []

    def test_dirichlet_traction_only_on_free_component(self):
        seg = BoundarySegment((0, 0), (1, 0), BoundaryTag.DIRICHLET_X, (0.0, None), traction=(1.0, -2.0))
        assert np.allclose(seg.applied_traction(), [0.0, -2.0])
        neumann = BoundarySegment((0, 0), (1, 0), BoundaryTag.NEUMANN, (3.0, 4.0))
        assert np.allclose(neumann.applied_traction(), [3.0, 4.0])

    def test_contains(self, l_problem):
        domain, _ = l_problem
        inside = domain.contains(np.array([[0.1, 0.1], [0.5, 0.5], [0.0, 0.5]]), strict=False)
        assert list(inside) == [True, False, True]
