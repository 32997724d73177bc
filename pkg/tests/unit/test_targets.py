"""
🧪 Unit tests for targets, error bounds and planning arithmetic
"""

import pytest

from src.adapt.targets import (
    AdaptTarget,
    TargetKind,
    check_accuracy,
    element_error_bounds,
    nodes_per_element,
    nodes_to_elements,
    planning_constants,
    planning_count,
    update_working_target,
    within_resource_tolerance,
)
from src.core.errors import PreconditionError


class TestAdaptTarget:
    """🧪 Target validation"""

    def test_kinds(self):
        assert AdaptTarget.rel_error(3).kind == TargetKind.REL_ERROR
        assert AdaptTarget.elements(500).is_resource
        assert str(AdaptTarget.nodes(800)) == "800 nodes"

    @pytest.mark.parametrize("percent", [0.0, 100.0, -1.0])
    def test_error_target_range(self, percent):
        with pytest.raises(PreconditionError):
            AdaptTarget.rel_error(percent)

    def test_count_target_positive(self):
        with pytest.raises(PreconditionError):
            AdaptTarget.elements(0)


class TestErrorBounds:
    """🧪 Even split of the global target"""

    def test_reference_values(self):
        bounds = element_error_bounds(0.03, 1000)
        assert bounds.e_targ == pytest.approx(1.8e-6)
        assert bounds.local == pytest.approx(9.48683e-4, rel=1e-5)
        assert bounds.upper == pytest.approx(1.89737e-3, rel=1e-5)
        assert bounds.lower == pytest.approx(4.74342e-4, rel=1e-5)

    def test_invalid_inputs(self):
        with pytest.raises(PreconditionError):
            element_error_bounds(0.03, 0)
        with pytest.raises(PreconditionError):
            element_error_bounds(0.0, 10)


class TestWorkingTarget:
    """🧪 Retargeting and the accuracy check"""

    def test_overshoot_and_undershoot(self):
        assert update_working_target(3.0, 3.3) == pytest.approx(2.85)
        assert update_working_target(3.0, 2.7) == pytest.approx(3.15)

    def test_accuracy_tolerance_by_mesh_type(self):
        assert check_accuracy(3.02, 3.0, "structured")
        assert not check_accuracy(3.1, 3.0, "structured")
        assert check_accuracy(3.05, 3.0, "voronoi")

    def test_resource_tolerance(self):
        assert within_resource_tolerance(1009, 1000)
        assert not within_resource_tolerance(1020, 1000)


class TestPlanning:
    """🧪 Constants, counts and the node model"""

    def test_constants(self):
        assert (planning_constants("structured").n_refine, planning_constants("structured").n_coarsen) == (4, 4)
        assert (planning_constants("voronoi").n_refine, planning_constants("voronoi").n_coarsen) == (5, 3)
        with pytest.raises(PreconditionError):
            planning_constants("hexagonal")

    def test_planning_count_rounding(self):
        assert planning_count(0.0) == 0
        assert planning_count(0.3) == 1
        assert planning_count(2.5) == 3
        assert planning_count(166.67) == 167

    def test_voronoi_nodes_to_elements(self):
        assert nodes_to_elements(1000, "voronoi") == 653

    def test_structured_nodes_to_elements(self):
        expected = int(1000 / (2.2763 * 1000 ** -0.102) + 0.5)
        assert nodes_to_elements(1000, "structured") == expected

    def test_model_switches_above_one_thousand(self):
        assert nodes_per_element(2000, "voronoi") == pytest.approx(2.0871 * 2000 ** -0.044)

    def test_too_few_nodes(self):
        with pytest.raises(PreconditionError):
            nodes_to_elements(2, "voronoi")
