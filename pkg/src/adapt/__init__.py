"""Adaptation module: targets, marking strategies and the remeshing loop"""

from .driver import AdaptCaps, AdaptiveDriver, AdaptResult, run_adaptation
from .history import AdaptHistory, IterationRecord, check_stability
from .marking import Marks, mark_for_error_target, plan_resource_phase1, plan_resource_phase2
from .targets import (
    AdaptTarget,
    PlanningConstants,
    TargetKind,
    check_accuracy,
    element_error_bounds,
    nodes_to_elements,
    planning_constants,
    update_working_target,
)

__all__ = [
    "AdaptCaps", "AdaptHistory", "AdaptResult", "AdaptTarget", "AdaptiveDriver", "IterationRecord",
    "Marks", "PlanningConstants", "TargetKind", "check_accuracy", "check_stability",
    "element_error_bounds", "mark_for_error_target", "nodes_to_elements", "plan_resource_phase1",
    "plan_resource_phase2", "planning_constants", "run_adaptation", "update_working_target",
]
