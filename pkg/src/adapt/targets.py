"""
🎯 Adaptation targets, planning constants and the element-level error bounds
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

from ..core.errors import PreconditionError


class TargetKind(str, Enum):
    REL_ERROR = "rel_error"
    ELEMENTS = "elements"
    NODES = "nodes"


@dataclass(frozen=True)
class AdaptTarget:
    """What the driver aims for: a relative error in percent or an element / node count"""
    kind: TargetKind
    value: float

    def __post_init__(self):
        object.__setattr__(self, "kind", TargetKind(self.kind))
        if self.kind == TargetKind.REL_ERROR:
            if not 0.0 < self.value < 100.0:
                raise PreconditionError(f"Relative error target must lie in (0, 100) percent, got {self.value}")
        elif self.value < 1:
            raise PreconditionError(f"Count target must be at least 1, got {self.value}")

    @classmethod
    def rel_error(cls, percent: float) -> "AdaptTarget":
        return cls(TargetKind.REL_ERROR, float(percent))

    @classmethod
    def elements(cls, count: int) -> "AdaptTarget":
        return cls(TargetKind.ELEMENTS, int(count))

    @classmethod
    def nodes(cls, count: int) -> "AdaptTarget":
        return cls(TargetKind.NODES, int(count))

    @property
    def is_resource(self) -> bool:
        return self.kind != TargetKind.REL_ERROR

    def __str__(self) -> str:
        if self.kind == TargetKind.REL_ERROR:
            return f"{self.value:g}% relative error"
        return f"{int(self.value)} {self.kind.value}"


@dataclass(frozen=True)
class PlanningConstants:
    n_refine: int
    n_coarsen: int


PLANNING_CONSTANTS: Dict[str, PlanningConstants] = {
    "structured": PlanningConstants(n_refine=4, n_coarsen=4),
    "voronoi": PlanningConstants(n_refine=5, n_coarsen=3),
}

# nodes-per-element fit r = a * n_v**b, keyed by (mesh type, n_v <= 1000)
NODE_MODEL: Dict[Tuple[str, bool], Tuple[float, float]] = {
    ("structured", True): (2.2763, -0.102),
    ("structured", False): (1.5032, -0.04),
    ("voronoi", True): (2.2225, -0.054),
    ("voronoi", False): (2.0871, -0.044),
}
NODE_MODEL_SPLIT = 1000

# relative tolerance of the stability and accuracy checks
MESH_TOLERANCE: Dict[str, float] = {"structured": 0.01, "voronoi": 0.02}
RESOURCE_TOLERANCE = 0.01


def planning_constants(mode: str) -> PlanningConstants:
    try:
        return PLANNING_CONSTANTS[mode]
    except KeyError:
        raise PreconditionError(f"Unknown mesh mode '{mode}'") from None


def mesh_tolerance(mode: str) -> float:
    try:
        return MESH_TOLERANCE[mode]
    except KeyError:
        raise PreconditionError(f"Unknown mesh mode '{mode}'") from None


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def planning_count(value: float) -> int:
    """Round half up with a floor of one while the raw count is positive"""
    if value <= 0.0:
        return 0
    return max(1, round_half_up(value))


def node_model(n_v: int, mode: str) -> Tuple[float, float]:
    return NODE_MODEL[(mode, n_v <= NODE_MODEL_SPLIT)]


def nodes_per_element(n_v: int, mode: str) -> float:
    a, b = node_model(n_v, mode)
    return a * n_v ** b


def nodes_to_elements(n_v_target: int, mode: str) -> int:
    """Element count expected to carry n_v_target nodes for the given mesh type"""
    if n_v_target < 3:
        raise PreconditionError(f"Node target must be at least 3, got {n_v_target}")
    planning_constants(mode)
    return max(1, round_half_up(n_v_target / nodes_per_element(n_v_target, mode)))


@dataclass(frozen=True)
class ErrorBounds:
    e_targ: float
    local: float
    upper: float
    lower: float


def element_error_bounds(target_error: float, n_el: int) -> ErrorBounds:
    """Even split of the squared global target over n_el elements and its [0.5, 2] band"""
    if n_el < 1:
        raise PreconditionError(f"Element count must be at least 1, got {n_el}")
    if not target_error > 0.0:
        raise PreconditionError(f"Target error must be positive, got {target_error}")
    e_targ = 2.0 * target_error ** 2 / n_el
    local = math.sqrt(e_targ / 2.0)
    return ErrorBounds(e_targ, local, 2.0 * local, 0.5 * local)


def update_working_target(working: float, measured: float) -> float:
    """Subtract half of the current discrepancy from the working target"""
    return working - (measured - working) / 2.0


def check_accuracy(measured: float, target: float, mode: str) -> bool:
    return abs(measured - target) / target <= mesh_tolerance(mode) + 1e-12


def within_resource_tolerance(count: float, target: float, tol: float = RESOURCE_TOLERANCE) -> bool:
    return abs(count - target) / target <= tol + 1e-12
