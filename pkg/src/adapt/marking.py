"""
🎯 Selection of elements to refine and patches to coarsen
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Set

import numpy as np

from ..estimation.energy import ErrorReport
from ..mesh.polymesh import PolyMesh
from .targets import ErrorBounds, PlanningConstants, planning_count

Eligibility = Callable[[int], bool]


@dataclass
class Marks:
    refine: List[int] = field(default_factory=list)
    coarsen: List[int] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.refine and not self.coarsen


def _by_error_descending(norms: np.ndarray, ids) -> List[int]:
    ids = np.asarray(list(ids), dtype=int)
    if len(ids) == 0:
        return []
    order = np.lexsort((ids, -norms[ids]))
    return [int(i) for i in ids[order]]


def _by_prediction_ascending(predictions: np.ndarray, nodes) -> List[int]:
    nodes = np.asarray(list(nodes), dtype=int)
    if len(nodes) == 0:
        return []
    order = np.lexsort((nodes, predictions[nodes]))
    return [int(v) for v in nodes[order]]


def coarsen_candidates(mesh: PolyMesh, report: ErrorReport, threshold: float,
                       eligible: Optional[Eligibility], exclude: Set[int]) -> List[int]:
    """Nodes with prediction below threshold whose patch avoids the excluded elements, ascending"""
    table = mesh.node_elements()
    predictions = report.patch_prediction
    below = [v for v in range(mesh.n_nodes)
             if table[v] and predictions[v] < threshold and not exclude.intersection(table[v])]
    ordered = _by_prediction_ascending(predictions, below)
    if eligible is None:
        return ordered
    return [v for v in ordered if eligible(v)]


def mark_for_error_target(mesh: PolyMesh, report: ErrorReport, bounds: ErrorBounds,
                          eligible: Optional[Eligibility] = None) -> Marks:
    """Refine above the upper bound; coarsen eligible patches predicted below it"""
    norms = report.element_norms
    refine = _by_error_descending(norms, np.where(norms > bounds.upper)[0])
    coarsen = coarsen_candidates(mesh, report, bounds.upper, eligible, set(refine))
    return Marks(refine, coarsen)


def greedy_disjoint(mesh: PolyMesh, nodes: List[int], limit: Optional[int] = None,
                    eligible: Optional[Eligibility] = None) -> List[int]:
    """Keep nodes in order while their patches do not share an element with an earlier pick"""
    table = mesh.node_elements()
    taken: Set[int] = set()
    picked = []
    for v in nodes:
        if limit is not None and len(picked) >= limit:
            break
        patch = set(table[v])
        if patch & taken:
            continue
        if eligible is not None and not eligible(v):
            continue
        taken |= patch
        picked.append(v)
    return picked


def plan_resource_phase1(mesh: PolyMesh, n_el: int, n_targ: int, constants: PlanningConstants,
                         report: ErrorReport, eligible: Optional[Eligibility] = None) -> Marks:
    """Move the element count toward n_targ by uniform or partial refinement / coarsening"""
    norms = report.element_norms
    if n_el < n_targ:
        if n_targ / n_el >= constants.n_refine:
            return Marks(refine=list(range(n_el)))
        count = planning_count((n_targ - n_el) / (constants.n_refine - 1))
        return Marks(refine=_by_error_descending(norms, range(n_el))[:count])
    if n_el > n_targ:
        candidates = coarsen_candidates(mesh, report, np.inf, None, set())
        if n_el / n_targ >= constants.n_coarsen:
            return Marks(coarsen=greedy_disjoint(mesh, candidates, eligible=eligible))
        count = planning_count((n_el - n_targ) / (constants.n_coarsen - 1))
        return Marks(coarsen=greedy_disjoint(mesh, candidates, count, eligible))
    return Marks()


def balance_marks(mesh: PolyMesh, refine: List[int], coarsen: List[int], constants: PlanningConstants,
                  target_delta: int = 0) -> Marks:
    """Trim refine / coarsen lists so the element count changes by about target_delta

    Coarsening a patch removes len(patch) - 1 elements, so boundary and
    hanging-node patches are counted at their real size. Patches are taken in
    the given order and kept while they bring the removal closer to what the
    kept refinements add.
    """
    table = mesh.node_elements()
    per_refine = constants.n_refine - 1
    removal = {v: len(table[v]) - 1 for v in coarsen}
    n_add = per_refine * len(refine)
    n_mod = min(n_add, sum(removal.values()) + target_delta)
    refine = list(refine[:planning_count(n_mod / per_refine)])

    need = per_refine * len(refine) - target_delta
    kept: List[int] = []
    removed = 0
    for v in coarsen:
        if abs(removed + removal[v] - need) < abs(removed - need):
            kept.append(v)
            removed += removal[v]

    delta = per_refine * len(refine) - removed
    while refine and abs(delta - per_refine - target_delta) < abs(delta - target_delta):
        refine.pop()
        delta -= per_refine
    return Marks(refine, kept)


def plan_resource_phase2(mesh: PolyMesh, report: ErrorReport, bounds: ErrorBounds,
                         constants: PlanningConstants, eligible: Optional[Eligibility] = None,
                         n_targ: Optional[int] = None) -> Marks:
    """Error-driven marks trimmed so the element count stays put (or drifts back to n_targ)"""
    marks = mark_for_error_target(mesh, report, bounds, eligible)
    coarsen = greedy_disjoint(mesh, marks.coarsen)
    target_delta = 0 if n_targ is None else int(n_targ) - mesh.n_elements
    return balance_marks(mesh, marks.refine, coarsen, constants, target_delta)
