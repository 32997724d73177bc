"""
🔁 Adaptive remeshing loop

solve -> recover -> estimate -> terminate? -> mark -> coarsen -> refine, for a
relative error target or for an element / node count target.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from loguru import logger

from ..estimation.energy import ErrorReport, error_distribution, estimate_errors
from ..mesh.coarsen import coarsen_batch, patch_eligible
from ..mesh.domain import DomainSpec
from ..mesh.polymesh import PolyMesh
from ..mesh.refine import REFINE_LLOYD_MAX_ITER, REFINE_LLOYD_TOL, refine_batch
from ..vem.assembly import Loads, assemble_and_solve
from ..vem.material import MaterialParams, constitutive_matrix
from .history import AdaptHistory, IterationRecord, check_stability
from .marking import Marks, mark_for_error_target, plan_resource_phase1, plan_resource_phase2
from .targets import (
    AdaptTarget,
    TargetKind,
    check_accuracy,
    element_error_bounds,
    mesh_tolerance,
    nodes_to_elements,
    planning_constants,
    round_half_up,
    update_working_target,
    within_resource_tolerance,
)

DEFAULT_MAX_ITER = 50
RETARGET_INTERVAL = 3
PHASE1_STAGNATION = 3

Snapshot = Callable[[int, PolyMesh, ErrorReport], None]


@dataclass
class AdaptCaps:
    max_iter: int = DEFAULT_MAX_ITER
    refine_lloyd_max_iter: int = REFINE_LLOYD_MAX_ITER
    refine_lloyd_tol: float = REFINE_LLOYD_TOL


@dataclass
class AdaptResult:
    mesh: PolyMesh
    history: AdaptHistory
    report: Optional[ErrorReport] = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.history.converged


def iteration_seed(rng_seed: int, iteration: int) -> int:
    return int(np.random.SeedSequence([rng_seed, iteration]).generate_state(1)[0])


class AdaptiveDriver:
    """One adaptive run; state lives on the instance so phases can be inspected in tests"""

    def __init__(self, mesh: PolyMesh, domain: Optional[DomainSpec], material: MaterialParams,
                 loads: Loads, target: AdaptTarget, mode: str, rng_seed: int = 0,
                 caps: Optional[AdaptCaps] = None, snapshot: Optional[Snapshot] = None):
        self.mesh = mesh.copy()
        self.domain = domain if domain is not None else mesh.domain
        self.material = material
        self.D = constitutive_matrix(material)
        self.loads = loads
        self.target = target
        self.mode = mode
        self.rng_seed = rng_seed
        self.caps = caps or AdaptCaps()
        self.snapshot = snapshot
        self.constants = planning_constants(mode)
        self.history = AdaptHistory()

        self.working = float(target.value) if target.kind == TargetKind.REL_ERROR else np.nan
        self.last_retarget = -RETARGET_INTERVAL
        self.element_target = self._initial_element_target()
        self.phase = "error" if target.kind == TargetKind.REL_ERROR else "phase1"
        self.stagnant = 0
        self.count_reached = False
        self.best_gap = np.inf

    def _initial_element_target(self) -> int:
        if self.target.kind == TargetKind.ELEMENTS:
            return int(self.target.value)
        if self.target.kind == TargetKind.NODES:
            return nodes_to_elements(int(self.target.value), self.mode)
        return 0

    def eligible(self, node_id: int) -> bool:
        return patch_eligible(self.mesh, self.domain, node_id)

    # ------------------------------------------------------------------ loop

    def run(self) -> AdaptResult:
        logger.info(f"🔁 Adapting {self.mesh.n_elements} {self.mode} elements toward {self.target}")
        applied = Marks()
        report = None
        for it in range(self.caps.max_iter + 1):
            solution = assemble_and_solve(self.mesh, self.domain, self.material, self.loads)
            report = estimate_errors(self.mesh, solution, self.D)
            self._advance_phase()
            record = self._record(it, report, applied)
            self.history.append(record)
            if self.snapshot is not None:
                self.snapshot(it, self.mesh, report)
            logger.info(f"🔁 Iteration {it} [{record.phase}]: {record.n_el} elements, {record.n_v} nodes, "
                        f"error {record.rel_error:.4f}%")

            if self._finished(report):
                self.history.converged = True
                break
            if it == self.caps.max_iter:
                self.history.message = f"Iteration cap {self.caps.max_iter} reached before convergence"
                logger.warning(f"⚠️ {self.history.message}")
                break

            marks = self._mark(report)
            applied = self._apply(marks, iteration_seed(self.rng_seed, it))

        if self.history.converged:
            self.history.message = f"Converged after {len(self.history) - 1} iterations"
            logger.success(f"✅ {self.history.message}")
        return AdaptResult(self.mesh, self.history, report)

    def _record(self, it: int, report: ErrorReport, applied: Marks) -> IterationRecord:
        stats = error_distribution(report)
        working = self.working if self.target.kind == TargetKind.REL_ERROR else float(self.element_target)
        return IterationRecord(
            iter=it, phase=self.phase, n_el=self.mesh.n_elements, n_v=self.mesh.n_used_nodes,
            rel_error=100.0 * report.rel_error, energy_error=report.energy_error, energy=report.energy,
            working_target=working, n_refined=len(applied.refine), n_coarsened=len(applied.coarsen),
            refined=list(applied.refine), coarsened=list(applied.coarsen), **stats,
        )

    # ---------------------------------------------------------------- phases

    def _advance_phase(self):
        """Resource runs: settle the phase of the current mesh before it is recorded"""
        if self.target.kind == TargetKind.REL_ERROR:
            return
        n_el, n_v = self.mesh.n_elements, self.mesh.n_used_nodes
        if self.phase == "phase1":
            if self._resource_met(n_el, n_v):
                self.count_reached = True
                self._enter_phase2("target count reached")
            elif self._phase1_stagnant(n_el):
                self._enter_phase2(f"count stalled at {n_el} elements / {n_v} nodes")
        elif self.target.kind == TargetKind.NODES and within_resource_tolerance(n_el, self.element_target):
            self._rescale_for_nodes(n_v)

    def _rescale_for_nodes(self, n_v: int) -> bool:
        """Rescale the element target by the observed node ratio; False when n_v is already in band"""
        if within_resource_tolerance(n_v, self.target.value, mesh_tolerance(self.mode)):
            return False
        rescaled = max(1, round_half_up(self.element_target * self.target.value / n_v))
        if rescaled != self.element_target:
            logger.info(f"🎯 Element target {self.element_target} -> {rescaled} to match {int(self.target.value)} nodes")
            self.element_target = rescaled
            self.best_gap = np.inf
            self.stagnant = 0
        return True

    def _resource_met(self, n_el: int, n_v: int) -> bool:
        if not within_resource_tolerance(n_el, self.element_target):
            return False
        if self.target.kind == TargetKind.NODES and self._rescale_for_nodes(n_v):
            return False
        return True

    def _count_in_band(self, n_el: int, n_v: int) -> bool:
        if self.target.kind == TargetKind.NODES:
            return within_resource_tolerance(n_v, self.target.value, mesh_tolerance(self.mode))
        return within_resource_tolerance(n_el, self.element_target)

    def _phase1_stagnant(self, n_el: int) -> bool:
        """No iteration has brought the count closer to its target than the best so far"""
        gap = abs(n_el - self.element_target)
        if gap < self.best_gap:
            self.best_gap = gap
            self.stagnant = 0
        else:
            self.stagnant += 1
        return self.stagnant >= PHASE1_STAGNATION

    def _enter_phase2(self, reason: str):
        logger.info(f"🎯 Phase 1 complete: {reason}")
        self.phase = "phase2"

    # ----------------------------------------------------------- termination

    def _finished(self, report: ErrorReport) -> bool:
        if self.target.kind == TargetKind.REL_ERROR:
            return self._error_target_finished(report)
        return self._resource_finished()

    def _error_target_finished(self, report: ErrorReport) -> bool:
        if not check_stability(self.history, self.mode):
            return False
        measured = 100.0 * report.rel_error
        if check_accuracy(measured, self.target.value, self.mode):
            return True
        it = self.history.last.iter
        if it - self.last_retarget >= RETARGET_INTERVAL:
            new = update_working_target(self.working, measured)
            logger.info(f"🎯 Stable but inaccurate ({measured:.4f}%): working target {self.working:.4f}% -> {new:.4f}%")
            self.working = new
            self.last_retarget = it
        return False

    def _resource_finished(self) -> bool:
        if self.phase != "phase2":
            return False
        last = self.history.last
        if self.count_reached and not self._count_in_band(last.n_el, last.n_v):
            return False
        return check_stability(self.history, self.mode, phase="phase2")

    # --------------------------------------------------------------- marking

    def _mark(self, report: ErrorReport) -> Marks:
        n_el = self.mesh.n_elements
        if self.target.kind == TargetKind.REL_ERROR:
            bounds = element_error_bounds(self.working / 100.0 * report.energy, n_el)
            return mark_for_error_target(self.mesh, report, bounds, self.eligible)
        drifted = self.count_reached and not within_resource_tolerance(n_el, self.element_target)
        if self.phase == "phase1" or drifted:
            return plan_resource_phase1(self.mesh, n_el, self.element_target, self.constants, report, self.eligible)
        bounds = element_error_bounds(report.energy_error, n_el)
        return plan_resource_phase2(self.mesh, report, bounds, self.constants, self.eligible, self.element_target)

    def _apply(self, marks: Marks, seed: int) -> Marks:
        if marks.empty:
            logger.debug("🔁 No marks: recording a no-op iteration")
            return marks
        remap, coarsened = coarsen_batch(self.mesh, marks.coarsen, self.domain)
        refine_ids = [int(remap[e]) for e in marks.refine if remap[e] >= 0]
        refined = refine_batch(self.mesh, refine_ids, self.mode, seed,
                               self.caps.refine_lloyd_max_iter, self.caps.refine_lloyd_tol)
        logger.debug(f"🔁 {len(coarsened)} patches coarsened, {len(refined)} elements refined")
        return Marks(refine=sorted(refined), coarsen=coarsened)


def run_adaptation(mesh: PolyMesh, domain: Optional[DomainSpec], material: MaterialParams, loads: Loads,
                   target: AdaptTarget, mode: str, rng_seed: int = 0, caps: Optional[AdaptCaps] = None,
                   snapshot: Optional[Snapshot] = None) -> Tuple[PolyMesh, AdaptHistory]:
    """Adapt a copy of mesh toward target; the history flags whether the run converged"""
    result = AdaptiveDriver(mesh, domain, material, loads, target, mode, rng_seed, caps, snapshot).run()
    return result.mesh, result.history
