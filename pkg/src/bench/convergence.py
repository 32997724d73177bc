"""
📉 Uniform refinement studies
Reference curves for the adaptive runs and the manufactured-solution rate check
"""

from typing import Optional

import numpy as np
import pandas as pd
from loguru import logger

from ..core.errors import PreconditionError
from ..estimation.energy import estimate_errors, exact_energy_error
from ..mesh.generation import generate_mesh
from ..mesh.refine import uniform_refine
from ..vem.assembly import assemble_and_solve
from ..vem.material import MaterialParams, constitutive_matrix
from .problems import BenchmarkSpec, build_manufactured

CONVERGENCE_COLUMNS = ["level", "n_el", "n_v", "h", "energy_error", "rel_error", "exact_error"]


def uniform_refinement_run(bench: str, mode: str = "structured", levels: int = 4, initial_elements: int = 16,
                           material: Optional[MaterialParams] = None, rng_seed: int = 0,
                           lloyd_max_iter: int = 100) -> pd.DataFrame:
    """Solve on a mesh and its uniform refinements; one row per level

    ``bench`` is a benchmark name or ``manufactured``; only the latter fills
    the ``exact_error`` column. ``rel_error`` is in percent.
    """
    if levels < 1:
        raise PreconditionError(f"At least one level is required, got {levels}")
    material = material or MaterialParams()
    D = constitutive_matrix(material)
    stress_field = None
    if bench == "manufactured":
        domain, loads, stress_field = build_manufactured(material)
    else:
        domain, loads = BenchmarkSpec.named(bench).build(1)

    mesh = generate_mesh(domain, initial_elements, mode, rng_seed, max_iter=lloyd_max_iter)
    rows = []
    for level in range(levels):
        if level > 0:
            uniform_refine(mesh, mode, rng_seed + level)
        solution = assemble_and_solve(mesh, domain, material, loads)
        report = estimate_errors(mesh, solution, D, predictions=False)
        exact = exact_energy_error(mesh, solution, stress_field, D) if stress_field is not None else np.nan
        rows.append({
            "level": level,
            "n_el": mesh.n_elements,
            "n_v": mesh.n_used_nodes,
            "h": float(np.sqrt(domain.area / mesh.n_elements)),
            "energy_error": report.energy_error,
            "rel_error": 100.0 * report.rel_error,
            "exact_error": exact,
        })
        logger.info(f"📉 Level {level}: {mesh.n_elements} elements, ||e|| {report.energy_error:.4e}")
    return pd.DataFrame(rows, columns=CONVERGENCE_COLUMNS)


def convergence_rate(frame: pd.DataFrame, column: str = "exact_error") -> float:
    """Least-squares slope of log(error) against log(h)"""
    data = frame[["h", column]].dropna()
    data = data[data[column] > 0.0]
    if len(data) < 2:
        raise PreconditionError(f"Need two positive '{column}' values to fit a rate")
    slope, _ = np.polyfit(np.log(data["h"].to_numpy()), np.log(data[column].to_numpy()), 1)
    return float(slope)


def loglog_slope(n_v, errors) -> float:
    """Slope of log(error) against log(node count); more negative is better"""
    n_v = np.asarray(n_v, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = (n_v > 0) & (errors > 0)
    if keep.sum() < 2:
        raise PreconditionError("Need two positive points to fit a slope")
    slope, _ = np.polyfit(np.log(n_v[keep]), np.log(errors[keep]), 1)
    return float(slope)
