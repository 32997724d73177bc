"""
vem-adapt - Adaptive Virtual Element Meshes for Plane Elasticity
================================================================

First-order virtual elements on arbitrary polygonal meshes, driven to a
relative energy-error, element-count or node-count target by refining and
coarsening elements between solves.

Components:
- Core: configuration, errors and logging
- Mesh: polygonal mesh, Voronoi generation, refinement and coarsening
- VEM: element matrices, assembly and the sparse solve
- Estimation: stress recovery and energy-norm errors
- Adapt: targets, marking and the remeshing loop
- Bench: benchmark problems, outputs and the command line
- UI: rich console summaries
"""

__version__ = "1.0.0"

from .adapt.driver import run_adaptation
from .core.config import AdaptConfig
from .mesh.polymesh import PolyMesh
from .vem.assembly import assemble_and_solve

__all__ = [
    "AdaptConfig",
    "PolyMesh",
    "assemble_and_solve",
    "run_adaptation",
    "__version__",
]
