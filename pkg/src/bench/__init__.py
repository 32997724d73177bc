"""Benchmarks, run artifacts and the command line"""

from .convergence import convergence_rate, uniform_refinement_run
from .outputs import SnapshotWriter, emit_outputs, write_svg
from .problems import (
    BenchmarkSpec,
    build_l_domain,
    build_manufactured,
    build_patch_test,
    build_punch,
    build_uniaxial,
)

__all__ = [
    "BenchmarkSpec", "SnapshotWriter", "build_l_domain", "build_manufactured", "build_patch_test",
    "build_punch", "build_uniaxial", "convergence_rate", "emit_outputs", "uniform_refinement_run",
    "write_svg",
]
