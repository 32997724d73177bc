"""Error estimation: stress recovery, energy-norm errors and coarsening predictions"""

from .energy import (
    ErrorReport,
    element_error,
    error_distribution,
    estimate_errors,
    exact_energy_error,
    global_error,
    predict_patch_error,
)
from .recovery import recover_stress

__all__ = [
    "ErrorReport", "element_error", "error_distribution", "estimate_errors",
    "exact_energy_error", "global_error", "predict_patch_error", "recover_stress",
]
