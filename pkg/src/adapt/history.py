"""
📊 Per-iteration record of an adaptive run
"""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from .targets import mesh_tolerance

HISTORY_COLUMNS = [
    "iter", "phase", "n_el", "n_v", "rel_error", "energy_error", "energy", "working_target",
    "n_refined", "n_coarsened", "max_elem_err_trim5", "min_elem_err_trim5", "mean_elem_err",
    "median_elem_err", "q1", "q3",
]
STABILITY_WINDOW = 3


@dataclass
class IterationRecord:
    """State of the mesh after an iteration; n_refined / n_coarsened produced it from the previous one"""
    iter: int
    phase: str
    n_el: int
    n_v: int
    rel_error: float  # percent
    energy_error: float
    energy: float
    working_target: float
    n_refined: int = 0
    n_coarsened: int = 0
    max_elem_err_trim5: float = 0.0
    min_elem_err_trim5: float = 0.0
    mean_elem_err: float = 0.0
    median_elem_err: float = 0.0
    q1: float = 0.0
    q3: float = 0.0
    refined: List[int] = field(default_factory=list, repr=False)
    coarsened: List[int] = field(default_factory=list, repr=False)


@dataclass
class AdaptHistory:
    records: List[IterationRecord] = field(default_factory=list)
    converged: bool = False
    message: str = ""

    def append(self, record: IterationRecord):
        expected = len(self.records)
        if record.iter != expected:
            raise ValueError(f"History expects iteration {expected}, got {record.iter}")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def last(self) -> Optional[IterationRecord]:
        return self.records[-1] if self.records else None

    def phase_records(self, phase: str) -> List[IterationRecord]:
        return [r for r in self.records if r.phase == phase]

    def to_frame(self) -> pd.DataFrame:
        rows = [{k: v for k, v in asdict(r).items() if k in HISTORY_COLUMNS} for r in self.records]
        return pd.DataFrame(rows, columns=HISTORY_COLUMNS)

    def write_csv(self, path: Union[str, Path]):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        logger.debug(f"📊 Wrote {len(self)} history rows to {path}")


def _relative_change(new: float, old: float) -> float:
    if old == 0.0:
        return 0.0 if new == 0.0 else np.inf
    return abs(new - old) / abs(old)


def check_stability(history: Union[AdaptHistory, List[IterationRecord]], mode: str,
                    phase: Optional[str] = None) -> bool:
    """Node count and relative error each moved by at most the mesh tolerance over the last three steps"""
    records = list(history.records if isinstance(history, AdaptHistory) else history)
    if phase is not None:
        records = [r for r in records if r.phase == phase]
    if len(records) < STABILITY_WINDOW + 1:
        return False
    tol = mesh_tolerance(mode) + 1e-12
    window = records[-(STABILITY_WINDOW + 1):]
    for old, new in zip(window[:-1], window[1:]):
        if _relative_change(new.n_v, old.n_v) > tol:
            return False
        if _relative_change(new.rel_error, old.rel_error) > tol:
            return False
    return True
