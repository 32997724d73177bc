"""
🧪 Unit tests for the adaptation history and the stability check
"""

import pandas as pd
import pytest

from src.adapt.history import HISTORY_COLUMNS, AdaptHistory, IterationRecord, check_stability


def _history(n_v, rel, phase="error") -> AdaptHistory:
    history = AdaptHistory()
    for it, (nodes, err) in enumerate(zip(n_v, rel)):
        history.append(IterationRecord(it, phase, nodes, nodes, err, 0.1, 1.0, 3.0))
    return history


class TestStability:
    """🧪 Three-step window on node count and relative error"""

    def test_needs_four_records(self):
        assert not check_stability(_history([100, 100, 100], [3.0, 3.0, 3.0]), "structured")

    def test_steady_run(self):
        history = _history([50, 100, 100.5, 100.2, 100.9], [9.0, 3.0, 3.01, 2.99, 3.0])
        assert check_stability(history, "structured")

    def test_tolerance_depends_on_mesh_type(self):
        history = _history([100, 101.5, 101.5, 101.5], [3.0, 3.0, 3.0, 3.0])
        assert not check_stability(history, "structured")
        assert check_stability(history, "voronoi")

    def test_error_jump_breaks_stability(self):
        history = _history([100, 100, 100, 100], [3.0, 3.0, 3.0, 2.5])
        assert not check_stability(history, "voronoi")

    def test_phase_filter(self):
        history = _history([10, 40, 160], [9.0, 6.0, 4.0], phase="phase1")
        for it, nodes in enumerate([200, 200, 200, 200], start=3):
            history.append(IterationRecord(it, "phase2", nodes, nodes, 3.0, 0.1, 1.0, 3.0))
        assert check_stability(history, "structured", phase="phase2")
        assert not check_stability(history, "structured", phase="phase1")


class TestHistory:
    """🧪 Record keeping and CSV output"""

    def test_iterations_must_be_consecutive(self):
        history = AdaptHistory()
        history.append(IterationRecord(0, "error", 4, 9, 10.0, 0.1, 1.0, 3.0))
        with pytest.raises(ValueError):
            history.append(IterationRecord(2, "error", 4, 9, 10.0, 0.1, 1.0, 3.0))

    def test_csv_columns_and_rows(self, tmp_path):
        history = _history([9, 25, 49], [10.0, 6.0, 3.0])
        path = tmp_path / "nested" / "history.csv"
        history.write_csv(path)
        frame = pd.read_csv(path)
        assert list(frame.columns) == HISTORY_COLUMNS
        assert len(frame) == 3
        assert list(frame["iter"]) == [0, 1, 2]
        assert frame["rel_error"].iloc[-1] == pytest.approx(3.0)

    def test_lists_stay_out_of_the_frame(self):
        history = _history([9], [10.0])
        history.last.refined = [1, 2]
        assert "refined" not in history.to_frame().columns
