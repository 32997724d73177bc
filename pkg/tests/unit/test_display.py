"""
🧪 Unit tests for the terminal display
"""

import pandas as pd
from rich.console import Console

from src.adapt.history import AdaptHistory, IterationRecord
from src.ui.display import AdaptDisplay


def _history(n: int, converged: bool = True) -> AdaptHistory:
    history = AdaptHistory(converged=converged, message="done")
    for it in range(n):
        history.append(IterationRecord(it, "error", 10 * (it + 1), 20 * (it + 1), 5.0 / (it + 1), 0.1, 1.0, 3.0))
    return history


class TestAdaptDisplay:
    """🧪 Tables and panels render without a terminal"""

    def test_history_table_rows(self):
        display = AdaptDisplay(Console(record=True, width=160))
        table = display.history_table(_history(5))
        assert table.row_count == 5

    def test_long_history_is_elided(self):
        display = AdaptDisplay(Console(record=True, width=160), max_rows=6)
        table = display.history_table(_history(20))
        assert table.row_count == 7

    def test_summary_panel_text(self):
        console = Console(record=True, width=120)
        display = AdaptDisplay(console)
        display.show_history(_history(3, converged=False))
        text = console.export_text()
        assert "NOT CONVERGED" in text
        assert "Iterations: 2" in text

    def test_empty_history(self):
        console = Console(record=True, width=120)
        AdaptDisplay(console).show_history(AdaptHistory())
        assert "No iterations recorded" in console.export_text()

    def test_convergence_table(self):
        console = Console(record=True, width=120)
        frame = pd.DataFrame({"level": [0, 1], "h": [0.5, 0.25], "exact_error": [1e-3, float("nan")]})
        AdaptDisplay(console).show_convergence(frame, rate=1.02)
        text = console.export_text()
        assert "1.0000e-03" in text
        assert "1.020" in text
