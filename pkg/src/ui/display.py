"""
📺 Terminal summary of an adaptive run
Rich tables for the iteration history and a closing panel with the final state
"""

from typing import Optional

from loguru import logger
from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from ..adapt.history import AdaptHistory


class AdaptDisplay:
    """📺 Renders AdaptHistory objects and convergence tables to the console"""

    def __init__(self, console: Optional[Console] = None, max_rows: int = 40):
        self.console = console or Console(width=120, legacy_windows=False)
        self.max_rows = max_rows

        # Colour scheme
        self.accent = "cyan"
        self.good = "green"
        self.bad = "red"
        self.muted = "bright_black"

    def history_table(self, history: AdaptHistory, title: str = "Adaptive iterations") -> Table:
        """Create the per-iteration table; long runs keep the first and last rows"""
        table = Table(title=title, show_header=True, header_style=f"bold {self.accent}", box=box.SIMPLE)
        table.add_column("Iter", justify="right", width=5)
        table.add_column("Phase", justify="center", width=7)
        table.add_column("Elements", justify="right", width=9)
        table.add_column("Nodes", justify="right", width=9)
        table.add_column("‖e‖rel %", justify="right", width=10)
        table.add_column("Target", justify="right", width=10)
        table.add_column("Refined", justify="right", width=8)
        table.add_column("Coarsened", justify="right", width=9)
        table.add_column("Max e_i (5%)", justify="right", width=12)
        table.add_column("Min e_i (5%)", justify="right", width=12)

        records = list(history)
        if len(records) > self.max_rows:
            head = self.max_rows // 2
            shown = records[:head] + [None] + records[-(self.max_rows - head):]
        else:
            shown = records

        for rec in shown:
            if rec is None:
                table.add_row(*(["…"] + [""] * 9), style=self.muted)
                continue
            target = f"{rec.working_target:.3f}" if rec.phase == "error" else f"{rec.working_target:.0f}"
            table.add_row(
                str(rec.iter),
                rec.phase,
                f"{rec.n_el:,}",
                f"{rec.n_v:,}",
                f"{rec.rel_error:.4f}",
                target,
                str(rec.n_refined),
                str(rec.n_coarsened),
                f"{rec.max_elem_err_trim5:.3e}",
                f"{rec.min_elem_err_trim5:.3e}",
            )
        return table

    def summary_panel(self, history: AdaptHistory, title: str = "Result") -> Panel:
        """Create the closing panel: converged flag and final mesh / error"""
        last = history.last
        if last is None:
            return Panel(Text("No iterations recorded", style=self.muted), title=title, border_style=self.muted)

        colour = self.good if history.converged else self.bad
        status = "✅ CONVERGED" if history.converged else "⚠️ NOT CONVERGED"
        text = Text()
        text.append(f"{status}\n", style=f"bold {colour}")
        text.append(f"Iterations: {len(history) - 1}\n")
        text.append(f"Elements:   {last.n_el:,}\n")
        text.append(f"Nodes:      {last.n_v:,}\n")
        text.append(f"‖e‖rel:     {last.rel_error:.4f} %\n")
        text.append(f"‖e‖:        {last.energy_error:.6e}\n")
        if history.message:
            text.append(history.message, style=self.muted)
        return Panel(text, title=title, border_style=colour, box=box.ROUNDED)

    def convergence_table(self, frame, title: str = "Uniform refinement") -> Table:
        """Create a table from a convergence study DataFrame"""
        table = Table(title=title, show_header=True, header_style=f"bold {self.accent}", box=box.SIMPLE)
        for column in frame.columns:
            table.add_column(str(column), justify="right")
        for row in frame.itertuples(index=False):
            table.add_row(*[_format_cell(v) for v in row])
        return table

    def show_history(self, history: AdaptHistory, title: str = "Adaptive iterations"):
        """Print the iteration table followed by the summary panel"""
        try:
            self.console.print(self.history_table(history, title))
            self.console.print(self.summary_panel(history))
        except Exception as e:
            # display problems never fail a run
            logger.warning(f"⚠️ Display error: {e}")

    def show_convergence(self, frame, rate: Optional[float] = None):
        try:
            self.console.print(self.convergence_table(frame))
            if rate is not None:
                self.console.print(Text(f"Observed energy-error rate: {rate:.3f}", style=f"bold {self.accent}"))
        except Exception as e:
            logger.warning(f"⚠️ Display error: {e}")


def _format_cell(value) -> str:
    if isinstance(value, float):
        if value != value:
            return "-"
        return f"{value:.4e}" if abs(value) < 1e-2 or abs(value) >= 1e5 else f"{value:.4f}"
    return str(value)
