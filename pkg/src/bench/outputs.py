"""
💾 Run artifacts: history CSV, per-iteration mesh JSON and SVG plots
"""

from pathlib import Path
from typing import Dict, Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from loguru import logger  # noqa: E402
from matplotlib import colors  # noqa: E402
from matplotlib.collections import PolyCollection  # noqa: E402

from ..adapt.history import AdaptHistory  # noqa: E402
from ..estimation.energy import ErrorReport  # noqa: E402
from ..mesh.mesh_io import write_mesh  # noqa: E402
from ..mesh.polymesh import PolyMesh  # noqa: E402

PathLike = Union[str, Path]


def snapshot_name(iteration: int, suffix: str) -> str:
    return f"mesh_{iteration:04d}.{suffix}"


def write_svg(mesh: PolyMesh, path: PathLike, values: Optional[np.ndarray] = None,
              label: str = "‖e_i‖", title: Optional[str] = None):
    """Polygon outlines, optionally filled by a per-element value on a log colour scale"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    polys = [mesh.coords(e) for e in range(mesh.n_elements)]

    fig, ax = plt.subplots(figsize=(8, 8))
    try:
        collection = PolyCollection(polys, edgecolors="k", linewidths=0.3)
        if values is not None and len(values) == mesh.n_elements:
            positive = np.asarray(values, dtype=float)
            floor = positive[positive > 0].min() if np.any(positive > 0) else 1.0
            collection.set_array(np.maximum(positive, floor))
            collection.set_norm(colors.LogNorm(vmin=floor, vmax=max(positive.max(), floor * (1.0 + 1e-12))))
            collection.set_cmap("viridis")
            fig.colorbar(collection, ax=ax, label=label)
        else:
            collection.set_facecolor("none")
        ax.add_collection(collection)
        ax.autoscale_view()
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        if title:
            ax.set_title(title)
        fig.savefig(path, format="svg", bbox_inches="tight")
    finally:
        plt.close(fig)
    logger.debug(f"🖼️ Wrote {path}")


class SnapshotWriter:
    """Adaptive-loop callback writing mesh_XXXX.json (and .svg) for every iteration"""

    def __init__(self, out_dir: PathLike, svg: bool = True, colour_by_error: bool = True):
        self.out_dir = Path(out_dir)
        self.svg = svg
        self.colour_by_error = colour_by_error
        self.written: Dict[int, Path] = {}

    def __call__(self, iteration: int, mesh: PolyMesh, report: Optional[ErrorReport] = None):
        json_path = self.out_dir / snapshot_name(iteration, "json")
        write_mesh(mesh, json_path)
        self.written[iteration] = json_path
        if self.svg:
            values = report.element_norms if (report is not None and self.colour_by_error) else None
            write_svg(mesh, self.out_dir / snapshot_name(iteration, "svg"), values,
                      title=f"Iteration {iteration}: {mesh.n_elements} elements")


def emit_outputs(history: AdaptHistory, mesh_snapshots: Dict[int, PolyMesh], out_dir: PathLike,
                 svg: bool = True, reports: Optional[Dict[int, ErrorReport]] = None) -> Path:
    """Write history.csv plus one JSON (and SVG) per stored mesh; returns the CSV path"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "history.csv"
    history.write_csv(csv_path)
    writer = SnapshotWriter(out_dir, svg)
    for iteration, mesh in sorted(mesh_snapshots.items()):
        report = reports.get(iteration) if reports else None
        writer(iteration, mesh, report)
    logger.info(f"💾 Wrote {len(history)} history rows and {len(mesh_snapshots)} meshes to {out_dir}")
    return csv_path
