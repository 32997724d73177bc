"""
💾 Mesh JSON reader / writer

{"nodes": [[x, y], ...], "elements": [[i0, i1, ...], ...],
 "boundary": [{"segment": [[x0, y0], [x1, y1]], "tag": "...", "value": [...], "traction": [...]}]}
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
from loguru import logger

from ..core.errors import MeshParseError, PreconditionError
from .domain import BoundarySegment, BoundaryTag, DomainSpec
from .polymesh import PolyMesh

PathLike = Union[str, Path]


def mesh_to_dict(mesh: PolyMesh) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "nodes": [[float(x), float(y)] for x, y in mesh.nodes],
        "elements": [list(map(int, cycle)) for cycle in mesh.elements],
    }
    if mesh.domain is not None:
        boundary = []
        for seg in mesh.domain.segments:
            entry: Dict[str, Any] = {
                "segment": [list(seg.start), list(seg.end)],
                "tag": seg.tag.value,
                "value": list(seg.value),
            }
            if any(seg.traction):
                entry["traction"] = list(seg.traction)
            boundary.append(entry)
        data["boundary"] = boundary
    return data


def write_mesh(mesh: PolyMesh, path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(mesh_to_dict(mesh), f)
    logger.debug(f"💾 Wrote mesh with {mesh.n_elements} elements to {path}")


def read_mesh(path: PathLike) -> PolyMesh:
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise MeshParseError(f"Invalid JSON: {e.msg}", line=e.lineno) from e
    return mesh_from_dict(data)


def mesh_from_dict(data: Any) -> PolyMesh:
    if not isinstance(data, dict):
        raise MeshParseError("Top level must be an object")
    nodes = _parse_nodes(data.get("nodes"))
    elements = _parse_elements(data.get("elements"), len(nodes))
    domain = None
    if data.get("boundary"):
        segments = _parse_boundary(data["boundary"])
        try:
            domain = DomainSpec.from_segments(segments)
        except PreconditionError as e:
            raise MeshParseError(str(e), field="boundary") from e
    return PolyMesh(nodes, elements, domain)


def _number(value: Any, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MeshParseError("Expected a number", field=field)
    if not math.isfinite(value):
        raise MeshParseError("Coordinate must be finite", field=field)
    return float(value)


def _parse_nodes(raw: Any) -> np.ndarray:
    if not isinstance(raw, list):
        raise MeshParseError("Missing node list", field="nodes")
    out = np.empty((len(raw), 2))
    for i, item in enumerate(raw):
        if not isinstance(item, list) or len(item) != 2:
            raise MeshParseError("Node must be [x, y]", field=f"nodes[{i}]")
        out[i, 0] = _number(item[0], f"nodes[{i}][0]")
        out[i, 1] = _number(item[1], f"nodes[{i}][1]")
    return out


def _parse_elements(raw: Any, n_nodes: int) -> List[List[int]]:
    if not isinstance(raw, list):
        raise MeshParseError("Missing element list", field="elements")
    if not raw:
        raise MeshParseError("mesh must contain ≥1 element", field="elements")
    elements = []
    for e, cycle in enumerate(raw):
        if not isinstance(cycle, list) or len(cycle) < 3:
            raise MeshParseError("Element needs at least three node indices", field=f"elements[{e}]")
        for k, v in enumerate(cycle):
            if isinstance(v, bool) or not isinstance(v, int):
                raise MeshParseError("Node index must be an integer", field=f"elements[{e}][{k}]")
            if not 0 <= v < n_nodes:
                raise MeshParseError(f"Element references missing node {v}", field=f"elements[{e}][{k}]")
        elements.append(list(cycle))
    return elements


def _parse_boundary(raw: Any) -> List[BoundarySegment]:
    if not isinstance(raw, list):
        raise MeshParseError("Boundary must be a list", field="boundary")
    segments = []
    for i, item in enumerate(raw):
        where = f"boundary[{i}]"
        if not isinstance(item, dict):
            raise MeshParseError("Boundary entry must be an object", field=where)
        seg = item.get("segment")
        if not isinstance(seg, list) or len(seg) != 2 or not all(isinstance(p, list) and len(p) == 2 for p in seg):
            raise MeshParseError("Segment must be [[x0, y0], [x1, y1]]", field=f"{where}.segment")
        start = (_number(seg[0][0], f"{where}.segment"), _number(seg[0][1], f"{where}.segment"))
        end = (_number(seg[1][0], f"{where}.segment"), _number(seg[1][1], f"{where}.segment"))
        try:
            tag = BoundaryTag(item.get("tag", "Free"))
        except ValueError as e:
            raise MeshParseError(f"Unknown tag {item.get('tag')!r}", field=f"{where}.tag") from e
        value = item.get("value", [None, None])
        if not isinstance(value, list) or len(value) != 2:
            raise MeshParseError("Value must have two entries", field=f"{where}.value")
        value = tuple(None if v is None else _number(v, f"{where}.value") for v in value)
        traction = item.get("traction", [0.0, 0.0])
        if not isinstance(traction, list) or len(traction) != 2:
            raise MeshParseError("Traction must have two entries", field=f"{where}.traction")
        traction = tuple(_number(v, f"{where}.traction") for v in traction)
        segments.append(BoundarySegment(start, end, tag, value, traction))
    return segments
