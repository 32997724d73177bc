"""
Polygonal mesh with hanging-node support

Elements are counter-clockwise vertex-id cycles. A node lying on the edge of
an element is always a vertex of that element, so hanging nodes are just
collinear vertices. Adjacency is rebuilt lazily and dropped on every mutation.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from loguru import logger
from scipy.spatial import cKDTree

from ..core.errors import TopologyError
from .domain import MERGE_RELATIVE_TOL, DomainSpec
from .geometry import (
    bounding_diameter,
    is_simple_polygon,
    polygon_centroid,
    project_to_segment,
    signed_area,
)


@dataclass(frozen=True)
class ConformityViolation:
    """One broken mesh invariant"""
    invariant: str
    ids: Tuple[int, ...]
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.invariant} {list(self.ids)}: {self.detail}"


@dataclass(eq=False)
class PolyMesh:
    nodes: np.ndarray
    elements: List[List[int]]
    domain: Optional[DomainSpec] = None
    _node_elements: Optional[List[List[int]]] = field(default=None, init=False, repr=False)
    _node_tree: Optional[cKDTree] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        self.elements = [[int(v) for v in cycle] for cycle in self.elements]

    # ------------------------------------------------------------------ basics

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_used_nodes(self) -> int:
        return int(self.used_nodes().sum())

    @property
    def merge_tol(self) -> float:
        if self.domain is not None:
            return self.domain.merge_tol
        if self.n_nodes == 0:
            return 0.0
        return MERGE_RELATIVE_TOL * bounding_diameter(self.nodes)

    def copy(self) -> "PolyMesh":
        return PolyMesh(self.nodes.copy(), [list(c) for c in self.elements], self.domain)

    def coords(self, elem_id: int) -> np.ndarray:
        return self.nodes[self.elements[elem_id]]

    def touch(self):
        """Invalidate cached adjacency after a mutation"""
        self._node_elements = None
        self._node_tree = None

    # ---------------------------------------------------------------- geometry

    def element_area(self, elem_id: int) -> float:
        cycle = self.elements[elem_id]
        if len(cycle) < 3:
            raise TopologyError(f"Element {elem_id} has {len(cycle)} vertices")
        return signed_area(self.nodes[cycle])

    def element_centroid(self, elem_id: int) -> np.ndarray:
        cycle = self.elements[elem_id]
        if len(cycle) < 3:
            raise TopologyError(f"Element {elem_id} has {len(cycle)} vertices")
        return polygon_centroid(self.nodes[cycle])

    def areas(self) -> np.ndarray:
        return np.array([self.element_area(e) for e in range(self.n_elements)])

    def centroids(self) -> np.ndarray:
        return np.array([self.element_centroid(e) for e in range(self.n_elements)])

    # ---------------------------------------------------------------- topology

    def node_elements(self) -> List[List[int]]:
        """For every node, the elements whose cycle contains it"""
        if self._node_elements is None:
            table: List[List[int]] = [[] for _ in range(self.n_nodes)]
            for e, cycle in enumerate(self.elements):
                for v in cycle:
                    table[v].append(e)
            self._node_elements = table
        return self._node_elements

    def node_tree(self) -> cKDTree:
        if self._node_tree is None:
            self._node_tree = cKDTree(self.nodes)
        return self._node_tree

    def node_patch(self, node_id: int) -> Set[int]:
        return set(self.node_elements()[node_id])

    def patch_nodes(self, elem_ids: Iterable[int]) -> List[int]:
        """Unique nodes of a group of elements, in first-seen order"""
        seen: Dict[int, None] = {}
        for e in elem_ids:
            for v in self.elements[e]:
                seen.setdefault(v, None)
        return list(seen)

    def element_neighbours(self, elem_ids: Iterable[int]) -> Set[int]:
        """Elements sharing at least one node with any of the given elements"""
        table = self.node_elements()
        out: Set[int] = set()
        for e in elem_ids:
            for v in self.elements[e]:
                out.update(table[v])
        return out

    def used_nodes(self) -> np.ndarray:
        used = np.zeros(self.n_nodes, dtype=bool)
        for cycle in self.elements:
            used[cycle] = True
        return used

    def edge_elements(self) -> Dict[Tuple[int, int], List[int]]:
        """Undirected edge (min, max) -> elements using it"""
        table: Dict[Tuple[int, int], List[int]] = {}
        for e, cycle in enumerate(self.elements):
            n = len(cycle)
            for k in range(n):
                a, b = cycle[k], cycle[(k + 1) % n]
                table.setdefault((min(a, b), max(a, b)), []).append(e)
        return table

    def boundary_edges(self) -> List[Tuple[int, int, int]]:
        """Directed edges (a, b, element) that belong to exactly one element"""
        out = []
        for (a, b), owners in self.edge_elements().items():
            if len(owners) == 1:
                e = owners[0]
                cycle = self.elements[e]
                i = cycle.index(a)
                if cycle[(i + 1) % len(cycle)] == b:
                    out.append((a, b, e))
                else:
                    out.append((b, a, e))
        return out

    # ---------------------------------------------------------------- mutation

    def add_nodes(self, points: np.ndarray) -> List[int]:
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        start = self.n_nodes
        self.nodes = np.vstack([self.nodes, points])
        self.touch()
        return list(range(start, start + len(points)))

    def replace_element(self, elem_id: int, cycle: Sequence[int]):
        self.elements[elem_id] = list(cycle)
        self.touch()

    def append_element(self, cycle: Sequence[int]) -> int:
        self.elements.append(list(cycle))
        self.touch()
        return self.n_elements - 1

    def remove_elements(self, elem_ids: Iterable[int]) -> np.ndarray:
        """Delete elements; returns old -> new index map with -1 for deleted ones"""
        doomed = set(elem_ids)
        remap = np.full(self.n_elements, -1, dtype=int)
        kept = []
        for e, cycle in enumerate(self.elements):
            if e not in doomed:
                remap[e] = len(kept)
                kept.append(cycle)
        self.elements = kept
        self.touch()
        return remap

    def compact(self) -> np.ndarray:
        """Drop nodes no element uses; returns old -> new node map (-1 = removed)"""
        used = self.used_nodes()
        remap = np.full(self.n_nodes, -1, dtype=int)
        remap[used] = np.arange(int(used.sum()))
        if used.all():
            return remap
        self.nodes = self.nodes[used]
        self.elements = [[int(remap[v]) for v in cycle] for cycle in self.elements]
        self.touch()
        return remap

    def conformize(self, elem_ids: Optional[Iterable[int]] = None) -> int:
        """Insert every node lying inside an element edge into that element's cycle"""
        targets = range(self.n_elements) if elem_ids is None else sorted(set(elem_ids))
        tol = self.merge_tol
        used = self.used_nodes()
        tree = self.node_tree()
        inserted = 0
        for e in targets:
            cycle = self.elements[e]
            members = set(cycle)
            new_cycle: List[int] = []
            n = len(cycle)
            for k in range(n):
                a, b = cycle[k], cycle[(k + 1) % n]
                new_cycle.append(a)
                hits = _nodes_inside_edge(self.nodes, tree, used, a, b, tol, members)
                for _, c in hits:
                    new_cycle.append(c)
                    members.add(c)
            if len(new_cycle) != n:
                inserted += len(new_cycle) - n
                self.elements[e] = new_cycle
        if inserted:
            self.touch()
            logger.debug(f"🔧 Inserted {inserted} hanging vertices")
        return inserted


def _nodes_inside_edge(nodes: np.ndarray, tree: cKDTree, used: np.ndarray,
                       a: int, b: int, tol: float, exclude: Set[int]) -> List[Tuple[float, int]]:
    pa, pb = nodes[a], nodes[b]
    length = float(np.linalg.norm(pb - pa))
    if length == 0.0:
        return []
    candidates = [c for c in tree.query_ball_point(0.5 * (pa + pb), 0.5 * length + tol)
                  if c not in exclude and used[c]]
    if not candidates:
        return []
    t, dist = project_to_segment(nodes[candidates], pa, pb)
    margin = tol / length
    hits = [(float(t[i]), c) for i, c in enumerate(candidates)
            if dist[i] <= tol and margin < t[i] < 1.0 - margin]
    hits.sort()
    return hits


# -------------------------------------------------------------------- queries

def element_area(mesh: PolyMesh, elem_id: int) -> float:
    return mesh.element_area(elem_id)


def element_centroid(mesh: PolyMesh, elem_id: int) -> np.ndarray:
    return mesh.element_centroid(elem_id)


def node_patch(mesh: PolyMesh, node_id: int) -> Set[int]:
    return mesh.node_patch(node_id)


def check_conformity(mesh: PolyMesh) -> List[ConformityViolation]:
    """Diagnose every broken mesh invariant; an empty list means the mesh is valid"""
    violations: List[ConformityViolation] = []
    n_nodes = mesh.n_nodes
    tol = mesh.merge_tol

    if not np.all(np.isfinite(mesh.nodes)):
        bad = tuple(int(i) for i in np.where(~np.isfinite(mesh.nodes).all(axis=1))[0])
        violations.append(ConformityViolation("finite-coordinates", bad, "NaN or inf coordinate"))

    sound = []
    for e, cycle in enumerate(mesh.elements):
        if len(cycle) < 3:
            violations.append(ConformityViolation("degenerate-cycle", (e,), f"{len(cycle)} vertices"))
            continue
        if min(cycle) < 0 or max(cycle) >= n_nodes:
            violations.append(ConformityViolation("invalid-node-index", (e,), "vertex index out of range"))
            continue
        if len(set(cycle)) != len(cycle):
            violations.append(ConformityViolation("repeated-vertex", (e,), "node listed twice in cycle"))
            continue
        coords = mesh.nodes[cycle]
        if signed_area(coords) <= 0.0:
            violations.append(ConformityViolation("orientation", (e,), "signed area not positive"))
            continue
        if not is_simple_polygon(coords):
            violations.append(ConformityViolation("non-simple", (e,), "cycle self-intersects"))
            continue
        sound.append(e)

    used = mesh.used_nodes()
    orphans = np.where(~used)[0]
    if len(orphans):
        violations.append(ConformityViolation("orphan-node", tuple(int(i) for i in orphans),
                                              "node not used by any element"))

    used_ids = np.where(used)[0]
    if len(used_ids) > 1:
        tree_used = cKDTree(mesh.nodes[used_ids])
        for i, j in sorted(tree_used.query_pairs(tol)):
            violations.append(ConformityViolation(
                "duplicate-node", (int(used_ids[i]), int(used_ids[j])), f"closer than {tol:.3e}"))

    tree = cKDTree(mesh.nodes)
    for e in sound:
        cycle = mesh.elements[e]
        members = set(cycle)
        n = len(cycle)
        for k in range(n):
            for _, c in _nodes_inside_edge(mesh.nodes, tree, used, cycle[k], cycle[(k + 1) % n], tol, members):
                violations.append(ConformityViolation(
                    "hanging-node", (e, c), f"node {c} lies on edge {cycle[k]}-{cycle[(k + 1) % n]}"))

    if mesh.domain is not None and len(sound) == mesh.n_elements:
        total = float(mesh.areas().sum())
        target = mesh.domain.area
        if abs(total - target) > 1e-9 * target:
            violations.append(ConformityViolation(
                "area-coverage", (), f"element areas sum to {total!r}, domain area {target!r}"))

    return violations
