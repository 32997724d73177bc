"""Mesh module: polygonal mesh, generation, refinement and coarsening"""

from .coarsen import coarsen_batch, coarsen_patch, patch_eligible
from .domain import BoundarySegment, BoundaryTag, DomainSpec
from .generation import SeedSet, bounded_voronoi, generate_mesh, generate_seeds, lloyd_smooth
from .mesh_io import read_mesh, write_mesh
from .polymesh import PolyMesh, check_conformity, element_area, element_centroid, node_patch
from .refine import refine_batch, refine_element

__all__ = [
    "BoundarySegment", "BoundaryTag", "DomainSpec", "PolyMesh", "SeedSet",
    "bounded_voronoi", "check_conformity", "coarsen_batch", "coarsen_patch",
    "element_area", "element_centroid", "generate_mesh", "generate_seeds",
    "lloyd_smooth", "node_patch", "patch_eligible", "read_mesh", "refine_batch",
    "refine_element", "write_mesh",
]
