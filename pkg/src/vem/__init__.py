"""VEM module: first-order virtual elements for plane linear elasticity"""

from .assembly import Loads, SolutionField, assemble_and_solve, element_stress, element_stresses
from .element import ElementStiffness, element_matrices, projection_operator
from .material import MaterialParams, constitutive_matrix, von_mises

__all__ = [
    "ElementStiffness", "Loads", "MaterialParams", "SolutionField", "assemble_and_solve",
    "constitutive_matrix", "element_matrices", "element_stress", "element_stresses",
    "projection_operator", "von_mises",
]
