"""
Exception hierarchy for the adaptive VEM toolkit
"""

from typing import Optional


class VemAdaptError(Exception):
    """Base class for every error raised by the library"""


class TopologyError(VemAdaptError):
    """Element cycle is degenerate (too few vertices, zero-length edge, ...)"""


class MeshParseError(VemAdaptError):
    """Mesh file is malformed"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        context = []
        if line is not None:
            context.append(f"line {line}")
        if field is not None:
            context.append(f"field '{field}'")
        suffix = f" ({', '.join(context)})" if context else ""
        super().__init__(f"{message}{suffix}")


class PreconditionError(VemAdaptError, ValueError):
    """An operation was called with arguments outside its domain"""


class CapacityError(VemAdaptError, ValueError):
    """Requested size exceeds what the generators accept"""


class DegenerateSeedError(VemAdaptError):
    """Voronoi clipping produced a cell without area"""


class DegenerateElementError(VemAdaptError):
    """Element geometry cannot support the linear monomial basis"""


class IncompressibilityError(VemAdaptError, ValueError):
    """Poisson ratio at (or beyond) the incompressible limit"""


class ConstraintError(VemAdaptError):
    """Dirichlet data leaves a rigid body mode free"""

    def __init__(self, mode: str):
        self.mode = mode
        super().__init__(f"Boundary conditions leave the rigid mode '{mode}' unconstrained")


class NumericError(VemAdaptError):
    """Linear solve did not reach the requested residual"""


class EstimationError(VemAdaptError):
    """Stress recovery failed at a node"""


class UndefinedRelativeError(VemAdaptError):
    """Relative error requested while the elastic energy is zero"""


class RefinementFailure(VemAdaptError):
    """Refinement of an element was rejected; mesh left untouched"""


class CoarseningFailure(VemAdaptError):
    """Coarsening of a patch was rejected; mesh left untouched"""
