"""
🏗️ Benchmark problems
Geometry, boundary segments and loads of the standard test cases
"""

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from ..core.errors import PreconditionError
from ..mesh.domain import BoundarySegment, BoundaryTag, DomainSpec
from ..vem.assembly import Loads
from ..vem.material import MaterialParams, constitutive_matrix

BENCHMARKS = ("l_domain", "punch", "patch_test", "uniaxial")

# L-shaped domain
L_WIDTH = 1.0
L_HEIGHT = 1.0
L_DISPLACEMENT = 0.5

# Pseudo-dynamic punch
PUNCH_SIZE = 2.0
PUNCH_WIDTH = 0.3
PUNCH_OFFSET = 0.45  # punch centre to the nearest side edge
PUNCH_LOAD = 0.675  # N/m

PATCH_TEST_GRADIENT = ((0.3, 0.1), (0.2, -0.4))

Problem = Tuple[DomainSpec, Loads]
StressField = Callable[[np.ndarray], np.ndarray]


@dataclass
class BenchmarkSpec:
    """Named benchmark with its geometry and loading parameters"""
    name: str = "l_domain"
    width: float = L_WIDTH
    height: float = L_HEIGHT
    displacement: float = L_DISPLACEMENT
    punch_width: float = PUNCH_WIDTH
    punch_offset: float = PUNCH_OFFSET
    punch_load: float = PUNCH_LOAD
    cycles: int = 1

    def __post_init__(self):
        self.name = self.name.replace("-", "_")
        if self.name not in BENCHMARKS:
            raise PreconditionError(f"Unknown benchmark '{self.name}'; choose from {', '.join(BENCHMARKS)}")
        for key in ("width", "height", "displacement", "punch_width", "punch_offset", "punch_load"):
            if not getattr(self, key) > 0.0:
                raise PreconditionError(f"Benchmark parameter {key} must be positive")
        if self.cycles < 1:
            raise PreconditionError(f"Punch cycles must be at least 1, got {self.cycles}")
        if self.name == "punch" and self.punch_offset < 0.5 * self.punch_width:
            raise PreconditionError("Punch span would leave the top edge")

    @classmethod
    def punch(cls, cycles: int = 1) -> "BenchmarkSpec":
        return cls(name="punch", width=PUNCH_SIZE, height=PUNCH_SIZE, cycles=cycles)

    @classmethod
    def named(cls, name: str, cycles: int = 1) -> "BenchmarkSpec":
        """Default parameters of a benchmark; accepts the dashed CLI spelling"""
        if name.replace("-", "_") == "punch":
            return cls.punch(cycles)
        return cls(name=name)

    def build(self, cycle_index: int = 1) -> Problem:
        if self.name == "l_domain":
            return build_l_domain(self.width, self.height, self.displacement)
        if self.name == "punch":
            return build_punch(cycle_index, self.width, self.punch_width, self.punch_offset, self.punch_load)
        if self.name == "patch_test":
            return build_patch_test()
        return build_uniaxial(self.displacement)


def _chain(points, specs) -> DomainSpec:
    n = len(points)
    segments = [
        BoundarySegment(points[i], points[(i + 1) % n], tag, value, traction)
        for i, (tag, value, traction) in enumerate(specs)
    ]
    return DomainSpec.from_segments(segments)


def build_l_domain(width: float = L_WIDTH, height: float = L_HEIGHT,
                   displacement: float = L_DISPLACEMENT) -> Problem:
    """L with legs along the axes, re-entrant corner at (w/4, h/4)

    Bottom edge is held vertically and the left edge horizontally; the short
    right and top edges are pulled out by ``displacement``.
    """
    tw, th = 0.25 * width, 0.25 * height
    points = [(0.0, 0.0), (width, 0.0), (width, th), (tw, th), (tw, height), (0.0, height)]
    free = (BoundaryTag.FREE, (None, None), (0.0, 0.0))
    specs = [
        (BoundaryTag.DIRICHLET_Y, (None, 0.0), (0.0, 0.0)),
        (BoundaryTag.DIRICHLET_X, (displacement, None), (0.0, 0.0)),
        free,
        free,
        (BoundaryTag.DIRICHLET_Y, (None, displacement), (0.0, 0.0)),
        (BoundaryTag.DIRICHLET_X, (0.0, None), (0.0, 0.0)),
    ]
    return _chain(points, specs), Loads()


def punch_span(cycle_index: int, size: float = PUNCH_SIZE, width: float = PUNCH_WIDTH,
               offset: float = PUNCH_OFFSET) -> Tuple[float, float]:
    """x-range of the active punch: left on odd cycles, right on even ones"""
    if cycle_index < 1:
        raise PreconditionError(f"Cycle index must be at least 1, got {cycle_index}")
    centre = offset if cycle_index % 2 == 1 else size - offset
    return centre - 0.5 * width, centre + 0.5 * width


def build_punch(cycle_index: int, size: float = PUNCH_SIZE, width: float = PUNCH_WIDTH,
                offset: float = PUNCH_OFFSET, load: float = PUNCH_LOAD) -> Problem:
    """Square block on a roller base with one of two punches pressing on its top edge"""
    active = punch_span(cycle_index, size, width, offset)
    spans = [punch_span(1, size, width, offset), punch_span(2, size, width, offset)]
    # top edge is walked right to left
    breaks = sorted({x for span in spans for x in span}, reverse=True)
    points = [(0.0, 0.0), (size, 0.0), (size, size)] + [(x, size) for x in breaks] + [(0.0, size)]

    free = (BoundaryTag.FREE, (None, None), (0.0, 0.0))
    specs = [(BoundaryTag.DIRICHLET_Y, (None, 0.0), (0.0, 0.0)), free]
    for a, b in zip([size] + breaks, breaks + [0.0]):
        lo, hi = min(a, b), max(a, b)
        if np.isclose(lo, active[0]) and np.isclose(hi, active[1]):
            specs.append((BoundaryTag.DIRICHLET_X, (0.0, None), (0.0, -load)))
        else:
            specs.append(free)
    specs.append(free)
    return _chain(points, specs), Loads()


def linear_field(gradient=PATCH_TEST_GRADIENT) -> Callable[[np.ndarray], np.ndarray]:
    G = np.asarray(gradient, dtype=float)

    def field(points: np.ndarray) -> np.ndarray:
        return np.atleast_2d(points) @ G.T

    return field


def build_patch_test(gradient=PATCH_TEST_GRADIENT) -> Problem:
    """Unit square, every edge held at a linear displacement field"""
    points = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    fixed = (BoundaryTag.DIRICHLET_XY, (0.0, 0.0), (0.0, 0.0))
    return _chain(points, [fixed] * 4), Loads(prescribed=linear_field(gradient))


def build_uniaxial(stretch: float = L_DISPLACEMENT) -> Problem:
    """Unit square on rollers (bottom, left) stretched vertically by ``stretch`` at the top"""
    points = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    specs = [
        (BoundaryTag.DIRICHLET_Y, (None, 0.0), (0.0, 0.0)),
        (BoundaryTag.FREE, (None, None), (0.0, 0.0)),
        (BoundaryTag.DIRICHLET_Y, (None, stretch), (0.0, 0.0)),
        (BoundaryTag.DIRICHLET_X, (0.0, None), (0.0, 0.0)),
    ]
    return _chain(points, specs), Loads()


def uniaxial_stress(stretch: float, material: MaterialParams) -> float:
    """sigma_yy of the uniaxial problem (height 1, so the strain equals the stretch)"""
    lam, mu = material.lam, material.mu
    return stretch * ((lam + 2.0 * mu) - lam ** 2 / (lam + 2.0 * mu))


def build_manufactured(material: MaterialParams, amplitude: float = 0.01) -> Tuple[DomainSpec, Loads, StressField]:
    """u = s (phi, phi), phi = sin(pi x) sin(pi y) on the clamped unit square

    Returns the problem plus the exact Voigt stress field for energy-norm checks.
    """
    lam, mu = material.lam, material.mu
    D = constitutive_matrix(material)
    s = amplitude
    pi = np.pi

    def body(points: np.ndarray) -> np.ndarray:
        x, y = points[:, 0], points[:, 1]
        phi = np.sin(pi * x) * np.sin(pi * y)
        c = np.cos(pi * x) * np.cos(pi * y)
        b = s * pi ** 2 * ((lam + mu) * (phi - c) + 2.0 * mu * phi)
        return np.column_stack([b, b])

    def stress(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        x, y = points[:, 0], points[:, 1]
        exx = s * pi * np.cos(pi * x) * np.sin(pi * y)
        eyy = s * pi * np.sin(pi * x) * np.cos(pi * y)
        gxy = exx + eyy
        return np.column_stack([exx, eyy, gxy]) @ D.T

    def exact(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        phi = s * np.sin(pi * points[:, 0]) * np.sin(pi * points[:, 1])
        return np.column_stack([phi, phi])

    points = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    fixed = (BoundaryTag.DIRICHLET_XY, (0.0, 0.0), (0.0, 0.0))
    return _chain(points, [fixed] * 4), Loads(body_force=body, prescribed=exact), stress
