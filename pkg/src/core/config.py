#!/usr/bin/env python3
"""
🔧 vem-adapt - Centralized Configuration
"""

import json
import os
from dataclasses import asdict, dataclass, fields
from typing import List

MESH_TYPES = ("structured", "voronoi")
REGIMES = ("plane_strain", "plane_stress")


@dataclass
class AdaptConfig:
    """Every tunable default of the toolkit in one place"""

    # ===== MATERIAL =====
    youngs_modulus: float = 1.0  # Pa
    poisson_ratio: float = 0.3
    regime: str = "plane_strain"

    # ===== MESH GENERATION =====
    mesh_type: str = "voronoi"
    initial_elements: int = 100
    seed: int = 42
    lloyd_max_iter: int = 100
    lloyd_tol: float = 1e-3

    # ===== REFINEMENT =====
    refine_lloyd_max_iter: int = 20
    refine_lloyd_tol: float = 1e-3

    # ===== ADAPTATION =====
    max_iter: int = 50

    # ===== OUTPUT =====
    out_dir: str = "out"
    svg: bool = True
    log_level: str = "INFO"

    def __post_init__(self):
        """Normalise spellings accepted on the command line"""
        self.regime = self.regime.replace("-", "_")
        self.mesh_type = self.mesh_type.lower()
        self.log_level = self.log_level.upper()

    def save_to_file(self, filepath: str = "vem_adapt_config.json"):
        """Save configuration to JSON file"""
        with open(filepath, "w") as f:
            json.dump(asdict(self), f, indent=2)

    @classmethod
    def load_from_file(cls, filepath: str = "vem_adapt_config.json") -> "AdaptConfig":
        """Load configuration from JSON file, unknown keys are ignored"""
        if not os.path.exists(filepath):
            return cls()
        with open(filepath, "r") as f:
            data = json.load(f)
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    def validate(self) -> List[str]:
        """Validate configuration and return list of errors"""
        errors = []

        if self.youngs_modulus <= 0:
            errors.append("Young's modulus must be positive")
        if not -1.0 < self.poisson_ratio < 0.5:
            errors.append("Poisson ratio must lie in (-1, 0.5)")
        if self.regime not in REGIMES:
            errors.append(f"Regime must be one of {', '.join(REGIMES)}")

        if self.mesh_type not in MESH_TYPES:
            errors.append(f"Mesh type must be one of {', '.join(MESH_TYPES)}")
        if self.initial_elements < 1:
            errors.append("Initial element count must be at least 1")
        if self.lloyd_max_iter < 0 or self.refine_lloyd_max_iter < 0:
            errors.append("Lloyd iteration limits cannot be negative")
        if self.lloyd_tol <= 0 or self.refine_lloyd_tol <= 0:
            errors.append("Lloyd tolerances must be positive")

        if self.max_iter < 1:
            errors.append("Iteration cap must be at least 1")
        if self.log_level not in ("ERROR", "WARNING", "INFO", "DEBUG"):
            errors.append(f"Invalid log level: {self.log_level}")

        return errors


def load_config(filepath: str = "vem_adapt_config.json") -> AdaptConfig:
    """Load configuration from file"""
    return AdaptConfig.load_from_file(filepath)
