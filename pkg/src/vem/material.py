"""
Linear isotropic material and its Voigt constitutive matrix
"""

from dataclasses import dataclass

import numpy as np

from ..core.config import REGIMES
from ..core.errors import IncompressibilityError, PreconditionError


@dataclass(frozen=True)
class MaterialParams:
    """Young's modulus E (Pa), Poisson ratio nu and the plane regime"""
    E: float = 1.0
    nu: float = 0.3
    regime: str = "plane_strain"

    def __post_init__(self):
        object.__setattr__(self, "regime", self.regime.replace("-", "_"))
        if not self.E > 0.0:
            raise PreconditionError(f"Young's modulus must be positive, got {self.E}")
        if self.nu >= 0.5:
            raise IncompressibilityError(f"Poisson ratio {self.nu} is at or beyond the incompressible limit 0.5")
        if self.nu <= -1.0:
            raise PreconditionError(f"Poisson ratio must exceed -1, got {self.nu}")
        if self.regime not in REGIMES:
            raise PreconditionError(f"Unknown regime '{self.regime}'")

    @property
    def mu(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lam(self) -> float:
        if self.regime == "plane_stress":
            return self.E * self.nu / (1.0 - self.nu ** 2)
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @classmethod
    def from_config(cls, config) -> "MaterialParams":
        return cls(config.youngs_modulus, config.poisson_ratio, config.regime)


def constitutive_matrix(params: MaterialParams) -> np.ndarray:
    """3x3 matrix mapping (exx, eyy, gxy) to (sxx, syy, sxy); engineering shear strain"""
    lam, mu = params.lam, params.mu
    return np.array([
        [lam + 2.0 * mu, lam, 0.0],
        [lam, lam + 2.0 * mu, 0.0],
        [0.0, 0.0, mu],
    ])


def compliance_matrix(D: np.ndarray) -> np.ndarray:
    return np.linalg.inv(D)


def von_mises(stress: np.ndarray, params: MaterialParams) -> np.ndarray:
    """Von Mises equivalent stress of Voigt rows; plane strain adds szz = nu (sxx + syy)"""
    stress = np.atleast_2d(stress)
    sxx, syy, sxy = stress[:, 0], stress[:, 1], stress[:, 2]
    szz = params.nu * (sxx + syy) if params.regime == "plane_strain" else np.zeros_like(sxx)
    return np.sqrt(0.5 * ((sxx - syy) ** 2 + (syy - szz) ** 2 + (szz - sxx) ** 2) + 3.0 * sxy ** 2)
