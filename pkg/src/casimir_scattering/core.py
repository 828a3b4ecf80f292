"""Constants, geometry and the small value types shared by every module.

Public functions take and return SI quantities.  Internally the engines
work in units of a reference length ``ell``: lengths are divided by ``ell``,
wavevectors multiplied by it, and imaginary frequencies expressed as
``xi * ell / c``.  Energies per area come back in units of ``hbar c / ell**3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

from scipy import constants as _sc

if TYPE_CHECKING:
    from .materials import MaterialModel

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "Polarization",
    "Geometry",
    "SpectralPoint",
    "MirrorPair",
    "ScaledGeometry",
    "dimensionless_rescale",
]


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = _sc.hbar
    c: float = _sc.c
    kB: float = _sc.k

    @property
    def hbar_c(self) -> float:
        return self.hbar * self.c


CONSTANTS = PhysicalConstants()


class Polarization(str, Enum):
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class Geometry:
    """Plane-parallel configuration: separation (m), area (m^2), temperature (K)."""

    separation_L: float
    area_A: float = 1.0
    temperature_T: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.separation_L) and self.separation_L > 0):
            raise ValueError(f"separation_L must be > 0, got {self.separation_L!r}")
        if not (math.isfinite(self.area_A) and self.area_A > 0):
            raise ValueError(f"area_A must be > 0, got {self.area_A!r}")
        if not (math.isfinite(self.temperature_T) and self.temperature_T >= 0):
            raise ValueError(f"temperature_T must be >= 0, got {self.temperature_T!r}")

    def with_separation(self, L: float) -> "Geometry":
        return Geometry(L, self.area_A, self.temperature_T)


@dataclass(frozen=True)
class SpectralPoint:
    """One quadrature node: imaginary frequency (rad/s), transverse wavevector (1/m)."""

    xi: float
    k: float
    pol: Polarization = Polarization.TE

    def __post_init__(self):
        if self.xi < 0 or self.k < 0:
            raise ValueError("xi and k must be non-negative")
        object.__setattr__(self, "pol", Polarization(self.pol))

    def kappa(self, constants: PhysicalConstants = CONSTANTS) -> float:
        """Decay constant of the vacuum wave, sqrt(k^2 + xi^2/c^2)."""
        return math.hypot(self.k, self.xi / constants.c)


@dataclass(frozen=True)
class MirrorPair:
    mirror1: "MaterialModel"
    mirror2: "MaterialModel"
    geometry: Geometry

    def with_geometry(self, geometry: Geometry) -> "MirrorPair":
        return MirrorPair(self.mirror1, self.mirror2, geometry)

    def with_separation(self, L: float) -> "MirrorPair":
        return self.with_geometry(self.geometry.with_separation(L))


@dataclass(frozen=True)
class ScaledGeometry:
    """Geometry in units of ``reference_length``.

    ``thermal_xi`` is the first Matsubara frequency in the same units,
    ``2 pi kB T ell / (hbar c)``; it is zero at T = 0.
    """

    separation: float
    area: float
    thermal_xi: float
    reference_length: float
    constants: PhysicalConstants = field(default=CONSTANTS, repr=False)

    @property
    def length_factor(self) -> float:
        return self.reference_length

    @property
    def energy_per_area_factor(self) -> float:
        """Multiply a dimensionless energy per area by this to get J/m^2."""
        return self.constants.hbar_c / self.reference_length ** 3

    def unscale(self) -> Geometry:
        ell = self.reference_length
        T = self.thermal_xi * self.constants.hbar_c / (2 * math.pi * self.constants.kB * ell)
        return Geometry(self.separation * ell, self.area * ell ** 2, T)


def dimensionless_rescale(geometry: Geometry, reference_length: float,
                          constants: PhysicalConstants = CONSTANTS) -> ScaledGeometry:
    if not (math.isfinite(reference_length) and reference_length > 0):
        raise ValueError(f"reference_length must be > 0, got {reference_length!r}")
    ell = reference_length
    thermal = 2 * math.pi * constants.kB * geometry.temperature_T * ell / constants.hbar_c
    return ScaledGeometry(geometry.separation_L / ell, geometry.area_A / ell ** 2,
                          thermal, ell, constants)
