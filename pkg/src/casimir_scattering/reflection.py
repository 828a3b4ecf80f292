"""Specular reflection at a vacuum/bulk interface and the cavity loop functions.

Sign convention
---------------
Amplitudes are evaluated at imaginary frequency ``omega = i xi`` where the
vacuum and bulk longitudinal wavevectors become ``i kappa`` and ``i kappa_m``
with

    kappa   = sqrt(k^2 + xi^2/c^2)
    kappa_m = sqrt(k^2 + eps xi^2/c^2)

and both amplitudes are real:

    r_TE = (kappa - kappa_m) / (kappa + kappa_m)            -> -1 as eps -> inf
    r_TM = (eps kappa - kappa_m) / (eps kappa + kappa_m)    -> +1 as eps -> inf

``r_TM`` is the ratio of magnetic-field amplitudes.  The cavity round trip
only ever uses products of same-polarisation amplitudes of the two mirrors,
``r1^p r2^p``, which is independent of this choice and tends to 1 for
perfect mirrors in both polarisations.

The vacuum longitudinal wavevector is ``k_z = sqrt(omega^2/c^2 - k^2)``,
i.e. ``kappa`` above after rotation; the usual textbook form of the Fresnel
law is used here.

Internally amplitudes are computed from ``chi = (eps - 1) xi^2 / c^2``
rather than ``eps``.  This removes the cancellation in ``kappa - kappa_m``
and gives the correct static limit ``xi -> 0`` for plasma-like media, where
``eps`` diverges but ``chi`` stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CONSTANTS, Polarization, SpectralPoint
from .materials import MaterialModel, PerfectReflector

__all__ = [
    "ReflectionAmplitudes",
    "LoopFunctions",
    "material_response",
    "fresnel_from_response",
    "fresnel_imag",
    "loop_functions",
]


@dataclass(frozen=True)
class ReflectionAmplitudes:
    r_TE: float | np.ndarray
    r_TM: float | np.ndarray

    def __getitem__(self, pol) -> float | np.ndarray:
        return self.r_TE if Polarization(pol) is Polarization.TE else self.r_TM


@dataclass(frozen=True)
class LoopFunctions:
    f: complex | np.ndarray
    g: float | np.ndarray


def material_response(material: MaterialModel, xi_scaled, reference_length: float):
    """Return ``chi = (eps - 1) xi^2`` in units of ``1/reference_length^2``.

    ``xi_scaled`` is ``xi * reference_length / c``; zero is allowed and
    yields the static limit.  For a perfect reflector ``chi`` is ``inf``.
    """
    xi_scaled = np.asarray(xi_scaled, dtype=float)
    if isinstance(material, PerfectReflector):
        return np.full(xi_scaled.shape, np.inf)
    to_si = CONSTANTS.c / reference_length
    return np.asarray(material.chi_xi2(xi_scaled * to_si), dtype=float) / to_si ** 2


def fresnel_from_response(xi, k, chi):
    """Vectorised Fresnel amplitudes in consistent units.

    ``xi`` stands for ``xi/c``; ``k`` and ``chi`` must use the same length
    unit.  Arrays broadcast.  Returns ``(r_TE, r_TM)``.
    """
    xi = np.asarray(xi, dtype=float)
    k = np.asarray(k, dtype=float)
    chi = np.asarray(chi, dtype=float)
    xi2 = xi * xi
    kappa = np.sqrt(k * k + xi2)
    perfect = np.isinf(chi)
    chi_f = np.where(perfect, 0.0, chi)
    kappa_m = np.sqrt(kappa * kappa + chi_f)
    s = kappa + kappa_m
    with np.errstate(divide="ignore", invalid="ignore"):
        r_te = -chi_f / (s * s)
        # (eps kappa - kappa_m)/(eps kappa + kappa_m) multiplied through by xi^2
        num = chi_f * (k * k + kappa * kappa_m)
        den = s * ((xi2 + chi_f) * kappa + xi2 * kappa_m)
        r_tm = num / den
    # k = xi = 0 is a removable point: normal incidence, r_TM = -r_TE
    r_tm = np.where(den == 0.0, np.where(chi_f > 0, 1.0, 0.0), r_tm)
    r_te = np.where(s == 0.0, np.where(chi_f > 0, -1.0, 0.0), r_te)
    r_te = np.where(perfect, -1.0, r_te)
    r_tm = np.where(perfect, 1.0, r_tm)
    return r_te, r_tm


def fresnel_imag(material: MaterialModel, point: SpectralPoint) -> ReflectionAmplitudes:
    """Fresnel amplitudes of ``material`` at one spectral point (SI input)."""
    if not point.xi > 0:
        raise ValueError("fresnel_imag needs xi > 0")
    if isinstance(material, PerfectReflector):
        return ReflectionAmplitudes(-1.0, 1.0)
    xi_c = point.xi / CONSTANTS.c
    chi = (material.epsilon(point.xi) - 1.0) * xi_c ** 2
    # work in units of 1/kappa to keep everything O(1)
    scale = math.hypot(point.k, xi_c)
    r_te, r_tm = fresnel_from_response(xi_c / scale, point.k / scale, chi / scale ** 2)
    return ReflectionAmplitudes(float(r_te), float(r_tm))


def loop_functions(r1r2_product, phase_factor) -> LoopFunctions:
    """Closed-loop function ``f = rho/(1 - rho)`` and ``g = 1 + f + f*``.

    ``rho = r1 r2 exp(2 i k_z L)`` is passed as ``r1r2_product * phase_factor``.
    ``g`` is evaluated from its own closed form, ``(1 - |rho|^2)/|1 - rho|^2``.
    """
    rho = np.asarray(r1r2_product, dtype=complex) * np.asarray(phase_factor, dtype=complex)
    if np.any(np.abs(rho) >= 1.0):
        raise ValueError("|r1 r2 exp(2 i kz L)| must be < 1 (lasing cavity)")
    # 1 - |rho|^2 cancels as |rho| -> 1; extended precision (where the
    # platform has it) keeps g and f accurate to the last double bit
    x = rho.real.astype(np.longdouble)
    y = rho.imag.astype(np.longdouble)
    den = (1 - x) ** 2 + y * y
    g = ((1 - x * x - y * y) / den).astype(float)
    f = (((x - x * x - y * y) / den).astype(float)
         + 1j * (y / den).astype(float))
    if rho.ndim == 0:
        return LoopFunctions(complex(f), float(g))
    return LoopFunctions(f, g)
