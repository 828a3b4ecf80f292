"""Casimir energy and force between two plane mirrors.

The free energy per unit area is

    E/A = (hbar/2pi) int_0^inf dxi  sum_p int d^2k/(2pi)^2 ln(1 - r1^p r2^p e^{-2 kappa L})

at T = 0, and ``kB T sum'_n`` over Matsubara frequencies
``xi_n = 2 pi n kB T / hbar`` (n = 0 term halved) at T > 0.  Polar
coordinates are used for ``k`` and the inner integral is written in
``kappa`` since ``k dk = kappa dkappa``.

Sign convention: ``energy`` is negative for a bound pair.  ``force`` is
``dE/dL``, so a positive force means attraction; ``ForceResult.attractive``
states it explicitly.  ``pressure`` is ``force / A`` with the same sign.

======================  ==================  =========================
quantity                sign for attraction  ideal-mirror value
======================  ==================  =========================
energy  E               negative            -hbar c pi^2 A / (720 L^3)
force   F = dE/dL       positive            +hbar c pi^2 A / (240 L^4)
pressure F/A            positive            +hbar c pi^2 / (240 L^4)
======================  ==================  =========================
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .core import CONSTANTS, Geometry, MirrorPair, dimensionless_rescale
from .quadrature import (
    IntegralResult,
    QuadratureSpec,
    integrate_semi_infinite,
    matsubara_sum,
)
from .reflection import fresnel_from_response, material_response

__all__ = [
    "ForceResult",
    "casimir_ideal",
    "free_energy",
    "force",
    "eta_curve",
    "plane_energy_density",
]


@dataclass(frozen=True)
class ForceResult:
    """Outcome of one plane-plane evaluation (SI units).

    Either of ``energy`` or ``force`` may be None when only the other one
    was requested.  ``energy`` is the free energy when ``temperature > 0``.
    """

    energy: float | None = None
    energy_error: float = 0.0
    force: float | None = None
    force_error: float = 0.0
    pressure: float | None = None
    ratio_to_casimir: float | None = None
    temperature: float = 0.0
    converged: bool = True
    evaluations: int = 0

    @property
    def attractive(self) -> bool | None:
        return None if self.force is None else self.force > 0


def casimir_ideal(geometry: Geometry) -> ForceResult:
    """Closed-form energy and force for perfect mirrors at T = 0."""
    L, A = geometry.separation_L, geometry.area_A
    hc = CONSTANTS.hbar_c
    E = -hc * math.pi ** 2 * A / (720.0 * L ** 3)
    F = hc * math.pi ** 2 * A / (240.0 * L ** 4)
    return ForceResult(energy=E, force=F, pressure=F / A, ratio_to_casimir=1.0)


class _Counter:
    def __init__(self):
        self.n = 0
        self.worst_rel = 0.0
        self.converged = True

    def record(self, res: IntegralResult):
        self.n += res.evaluations
        scale = float(np.max(np.abs(res.value))) if np.size(res.value) else 0.0
        if scale > 0:
            self.worst_rel = max(self.worst_rel, res.error_estimate / scale)
        self.converged &= bool(res.converged)


def _k_integrand(pair: MirrorPair, ell: float, L: float, which: str):
    """Inner integrand factory: function of (x, xi-batch) -> sum over polarisations.

    The inner variable is ``x = kappa - xi >= 0``; the measure ``kappa dkappa``
    is included.  ``which`` selects the energy (``ln(1 - rho)``) or the
    L-derivative (``2 kappa rho/(1 - rho)``).
    """
    m1, m2 = pair.mirror1, pair.mirror2

    def make(xi: np.ndarray):
        chi1 = material_response(m1, xi, ell)
        chi2 = chi1 if m2 is m1 else material_response(m2, xi, ell)

        def f(x: np.ndarray) -> np.ndarray:
            kappa = x[:, None] + xi[None, :]
            k = np.sqrt(x[:, None] * (x[:, None] + 2.0 * xi[None, :]))
            xi_b = np.broadcast_to(xi[None, :], kappa.shape)
            r1te, r1tm = fresnel_from_response(xi_b, k, chi1[None, :])
            if chi2 is chi1:
                r2te, r2tm = r1te, r1tm
            else:
                r2te, r2tm = fresnel_from_response(xi_b, k, chi2[None, :])
            decay = np.exp(-2.0 * kappa * L)
            rho_te = r1te * r2te * decay
            rho_tm = r1tm * r2tm * decay
            if which == "energy":
                val = np.log1p(-rho_te) + np.log1p(-rho_tm)
            else:
                val = 2.0 * kappa * (rho_te / (1.0 - rho_te) + rho_tm / (1.0 - rho_tm))
            return kappa * val

        return f

    return make


def plane_energy_density(pair: MirrorPair, spec: QuadratureSpec = QuadratureSpec(),
                         which: str = "energy", reference_length: float | None = None):
    """Dimensionless energy (or dE/dL) per area, with diagnostics.

    Returns ``(value, error, scaled_geometry, counter)``; multiply ``value``
    by ``scaled.energy_per_area_factor`` (and divide by ``ell`` for the
    derivative) to obtain SI.
    """
    geo = pair.geometry
    ell = geo.separation_L if reference_length is None else reference_length
    scaled = dimensionless_rescale(geo, ell)
    L = scaled.separation
    counter = _Counter()
    make = _k_integrand(pair, ell, L, which)
    inner_spec = replace(spec.tighter(), scale=1.0 / L)
    outer_spec = replace(spec, scale=1.0 / L)

    def inner(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        res = integrate_semi_infinite(make(xi), inner_spec)
        counter.record(res)
        return np.atleast_1d(res.value) / (2.0 * math.pi)

    tau = scaled.thermal_xi
    if tau == 0.0:
        res = integrate_semi_infinite(inner, outer_spec)
        value = res.value / (2.0 * math.pi)
    else:
        res = matsubara_sum(lambda n: inner(n * tau), outer_spec)
        value = res.value * tau / (2.0 * math.pi)
    counter.n += res.evaluations
    counter.converged &= bool(res.converged)
    error = abs(value) * (res.error_estimate / max(abs(res.value), 1e-300) + counter.worst_rel)
    return float(value), float(error), scaled, counter


def _warn_if(counter: _Counter, what: str):
    if not counter.converged:
        warnings.warn(f"{what}: quadrature did not reach the requested tolerance",
                      RuntimeWarning, stacklevel=3)


def free_energy(pair: MirrorPair, spec: QuadratureSpec = QuadratureSpec(),
                reference_length: float | None = None) -> ForceResult:
    """Casimir (free) energy of the pair from the imaginary-frequency formula."""
    value, err, scaled, counter = plane_energy_density(pair, spec, "energy", reference_length)
    _warn_if(counter, "free_energy")
    factor = scaled.energy_per_area_factor * pair.geometry.area_A
    return ForceResult(energy=value * factor, energy_error=err * factor,
                       temperature=pair.geometry.temperature_T,
                       converged=counter.converged, evaluations=counter.n)


def force(pair: MirrorPair, spec: QuadratureSpec = QuadratureSpec(),
          reference_length: float | None = None) -> ForceResult:
    """``F = dE/dL`` from the analytically differentiated integrand."""
    value, err, scaled, counter = plane_energy_density(pair, spec, "force", reference_length)
    _warn_if(counter, "force")
    factor = scaled.energy_per_area_factor / scaled.reference_length * pair.geometry.area_A
    F = value * factor
    F_cas = casimir_ideal(pair.geometry).force
    return ForceResult(force=F, force_error=err * factor, pressure=F / pair.geometry.area_A,
                       ratio_to_casimir=F / F_cas, temperature=pair.geometry.temperature_T,
                       converged=counter.converged, evaluations=counter.n)


def eta_curve(pair: MirrorPair, L_grid, spec: QuadratureSpec = QuadratureSpec()):
    """Reduction factor ``F/F_Cas`` on a grid of separations.

    Returns a list of ``(L, eta_F, error)`` tuples.
    """
    L_grid = np.asarray(L_grid, dtype=float)
    if L_grid.ndim != 1 or L_grid.size == 0:
        raise ValueError("L_grid must be a non-empty 1-D sequence")
    if np.any(L_grid <= 0) or np.any(np.diff(L_grid) <= 0):
        raise ValueError("L_grid must be positive and strictly increasing")
    rows = []
    for L in L_grid:
        res = force(pair.with_separation(float(L)), spec)
        F_cas = casimir_ideal(pair.geometry.with_separation(float(L))).force
        rows.append((float(L), res.ratio_to_casimir, res.force_error / F_cas))
    return rows
