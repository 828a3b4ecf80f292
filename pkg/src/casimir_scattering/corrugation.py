"""Lateral Casimir force between mirrors with sinusoidal corrugations.

Profiles ``h1 = a1 cos(kC x)`` and ``h2 = a2 cos(kC (x - b))`` are measured
from the mean planes ``z = 0`` and ``z = L``, both positive when the local
gap shrinks.  To second order the b-dependent part of the energy is

    dE = (A/2) G_C(kC) a1 a2 cos(kC b),     F_lat = -d(dE)/db

Two routes are offered:

* PFA: ``G_C`` is replaced by ``G_0 = (1/A) d^2E_PP/dL^2``, obtained by
  numerically differentiating the plane-plane energy;
* the second-order scattering formula

      dE = -hbar int dxi/2pi Tr[ e^{-KL}/D0 dR1 e^{-KL}/D0 dR2 ]

  reduced, for a single Fourier component, to an integral over ``xi`` and
  the 2-D wavevector ``k`` of 2x2 polarisation blocks coupling ``k`` and
  ``k + kC x``.

First-order amplitudes
----------------------
:class:`RayleighFirstOrder` gives the non-specular amplitude of a
vacuum/bulk interface raised by a small profile, per unit Fourier
component of the height, in the plane-wave basis used by the specular
amplitudes of :mod:`reflection`.  With ``kappa``, ``kappa_m`` at the
incident wavevector ``k``, primed quantities at the outgoing ``K``,
``phi`` the angle from ``k`` to ``K`` and ``chi = (eps - 1) xi^2``:

    TE<-TE  -2 chi kappa cos(phi)           / ((kappa+kappa_m)(kappa'+kappa_m'))
    TM<-TE  -2 chi xi kappa kappa_m' sin(phi) / ((kappa+kappa_m) Q')
    TE<-TM  -2 chi xi kappa kappa_m sin(phi)  / (Q (kappa'+kappa_m'))
    TM<-TM   2 chi kappa ((xi^2+chi) k K + xi^2 kappa_m kappa_m' cos(phi)) / (Q Q')

    Q = (xi^2 + chi) kappa + xi^2 kappa_m

These follow from the boundary-shift perturbation ``(eps - 1)(E_t.E_t' +
D_z D_z'/eps)`` of the flat interface fields, continued to ``omega = i xi``.
For ``K = k`` they reduce to ``2 kappa r_p``, the L-derivative of the
specular round trip, which is what makes ``G_C(0) = G_0`` hold for any
material.  For ``eps -> inf`` they reduce to the perfect-conductor values
(``-2 kappa cos phi``, ``-2 xi kappa sin phi / kappa'``, ``-2 xi sin phi``,
``2 (k K + xi^2 cos phi)/kappa'``).

The upper mirror is the lower one seen through ``z -> L - z``.  That
reflection keeps TE vectors and flips the sign of the TM basis vectors
relative to the propagation direction, so the polarisation-mixing entries of
mirror 2 enter with a minus sign.

Integration variables
---------------------
The two vacuum decay factors ``e^{-(kappa + kappa') L}`` concentrate the
integrand around the segment between ``k = 0`` and ``k = -kC x``.  Elliptic
coordinates with these foci, ``u = f sinh(mu)`` and ``nu``, with
``f = kC/2``, give

    k = (-f + w cos nu, u sin nu),  K = (f + w cos nu, u sin nu),
    w = sqrt(u^2 + f^2),            d^2k = (u^2 + f^2 sin^2 nu)/w du dnu

which is smooth, reduces to polar coordinates as ``kC -> 0`` and puts
``|k| + |K| = 2w`` in the exponent.
"""

from __future__ import annotations

import abc
import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .core import CONSTANTS, MirrorPair, dimensionless_rescale
from .lifshitz import free_energy
from .materials import MaterialModel, PlasmaModel
from .quadrature import (
    QuadratureSpec,
    integrate_interval,
    integrate_semi_infinite,
    matsubara_sum,
    second_derivative,
)
from .reflection import fresnel_from_response, material_response

__all__ = [
    "CorrugationSpec",
    "KernelResult",
    "Estimate",
    "SelectionRuleError",
    "PolarizationBlock",
    "FirstOrderReflection",
    "RayleighFirstOrder",
    "SpecularLimitFirstOrder",
    "plane_curvature",
    "pfa_energy_correction",
    "pfa_lateral_force",
    "branch_integrals",
    "response_kernel",
    "corrugation_energy",
    "lateral_force_beyond_pfa",
    "rho_curve",
    "zero_limit",
]


class SelectionRuleError(ValueError):
    """A first-order operator was asked to couple the wrong wavevectors."""


@dataclass(frozen=True)
class CorrugationSpec:
    """Amplitudes a1, a2 (m), corrugation wavevector kappa_C (1/m), mismatch b (m)."""

    a1: float
    a2: float
    kappa_C: float
    b: float = 0.0

    def __post_init__(self):
        if self.a1 < 0 or self.a2 < 0:
            raise ValueError("corrugation amplitudes must be >= 0")
        if not (math.isfinite(self.kappa_C) and self.kappa_C > 0):
            raise ValueError("kappa_C must be > 0")

    @property
    def wavelength(self) -> float:
        return 2 * math.pi / self.kappa_C

    def is_perturbative(self, L: float, lambda_P: float | None = None) -> bool:
        scales = [self.wavelength, L] + ([lambda_P] if lambda_P else [])
        return max(self.a1, self.a2) < 0.1 * min(scales)


def _check_validity(pair: MirrorPair, corr: CorrugationSpec):
    lp = [m.lambda_P for m in (pair.mirror1, pair.mirror2) if isinstance(m, PlasmaModel)]
    if not corr.is_perturbative(pair.geometry.separation_L, min(lp) if lp else None):
        warnings.warn("corrugation amplitudes are not small compared with "
                      "lambda_C, lambda_P and L; second-order results are unreliable",
                      RuntimeWarning, stacklevel=3)


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float


@dataclass(frozen=True)
class KernelResult:
    """``G_C`` and ``G_0`` in J/m^4, ``rho_C = G_C / G_0``."""

    kappa_C: float
    G_C: float
    G_C_error: float
    G_0: float
    G_0_error: float
    converged: bool = True

    @property
    def rho_C(self) -> float:
        return self.G_C / self.G_0

    @property
    def rho_C_error(self) -> float:
        return abs(self.rho_C) * (self.G_C_error / abs(self.G_C) + self.G_0_error / abs(self.G_0))


class PolarizationBlock(NamedTuple):
    """First-order amplitudes, ``out <- in``."""

    te_te: np.ndarray
    te_tm: np.ndarray
    tm_te: np.ndarray
    tm_tm: np.ndarray


class FirstOrderReflection(abc.ABC):
    """First-order non-specular reflection of one mirror.

    ``amplitudes`` works in units of a reference length ``ell``: ``xi`` is
    ``xi ell / c`` and wavevectors are multiplied by ``ell``.  It returns
    the coupling from incident ``k`` to outgoing ``K`` per unit Fourier
    amplitude of the height profile, in the mirror's own frame (medium
    below, vacuum above).  Only ``K - k = +-kappa_C x`` is allowed.
    """

    def __init__(self, material: MaterialModel, kappa_C: float):
        if not kappa_C > 0:
            raise ValueError("kappa_C must be > 0")
        self.material = material
        self.kappa_C = float(kappa_C)

    def with_kappa(self, kappa_C: float) -> "FirstOrderReflection":
        return type(self)(self.material, kappa_C)

    def check_selection_rule(self, k, K, reference_length: float):
        q = self.kappa_C * reference_length
        dx = np.abs(np.asarray(K[0]) - np.asarray(k[0]))
        dy = np.abs(np.asarray(K[1]) - np.asarray(k[1]))
        tol = 1e-9 * np.maximum(1.0, np.maximum(np.abs(K[0]), np.abs(k[0])))
        if np.any(np.abs(dx - q) > tol + 1e-9 * q) or np.any(dy > tol):
            raise SelectionRuleError(
                f"operator couples only k -> k +- {self.kappa_C:.6g} x (1/m)")

    def amplitudes(self, xi, k, K, reference_length: float) -> PolarizationBlock:
        self.check_selection_rule(k, K, reference_length)
        chi = material_response(self.material, xi, reference_length)
        return self._amplitudes(np.asarray(xi, dtype=float), k, K, chi)

    @abc.abstractmethod
    def _amplitudes(self, xi, k, K, chi) -> PolarizationBlock:
        ...


def _geometry(xi, k, K):
    kx, ky = k
    Kx, Ky = K
    kn = np.hypot(kx, ky)
    Kn = np.hypot(Kx, Ky)
    norm = kn * Kn
    safe = np.where(norm > 0, norm, 1.0)
    # at k = 0 or K = 0 the polarisation basis is degenerate; the summed
    # trace does not depend on the choice made here
    cos = np.where(norm > 0, (kx * Kx + ky * Ky) / safe, 1.0)
    sin = np.where(norm > 0, (kx * Ky - ky * Kx) / safe, 0.0)
    kappa = np.sqrt(kn * kn + xi * xi)
    kappa2 = np.sqrt(Kn * Kn + xi * xi)
    return kn, Kn, cos, sin, kappa, kappa2


class RayleighFirstOrder(FirstOrderReflection):
    """First-order Rayleigh amplitudes of a local bulk medium (see module docs)."""

    def _amplitudes(self, xi, k, K, chi) -> PolarizationBlock:
        kn, Kn, cos, sin, kap, kap2 = _geometry(xi, k, K)
        if np.all(np.isinf(chi)):
            return PolarizationBlock(
                -2.0 * kap * cos,
                -2.0 * xi * sin,
                -2.0 * xi * kap * sin / kap2,
                2.0 * (kn * Kn + xi * xi * cos) / kap2,
            )
        xi2 = xi * xi
        km = np.sqrt(kap * kap + chi)
        km2 = np.sqrt(kap2 * kap2 + chi)
        q = (xi2 + chi) * kap + xi2 * km
        q2 = (xi2 + chi) * kap2 + xi2 * km2
        s = kap + km
        s2 = kap2 + km2
        te_te = -2.0 * chi * kap * cos / (s * s2)
        tm_te = -2.0 * chi * xi * kap * km2 * sin / (s * q2)
        te_tm = -2.0 * chi * xi * kap * km * sin / (q * s2)
        tm_tm = 2.0 * chi * kap * ((xi2 + chi) * kn * Kn + xi2 * km * km2 * cos) / (q * q2)
        return PolarizationBlock(te_te, te_tm, tm_te, tm_tm)


class SpecularLimitFirstOrder(FirstOrderReflection):
    """``2 kappa r_p`` at the incident wavevector, no polarisation mixing.

    This is the ``kappa_C -> 0`` limit of any consistent first-order
    operator; substituting it tests the kernel machinery in isolation.
    """

    def _amplitudes(self, xi, k, K, chi) -> PolarizationBlock:
        kn = np.hypot(*k)
        kap = np.sqrt(kn * kn + xi * xi)
        r_te, r_tm = fresnel_from_response(xi, kn, chi)
        zero = np.zeros(np.broadcast(kap, r_te).shape)
        return PolarizationBlock(2 * kap * r_te, zero, zero, 2 * kap * r_tm)


# --- PFA route ------------------------------------------------------------

def plane_curvature(pair: MirrorPair, spec: QuadratureSpec = QuadratureSpec()) -> Estimate:
    """``d^2 E_PP / dL^2`` (J/m^2) by differentiating the plane-plane energy.

    The energy is evaluated 1000x tighter than ``spec`` (floored at 1e-13)
    so that stencil noise stays below the requested accuracy.
    """
    L0 = pair.geometry.separation_L
    e_spec = replace(spec, rel_tol=max(spec.rel_tol * 1e-3, 1e-13))

    def energy(L):
        # fixed reference length keeps the integrand identical across the stencil
        return free_energy(pair.with_separation(L), e_spec, reference_length=L0).energy

    d = second_derivative(energy, L0, rel_tol=spec.rel_tol)
    err = d.error_estimate + abs(d.value) * e_spec.rel_tol * 100
    if d.noise_limited:
        warnings.warn("plane curvature is noise limited", RuntimeWarning, stacklevel=2)
    return Estimate(d.value, err)


def pfa_energy_correction(pair: MirrorPair, corr: CorrugationSpec,
                          spec: QuadratureSpec = QuadratureSpec(),
                          curvature: Estimate | None = None) -> Estimate:
    """Second-order PFA energy correction (J), including the a1^2, a2^2 terms."""
    _check_validity(pair, corr)
    c = plane_curvature(pair, spec) if curvature is None else curvature
    shape = 0.5 * (corr.a1 ** 2 + corr.a2 ** 2) + corr.a1 * corr.a2 * math.cos(corr.kappa_C * corr.b)
    return Estimate(0.5 * c.value * shape, 0.5 * c.error * abs(shape))


def pfa_lateral_force(pair: MirrorPair, corr: CorrugationSpec,
                      spec: QuadratureSpec = QuadratureSpec(),
                      curvature: Estimate | None = None) -> Estimate:
    """``-d(dE_PFA)/db`` (N)."""
    _check_validity(pair, corr)
    c = plane_curvature(pair, spec) if curvature is None else curvature
    shape = corr.kappa_C * corr.a1 * corr.a2 * math.sin(corr.kappa_C * corr.b)
    return Estimate(0.5 * c.value * shape, 0.5 * c.error * abs(shape))


# --- scattering route -----------------------------------------------------

_MIX_SIGN = -1.0  # mirror 2 polarisation-mixing entries, see module docstring


def _kernel_integrand(pair: MirrorPair, dR1: FirstOrderReflection, dR2: FirstOrderReflection,
                      ell: float, L: float, q: float, branch: int):
    """Return ``inner(xi, u, nu)`` evaluating the trace density on a grid.

    Shapes: xi (n_xi,), u (n_u,), nu (n_nu,) -> (n_nu, n_u, n_xi).  The
    measure ``d^2k`` in elliptic coordinates is included.
    """
    f = 0.5 * q
    sgn = float(branch)

    def inner(xi, u, nu):
        xi = xi[None, None, :]
        u = u[None, :, None]
        nu = nu[:, None, None]
        w = np.sqrt(u * u + f * f)
        cn, sn = np.cos(nu), np.sin(nu)
        # branch +1: k -> K = k + q x ; branch -1 mirrors the picture in x
        kx = sgn * (-f + w * cn)
        Kx = sgn * (f + w * cn)
        ky = u * sn
        shape = np.broadcast(kx, ky, xi).shape
        kx, Kx, ky = (np.broadcast_to(a, shape) for a in (kx, Kx, ky))
        xib = np.broadcast_to(xi, shape)
        kn = np.hypot(kx, ky)
        Kn = np.hypot(Kx, ky)
        kap = np.sqrt(kn * kn + xib * xib)
        kap2 = np.sqrt(Kn * Kn + xib * xib)

        chi1 = material_response(pair.mirror1, xib, ell)
        chi2 = chi1 if pair.mirror2 is pair.mirror1 else material_response(pair.mirror2, xib, ell)
        r1te, r1tm = fresnel_from_response(xib, kn, chi1)
        r1te2, r1tm2 = fresnel_from_response(xib, Kn, chi1)
        if chi2 is chi1:
            r2te, r2tm, r2te2, r2tm2 = r1te, r1tm, r1te2, r1tm2
        else:
            r2te, r2tm = fresnel_from_response(xib, kn, chi2)
            r2te2, r2tm2 = fresnel_from_response(xib, Kn, chi2)
        e1 = np.exp(-kap * L)
        e2 = np.exp(-kap2 * L)
        a_te = e1 / (1.0 - r1te * r2te * e1 * e1)
        a_tm = e1 / (1.0 - r1tm * r2tm * e1 * e1)
        b_te = e2 / (1.0 - r1te2 * r2te2 * e2 * e2)
        b_tm = e2 / (1.0 - r1tm2 * r2tm2 * e2 * e2)

        m1 = dR1._amplitudes(xib, (kx, ky), (Kx, ky), chi1)
        m2 = dR2._amplitudes(xib, (Kx, ky), (kx, ky), chi2)
        trace = (b_te * m1.te_te * a_te * m2.te_te
                 + b_tm * m1.tm_tm * a_tm * m2.tm_tm
                 + _MIX_SIGN * (b_tm * m1.tm_te * a_te * m2.te_tm
                                + b_te * m1.te_tm * a_tm * m2.tm_te))
        measure = (u * u + f * f * sn * sn) / w
        return trace * measure

    return inner


def branch_integrals(pair: MirrorPair, kappa_C: float,
                     deltaR1: FirstOrderReflection | None = None,
                     deltaR2: FirstOrderReflection | None = None,
                     spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-6),
                     branches=(1,), reference_length: float | None = None):
    """Kernel contributions of the ``k -> k + kC x`` and ``k -> k - kC x`` paths.

    Returns a dict ``{branch: (value, error)}`` in J/m^4 plus the key
    ``"converged"``.  Each branch value is the full ``G_C`` when the two
    coincide, which reflection symmetry of the profiles guarantees.
    """
    deltaR1 = RayleighFirstOrder(pair.mirror1, kappa_C) if deltaR1 is None else deltaR1
    deltaR2 = RayleighFirstOrder(pair.mirror2, kappa_C) if deltaR2 is None else deltaR2
    for op in (deltaR1, deltaR2):
        if not math.isclose(op.kappa_C, kappa_C, rel_tol=1e-12):
            raise SelectionRuleError(
                f"operator built for kappa_C = {op.kappa_C:.6g}, kernel asked for {kappa_C:.6g}")

    geo = pair.geometry
    ell = geo.separation_L if reference_length is None else reference_length
    scaled = dimensionless_rescale(geo, ell)
    L = scaled.separation
    q = kappa_C * ell
    factor = CONSTANTS.hbar_c / ell ** 5

    outer_spec = replace(spec, scale=1.0 / L)
    mid_spec = replace(spec.tighter(), scale=1.0 / L)
    in_spec = spec.tighter(100.0)
    state = {"worst": 0.0, "converged": True}
    xi_chunk, u_chunk = 15, 30

    out = {}
    for branch in branches:
        integrand = _kernel_integrand(pair, deltaR1, deltaR2, ell, L, q, branch)

        def over_nu(xi, u):
            res = integrate_interval(lambda nu: integrand(xi, u, nu), 0.0, math.pi, in_spec)
            _note(state, res)
            # factor 2: nu in [pi, 2 pi] mirrors ky -> -ky
            return 2.0 * np.asarray(res.value).reshape(u.size, xi.size)

        def over_u(xi):
            def g(u):
                return np.concatenate([over_nu(xi, u[i:i + u_chunk])
                                       for i in range(0, u.size, u_chunk)], axis=0)
            res = integrate_semi_infinite(g, mid_spec)
            _note(state, res)
            return np.atleast_1d(res.value)

        def over_xi_nodes(xi):
            xi = np.asarray(xi, dtype=float)
            return np.concatenate([over_u(xi[i:i + xi_chunk]) for i in range(0, xi.size, xi_chunk)])

        tau = scaled.thermal_xi
        if tau == 0.0:
            res = integrate_semi_infinite(over_xi_nodes, outer_spec)
            total = res.value / (2.0 * math.pi)
        else:
            res = matsubara_sum(lambda n: over_xi_nodes(n * tau), outer_spec)
            total = res.value * tau / (2.0 * math.pi)
        _note(state, res)
        value = -total / (2.0 * math.pi) ** 2 * factor
        rel = res.error_estimate / max(abs(res.value), 1e-300) + state["worst"]
        out[branch] = (float(value), float(abs(value) * rel))
    out["converged"] = state["converged"]
    if not state["converged"]:
        warnings.warn("kernel quadrature did not reach the requested tolerance",
                      RuntimeWarning, stacklevel=2)
    return out


def _note(state, res):
    scale = float(np.max(np.abs(res.value))) if np.size(res.value) else 0.0
    if scale > 0:
        state["worst"] = max(state["worst"], res.error_estimate / scale)
    state["converged"] &= bool(res.converged)


def response_kernel(pair: MirrorPair, kappa_C: float,
                    deltaR1: FirstOrderReflection | None = None,
                    deltaR2: FirstOrderReflection | None = None,
                    spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-6),
                    curvature: Estimate | None = None) -> KernelResult:
    """``G_C(kappa_C)``, the independent PFA value ``G_0`` and their ratio.

    Operators default to :class:`RayleighFirstOrder` for each mirror.
    ``curvature`` may carry a precomputed ``d^2E_PP/dL^2`` to share it
    across a sweep.
    """
    br = branch_integrals(pair, kappa_C, deltaR1, deltaR2, spec)
    G_C, G_C_err = br[1]
    c = plane_curvature(pair, spec) if curvature is None else curvature
    A = pair.geometry.area_A
    return KernelResult(kappa_C, G_C, G_C_err, c.value / A, c.error / A, br["converged"])


def corrugation_energy(kernel: KernelResult, corr: CorrugationSpec, area: float,
                       shift: float = 0.0, kernel_minus: float | None = None) -> float:
    """b-dependent second-order energy (J) assembled from Fourier phases.

    Both profiles may be translated by ``shift``.  ``kernel_minus`` is the
    ``k -> k - kC x`` branch value; it defaults to ``G_C``.
    """
    q = corr.kappa_C
    if not math.isclose(q, kernel.kappa_C, rel_tol=1e-12):
        raise SelectionRuleError("kernel and corrugation use different kappa_C")
    jm = kernel.G_C if kernel_minus is None else kernel_minus
    h1p = 0.5 * corr.a1 * np.exp(-1j * q * shift)
    h2m = 0.5 * corr.a2 * np.exp(1j * q * (shift + corr.b))
    h1m, h2p = np.conj(h1p), np.conj(h2m)
    total = area * (h1p * h2m * kernel.G_C + h1m * h2p * jm)
    return float(total.real)


def lateral_force_beyond_pfa(pair: MirrorPair, corr: CorrugationSpec,
                             deltaR1: FirstOrderReflection | None = None,
                             deltaR2: FirstOrderReflection | None = None,
                             spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-6),
                             kernel: KernelResult | None = None) -> Estimate:
    """``(A/2) G_C a1 a2 kC sin(kC b)`` (N); reuse ``kernel`` when given."""
    _check_validity(pair, corr)
    if kernel is None:
        kernel = response_kernel(pair, corr.kappa_C, deltaR1, deltaR2, spec)
    elif not math.isclose(kernel.kappa_C, corr.kappa_C, rel_tol=1e-12):
        raise SelectionRuleError("kernel and corrugation use different kappa_C")
    shape = 0.5 * pair.geometry.area_A * corr.a1 * corr.a2 * corr.kappa_C * math.sin(corr.kappa_C * corr.b)
    return Estimate(kernel.G_C * shape, kernel.G_C_error * abs(shape))


def rho_curve(pair: MirrorPair, kappa_grid, deltaR1: FirstOrderReflection | None = None,
              deltaR2: FirstOrderReflection | None = None,
              spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-5)):
    """``rho_C`` on a grid of corrugation wavevectors (1/m).

    Returns a list of :class:`KernelResult`; ``G_0`` is computed once.
    """
    grid = np.asarray(kappa_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("kappa_grid must be a non-empty 1-D sequence")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("kappa_grid must be positive and strictly increasing")
    if grid[0] * pair.geometry.separation_L > 1e-3 * (1 + 1e-9):
        warnings.warn("first kappa_C node has kappa_C L > 1e-3; the PFA anchor is not resolved",
                      RuntimeWarning, stacklevel=2)
    curvature = plane_curvature(pair, spec)
    rows = []
    for q in grid:
        op1 = RayleighFirstOrder(pair.mirror1, q) if deltaR1 is None else deltaR1.with_kappa(q)
        op2 = RayleighFirstOrder(pair.mirror2, q) if deltaR2 is None else deltaR2.with_kappa(q)
        rows.append(response_kernel(pair, float(q), op1, op2, spec, curvature))
    return rows


def zero_limit(x1: float, y1: float, x2: float, y2: float, power: float = 2.0) -> float:
    """Richardson estimate of ``y(0)`` assuming ``y = y0 + c x^power``.

    ``rho_C - 1`` is even in ``kappa_C`` for the profiles used here, hence
    the default ``power = 2``.
    """
    if x1 == x2:
        raise ValueError("need two distinct abscissae")
    w1, w2 = x1 ** power, x2 ** power
    return (w2 * y1 - w1 * y2) / (w2 - w1)
