"""Casimir energies and forces between plane and corrugated mirrors.

The scattering (Lifshitz) formula is evaluated on the imaginary frequency
axis for perfect, plasma-model and tabulated mirrors, at zero or finite
temperature.  Corrugated mirrors are treated to second order in the
corrugation amplitudes, both within the proximity force approximation and
with the full non-specular response kernel.
"""

from .core import (
    CONSTANTS,
    Geometry,
    MirrorPair,
    PhysicalConstants,
    Polarization,
    ScaledGeometry,
    SpectralPoint,
    dimensionless_rescale,
)
from .corrugation import (
    CorrugationSpec,
    Estimate,
    FirstOrderReflection,
    KernelResult,
    RayleighFirstOrder,
    SelectionRuleError,
    SpecularLimitFirstOrder,
    branch_integrals,
    corrugation_energy,
    lateral_force_beyond_pfa,
    pfa_energy_correction,
    pfa_lateral_force,
    plane_curvature,
    response_kernel,
    rho_curve,
    zero_limit,
)
from .lifshitz import ForceResult, casimir_ideal, eta_curve, force, free_energy
from .materials import (
    GOLD_PLASMA_WAVELENGTH,
    OpticalTableError,
    PerfectReflector,
    PlasmaModel,
    TabulatedDielectric,
    epsilon_imag,
    kramers_kronig_to_imaginary_axis,
    load_optical_table,
    preset,
)
from .quadrature import (
    ConvergenceError,
    QuadratureSpec,
    integrate_interval,
    integrate_semi_infinite,
    matsubara_sum,
    second_derivative,
)
from .reflection import ReflectionAmplitudes, fresnel_imag, loop_functions

__version__ = "0.1.0"

__all__ = [
    "ForceResult",
    "casimir_ideal",
    "eta_curve",
    "force",
    "free_energy",
    "ReflectionAmplitudes",
    "fresnel_imag",
    "loop_functions",
    "CONSTANTS",
    "Geometry",
    "MirrorPair",
    "PhysicalConstants",
    "Polarization",
    "ScaledGeometry",
    "SpectralPoint",
    "dimensionless_rescale",
    "CorrugationSpec",
    "Estimate",
    "FirstOrderReflection",
    "KernelResult",
    "RayleighFirstOrder",
    "SelectionRuleError",
    "SpecularLimitFirstOrder",
    "branch_integrals",
    "corrugation_energy",
    "lateral_force_beyond_pfa",
    "pfa_energy_correction",
    "pfa_lateral_force",
    "plane_curvature",
    "response_kernel",
    "rho_curve",
    "zero_limit",
    "GOLD_PLASMA_WAVELENGTH",
    "OpticalTableError",
    "PerfectReflector",
    "PlasmaModel",
    "TabulatedDielectric",
    "epsilon_imag",
    "kramers_kronig_to_imaginary_axis",
    "load_optical_table",
    "preset",
    "ConvergenceError",
    "QuadratureSpec",
    "integrate_interval",
    "integrate_semi_infinite",
    "matsubara_sum",
    "second_derivative",
]
