import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from casimir_scattering import (
    CONSTANTS,
    ConvergenceError,
    Geometry,
    QuadratureSpec,
    casimir_ideal,
    integrate_interval,
    integrate_semi_infinite,
    matsubara_sum,
    second_derivative,
)

SPEC = QuadratureSpec(rel_tol=1e-10)


@pytest.mark.parametrize("kwargs", [dict(rel_tol=1e-15), dict(rel_tol=0.1),
                                    dict(max_subdivisions=4), dict(abs_tol=-1.0),
                                    dict(mapping="tan"), dict(scale=0.0)])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSpec(**kwargs)


@pytest.mark.parametrize("f, exact", [
    (lambda x: np.exp(-x), 1.0),
    (lambda x: x * np.exp(-2 * x), 0.25),
    (lambda x: x ** 3 / np.expm1(x), math.pi ** 4 / 15),
])
def test_semi_infinite_analytic(f, exact):
    r = integrate_semi_infinite(f, SPEC)
    assert r.converged
    assert r.value == pytest.approx(exact, rel=1e-10)
    assert r.error_estimate <= SPEC.rel_tol * abs(r.value)


def test_bose_integral_against_mpmath_reference():
    # pi^4/15 to 30 digits, computed with mpmath before the build
    reference = 6.49393940226682914909602217926
    r = integrate_semi_infinite(lambda x: x ** 3 / np.expm1(x), QuadratureSpec(rel_tol=1e-12))
    assert abs(r.value / reference - 1) < 1e-12


def test_vector_valued_integrand():
    a = np.array([1.0, 2.0, 4.0])
    r = integrate_semi_infinite(lambda x: np.exp(-np.outer(x, a)), SPEC)
    np.testing.assert_allclose(r.value, 1 / a, rtol=1e-10)


def test_budget_exhaustion_is_flagged():
    r = integrate_interval(lambda x: np.abs(np.sin(200 * x)) ** 0.1, 0.0, 10.0,
                           QuadratureSpec(rel_tol=1e-12, max_subdivisions=8))
    assert not r.converged and np.isfinite(r.value)


def test_non_finite_sample_raises():
    with pytest.raises(FloatingPointError):
        integrate_interval(lambda x: np.where(x > 0.3, np.nan, x), 0.0, 1.0)


def test_determinism():
    f = lambda x: np.exp(-x) * np.cos(3 * x) ** 2
    a = integrate_semi_infinite(f, SPEC)
    b = integrate_semi_infinite(f, SPEC)
    assert a.value == b.value and a.error_estimate == b.error_estimate


def test_tolerance_scaling_never_worse():
    f, exact = (lambda x: x ** 3 / np.expm1(x)), math.pi ** 4 / 15
    errs = [abs(integrate_semi_infinite(f, QuadratureSpec(rel_tol=t)).value - exact)
            for t in (1e-4, 5e-5, 2.5e-5, 1.25e-5)]
    for coarse, fine in zip(errs, errs[1:]):
        assert fine <= coarse * (1 + 1e-9) + 1e-15


def test_matsubara_geometric():
    r = matsubara_sum(lambda n: 0.5 ** n, SPEC)
    assert r.value == pytest.approx(1.5, rel=1e-10)


def test_matsubara_delta():
    assert matsubara_sum(lambda n: (n == 0).astype(float), SPEC).value == 0.5


def test_matsubara_exponential():
    r = matsubara_sum(lambda n: np.exp(-n), SPEC)
    assert r.value == pytest.approx(0.5 + 1 / math.expm1(1.0), rel=1e-10)
    assert r.error_estimate <= SPEC.rel_tol * r.value


def test_matsubara_slow_decay_uses_continuous_tail():
    a = 1e-4
    r = matsubara_sum(lambda n: np.exp(-a * n), QuadratureSpec(rel_tol=1e-9))
    exact = 0.5 + 1 / math.expm1(a)
    assert r.converged
    assert r.value == pytest.approx(exact, rel=1e-9)


def test_matsubara_no_decay_raises():
    with pytest.raises(ConvergenceError):
        matsubara_sum(lambda n: 1.0 / (1.0 + n), SPEC, max_terms=256, continuous_tail=False)


def test_second_derivative_cubic_exact():
    d = second_derivative(lambda L: L ** 3, 2.0)
    assert d.value == pytest.approx(12.0, rel=1e-10)
    assert not d.noise_limited


def test_second_derivative_inverse_cube():
    assert second_derivative(lambda L: L ** -3, 1.0).value == pytest.approx(12.0, rel=1e-6)


def test_second_derivative_casimir_energy():
    g = Geometry(1e-6, 1e-4)
    d = second_derivative(lambda L: casimir_ideal(g.with_separation(L)).energy, 1e-6)
    exact = -CONSTANTS.hbar_c * math.pi ** 2 * 1e-4 / (60 * 1e-6 ** 5)
    assert d.value == pytest.approx(exact, rel=1e-6)


def test_second_derivative_flags_noise():
    rng = np.random.default_rng(1)
    d = second_derivative(lambda L: L ** 2 + 1e-6 * rng.standard_normal(), 1.0, rel_tol=1e-12)
    assert d.noise_limited


@given(st.floats(0.05, 0.95))
def test_matsubara_geometric_property(q):
    r = matsubara_sum(lambda n: q ** n, QuadratureSpec(rel_tol=1e-11))
    assert r.value == pytest.approx(0.5 + q / (1 - q), rel=1e-10)
