import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimir_scattering import (
    CONSTANTS,
    PerfectReflector,
    PlasmaModel,
    SpectralPoint,
    TabulatedDielectric,
    fresnel_imag,
    loop_functions,
)
from casimir_scattering.reflection import fresnel_from_response


def textbook_fresnel(eps, xi, k):
    """Independent complex-frequency evaluation, omega = i xi."""
    w = 1j * xi / CONSTANTS.c
    kz = np.sqrt(w ** 2 - k ** 2 + 0j)
    kz = np.where(kz.imag < 0, -kz, kz)
    Kz = np.sqrt(eps * w ** 2 - k ** 2 + 0j)
    Kz = np.where(Kz.imag < 0, -Kz, Kz)
    return ((kz - Kz) / (kz + Kz)).real, ((eps * kz - Kz) / (eps * kz + Kz)).real


def test_perfect_reflector_unit_amplitudes():
    r = fresnel_imag(PerfectReflector(), SpectralPoint(1e15, 3e6))
    assert (r.r_TE, r.r_TM) == (-1.0, 1.0)
    assert r["TE"] * r["TE"] == 1.0 and r["TM"] * r["TM"] == 1.0


def test_vacuum_interface_reflects_nothing():
    te, tm = fresnel_from_response(0.7, 1.3, 0.0)
    assert te == 0.0 and tm == 0.0


def test_large_eps_tends_to_perfect():
    m = PlasmaModel(1e22)
    r = fresnel_imag(m, SpectralPoint(1e14, 1e5))
    assert r.r_TE == pytest.approx(-1, abs=1e-6) and r.r_TM == pytest.approx(1, abs=1e-6)


@pytest.mark.parametrize("xi, k", [(1e13, 0.0), (1e14, 1e6), (1e15, 1e7), (1e16, 3e5), (3e16, 1e8)])
def test_plasma_against_textbook(xi, k):
    m = PlasmaModel(1.37e16)
    r = fresnel_imag(m, SpectralPoint(xi, k))
    te, tm = textbook_fresnel(m.epsilon(xi), xi, k)
    assert r.r_TE == pytest.approx(float(te), rel=1e-10, abs=1e-14)
    assert r.r_TM == pytest.approx(float(tm), rel=1e-10, abs=1e-14)


def test_xi_must_be_positive():
    with pytest.raises(ValueError):
        fresnel_imag(PlasmaModel(1e16), SpectralPoint(0.0, 1e6))


def test_normal_incidence_degenerate():
    m = PlasmaModel(1.37e16)
    for xi in (1e13, 1e15, 1e17):
        r = fresnel_imag(m, SpectralPoint(xi, 0.0))
        assert abs(r.r_TE) == pytest.approx(abs(r.r_TM), rel=1e-13)


def test_passivity_random_samples(rng):
    n = 10_000
    xi = 10 ** rng.uniform(10, 18, n)
    k = 10 ** rng.uniform(2, 9, n) * rng.integers(0, 2, n)
    wp = 10 ** rng.uniform(13, 18, n)
    tab = TabulatedDielectric(np.geomspace(1e11, 1e18, 50), 1 + 1e4 * np.geomspace(1, 1e-7, 50) ** 1.3)
    for material_chi in ((wp / CONSTANTS.c) ** 2 * np.ones(n),
                         tab.chi_xi2(xi) / CONSTANTS.c ** 2):
        te, tm = fresnel_from_response(xi / CONSTANTS.c, k, material_chi)
        assert np.all(np.abs(te) <= 1) and np.all(np.abs(tm) <= 1)


@settings(max_examples=1000)
@given(xi=st.floats(1e-6, 1e6), k=st.floats(0, 1e6), eps_m1=st.floats(0, 1e12))
def test_passivity_property(xi, k, eps_m1):
    te, tm = fresnel_from_response(xi, k, eps_m1 * xi * xi)
    assert abs(te) <= 1 and abs(tm) <= 1


def test_loop_empty_cavity():
    lf = loop_functions(0.0, 1.0)
    assert lf.f == 0 and lf.g == 1


@given(st.floats(0.0, 0.999))
def test_loop_real_rho(rho):
    g = loop_functions(rho, 1.0).g
    assert g == pytest.approx((1 + rho) / (1 - rho), rel=1e-12)


def test_loop_identity_random(rng):
    n = 10_000
    rho = np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(size=n)) 
    lf = loop_functions(rho, np.ones(n))
    residual = np.abs(lf.g - (1 + lf.f + np.conj(lf.f)).real)
    assert np.all(residual <= 1e-14 * np.maximum(1.0, lf.g))
    assert np.all(lf.g >= 0)


@settings(max_examples=1000)
@given(r1=st.floats(0, 0.999), r2=st.floats(0, 0.999), ph=st.floats(0, 2 * np.pi),
       kzL=st.floats(0, 50))
def test_loop_identity_lossy_mirrors(r1, r2, ph, kzL):
    lf = loop_functions(r1 * r2 * np.exp(1j * ph), np.exp(2j * kzL))
    assert lf.g >= 0
    assert abs(lf.g - (1 + 2 * lf.f.real)) <= 1e-14 * max(1.0, lf.g)


def test_lasing_cavity_rejected():
    with pytest.raises(ValueError):
        loop_functions(1.0, 1.0)
