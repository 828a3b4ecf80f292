import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from casimir_scattering import (
    GOLD_PLASMA_WAVELENGTH,
    CONSTANTS,
    OpticalTableError,
    PerfectReflector,
    PlasmaModel,
    TabulatedDielectric,
    epsilon_imag,
    kramers_kronig_to_imaginary_axis,
    load_optical_table,
    preset,
)

WP = 1.37e16


def lorentz_im(w, s=3.0, w0=2e15, g=3e14):
    return s * w0 ** 2 * g * w / ((w0 ** 2 - w ** 2) ** 2 + (g * w) ** 2)


def lorentz_imag_axis(xi, s=3.0, w0=2e15, g=3e14):
    return 1 + s * w0 ** 2 / (w0 ** 2 + xi ** 2 + g * xi)


def test_plasma_substitution():
    m = PlasmaModel(WP)
    assert epsilon_imag(m, WP) == pytest.approx(2.0, rel=1e-15)
    assert epsilon_imag(m, WP / 10) == pytest.approx(101.0, rel=1e-14)


def test_plasma_decreases_to_one():
    m = PlasmaModel(WP)
    xi = np.geomspace(1e10, 1e22, 200)
    eps = epsilon_imag(m, xi)
    assert np.all(np.diff(eps) < 0) and np.all(eps > 1)
    assert eps[-1] - 1 < 1e-10


@given(x1=st.floats(1e8, 1e20), f=st.floats(1.0001, 1e3))
def test_plasma_monotone_property(x1, f):
    m = PlasmaModel(WP)
    assert epsilon_imag(m, x1 * f) <= epsilon_imag(m, x1)
    assert epsilon_imag(m, x1) >= 1


def test_plasma_wavelength_round_trip():
    m = PlasmaModel.from_wavelength(137e-9)
    assert m.lambda_P == pytest.approx(137e-9, rel=1e-14)
    assert m.omega_P == pytest.approx(2 * math.pi * CONSTANTS.c / 137e-9)


def test_gold_preset():
    assert GOLD_PLASMA_WAVELENGTH == 137e-9
    assert preset("gold-plasma").lambda_P == pytest.approx(137e-9)
    assert isinstance(preset("perfect"), PerfectReflector)
    with pytest.raises(KeyError):
        preset("silver")


def test_perfect_reflector_is_infinite():
    assert math.isinf(epsilon_imag(PerfectReflector(), 1e15))


@pytest.mark.parametrize("xi", [0.0, -1.0])
def test_non_positive_xi_rejected(xi):
    with pytest.raises(ValueError):
        epsilon_imag(PlasmaModel(WP), xi)


def test_plasma_rejects_bad_frequency():
    with pytest.raises(ValueError):
        PlasmaModel(0.0)


def test_tabulated_validation():
    with pytest.raises(ValueError):
        TabulatedDielectric([1.0, 1.0], [2.0, 1.5])
    with pytest.raises(ValueError):
        TabulatedDielectric([1.0, 2.0], [2.0, 0.5])
    with pytest.warns(UserWarning):
        TabulatedDielectric([1.0, 2.0], [1.5, 2.0])


def test_tabulated_reproduces_plasma_nodes_and_power_law():
    grid = np.geomspace(1e13, 1e17, 40)
    plasma = PlasmaModel(WP)
    tab = TabulatedDielectric(grid, epsilon_imag(plasma, grid))
    xi = np.geomspace(1e11, 1e19, 300)
    # eps - 1 ~ xi^-2 is reproduced exactly by log-log interpolation and extrapolation
    np.testing.assert_allclose(tab.epsilon(xi), epsilon_imag(plasma, xi), rtol=1e-12)
    assert tab.chi_xi2(0.0) == pytest.approx(WP ** 2, rel=1e-12)


def test_tabulated_interpolation_monotone_between_nodes():
    grid = np.array([1e13, 1e14, 1e15, 1e16])
    tab = TabulatedDielectric(grid, [500.0, 40.0, 3.0, 1.0])
    xi = np.geomspace(1e13, 1e16, 2000)
    eps = tab.epsilon(xi)
    assert np.all(np.diff(eps) <= 0) and np.all(eps >= 1)


def test_tabulated_no_extrapolation():
    tab = TabulatedDielectric([1e13, 1e15], [10.0, 2.0], low_extrapolation="none",
                              high_extrapolation="none")
    with pytest.raises(ValueError):
        tab.epsilon(1e12)
    with pytest.raises(ValueError):
        tab.epsilon(1e16)


def test_kk_single_lorentzian():
    w = np.geomspace(1e12, 1e18, 4000)
    xi = np.geomspace(1e13, 1e17, 50)
    tab = kramers_kronig_to_imaginary_axis(w, lorentz_im(w), xi)
    np.testing.assert_allclose(tab.values, lorentz_imag_axis(xi), rtol=1e-2)


def test_kk_drude():
    wp, g = 1.37e16, 5e13
    w = np.geomspace(1e10, 1e19, 6000)
    im = wp ** 2 * g / (w * (w ** 2 + g ** 2))
    xi = np.geomspace(1e12, 1e17, 40)
    tab = kramers_kronig_to_imaginary_axis(w, im, xi)
    np.testing.assert_allclose(tab.values, 1 + wp ** 2 / (xi * (xi + g)), rtol=1e-2)


def test_kk_vacuum():
    w = np.geomspace(1e12, 1e18, 100)
    tab = kramers_kronig_to_imaginary_axis(w, np.zeros_like(w))
    assert np.all(tab.values == 1.0)


def test_kk_tail_sensitivity():
    xi = np.geomspace(1e13, 1e15, 30)
    w = np.geomspace(1e12, 1e19, 5000)
    base = lorentz_im(w)
    # double the absorption above 100 xi_max, leave the rest untouched
    changed = np.where(w > 100 * xi[-1], 2.0 * base, base)
    a = kramers_kronig_to_imaginary_axis(w, base, xi).values
    b = kramers_kronig_to_imaginary_axis(w, changed, xi).values
    assert np.max(np.abs(b / a - 1)) < 1e-3


def test_kk_grid_refinement():
    xi = np.geomspace(1e13, 1e17, 40)
    coarse = kramers_kronig_to_imaginary_axis(np.geomspace(1e12, 1e18, 600),
                                              lorentz_im(np.geomspace(1e12, 1e18, 600)), xi)
    fine_w = np.geomspace(1e12, 1e18, 2400)
    fine = kramers_kronig_to_imaginary_axis(fine_w, lorentz_im(fine_w), xi)
    assert np.max(np.abs(coarse.values / fine.values - 1)) < 5e-3


@pytest.mark.parametrize("omega, im", [([1.0, 0.5], [0.1, 0.1]), ([1.0, 2.0], [0.1, -0.1]),
                                       ([], [])])
def test_kk_rejects_bad_input(omega, im):
    with pytest.raises(ValueError):
        kramers_kronig_to_imaginary_axis(omega, im)


def _write(tmp_path, text, name="t.dat"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_format_a(tmp_path):
    p = _write(tmp_path, "#format: A\n# xi eps\n1e13 100\n1e14 10\n1e15 2\n")
    tab = load_optical_table(p)
    assert tab.grid.size == 3 and tab.values[1] == 10.0


def test_load_rejects_non_monotone_and_names_line(tmp_path):
    p = _write(tmp_path, "#format: A\n1e13 100\n1e15 10\n1e14 2\n")
    with pytest.raises(OpticalTableError, match="line 4"):
        load_optical_table(p)


@pytest.mark.parametrize("body, line", [
    ("#format: B\n1e13 1 2\n1e14 -1 2\n", 3),
    ("#format: B\n1e13 1 2\n1e14 1\n", 3),
    ("#format: A\n1e13 0.5\n1e14 1\n", 2),
    ("#format: A\n1e13 x\n1e14 1\n", 2),
])
def test_load_malformed_rows(tmp_path, body, line):
    with pytest.raises(OpticalTableError, match=f"line {line}"):
        load_optical_table(_write(tmp_path, body))


def test_load_requires_header(tmp_path):
    with pytest.raises(OpticalTableError):
        load_optical_table(_write(tmp_path, "1e13 2\n1e14 1.5\n"))


def test_load_n_k_lorentzian(tmp_path):
    w = np.geomspace(1e12, 1e18, 4000)
    eps_c = 1 + 3.0 * 4e30 / (4e30 - w ** 2 - 1j * 3e14 * w)
    nk = np.sqrt(eps_c)
    rows = "\n".join(f"{float(a)!r} {float(b.real)!r} {float(b.imag)!r}" for a, b in zip(w, nk))
    p = _write(tmp_path, "#format: B\n" + rows + "\n")
    tab = load_optical_table(p, format="n-and-k-real-axis")
    xi = np.geomspace(1e13, 1e17, 30)
    np.testing.assert_allclose(tab.epsilon(xi), lorentz_imag_axis(xi), rtol=1e-2)
