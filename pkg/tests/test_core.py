import dataclasses
import math

import pytest
from hypothesis import given, strategies as st

from casimir_scattering import (
    CONSTANTS,
    Geometry,
    MirrorPair,
    QuadratureSpec,
    SpectralPoint,
    dimensionless_rescale,
    free_energy,
    preset,
)


def test_constants_are_codata_and_frozen():
    assert CONSTANTS.hbar == pytest.approx(1.054571817e-34, rel=1e-12)
    assert CONSTANTS.c == 299792458.0
    assert CONSTANTS.kB == pytest.approx(1.380649e-23, rel=1e-12)
    with pytest.raises(dataclasses.FrozenInstanceError):
        CONSTANTS.c = 1.0


@pytest.mark.parametrize("kwargs, field", [
    (dict(separation_L=0.0), "separation_L"),
    (dict(separation_L=-1e-6), "separation_L"),
    (dict(separation_L=1e-6, area_A=0.0), "area_A"),
    (dict(separation_L=1e-6, temperature_T=-1.0), "temperature_T"),
])
def test_geometry_validation_names_field(kwargs, field):
    with pytest.raises(ValueError, match=field):
        Geometry(**kwargs)


def test_spectral_point_kappa():
    p = SpectralPoint(xi=3e14, k=2e6, pol="TM")
    kap = p.kappa()
    assert kap >= p.k and kap >= p.xi / CONSTANTS.c
    assert kap == pytest.approx(math.hypot(2e6, 3e14 / CONSTANTS.c))
    with pytest.raises(ValueError):
        SpectralPoint(xi=-1.0, k=0.0)


def test_rescale_identity_and_linear():
    s = dimensionless_rescale(Geometry(1e-6), 1e-6)
    assert s.separation == 1.0 and s.length_factor == 1e-6
    assert dimensionless_rescale(Geometry(0.5e-6), 1e-6).separation == pytest.approx(0.5, rel=1e-15)


def test_rescale_rejects_bad_reference():
    with pytest.raises(ValueError, match="reference_length"):
        dimensionless_rescale(Geometry(1e-6), 0.0)


@given(L=st.floats(1e-9, 1e-3), A=st.floats(1e-8, 1.0), T=st.one_of(st.just(0.0), st.floats(1e-6, 1000)),
       ell=st.floats(1e-9, 1e-3))
def test_rescale_round_trip(L, A, T, ell):
    g = dimensionless_rescale(Geometry(L, A, T), ell).unscale()
    assert g.separation_L == pytest.approx(L, rel=1e-15)
    assert g.area_A == pytest.approx(A, rel=1e-15)
    assert g.temperature_T == pytest.approx(T, rel=1e-15)


def test_energy_invariant_under_reference_length():
    gold = preset("gold-plasma")
    pair = MirrorPair(gold, gold, Geometry(300e-9, 1e-4))
    spec = QuadratureSpec(rel_tol=1e-9)
    e1 = free_energy(pair, spec, reference_length=300e-9).energy
    e2 = free_energy(pair, spec, reference_length=1e-6).energy
    assert e1 == pytest.approx(e2, rel=1e-8)
