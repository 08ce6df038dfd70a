import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from trapped_wave import special_functions as sf
from trapped_wave.errors import SingularityError


def test_values_at_origin():
    assert sf.cyl_bessel_j(0, 0) == 1
    assert sf.cyl_bessel_j(1, 0) == 0
    assert sf.sph_bessel(0, 0) == 1
    assert sf.sph_bessel(3, 0) == 0


def test_hankel_pole_at_origin():
    with pytest.raises(SingularityError):
        sf.cyl_hankel1(0, 0)
    with pytest.raises(SingularityError):
        sf.sph_hankel1(2, 0j)


def test_first_zero_of_j0():
    z = oracles.bisect(oracles.j0_series, 2.0, 3.0)
    assert abs(z - 2.404825557695773) < 1e-12
    assert abs(sf.cyl_bessel_j(0, z)) < 1e-10


def test_half_integer_hankel_closed_form():
    z = 1.0 + 0j
    ref = -1j * math.sqrt(2 / (math.pi * z.real)) * np.exp(1j * z)
    assert abs(sf.cyl_hankel1(0.5, z) - ref) < 1e-13


def test_cylindrical_wronskian_point():
    z = 2 - 0.5j
    w = sf.cyl_bessel_j(3, z) * sf.cyl_hankel1(3, z, derivative=True) \
        - sf.cyl_bessel_j(3, z, derivative=True) * sf.cyl_hankel1(3, z)
    assert abs(w - 2j / (math.pi * z)) < 1e-12 * abs(2 / (math.pi * z))


@pytest.mark.parametrize("nu,z", [(0, 5.0), (2, 3 + 1j), (7.5, 12 - 2j), (40, 30 + 0.5j),
                                  (0.5, 0.2 + 0.1j), (80, 20 - 1j)])
def test_against_mpmath(nu, z):
    j, h = sf.cyl_bessel_j(nu, z), sf.cyl_hankel1(nu, z)
    jr, hr = oracles.mp_jv(nu, z), oracles.mp_h1(nu, z)
    assert abs(j - jr) <= 1e-10 * abs(jr)
    assert abs(h - hr) <= 1e-9 * abs(hr)


def test_spherical_closed_forms():
    z = 2.0
    assert abs(sf.sph_bessel(0, z) - math.sin(z) / z) < 1e-14
    z = 1 - 0.2j
    assert abs(sf.sph_hankel1(0, z) - (-1j * np.exp(1j * z) / z)) < 1e-13


@pytest.mark.parametrize("f", [sf.sph_bessel, sf.sph_hankel1])
def test_spherical_recurrence(f):
    z = 10 + 1j
    lhs = f(6, z) + f(8, z)
    rhs = 15 / z * f(7, z)
    assert abs(lhs - rhs) <= 1e-9 * abs(rhs)


def test_spherical_against_mpmath():
    for ell, z in [(0, 3.0), (5, 2 + 1j), (30, 25 - 2j), (60, 40 + 0.3j)]:
        assert abs(sf.sph_bessel(ell, z) - oracles.mp_sph_j(ell, z)) <= 1e-10 * abs(oracles.mp_sph_j(ell, z))
        assert abs(sf.sph_hankel1(ell, z) - oracles.mp_sph_h(ell, z)) <= 1e-9 * abs(oracles.mp_sph_h(ell, z))


def test_log_ladders_reach_extreme_orders():
    lj, lh = sf.log_cyl_ladder(0.0, 150, np.array([0.5 + 0j]))
    # J_150(0.5) ~ 1e-350 and H_150(0.5) ~ 1e+345: both far outside double range
    assert np.isfinite(lj[150, 0]) and lj[150, 0].real < -700
    assert np.isfinite(lh[150, 0]) and lh[150, 0].real > 700
    with pytest.raises(OverflowError):
        sf.cyl_hankel1(150, 0.5)


def test_pair_matches_ladder():
    z = np.array([3.0 + 0.5j, 40 - 1j, 0.7 + 0j])
    lj, lh = sf.log_cyl_ladder(0.5, 61, z)
    pj, ph = sf.log_cyl_pair(0.5, 60, z)
    assert np.allclose(np.exp(pj - lj[60:62]), 1, atol=1e-12)
    assert np.allclose(np.exp(ph - lh[60:62]), 1, atol=1e-12)


def test_conjugation_symmetry():
    z = 4 + 2j
    assert abs(sf.cyl_bessel_j(3, np.conj(z)) - np.conj(sf.cyl_bessel_j(3, z))) < 1e-12 * abs(sf.cyl_bessel_j(3, z))


def test_invalid_orders():
    with pytest.raises(ValueError):
        sf.cyl_bessel_j(-1, 1.0)
    with pytest.raises(ValueError):
        sf.cyl_bessel_j(0.3, 1.0)
    with pytest.raises(ValueError):
        sf.sph_bessel(1.5, 1.0)


@settings(max_examples=60, deadline=None)
@given(nu2=st.integers(0, 160), r=st.floats(0.1, 50), th=st.floats(-math.pi, math.pi))
def test_wronskian_property(nu2, r, th):
    nu = nu2 / 2
    z = r * np.exp(1j * th)
    if abs(z.imag) > 3:
        z = complex(z.real, math.copysign(3, z.imag))
    w = sf.cyl_bessel_j(nu, z) * sf.cyl_hankel1(nu, z, derivative=True) \
        - sf.cyl_bessel_j(nu, z, derivative=True) * sf.cyl_hankel1(nu, z)
    ref = 2j / (math.pi * z)
    scale = abs(sf.cyl_bessel_j(nu, z) * sf.cyl_hankel1(nu, z, derivative=True)) + abs(ref)
    assert abs(w - ref) <= 1e-10 * scale


def test_airy_zeros_against_bisection():
    ref = oracles.airy_zeros_by_bisection(5)
    got = sf.airy_neg_zeros(5)
    assert np.allclose(got, ref, atol=1e-9)
    assert abs(got[1] - 4.08794944) < 1e-8


def test_airy_zero_range():
    with pytest.raises(ValueError):
        sf.airy_neg_zeros(0)
    with pytest.raises(ValueError):
        sf.airy_neg_zeros(51)
    z = sf.airy_neg_zeros(50)
    assert all(b > a for a, b in zip(z, z[1:]))
