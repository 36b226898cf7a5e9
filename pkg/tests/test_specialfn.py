import math
import warnings
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import eval_genlaguerre

import oracles
from spiked_kernel.checks import bessel_quotient_integral
from spiked_kernel.specialfn import (
    AccuracyWarning,
    bessel_i_exp,
    bessel_i_scaled,
    bessel_k_exp,
    bessel_k_scaled,
    bessel_pair_scaled,
    hyp1f1_unit,
    laguerre,
    laguerre_1f1,
    log_gamma,
    log_pochhammer,
    pochhammer,
    wronskian_residual,
)

# frozen from tests/oracles.py and mpmath at 40 digits
LN_SQRT_PI = 0.57236494292470008707
IE_HALF_1 = 0.34495131388824462599
KE_HALF_1 = 1.2533141373155002512
F_5_25_13 = Fraction(-1767536, 10828125)

ORDERS = (0.0, 0.3, 0.5, 0.75, 1.0, 1.25, 2.5, 7.0, 7.3, 20.0)
SPEC_ORDERS = (0.3, 0.5, 0.75, 1.25, 2.5, 7.0)


# ---------------------------------------------------------------- gamma family

@pytest.mark.parametrize("x, want", [(1.0, 0.0), (2.0, 0.0), (0.5, LN_SQRT_PI)])
def test_log_gamma_examples(x, want):
    assert log_gamma(x) == pytest.approx(want, abs=1e-15)


def test_log_gamma_against_high_precision():
    for x in np.geomspace(0.1, 300.0, 57):
        want = float(mp.loggamma(mp.mpf(float(x))))
        assert abs(log_gamma(x) - want) <= 1e-13 * max(1.0, abs(want))


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_log_gamma_domain(bad):
    with pytest.raises(ValueError):
        log_gamma(bad)


def test_pochhammer():
    assert pochhammer(2.5, 0) == 1.0
    assert pochhammer(2.5, 3) == pytest.approx(2.5 * 3.5 * 4.5, rel=1e-14)
    assert log_pochhammer(1.0, 10) == pytest.approx(math.log(math.factorial(10)), rel=1e-14)


# ---------------------------------------------------------------- Laguerre

def test_1f1_examples():
    assert laguerre_1f1(0, 3.7, 12.0) == 1.0
    assert laguerre_1f1(1, 2.0, 2.0) == pytest.approx(0.0, abs=1e-15)
    assert laguerre_1f1(5, 2.5, 1.3) == pytest.approx(float(F_5_25_13), rel=1e-12)


def test_1f1_exact_oracle_frozen_value():
    assert oracles.hyp1f1_terminating(5, Fraction(5, 2), Fraction(13, 10)) == F_5_25_13


@given(
    n=st.integers(0, 30),
    g=st.fractions(Fraction(11, 10), Fraction(8), max_denominator=20),
    z=st.fractions(Fraction(0), Fraction(20), max_denominator=20),
)
def test_1f1_matches_exact_finite_sum(n, g, z):
    want = float(oracles.hyp1f1_terminating(n, g, z))
    got = laguerre_1f1(n, float(g), float(z))
    # scale by the largest partial term, the natural conditioning of the sum
    scale = float(sum(abs(t) for t in _terms(n, g, z)))
    assert abs(got - want) <= 1e-12 * scale


def _terms(n, g, z):
    term = Fraction(1)
    for k in range(n + 1):
        yield term
        term = term * (k - n) * z / ((g + k) * (k + 1))


def test_laguerre_against_scipy():
    z = np.linspace(0.0, 30.0, 31)
    for n in (0, 1, 5, 20):
        for alpha in (1.0, 1.5, 2.5):
            assert np.allclose(laguerre(n, alpha, z), eval_genlaguerre(n, alpha, z), rtol=1e-10, atol=1e-10)


def test_hyp1f1_unit():
    assert hyp1f1_unit(2.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-15)
    for g, z in [(2.5, 2.0), (3.5, 30.0), (1.2, 0.01)]:
        assert hyp1f1_unit(g, z) == pytest.approx(float(mp.hyp1f1(1, g, z)), rel=1e-13)
    with pytest.raises(ValueError):
        hyp1f1_unit(2.0, -1.0)


# ---------------------------------------------------------------- Bessel values

def test_half_order_closed_forms():
    assert bessel_i_scaled(0.5, 1.0) == pytest.approx(IE_HALF_1, rel=1e-14)
    assert bessel_k_scaled(0.5, 1.0) == pytest.approx(KE_HALF_1, rel=1e-14)
    z = np.geomspace(1e-2, 1e3, 30)
    assert np.allclose(bessel_i_scaled(0.5, z), -np.expm1(-2 * z) / np.sqrt(2 * np.pi * z), rtol=1e-13)
    assert np.allclose(bessel_k_scaled(0.5, z), np.sqrt(np.pi / (2 * z)), rtol=1e-13)


def test_frozen_half_order_values_match_oracle():
    assert oracles.i_scaled(0.5, 1.0) == pytest.approx(IE_HALF_1, rel=1e-15)
    assert oracles.k_scaled(0.5, 1.0) == pytest.approx(KE_HALF_1, rel=1e-15)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.25, 7.0])
def test_small_argument_limit(nu):
    z = 1e-8
    lead = bessel_i_scaled(nu, z) * math.exp(z) * math.gamma(nu + 1) * (2 / z) ** nu
    assert lead == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("nu", ORDERS)
def test_i_against_series_oracle(nu):
    for z in np.geomspace(1e-2, 1e3, 13):
        assert bessel_i_scaled(nu, z) == pytest.approx(oracles.i_scaled(nu, z), rel=1e-10)


@pytest.mark.parametrize("nu", ORDERS)
def test_k_against_reflection_oracle(nu):
    for z in np.geomspace(1e-2, 150.0, 11):
        assert bessel_k_scaled(nu, z) == pytest.approx(oracles.k_scaled(nu, z), rel=1e-10)


@pytest.mark.parametrize("nu", [0.99995, 1.00005, 1.99995, 2.00005, 2.0001])
def test_near_integer_orders(nu):
    for z in (0.05, 1.0, 8.0, 40.0):
        assert bessel_k_scaled(nu, z) == pytest.approx(oracles.k_scaled(nu, z), rel=1e-10)


def test_large_argument_k_against_mpmath():
    for nu in SPEC_ORDERS:
        for z in (300.0, 1e3, 1e4):
            want = float(mp.besselk(nu, z) * mp.exp(z))
            assert bessel_k_scaled(nu, z) == pytest.approx(want, rel=1e-10)


def test_exponent_pairs():
    m, e = bessel_i_exp(1.25, 800.0)
    assert e == 800.0 and m == bessel_i_scaled(1.25, 800.0)
    m, e = bessel_k_exp(20.0, 1e-3)
    want = mp.besselk(20, mp.mpf("1e-3"))
    assert math.log(m) + e == pytest.approx(float(mp.log(want)), rel=1e-12)


def test_pair_type():
    pair = bessel_pair_scaled(0.5, 1.0)
    assert (pair.nu, pair.z) == (0.5, 1.0)
    assert pair.ie > 0 and pair.ke > 0


@pytest.mark.parametrize("nu, z", [(-0.5, 1.0), (1.0, 0.0), (1.0, -2.0), (float("inf"), 1.0)])
def test_bessel_domain_errors(nu, z):
    with pytest.raises(ValueError):
        bessel_i_scaled(nu, z)
    with pytest.raises(ValueError):
        bessel_k_scaled(nu, z)


def test_accuracy_warning_outside_envelope():
    with pytest.warns(AccuracyWarning):
        bessel_i_scaled(100.0, 2.0)
    with pytest.warns(AccuracyWarning):
        bessel_k_scaled(1.0, 1e9)


def test_no_warning_inside_envelope():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bessel_i_scaled(7.0, np.geomspace(1e-2, 1e3, 20))
        bessel_k_scaled(7.0, np.geomspace(1e-2, 1e3, 20))


# ---------------------------------------------------------------- identities

@pytest.mark.parametrize("nu", SPEC_ORDERS)
def test_wronskian(nu):
    z = np.geomspace(1e-2, 1e3, 61)
    assert np.max(np.abs(wronskian_residual(nu, z))) <= 1e-10


@pytest.mark.parametrize("nu", SPEC_ORDERS)
def test_quotient_derivative(nu):
    # d/dz (K/I) = -1/(z I^2), written with scaled values
    for z in (0.2, 1.0, 5.0):
        h = 1e-4 * z

        def q(t):
            return bessel_k_scaled(nu, t) / bessel_i_scaled(nu, t) * math.exp(-2 * t)

        fd = (q(z + h) - q(z - h)) / (2 * h)
        want = -math.exp(-2 * z) / (z * bessel_i_scaled(nu, z) ** 2)
        assert fd == pytest.approx(want, rel=1e-6)


@pytest.mark.parametrize("nu", SPEC_ORDERS)
def test_quotient_integral_representation(nu):
    for z in (0.05, 1.0, 10.0):
        want = bessel_k_scaled(nu, z) / bessel_i_scaled(nu, z)
        assert bessel_quotient_integral(nu, z) == pytest.approx(want, rel=1e-8)


@pytest.mark.parametrize("nu", ORDERS)
def test_monotonicity(nu):
    z = np.geomspace(1e-2, 1e3, 200)
    log_i = np.log(bessel_i_scaled(nu, z)) + z
    log_k = np.log(bessel_k_scaled(nu, z)) - z
    assert np.all(np.diff(log_i) > 0)
    assert np.all(np.diff(log_k) < 0)


@given(nu=st.floats(0.0, 30.0), z=st.floats(1e-3, 1e4))
def test_scaled_values_positive(nu, z):
    assert bessel_i_scaled(nu, z) > 0
    assert bessel_k_scaled(nu, z) > 0


@given(nu=st.floats(1.0, 25.0), z=st.floats(1e-2, 1e3))
def test_order_recurrences(nu, z):
    # I_{nu-1} - I_{nu+1} = (2 nu / z) I_nu and K_{nu+1} - K_{nu-1} = (2 nu / z) K_nu
    i_m, i_0, i_p = (bessel_i_scaled(nu + d, z) for d in (-1, 0, 1))
    k_m, k_0, k_p = (bessel_k_scaled(nu + d, z) for d in (-1, 0, 1))
    assert i_m - i_p == pytest.approx(2 * nu / z * i_0, rel=1e-9, abs=1e-300)
    assert k_p - k_m == pytest.approx(2 * nu / z * k_0, rel=1e-9)


@given(nu=st.floats(0.05, 10.0), z=st.floats(1e-2, 1e3))
def test_wronskian_property(nu, z):
    assert abs(wronskian_residual(nu, z)) <= 1e-10
