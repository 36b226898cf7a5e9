import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from spiked_kernel.oscillator import (
    energies,
    energy,
    make_params,
    psi,
    psi_record,
    psi_table,
)
from spiked_kernel.quadrature import QuadratureSpec, composite_rule

# frozen from oracles.psi_finite_sum(2.5, 3, 1.7)
PSI_A2_N3_X17 = 0.46549420176597787497


@pytest.mark.parametrize(
    "A, gamma, nu",
    [(0.75, 2.0, 0.5), (2.0, 2.5, 0.75), (6.0, 3.5, 1.25)],
)
def test_make_params_examples(A, gamma, nu):
    p = make_params(A)
    assert p.gamma == gamma and p.nu == nu
    assert p.a == pytest.approx(A ** 0.25, rel=1e-15)


@pytest.mark.parametrize("A", [0.0, -1.0, float("nan"), float("inf")])
def test_make_params_domain(A):
    with pytest.raises(ValueError):
        make_params(A)


@given(st.floats(1e-6, 1e6))
def test_params_invariants(A):
    p = make_params(A)
    assert p.gamma > 1.5
    assert 2 * p.nu == p.gamma - 1
    assert p.a ** 4 == pytest.approx(A, rel=4e-16 * 4)


def test_energy_examples():
    assert energy(make_params(0.75), 0) == 4.0
    assert energy(make_params(0.75), 10) == 44.0
    assert energy(make_params(2.0), 3) == 17.0
    e = energies(make_params(6.0), 50)
    assert e[0] == 7.0 and np.all(np.diff(e) > 0)
    with pytest.raises(ValueError):
        energy(make_params(2.0), -1)


def test_psi0_closed_form(p34):
    x = np.linspace(0.0, 8.0, 81)
    assert np.allclose(psi(p34, 0, x), math.sqrt(2) * x ** 1.5 * np.exp(-x * x / 2), rtol=1e-14, atol=0)


def test_psi_finite_sum_example():
    assert psi(make_params(2.0), 3, 1.7) == pytest.approx(PSI_A2_N3_X17, rel=1e-11)
    assert oracles.psi_finite_sum(2.5, 3, 1.7) == pytest.approx(PSI_A2_N3_X17, rel=1e-15)


@given(n=st.integers(0, 40), x=st.floats(0.01, 8.0))
def test_psi_matches_finite_sum_oracle(n, x):
    p = make_params(2.0)
    want = oracles.psi_finite_sum(p.gamma, n, x)
    # absolute scale: |psi_n| is O(1) near its turning point and tiny outside
    assert psi(p, n, x) == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_psi_at_origin(params):
    for n in (0, 1, 7, 100):
        assert psi(params, n, 0.0) == 0.0
    rec = psi_record(params, 4, 0.0)
    assert rec.value == 0.0 and rec.sign == 0


@pytest.mark.parametrize("n, x", [(170, 5.0), (500, 20.0), (2000, 40.0), (2000, 1.0)])
def test_large_index_against_mpmath(n, x):
    p = make_params(2.0)
    with mp.workdps(60):
        g, xm = mp.mpf(p.gamma), mp.mpf(x)
        lognorm = (mp.log(2) + mp.loggamma(n + 1) - mp.loggamma(n + g)) / 2
        want = float((-1) ** n * mp.exp(lognorm + (g - 0.5) * mp.log(xm) - xm * xm / 2) * mp.laguerre(n, g - 1, xm * xm))
    assert psi(p, n, x) == pytest.approx(want, rel=1e-10)


def test_sign_convention(params):
    x = 1e-3
    for n in range(12):
        rec = psi_record(params, n, x)
        assert rec.sign == (-1) ** n


def test_underflow_flag():
    rec = psi_record(make_params(2.0), 0, 40.0)
    assert rec.value == 0.0 and rec.underflow
    assert rec.log_abs == pytest.approx(0.5 * math.log(2) + 2.0 * math.log(40.0) - 800.0 - 0.5 * math.lgamma(2.5))
    assert not psi_record(make_params(2.0), 3, 1.7).underflow


def test_record_matches_value(params):
    for n, x in [(0, 0.5), (5, 2.0), (30, 6.0)]:
        rec = psi_record(params, n, x)
        assert rec.value == pytest.approx(psi(params, n, x), rel=1e-15)
        assert math.exp(rec.log_abs) * rec.sign == pytest.approx(rec.value, rel=1e-12)


def test_table_rows_match_psi(params):
    x = np.array([0.3, 1.0, 2.5])
    tab = psi_table(params, 10, x)
    assert tab.shape == (11, 3)
    for n in (0, 4, 10):
        assert np.array_equal(tab[n], psi(params, n, x))


def test_orthonormality(params):
    nodes, weights = composite_rule(QuadratureSpec(x_max=16.0))
    tab = psi_table(params, 20, nodes)
    gram = (tab * weights) @ tab.T
    assert np.max(np.abs(gram - np.eye(21))) <= 1e-8


def test_eigenrelation(params):
    h = 1e-2
    x = np.linspace(0.3, 6.0, 58)
    for n in range(11):
        u = [psi(params, n, x + k * h) for k in (-2, -1, 0, 1, 2)]
        upp = (-u[0] + 16 * u[1] - 30 * u[2] + 16 * u[3] - u[4]) / (12 * h * h)
        res = -upp + params.potential(x) * u[2] - energy(params, n) * u[2]
        assert np.max(np.abs(res)) <= 1e-5 * energy(params, n) * np.max(np.abs(u[2]))


def test_negative_inputs():
    p = make_params(2.0)
    with pytest.raises(ValueError):
        psi(p, -1, 1.0)
    with pytest.raises(ValueError):
        psi(p, 1, -1.0)
    with pytest.raises(ValueError):
        psi_table(p, -1, [1.0])
