import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unruh_census.errors import DomainError, PoleError
from unruh_census.quadrature import QuadSpec
from unruh_census.specfun import (EvalResult, KsqTailTable, bessel_k_imag, bessel_k_imag_array,
                                  bessel_k_int, bessel_k_int_result, gamma_real, ksq_log_integral,
                                  ksq_segments, ksq_tail_cutoff)

from conftest import golden, golden_records


# ---------------------------------------------------------------- gamma

@pytest.mark.parametrize("fid, params, value, prec", golden_records("gamma_real"))
def test_gamma_golden(fid, params, value, prec):
    assert gamma_real(params["x"]) == pytest.approx(value, rel=1e-14)


def test_gamma_half_is_sqrt_pi():
    assert gamma_real(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma_real(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-15)
    assert gamma_real(4) == pytest.approx(6.0, rel=1e-15)


@pytest.mark.parametrize("x", [0, -1, -2, -7])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        gamma_real(x)


def test_gamma_recurrence_on_grid():
    for x in np.linspace(0.1, 20, 200):
        assert gamma_real(x + 1) == pytest.approx(x * gamma_real(x), rel=1e-12)


def test_gamma_reflection_negative_grid():
    for x in (-0.3, -1.7, -2.5, -4.2):
        assert gamma_real(x) * gamma_real(1 - x) == pytest.approx(math.pi / math.sin(math.pi * x), rel=1e-13)


# ---------------------------------------------------------------- K_n

@pytest.mark.parametrize("fid, params, value, prec", golden_records("bessel_k_int"))
def test_bessel_k_int_golden(fid, params, value, prec):
    assert bessel_k_int(params["order"], params["x"]) == pytest.approx(value, rel=1e-12)


def test_bessel_k_int_small_argument():
    for x in (1e-3, 1e-5, 1e-6):
        assert x * bessel_k_int(1, x) == pytest.approx(1.0, rel=10 * x * x * abs(math.log(x)) + 1e-12)


def test_bessel_k_int_decreasing():
    x = np.geomspace(1e-6, 700, 400)
    for n in (0, 1, 2):
        v = bessel_k_int(n, x)
        assert np.all(np.diff(v) < 0)


def test_bessel_k_int_recurrence():
    # K_2(x) = K_0(x) + 2 K_1(x) / x
    for x in (0.01, 0.5, 3.0, 40.0, 300.0):
        assert bessel_k_int(2, x) == pytest.approx(bessel_k_int(0, x) + 2 * bessel_k_int(1, x) / x, rel=1e-13)


def test_bessel_k_int_result_and_underflow():
    res = bessel_k_int_result(0, 1.0)
    assert isinstance(res, EvalResult)
    assert res.err_estimate >= 0 and res.evaluations >= 1
    assert not res.underflow
    assert bessel_k_int_result(0, 800.0).underflow


@pytest.mark.parametrize("x", [0.0, -1.0, math.inf, math.nan])
def test_bessel_k_int_domain(x):
    with pytest.raises(DomainError):
        bessel_k_int(0, x)


def test_bessel_k_int_rejects_order():
    with pytest.raises(DomainError):
        bessel_k_int(3, 1.0)


# ---------------------------------------------------------------- K_{i nu}

@pytest.mark.parametrize("fid, params, value, prec", golden_records("bessel_k_imag"))
def test_bessel_k_imag_golden(fid, params, value, prec):
    got = bessel_k_imag(params["nu"], params["x"])
    assert abs(got - value) <= 1e-10 * abs(value)


def test_bessel_k_imag_nu0_is_k0():
    x = np.geomspace(1e-4, 50, 60)
    assert np.allclose(bessel_k_imag(0.0, x), bessel_k_int(0, x), rtol=1e-12, atol=0)


def test_bessel_k_imag_bounded_by_k0():
    x = np.geomspace(1e-4, 50, 40)
    k0 = bessel_k_int(0, x)
    for nu in (0.25, 1.0, 3.0, 7.5, 20.0, 40.0):
        assert np.all(np.abs(bessel_k_imag(nu, x)) <= k0 * (1 + 1e-13))
    assert abs(bessel_k_imag(5.0, 0.01)) <= bessel_k_int(0, 0.01)


def test_bessel_k_imag_large_order_large_x():
    # K_{i nu}(x) for x >> nu behaves like sqrt(pi/2x) e^{-x} (1 + (4(i nu)^2 - 1)/(8x) + ...)
    x, nu = 50.0, 2.0
    mu4 = -4 * nu * nu
    series = 1 + (mu4 - 1) / (8 * x) + (mu4 - 1) * (mu4 - 9) / (2 * (8 * x) ** 2) \
        + (mu4 - 1) * (mu4 - 9) * (mu4 - 25) / (6 * (8 * x) ** 3)
    approx = math.sqrt(math.pi / (2 * x)) * math.exp(-x) * series
    assert bessel_k_imag(nu, x) == pytest.approx(approx, rel=1e-6)


def test_bessel_k_imag_small_x_asymptote():
    # K_{i nu}(x) ~ -sqrt(pi / (nu sinh(pi nu))) sin(nu ln(x/2) - arg Gamma(1 + i nu))
    import mpmath as mp
    nu, x = 2.0, 1e-6
    phase = float(mp.arg(mp.gamma(1 + 1j * nu)))
    approx = -math.sqrt(math.pi / (nu * math.sinh(math.pi * nu))) * math.sin(nu * math.log(x / 2) - phase)
    assert bessel_k_imag(nu, x) == pytest.approx(approx, rel=1e-9, abs=1e-12)


def test_bessel_k_imag_array_errors():
    vals, errs, evals = bessel_k_imag_array(3.0, np.array([0.1, 1.0, 10.0]))
    assert vals.shape == (3,) and np.all(errs >= 0) and evals >= 1


@pytest.mark.parametrize("nu, x", [(1.0, 0.0), (1.0, -2.0), (-1.0, 1.0)])
def test_bessel_k_imag_domain(nu, x):
    with pytest.raises(DomainError):
        bessel_k_imag(nu, x)


@settings(max_examples=40, deadline=None)
@given(nu=st.floats(0, 40), x=st.floats(1e-4, 50))
def test_bessel_k_imag_property_bound(nu, x):
    assert abs(bessel_k_imag(nu, x)) <= bessel_k_int(0, x) * (1 + 1e-12)


# ---------------------------------------------------------------- int K^2 dt/t

@pytest.mark.parametrize("fid, params, value, prec", golden_records("ksq_log_integral"))
def test_ksq_log_integral_golden(fid, params, value, prec):
    res = ksq_log_integral(params["nu"], params["x_lo"], params["x_hi"], QuadSpec(1e-11, 1e-300))
    assert abs(res.value - value) <= max(1e-10 * value, 3 * res.err_estimate)
    assert res.err_estimate <= 1e-10 * value


def test_ksq_log_integral_empty_interval():
    res = ksq_log_integral(2.0, 0.7, 0.7)
    assert res.value == 0.0 and res.err_estimate == 0.0


def test_ksq_log_integral_additive():
    spec = QuadSpec(1e-11, 1e-300)
    for nu in (0.0, 1.5, 8.0):
        a = ksq_log_integral(nu, 1e-3, 0.2, spec)
        b = ksq_log_integral(nu, 0.2, 3.0, spec)
        c = ksq_log_integral(nu, 1e-3, 3.0, spec)
        assert abs(a.value + b.value - c.value) <= 2 * (a.err_estimate + b.err_estimate + c.err_estimate) + 1e-15 * c.value


def test_ksq_log_integral_domain():
    with pytest.raises(DomainError):
        ksq_log_integral(1.0, 2.0, 1.0)
    with pytest.raises(DomainError):
        ksq_log_integral(1.0, 0.0, 1.0)


def test_ksq_tail_cutoff_bounds_tail():
    for tol in (1e-6, 1e-12, 1e-18):
        X = ksq_tail_cutoff(tol)
        tail = ksq_log_integral(0.0, X, math.inf, QuadSpec(1e-8, 1e-300)).value
        assert tail <= tol


def test_ksq_segments_sum_matches_single_call():
    bounds = [0.01, 0.1, 1.0, 5.0]
    vals, errs = ksq_segments(3.0, bounds)[:2]
    whole = ksq_log_integral(3.0, 0.01, 5.0, QuadSpec(1e-11, 1e-300))
    assert sum(vals) == pytest.approx(whole.value, rel=1e-10)


def test_ksq_tail_table_matches_direct():
    for nu in (0.0, 0.7, 6.0):
        table = KsqTailTable(nu, 1e-3, 25.0)
        for z in (1e-3, 0.05, 1.0, 4.0):
            g, err = table.tail(z)
            ref = ksq_log_integral(nu, z, 25.0, QuadSpec(1e-12, 1e-300))
            assert g == pytest.approx(ref.value, rel=1e-9, abs=1e-25)
        lo, hi = 0.3, 0.31
        direct = ksq_log_integral(nu, lo, hi, QuadSpec(1e-12, 1e-300)).value
        assert table.between(lo, hi)[0] == pytest.approx(direct, rel=1e-9)


def test_ksq_tail_table_extend_down():
    table = KsqTailTable(1.0, 0.1, 25.0)
    table.extend_down(1e-4)
    ref = ksq_log_integral(1.0, 1e-4, 25.0, QuadSpec(1e-12, 1e-300)).value
    assert table.tail(1e-4)[0] == pytest.approx(ref, rel=1e-9)


def test_golden_oracle_self_consistency():
    # K_{i0}(1) and K_0(1) are the same golden number
    assert golden("bessel_k_imag", nu=0.0, x=1.0) == golden("bessel_k_int", order=0, x=1.0)
