import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgamma.precision import PrecisionConfig
from kgamma.errors import DomainError, GammaOverflowError, OrderError
from kgamma.kcore import (
    BACKENDS,
    KParams,
    digamma_k,
    gamma_k,
    ln_gamma_k,
    pochhammer_k,
    polygamma_k,
    psi_k,
)

from .conftest import (
    EULER_GAMMA,
    K2_TRIGAMMA_2,
    TETRAGAMMA_1,
    TRIGAMMA_1,
    brute_series,
)


def test_frozen_constants_match_brute_force():
    for p, a, step, frozen in [(2, 1.0, 1.0, TRIGAMMA_1), (3, 1.0, 1.0, -TETRAGAMMA_1 / 2)]:
        value, width = brute_series(p, a, step)
        assert abs(value - frozen) < width + 1e-15
    value, width = brute_series(2, 2.0, 2.0)
    assert abs(value - K2_TRIGAMMA_2) < width + 1e-15


@pytest.mark.parametrize("x, n, k, expected", [(5, 0, 2, 1), (3, 2, 2, 15), (2, 3, 1, 24)])
def test_pochhammer_k(x, n, k, expected):
    assert pochhammer_k(x, n, k) == expected


@pytest.mark.parametrize("x, n, k", [(0, 1, 1), (1, 1, -1), (1, -1, 1), (1, 1.5, 1)])
def test_pochhammer_k_rejects(x, n, k):
    with pytest.raises(DomainError):
        pochhammer_k(x, n, k)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("x, k, expected", [(2, 2, 1), (5, 1, 24), (6, 2, 8)])
def test_gamma_k_examples(backend, x, k, expected):
    res = gamma_k(x, k, backend)
    assert abs(res.value - expected) <= res.abs_error_bound
    assert abs(res.value - expected) < 1e-15 * expected
    assert res.backend == backend


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("x, k, expected", [(2, 2, 0.0), (5, 1, math.log(24)), (6, 2, math.log(8))])
def test_ln_gamma_k_examples(backend, x, k, expected):
    res = ln_gamma_k(x, k, backend)
    assert abs(res.value - expected) < 1e-15


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize(
    "x, k, expected",
    [
        (1, 1, -EULER_GAMMA),
        (2, 2, (math.log(2) - EULER_GAMMA) / 2),
        (2, 1, 1 - EULER_GAMMA),
    ],
)
def test_digamma_k_examples(backend, x, k, expected):
    res = digamma_k(x, k, backend)
    assert abs(res.value - expected) < 1e-15


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize(
    "r, x, k, expected",
    [(1, 1, 1, TRIGAMMA_1), (1, 2, 2, K2_TRIGAMMA_2), (2, 1, 1, TETRAGAMMA_1)],
)
def test_polygamma_k_examples(backend, r, x, k, expected):
    res = polygamma_k(r, x, k, backend)
    assert abs(res.value - expected) < 1e-12


def test_psi_k_order_zero_is_digamma():
    assert psi_k(0, 1.3, 0.7).value == digamma_k(1.3, 0.7).value
    assert psi_k(2, 1.3, 0.7).value == polygamma_k(2, 1.3, 0.7).value


@pytest.mark.parametrize(
    "call",
    [
        lambda: gamma_k(0, 1),
        lambda: gamma_k(1, 0),
        lambda: ln_gamma_k(-1, 1),
        lambda: digamma_k(1, -2),
        lambda: polygamma_k(1, 0, 1),
        lambda: gamma_k(float("inf"), 1),
        lambda: gamma_k("abc", 1),
    ],
)
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_order_errors():
    with pytest.raises(OrderError):
        polygamma_k(0, 1, 1)
    with pytest.raises(OrderError):
        psi_k(-1, 1, 1)
    with pytest.raises(OrderError):
        KParams(1, 2, 0)


def test_kparams_validation():
    KParams(0.5, 3, 2)
    for bad in [dict(k=0), dict(k=-1), dict(k=1, m=1), dict(k=1, m=2.5)]:
        with pytest.raises(DomainError):
            KParams(**bad)


def test_unknown_backend():
    with pytest.raises(ValueError):
        gamma_k(1, 1, "lanczos")


def test_gamma_k_overflow_signal():
    # Gamma_{1/2}(100) = 2^-199 * 199! ~ 4e312
    with pytest.raises(GammaOverflowError):
        gamma_k(100, 0.5)
    assert ln_gamma_k(100, 0.5).value > 709


@pytest.mark.parametrize("backend", ["reduction", "series"])
def test_classical_reduction_at_k1(backend):
    mpmath.mp.dps = 40
    try:
        for x in [0.01, 0.37, 1.0, 2.5, 13.0, 80.0]:
            assert abs(ln_gamma_k(x, 1, backend).value - mpmath.loggamma(x)) < 1e-28 * max(1, abs(mpmath.loggamma(x)))
            assert abs(digamma_k(x, 1, backend).value - mpmath.digamma(x)) < 1e-28 * max(1, abs(mpmath.digamma(x)))
            for r in (1, 2, 3):
                ref = mpmath.polygamma(r, x)
                assert abs(polygamma_k(r, x, 1, backend).value - ref) < 1e-28 * abs(ref)
    finally:
        mpmath.mp.dps = 15


CTX = PrecisionConfig().ctx
xs = st.floats(min_value=1e-2, max_value=1e2)
ks = st.sampled_from([0.25, 0.5, 0.7, 1.0, 2.0, 3.0])


@settings(max_examples=60, deadline=None)
@given(x=xs, k=ks)
def test_recurrence_log_space(x, k):
    lhs = ln_gamma_k(CTX.mpf(x) + k, k)
    base = ln_gamma_k(x, k)
    slack = lhs.abs_error_bound + base.abs_error_bound + 1e-32 * (1 + abs(lhs.value))
    assert abs(lhs.value - CTX.log(x) - base.value) <= slack


@settings(max_examples=40, deadline=None)
@given(x=st.floats(min_value=1e-2, max_value=50), k=ks)
def test_recurrence_direct(x, k):
    if ln_gamma_k(CTX.mpf(x) + k, k).value > 700:
        return
    lhs, base = gamma_k(CTX.mpf(x) + k, k), gamma_k(x, k)
    assert abs(lhs.value - x * base.value) <= lhs.abs_error_bound + x * base.abs_error_bound * 2


@settings(max_examples=40, deadline=None)
@given(x=xs, k=ks)
def test_digamma_recurrence(x, k):
    a, b = digamma_k(CTX.mpf(x) + k, k), digamma_k(x, k)
    assert abs(a.value - 1 / CTX.mpf(x) - b.value) <= 10 * (a.abs_error_bound + b.abs_error_bound)


@settings(max_examples=60, deadline=None)
@given(x=xs, k=ks, r=st.integers(1, 6))
def test_signs(x, k, r):
    assert gamma_k(min(x, 30), k).value > 0
    v = polygamma_k(r, x, k).value
    assert (v > 0) == (r % 2 == 1)


@settings(max_examples=40, deadline=None)
@given(x=xs, k=ks, r=st.integers(1, 5))
def test_reduction_series_agree(x, k, r):
    for fn in (lambda be: ln_gamma_k(x, k, be), lambda be: digamma_k(x, k, be), lambda be: polygamma_k(r, x, k, be)):
        a, b = fn("reduction"), fn("series")
        assert a.agrees_with(b)


@pytest.mark.parametrize("x, k", [(0.05, 0.5), (1.3, 0.7), (4.0, 2.0), (30.0, 3.0)])
def test_bounds_are_finite_and_nonnegative(x, k):
    for backend in BACKENDS:
        for res in (ln_gamma_k(x, k, backend), digamma_k(x, k, backend), polygamma_k(2, x, k, backend)):
            assert res.abs_error_bound >= 0
            assert mpmath.isfinite(res.abs_error_bound)


@pytest.mark.parametrize("x, k", [(0.3, 0.7), (1.0, 1.0), (2.5, 2.0), (7.0, 0.5)])
def test_derivative_consistency(x, k):
    # central differences of ln Gamma_k and psi_k; truncation ~ h^2 f'''/6
    x = CTX.mpf(x)
    h = CTX.mpf("1e-6") * x
    d1 = (ln_gamma_k(x + h, k).value - ln_gamma_k(x - h, k).value) / (2 * h)
    psi = digamma_k(x, k).value
    third = abs(polygamma_k(2, x, k).value)
    assert abs(d1 - psi) <= h**2 * third + 1e-25
    d2 = (digamma_k(x + h, k).value - digamma_k(x - h, k).value) / (2 * h)
    tri = polygamma_k(1, x, k).value
    assert abs(d2 - tri) <= h**2 * abs(polygamma_k(3, x, k).value) + 1e-25


def test_higher_precision_tightens_bounds(prec, prec50):
    a = polygamma_k(3, 0.4, 0.6, precision=prec)
    b = polygamma_k(3, 0.4, 0.6, precision=prec50)
    assert b.abs_error_bound < a.abs_error_bound * 1e-10
    assert a.agrees_with(b)
    assert b.digits_requested == 16
