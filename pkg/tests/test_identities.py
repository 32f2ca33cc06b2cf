import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgamma import identities
from kgamma.certifier import IDENTITY_GRID, LEMMA3_GRID
from kgamma.errors import DomainError, OrderError
from kgamma.identities import (
    IDENTITIES,
    check_digamma_multiplication,
    check_euler_product,
    check_gauss_multiplication,
    check_lemma3,
    check_polygamma_multiplication,
    check_power_kernel,
    check_recurrence,
)
from kgamma.kcore import BACKENDS
from kgamma.precision import PrecisionConfig

KS = (0.5, 1, 2, 3)
XS = IDENTITY_GRID.values()

LEMMA3_1_1 = 0.2386512185411911  # e^{-1/2} - e^{-1}


def test_registry():
    assert set(IDENTITIES) == {
        "recurrence", "gauss-mult", "euler-product", "polygamma-mult",
        "digamma-mult", "lemma3", "power-kernel",
    }


@pytest.mark.parametrize("backend", BACKENDS)
def test_recurrence_example(backend):
    out = check_recurrence(1.5, 0.5, backend)
    assert out.passed
    assert abs(out.residual) < 1e-20
    assert out.mode == "equality"


def test_gauss_example():
    out = check_gauss_multiplication(0.7, 2, 3)
    assert out.passed and abs(out.residual) < 1e-25


def test_euler_product_recovers_sqrt_pi():
    out = check_euler_product(1, 2)
    assert out.passed
    assert abs(math.exp(float(out.lhs.value)) - math.sqrt(math.pi)) < 1e-15


def test_lemma3_anchor():
    out = check_lemma3(1, 1)
    assert out.passed and out.mode == "positive"
    assert abs(float(out.residual) - LEMMA3_1_1) < 1e-15
    assert abs(float(out.residual) - (math.exp(-0.5) - math.exp(-1))) < 1e-15
    # residual also equals lhs - rhs
    assert abs(out.residual - (out.lhs.value - out.rhs.value)) < 1e-30


@pytest.mark.parametrize("k", KS)
def test_recurrence_sweep(k):
    assert all(check_recurrence(x, k).passed for x in XS)


@pytest.mark.parametrize("k, m", list(itertools.product(KS, range(2, 6))))
def test_gauss_sweep(k, m):
    for x in XS:
        out = check_gauss_multiplication(x, k, m)
        assert out.passed, (x, out.residual, out.threshold)


@pytest.mark.parametrize("k, m", list(itertools.product(KS, range(2, 7))))
def test_euler_product_sweep(k, m):
    assert check_euler_product(k, m).passed


@pytest.mark.parametrize("k, m, r", list(itertools.product(KS, range(2, 6), (1, 2, 3))))
def test_polygamma_mult_sweep(k, m, r):
    for x in XS:
        assert check_polygamma_multiplication(r, x, k, m).passed


@pytest.mark.parametrize("k, m", list(itertools.product(KS, range(2, 6))))
def test_digamma_mult_sweep(k, m):
    for x in XS:
        assert check_digamma_multiplication(x, k, m).passed


@pytest.mark.parametrize("n", range(1, 9))
def test_lemma3_sweep(n):
    for t in LEMMA3_GRID.values():
        out = check_lemma3(n, t)
        assert out.passed and out.residual > 0


@pytest.mark.parametrize("x, k, m", [(0.3, 0.5, 3), (4.0, 2.0, 2), (11.0, 1.0, 5)])
def test_series_backend_identities(x, k, m):
    assert check_gauss_multiplication(x, k, m, "series").passed
    assert check_digamma_multiplication(x, k, m, "series").passed
    assert check_polygamma_multiplication(2, x, k, m, "series").passed


def test_digamma_mult_is_derivative_of_gauss():
    # d/dx of the log-Gauss identity: m psi_k(mx) = m ln m / k + sum psi_k(x + sk/m)
    ctx = PrecisionConfig().ctx
    x, k, m = ctx.mpf(1.3), 0.7, 4
    h = ctx.mpf("1e-8")
    lo = check_gauss_multiplication(x - h, k, m)
    hi = check_gauss_multiplication(x + h, k, m)
    d_lhs = (hi.lhs.value - lo.lhs.value) / (2 * h)
    dig = check_digamma_multiplication(x, k, m)
    assert abs(d_lhs - m * dig.lhs.value) < 1e-14
    d_rhs = (hi.rhs.value - lo.rhs.value) / (2 * h)
    assert abs(d_rhs - m * dig.rhs.value) < 1e-14


@settings(max_examples=30, deadline=None)
@given(
    x=st.floats(min_value=1e-2, max_value=1e2),
    k=st.floats(min_value=0.1, max_value=5),
    m=st.integers(2, 6),
)
def test_gauss_random(x, k, m):
    assert check_gauss_multiplication(x, k, m).passed


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 40), t=st.floats(min_value=1e-6, max_value=300))
def test_lemma3_random(n, t):
    assert check_lemma3(n, t).passed


def test_broken_identity_is_detected(monkeypatch):
    real = identities._gauss_constant
    monkeypatch.setattr(identities, "_gauss_constant", lambda *a: real(*a) + 1e-20)
    assert not check_gauss_multiplication(0.7, 2, 3).passed


@pytest.mark.parametrize("r", range(7))
def test_power_kernel_identity(r):
    assert check_power_kernel(r, 2).passed


def test_input_validation():
    with pytest.raises(DomainError):
        check_gauss_multiplication(1, 1, 1)
    with pytest.raises(DomainError):
        check_euler_product(1, 2.5)
    with pytest.raises(OrderError):
        check_polygamma_multiplication(0, 1, 1, 2)
    with pytest.raises(DomainError):
        check_lemma3(0, 1)
    with pytest.raises(DomainError):
        check_lemma3(1, 0)
    with pytest.raises(DomainError):
        check_recurrence(-1, 1)


@pytest.mark.parametrize("k, m", list(itertools.product(KS, range(2, 7))))
def test_euler_product_is_gauss_at_k_over_m(k, m):
    # at x = k/m the Gauss product runs over Gamma_k(sk/m), s = 1..m, and
    # Gamma_k(k) = 1, so both identities must describe the same sum
    ctx = PrecisionConfig().ctx
    x = ctx.mpf(k) / m
    gauss = check_gauss_multiplication(x, k, m)
    euler = check_euler_product(k, m)
    const = identities._gauss_constant(ctx, x, ctx.mpf(k), m)
    tol = 10 * (gauss.rhs.abs_error_bound + euler.lhs.abs_error_bound + euler.rhs.abs_error_bound)
    assert abs(gauss.lhs.value) <= gauss.lhs.abs_error_bound
    assert abs((gauss.rhs.value - const) - euler.lhs.value) <= tol
    assert abs(-const - euler.rhs.value) <= tol
