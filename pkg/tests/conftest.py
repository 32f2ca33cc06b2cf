import math

import pytest

from kgamma.precision import PrecisionConfig

# Frozen from brute-force partial sums of sum 1/(a + n)^p (2e6 terms) with the
# tail bracketed between the integrals from N-1 and N; bracket width < 2e-13.
TRIGAMMA_1 = 1.6449340668482264  # psi'(1) = pi^2/6
TRIGAMMA_1_5 = 0.9348022005446793  # psi'(3/2)
TRIGAMMA_2 = 0.6449340668482265  # psi'(2)
TETRAGAMMA_1 = -2.4041138063191885  # psi''(1) = -2 zeta(3)
K2_TRIGAMMA_2 = 0.4112335167120566  # psi_2'(2) = (1/4) sum 1/(n+1)^2
EULER_GAMMA = 0.5772156649015329


def brute_series(p, a=1.0, step=1.0, n_terms=200_000):
    """sum_{n>=0} (a + n step)^-p by direct summation plus the midpoint of
    the integral bracket on the tail.  Returns (value, half-width)."""
    s = math.fsum((a + n * step) ** -p for n in range(n_terms))
    lo = (a + n_terms * step) ** (1 - p) / ((p - 1) * step)
    hi = (a + (n_terms - 1) * step) ** (1 - p) / ((p - 1) * step)
    return s + (lo + hi) / 2, (hi - lo) / 2


@pytest.fixture
def prec():
    return PrecisionConfig()


@pytest.fixture
def prec50():
    return PrecisionConfig(50, 16)
