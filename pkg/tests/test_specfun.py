from __future__ import annotations

import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracpoint.errors import DomainError, NonConvergence
from fracpoint.specfun import ML_X_MAX, log_gamma, ml_eval, recip_gamma

orders = st.floats(0.5, 1.0)


def ml_reference(beta: float, x: float) -> float:
    """Direct series in high precision, summed until terms drop below 10^-dps.

    The largest term is about ``exp(|x|^(1/beta))``, so the working precision
    grows with it to absorb the cancellation.
    """
    dps = 40 + int(abs(x) ** (1.0 / beta) / math.log(10.0))
    with mpmath.workdps(dps):
        total, k = mpmath.mpf(0), 0
        x = mpmath.mpf(x)
        while True:
            term = x**k / mpmath.gamma(k * mpmath.mpf(beta) + 1)
            total += term
            if k > 10 and abs(term) < mpmath.mpf(10) ** -30:
                return float(total)
            k += 1


def test_exponential_case():
    assert ml_eval(1.0, -1.0) == pytest.approx(math.exp(-1.0), rel=1e-15)


def test_zero_argument():
    assert ml_eval(0.7, 0.0) == 1.0


def test_half_order_against_erfc_identity():
    # E_{1/2}(z) = exp(z^2) erfc(-z); both oracles must agree before the value is frozen
    with mpmath.workdps(40):
        via_erfc = float(mpmath.exp(1) * mpmath.erfc(1))
    assert via_erfc == pytest.approx(ml_reference(0.5, -1.0), rel=1e-15)
    assert ml_eval(0.5, -1.0) == pytest.approx(0.42758357615580705, rel=1e-13)
    assert ml_eval(0.5, -1.0) == pytest.approx(via_erfc, rel=1e-13)


@pytest.mark.parametrize(
    "beta, x",
    [(b, x) for b in (0.5, 0.7, 0.95) for x in (-0.3, -2.0, -9.0, -25.0, 1.5)]
    + [(0.2, -0.3), (0.2, -2.0), (0.2, 1.5), (0.35, -4.0)],
)
def test_against_high_precision_series(beta, x):
    assert ml_eval(beta, x) == pytest.approx(ml_reference(beta, x), rel=1e-12, abs=1e-14)


def test_requested_tolerance_is_met():
    ref = ml_reference(0.6, -12.0)
    got = ml_eval(0.6, -12.0, tol=1e-6)
    assert abs(got - ref) <= 1e-6 * max(1.0, abs(got))


@given(beta=orders, y=st.floats(0.0, 12.0), dy=st.floats(0.05, 3.0))
def test_decreasing_on_negative_axis(beta, y, dy):
    a, b = ml_eval(beta, -y), ml_eval(beta, -(y + dy))
    assert 0.0 < b < a <= 1.0


def test_monotone_on_grid():
    for beta in (0.3, 0.6, 0.9):
        vals = [ml_eval(beta, -y) for y in [0.1 * i for i in range(60)]]
        assert all(b < a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("x", [-20.0 + 0.5 * i for i in range(51)])
def test_boundary_reduction(x):
    assert abs(ml_eval(1.0, x) - math.exp(x)) <= 1e-12


def test_term_ratio_recursion():
    # consecutive series terms satisfy term_{k+1}/term_k = x Gamma(k b + 1) / Gamma((k+1) b + 1)
    beta, x = 0.65, -3.0
    terms = [x**k * recip_gamma(k * beta + 1.0) for k in range(90)]
    for k in range(89):
        ratio = x * math.exp(log_gamma(k * beta + 1.0) - log_gamma((k + 1) * beta + 1.0))
        assert terms[k + 1] / terms[k] == pytest.approx(ratio, rel=1e-13)
    assert math.fsum(terms) == pytest.approx(ml_eval(beta, x), abs=1e-12)


def test_outside_validated_region():
    with pytest.raises(NonConvergence):
        ml_eval(0.5, -(ML_X_MAX + 1.0))
    # beta = 1 needs no cap
    assert ml_eval(1.0, -(ML_X_MAX + 1.0)) == pytest.approx(math.exp(-51.0))


@pytest.mark.parametrize("beta", [0.0, -0.2, 1.2, math.nan])
def test_order_outside_unit_interval(beta):
    with pytest.raises(DomainError):
        ml_eval(beta, -1.0)


def test_log_gamma_values():
    assert log_gamma(1.0) == 0.0
    assert log_gamma(2.0) == 0.0
    assert log_gamma(11.0) == pytest.approx(15.104412573075516, rel=1e-15)


@pytest.mark.parametrize("m", range(1, 21))
def test_log_gamma_factorials(m):
    assert math.exp(log_gamma(float(m))) == pytest.approx(math.factorial(m - 1), rel=1e-12)


@given(st.floats(1e-3, 1e4))
def test_log_gamma_relative_accuracy(x):
    with mpmath.workdps(40):
        ref = mpmath.loggamma(x)
    if abs(ref) < 1e-3:
        # near the zeros at 1 and 2 compare absolutely, scaled by the local slope
        assert abs(log_gamma(x) - float(ref)) <= 1e-15
    else:
        assert log_gamma(x) == pytest.approx(float(ref), rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_log_gamma_domain(x):
    with pytest.raises(DomainError):
        log_gamma(x)


def test_recip_gamma_values():
    assert recip_gamma(0.0) == 0.0
    assert recip_gamma(1.0) == 1.0
    assert recip_gamma(0.5) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-15)
    assert recip_gamma(200.0) == pytest.approx(math.exp(-math.lgamma(200.0)), rel=1e-12)
