"""Scalar special functions: one-parameter Mittag-Leffler and (reciprocal) log-gamma.

The Mittag-Leffler function is evaluated by its defining power series

.. math::

    E_\\beta(x) = \\sum_{k \\ge 0} \\frac{x^k}{\\Gamma(k\\beta + 1)},

summed with compensated arithmetic.  For negative ``x`` the series alternates and
loses roughly ``log10(max term)`` digits, so a multiprecision fallback (mpmath)
takes over whenever the double-precision rounding bound exceeds the requested
tolerance.  Global (Pade / integral representation) algorithms are deliberately
not provided; arguments beyond ``x_max`` raise :class:`NonConvergence`.
"""

from __future__ import annotations

import math
import sys

import mpmath
import numpy as np
from scipy import special

from .errors import DomainError, NonConvergence

__all__ = [
    "ML_X_MAX",
    "ML_MAX_TERMS",
    "check_order",
    "ml_eval",
    "log_gamma",
    "recip_gamma",
]

#: Largest ``|x|`` accepted by :func:`ml_eval` for ``beta < 1``.
ML_X_MAX = 50.0
#: Term cap for the direct series.
ML_MAX_TERMS = 20_000

_EPS = sys.float_info.epsilon
_EULER = float(np.euler_gamma)

# Taylor coefficients of log Gamma(1 + z) and log Gamma(2 + z), highest degree
# first for Horner evaluation.  The constant terms are zero.
_NTAYLOR = 60
_k = np.arange(2, _NTAYLOR + 1, dtype=float)
_sign = (-1.0) ** _k
_C1 = np.concatenate(([-_EULER], _sign * special.zeta(_k) / _k))[::-1]
_C2 = np.concatenate(([1.0 - _EULER], _sign * special.zetac(_k) / _k))[::-1]
del _k, _sign


def check_order(beta: float, *, allow_one: bool = True) -> float:
    """Validate a fractional order and return it as float.

    Raises :class:`DomainError` unless ``0 < beta <= 1`` (or ``< 1`` when
    ``allow_one`` is false).
    """
    beta = float(beta)
    if not (0.0 < beta < 1.0 or (allow_one and beta == 1.0)):
        upper = "1]" if allow_one else "1)"
        raise DomainError(f"order {beta!r} outside (0, {upper}")
    return beta


def _horner(coeffs: np.ndarray, z: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * z + c
    return acc * z


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``.

    Away from the zeros at 1 and 2 this defers to :func:`scipy.special.gammaln`;
    on ``[0.6, 2.6]`` it sums the Taylor series of ``log Gamma`` about 1 or 2 so
    that the *relative* error stays near machine precision even as the value
    passes through zero.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    if x < 0.6 or x > 2.6:
        return float(special.gammaln(x))
    if x < 1.25:
        return _horner(_C1, x - 1.0)
    return _horner(_C2, x - 2.0)


def recip_gamma(x: float) -> float:
    """``1 / Gamma(x)`` for ``x >= 0``; zero at the pole ``x = 0``."""
    x = float(x)
    if x < 0.0:
        raise DomainError(f"recip_gamma requires x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    return float(special.rgamma(x))


def _log_term(k: int, logabs_x: float, beta: float) -> float:
    return k * logabs_x - math.lgamma(k * beta + 1.0)


def _terms_needed(logabs_x: float, beta: float, log_tol: float, cap: int) -> tuple[int, float]:
    """Index past which all terms fall below ``exp(log_tol)``, and the max log-term."""
    peak = 0.0
    for k in range(1, cap + 1):
        lt = _log_term(k, logabs_x, beta)
        peak = max(peak, lt)
        # log-terms are concave in k, so once decreasing and small we are done
        if lt < log_tol and lt < _log_term(k - 1, logabs_x, beta):
            return k + 1, peak
    raise NonConvergence(
        f"Mittag-Leffler series for beta={beta}, |x|={math.exp(logabs_x):.6g} "
        f"needs more than {cap} terms"
    )


def ml_eval(
    beta: float,
    x: float,
    tol: float = 1e-14,
    *,
    x_max: float = ML_X_MAX,
    max_terms: int = ML_MAX_TERMS,
) -> float:
    """One-parameter Mittag-Leffler function ``E_beta(x)`` for real ``x``.

    Parameters
    ----------
    beta
        Order in ``(0, 1]``.  ``beta == 1`` returns ``exp(x)``.
    x
        Real argument; ``|x| <= x_max`` is enforced for ``beta < 1``.
    tol
        Target accuracy, relative to ``max(1, |E|)``.
    x_max, max_terms
        Validity region and term cap; exceeding either raises
        :class:`NonConvergence`.

    Returns
    -------
    float
        The series value.  For ``x <= 0`` this lies in ``(0, 1]``.
    """
    beta = check_order(beta)
    x = float(x)
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if beta == 1.0:
        return math.exp(x)
    if x == 0.0:
        return 1.0
    if abs(x) > x_max:
        raise NonConvergence(
            f"|x|={abs(x):.6g} exceeds the validated region x_max={x_max} for beta={beta}"
        )

    logabs_x = math.log(abs(x))
    # terms below tol/8 can not move the result at the requested accuracy
    nterms, peak = _terms_needed(logabs_x, beta, math.log(tol / 8.0), max_terms)

    digits = int(math.ceil(peak / math.log(10.0) - math.log10(tol))) + 15
    # for x < 0 the result is <= 1, so the largest term alone bounds the rounding loss
    hopeless = x < 0.0 and peak + math.log(_EPS * (peak + 4.0)) > math.log(0.25 * tol)
    if not hopeless:
        value, abs_sum, max_log = _ml_series_double(beta, x, tol)
        # rounding: every term carries ~ (|log term| + 4) eps relative error
        rounding = abs_sum * _EPS * (abs(max_log) + 4.0)
        if rounding <= 0.25 * tol * max(1.0, abs(value)):
            return value
    return _ml_series_mp(beta, x, tol, nterms, digits)


def _ml_series_double(beta: float, x: float, tol: float) -> tuple[float, float, float]:
    """Direct series in double precision; returns (sum, sum |terms|, max |log term|)."""
    logabs_x = math.log(abs(x))
    negative = x < 0.0
    terms = [1.0]
    running = 1.0
    max_log = 0.0
    small_run = 0
    k = 0
    while True:
        k += 1
        if k > ML_MAX_TERMS:
            raise NonConvergence(f"Mittag-Leffler series exceeded {ML_MAX_TERMS} terms")
        lt = _log_term(k, logabs_x, beta)
        max_log = max(max_log, abs(lt))
        term = math.exp(lt)
        if negative and k % 2:
            term = -term
        terms.append(term)
        running += term
        # stop on two consecutive negligible terms
        if abs(term) < tol * abs(running) * 0.125:
            small_run += 1
            if small_run == 2:
                break
        else:
            small_run = 0
    abs_sum = math.fsum(abs(v) for v in terms)
    return math.fsum(terms), abs_sum, max_log


def _ml_series_mp(beta: float, x: float, tol: float, nterms: int, digits: int) -> float:
    with mpmath.workdps(max(digits, 20)):
        mx = mpmath.mpf(x)
        mb = mpmath.mpf(beta)
        term = mpmath.mpf(1)
        acc = [term]
        power = mpmath.mpf(1)
        small_run = 0
        running = mpmath.mpf(1)
        for k in range(1, max(nterms, 2) + ML_MAX_TERMS):
            power *= mx
            term = power * mpmath.rgamma(k * mb + 1)
            acc.append(term)
            running += term
            if k >= nterms and abs(term) < tol * abs(running) * 0.125:
                small_run += 1
                if small_run == 2:
                    break
            else:
                small_run = 0
        else:  # pragma: no cover - guarded by _terms_needed
            raise NonConvergence("extended-precision Mittag-Leffler series did not converge")
        return float(mpmath.fsum(acc))
