"""State probabilities and convolution densities from the closed-form series.

All public functions return an :class:`~fracpoint.params.EvalResult`.  A result
whose stopping rule was not met, whose error estimate exceeds the tolerance,
or which lies in the cancellation region is returned with ``reliable=False``
rather than raising.

Examples
--------
>>> from fracpoint import OrderSequence, sdtfpp2_pmf
>>> params = OrderSequence.poisson([1.0, 1.0, 1.0], rate=1.0)
>>> round(sdtfpp2_pmf(params, 2, 1.0).value, 10)
0.1839397206
"""

from __future__ import annotations

import math
from collections.abc import Sequence

from .errors import DomainError
from .params import DEFAULT_POLICY, EvalResult, OrderSequence, Process, TruncationPolicy
from .series import SeriesSpec, composition_spec, fpbp_spec, sum_series, tfpp_spec
from .specfun import check_order

__all__ = [
    "CANCELLATION_LIMIT",
    "sdtfpp1_pmf",
    "sdtfpp2_pmf",
    "sdfpbp_pmf",
    "tfpp_pmf",
    "fpbp_pmf",
    "sdlbp_pmf",
    "conv_ml_density_unit",
    "conv_ml_density_general",
    "evaluate",
    "series_spec",
]

#: Above this value of ``rate * t**order`` fixed precision is not trusted.
CANCELLATION_LIMIT = 30.0


def _check_time(t: float) -> float:
    t = float(t)
    if not (t >= 0.0 and math.isfinite(t)):
        raise DomainError(f"time must be finite and >= 0, got {t!r}")
    return t


def _run(
    spec: SeriesSpec,
    t: float,
    policy: TruncationPolicy,
    at_zero: float,
    intensity: float,
) -> EvalResult:
    """Shared driver: exact value at ``t == 0``, otherwise the truncated series."""
    t = _check_time(t)
    if t == 0.0:
        return EvalResult(at_zero, 0.0, 0, True)
    out = sum_series(spec, t, policy)
    notes = []
    reliable = out.converged and out.finite
    if not out.converged:
        notes.append(f"stopping rule unmet at k_max={policy.k_max}")
    if not out.finite:
        notes.append("terms overflowed double precision; use mode='extended'")
    if intensity > CANCELLATION_LIMIT and policy.mode != "extended":
        reliable = False
        notes.append(
            f"rate*t^order={intensity:.4g} > {CANCELLATION_LIMIT:g}: alternating terms cancel; "
            "use mode='extended'"
        )
    tol = max(policy.abs_tol, policy.rel_tol * abs(out.value))
    if not out.err_est <= tol:
        if reliable:
            notes.append(f"error estimate {out.err_est:.3g} exceeds tolerance {tol:.3g}")
        reliable = False
    return EvalResult(out.value, out.err_est, out.k_used, reliable, "; ".join(notes))


def _poisson_intensity(orders: Sequence[float], lam: float, t: float) -> float:
    return max(lam * t**a for a in orders) if t > 0 else 0.0


def _birth_intensity(orders: Sequence[float], rates: Sequence[float], t: float) -> float:
    return max(r * t**a for a, r in zip(orders, rates)) if t > 0 else 0.0


def series_spec(process: Process | str, params: OrderSequence, n: int) -> SeriesSpec:
    """Validated series description of ``process`` at state ``n``."""
    process = Process(process)
    params.require_states(n, process)
    return composition_spec(process, params, n)


def sdtfpp1_pmf(
    params: OrderSequence, n: int, t: float, policy: TruncationPolicy = DEFAULT_POLICY
) -> EvalResult:
    """``Pr{N(t) = n}`` for the Caputo-type state-dependent fractional Poisson process.

    .. math::

        p(n, t) = (-1)^n \\sum_{k \\ge n} (-\\lambda)^k \\sum_{\\Theta^k_n}
            \\frac{t^{\\sum_j k_j \\alpha_j}}{\\Gamma(1 + \\sum_j k_j \\alpha_j)}

    Parameters
    ----------
    params
        Orders ``alpha_0 .. alpha_m`` (``m >= n``; extra orders are ignored) and
        a single rate.
    n
        State, ``n >= 0``.
    t
        Time, ``t >= 0``.  At ``t = 0`` the initial condition is returned exactly.
    policy
        Truncation and summation settings.
    """
    spec = series_spec(Process.SDTFPP1, params, n)
    x = _poisson_intensity(params.orders[: n + 1], params.rate, t)
    return _run(spec, t, policy, 1.0 if n == 0 else 0.0, x)


def sdtfpp2_pmf(
    params: OrderSequence, n: int, t: float, policy: TruncationPolicy = DEFAULT_POLICY
) -> EvalResult:
    """``Pr{N(t) = n}`` for the renewal process with waiting times ``W_j ~ ML(beta_j, lambda)``.

    Same series as :func:`sdtfpp1_pmf` with the ``Omega`` index family
    (``k_0 .. k_{n-1} >= 1``) in place of ``Theta``.
    """
    spec = series_spec(Process.SDTFPP2, params, n)
    x = _poisson_intensity(params.orders[: n + 1], params.rate, t)
    return _run(spec, t, policy, 1.0 if n == 0 else 0.0, x)


def sdfpbp_pmf(
    params: OrderSequence, n: int, t: float, policy: TruncationPolicy = DEFAULT_POLICY
) -> EvalResult:
    """``Pr{N(t) = n}`` for the state-dependent fractional pure birth process started at 1.

    .. math::

        p(n, t) = (-1)^{n-1} \\frac{\\lambda_1}{\\lambda_n} \\sum_{k \\ge n-1} (-1)^k
            \\sum_{\\Lambda^k_n} \\prod_j \\lambda_j^{k_j}
            \\frac{t^{\\sum_j k_j \\nu_j}}{\\Gamma(1 + \\sum_j k_j \\nu_j)}

    Repeated rates need no special handling: the series never divides by
    rate differences.
    """
    spec = series_spec(Process.SDFPBP, params, n)
    x = _birth_intensity(params.orders[:n], params.rates[:n], t)
    return _run(spec, t, policy, 1.0 if n == 1 else 0.0, x)


def tfpp_pmf(
    alpha: float, lam: float, n: int, t: float, policy: TruncationPolicy = DEFAULT_POLICY
) -> EvalResult:
    """Time-fractional Poisson pmf (all orders equal to ``alpha``).

    ``p(n, t) = (lam t^a)^n / n! * sum_k (k+n)!/k! (-lam t^a)^k / Gamma((k+n) a + 1)``,
    summed as one term per ``k``, independently of the composition tables.
    """
    alpha = check_order(alpha)
    OrderSequence.poisson([alpha], lam)  # validates the rate
    if n < 0:
        raise DomainError(f"state must be >= 0, got {n}")
    x = lam * t**alpha if t > 0 else 0.0
    return _run(tfpp_spec(alpha, lam, n), t, policy, 1.0 if n == 0 else 0.0, x)


def fpbp_pmf(
    nu: float,
    rates: Sequence[float],
    n: int,
    t: float,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> EvalResult:
    """Fractional pure birth pmf with one order ``nu`` and rates ``lambda_1 .. lambda_n``.

    The inner sum over ``Lambda^k_n`` is evaluated in closed form as
    ``prod_{j>=2} lambda_j * h_{k-n+1}(lambda_1, ..., lambda_n)`` (complete
    homogeneous symmetric polynomial), so this path shares no code with
    :func:`sdfpbp_pmf` beyond the truncation driver.
    """
    nu = check_order(nu)
    params = OrderSequence.birth([nu] * len(rates), rates)
    params.require_states(n, Process.SDFPBP)
    x = _birth_intensity([nu] * n, params.rates[:n], t)
    return _run(fpbp_spec(nu, params.rates, n), t, policy, 1.0 if n == 1 else 0.0, x)


def sdlbp_pmf(
    orders: Sequence[float],
    lam: float,
    n: int,
    t: float,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> EvalResult:
    """State-dependent linear birth process: :func:`sdfpbp_pmf` with ``lambda_j = lam * j``."""
    rates = [lam * j for j in range(1, len(orders) + 1)]
    return sdfpbp_pmf(OrderSequence.birth(orders, rates), n, t, policy)


def conv_ml_density_unit(
    orders: Sequence[float], t: float, policy: TruncationPolicy = DEFAULT_POLICY
) -> EvalResult:
    """Density of ``X_0 + X_1 + ... + X_n`` with ``X_0 ~ Exp(1)`` and ``X_j ~ ML(alpha_j, 1)``.

    ``orders`` is ``(alpha_0, ..., alpha_n)`` and must start with 1.  The
    density is the unit-rate SDTFPP-I series at state ``n``; its Laplace
    transform is ``1 / prod_j (1 + s^alpha_j)``.
    """
    orders = tuple(float(a) for a in orders)
    if not orders or orders[0] != 1.0:
        raise DomainError("the first order of the unit convolution must be 1")
    params = OrderSequence.poisson(orders, 1.0)
    n = len(orders) - 1
    spec = composition_spec(Process.CONV_UNIT, params, n)
    x = _poisson_intensity(orders, 1.0, t)
    return _run(spec, t, policy, 1.0 if n == 0 else 0.0, x)


def conv_ml_density_general(
    orders: Sequence[float],
    rates: Sequence[float],
    t: float,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> EvalResult:
    """Density of ``Y_1 + ... + Y_n`` with ``Y_1 ~ Exp(lambda_1)``, ``Y_j ~ ML(nu_j, lambda_j)``.

    Requires ``nu_1 = 1`` and ``lambda_n = 1``.  Laplace transform:
    ``prod_{j<n} lambda_j / prod_j (lambda_j + s^nu_j)``.
    """
    orders = tuple(float(a) for a in orders)
    rates = tuple(float(r) for r in rates)
    if not orders or orders[0] != 1.0:
        raise DomainError("the first order of the general convolution must be 1")
    if not rates or rates[-1] != 1.0:
        raise DomainError("the last rate of the general convolution must be 1")
    params = OrderSequence.birth(orders, rates)
    n = len(orders)
    spec = composition_spec(Process.CONV_GENERAL, params, n)
    x = _birth_intensity(orders, rates, t)
    return _run(spec, t, policy, 1.0 if n == 1 else 0.0, x)


def evaluate(
    process: Process | str,
    params: OrderSequence,
    n: int,
    t: float,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> EvalResult:
    """Dispatch on the process tag.

    For the convolution densities ``n`` must equal the state implied by the
    order sequence (``len(orders) - 1`` for the unit case, ``len(orders)`` for
    the general case).
    """
    process = Process(process)
    if process is Process.SDTFPP1:
        return sdtfpp1_pmf(params, n, t, policy)
    if process is Process.SDTFPP2:
        return sdtfpp2_pmf(params, n, t, policy)
    if process is Process.SDFPBP:
        return sdfpbp_pmf(params, n, t, policy)
    if process is Process.CONV_UNIT:
        return conv_ml_density_unit(params.orders[: n + 1], t, policy)
    return conv_ml_density_general(params.orders[:n], params.rates[:n], t, policy)
