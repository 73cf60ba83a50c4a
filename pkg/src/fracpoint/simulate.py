"""Monte-Carlo oracles: Mittag-Leffler variates, renewal paths and pmf estimators.

Mittag-Leffler variates with survival ``E_beta(-lam t^beta)`` are drawn with the
product representation

.. math::

    W = \\lambda^{-1/\\beta} \\, (-\\ln U) \\,
        \\left[\\frac{\\sin(\\beta\\pi(1 - V))}{\\sin(\\beta\\pi V)}\\right]^{1/\\beta},

``U, V`` independent uniforms.  The bracket equals
``sin(beta pi) / tan(beta pi V) - cos(beta pi)``; the quotient form avoids the
cancellation near ``V = 1``.  Note that ``-ln U`` enters to the first power:
raising it to ``1/beta`` as well gives a different (wrong) law, which the
deterministic check :func:`sampler_cdf` exposes.

All functions take a seed or a :class:`numpy.random.Generator`; there is no
global random state.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, OrdersExhausted
from .specfun import check_order, ml_eval

__all__ = [
    "MLSampler",
    "PathRecord",
    "Estimate",
    "make_rng",
    "spawn_rngs",
    "ml_variates",
    "ml_sample",
    "sampler_cdf",
    "sampler_quantile",
    "ml_quantile",
    "simulate_sdtfpp2",
    "simulate_sdfpbp",
    "sample_sdtfpp2_states",
    "sample_sdfpbp_states",
    "empirical_pmf",
    "estimate_sdtfpp1",
    "estimate_sdfpbp",
]


def make_rng(seed: int | np.random.Generator | np.random.SeedSequence | None) -> np.random.Generator:
    """A :class:`numpy.random.Generator` from a seed (generators pass through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent generators for ``count`` workers derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _check_rate(lam: float) -> float:
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError(f"rate must be positive and finite, got {lam!r}")
    return lam


def _bracket(beta: float, v: np.ndarray) -> np.ndarray:
    return np.sin(beta * np.pi * (1.0 - v)) / np.sin(beta * np.pi * v)


def ml_variates(beta: float, lam: float, rng, size=None) -> np.ndarray | float:
    """Mittag-Leffler(``beta``, ``lam``) variates; ``beta == 1`` gives ``Exp(lam)``."""
    beta = check_order(beta)
    lam = _check_rate(lam)
    rng = make_rng(rng)
    e = -np.log(rng.random(size))
    if beta == 1.0:
        return e / lam
    # rng.random is in [0, 1); 1 - u is in (0, 1], keeping the bracket finite
    v = 1.0 - rng.random(size)
    return lam ** (-1.0 / beta) * e * _bracket(beta, v) ** (1.0 / beta)


@dataclass
class MLSampler:
    """Seeded source of Mittag-Leffler waiting times."""

    beta: float
    lam: float
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    def __post_init__(self) -> None:
        self.beta = check_order(self.beta)
        self.lam = _check_rate(self.lam)
        self.rng = make_rng(self.rng)

    def sample(self, size=None):
        return ml_variates(self.beta, self.lam, self.rng, size)


def ml_sample(sampler: MLSampler) -> float:
    """One variate from ``sampler``."""
    return float(sampler.sample())


def sampler_cdf(beta: float, lam: float, t: float) -> float:
    """``P(W <= t)`` for the product representation, computed deterministically.

    Conditioning on ``V = v`` leaves an exponential, so
    ``P(W <= t) = int_0^1 1 - exp(-t lam^{1/beta} / B(v)^{1/beta}) dv``.
    """
    beta = check_order(beta)
    lam = _check_rate(lam)
    if t <= 0.0:
        return 0.0
    if beta == 1.0:
        return -math.expm1(-lam * t)
    scale = t * lam ** (1.0 / beta)

    def integrand(v: float) -> float:
        b = math.sin(beta * math.pi * (1.0 - v)) / math.sin(beta * math.pi * v)
        if b <= 0.0:
            return 1.0
        return -math.expm1(-scale / b ** (1.0 / beta))

    value, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    return value


def _bisect_increasing(f, p: float, hi: float = 1.0) -> float:
    while f(hi) < p:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError(f"quantile {p} beyond bracketing range")
    return optimize.brentq(lambda t: f(t) - p, 0.0, hi, xtol=1e-13, rtol=1e-13)


def sampler_quantile(beta: float, lam: float, p: float) -> float:
    """Quantile of the sampler law (root of :func:`sampler_cdf`)."""
    return _bisect_increasing(lambda t: sampler_cdf(beta, lam, t), p)


def ml_quantile(beta: float, lam: float, p: float) -> float:
    """``t`` with ``1 - E_beta(-lam t^beta) = p``, by bracketing on the series."""
    return _bisect_increasing(lambda t: 1.0 - ml_eval(beta, -lam * t**beta), p)


@dataclass(frozen=True)
class PathRecord:
    """Event times of one path and the state it occupies at the horizon."""

    event_times: tuple[float, ...]
    terminal_state: int


def _renewal_path(orders, rates, t_horizon: float, rng, offset: int) -> PathRecord:
    rng = make_rng(rng)
    if t_horizon < 0:
        raise DomainError(f"horizon must be >= 0, got {t_horizon!r}")
    times: list[float] = []
    clock = 0.0
    for beta, lam in zip(orders, rates):
        clock += float(ml_variates(beta, lam, rng))
        if clock > t_horizon:
            return PathRecord(tuple(times), offset + len(times))
        times.append(clock)
    raise OrdersExhausted(
        f"path passed {len(times)} events before t={t_horizon}; supply more orders"
    )


def simulate_sdtfpp2(orders: Sequence[float], lam: float, t_horizon: float, rng) -> PathRecord:
    """One path of the renewal process with waiting times ``W_j ~ ML(beta_j, lam)``.

    The state at ``t`` is ``n`` iff ``W_0 + ... + W_{n-1} <= t < W_0 + ... + W_n``.
    """
    return _renewal_path(orders, [lam] * len(orders), t_horizon, rng, 0)


def simulate_sdfpbp(
    orders: Sequence[float], rates: Sequence[float], t_horizon: float, rng
) -> PathRecord:
    """One birth path from state 1 with sojourn in state ``j`` distributed ``ML(nu_j, lambda_j)``.

    The path's state law has transform
    ``s^{nu_n - 1} prod_{k<n} lambda_k / prod_{k<=n} (s^{nu_k} + lambda_k)``,
    which equals the birth-process series only when ``nu_n = nu_1``; see
    :func:`estimate_sdfpbp` for an estimator of the series for arbitrary orders.
    """
    if len(orders) != len(rates):
        raise DomainError("orders and rates differ in length")
    return _renewal_path(orders, rates, t_horizon, rng, 1)


def _batched_states(orders, rates, t: float, size: int, rng, offset: int, censor_at) -> np.ndarray:
    rng = make_rng(rng)
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t!r}")
    limit = len(orders) if censor_at is None else min(len(orders), censor_at - offset)
    clock = np.zeros(size)
    state = np.zeros(size, dtype=np.int64)
    alive = np.arange(size)
    for beta, lam in zip(orders[:limit], rates[:limit]):
        if alive.size == 0:
            break
        clock[alive] += ml_variates(beta, lam, rng, alive.size)
        passed = clock[alive] <= t
        state[alive[passed]] += 1
        alive = alive[passed]
    if alive.size and (censor_at is None or limit < censor_at - offset):
        raise OrdersExhausted(
            f"{alive.size} of {size} paths used all {len(orders)} waiting times before t={t}"
        )
    return state + offset


def sample_sdtfpp2_states(
    orders: Sequence[float], lam: float, t: float, size: int, rng, censor_at: int | None = None
) -> np.ndarray:
    """States at time ``t`` of ``size`` independent SDTFPP-II paths.

    With ``censor_at`` set, paths are followed only up to that state and any
    path reaching it is reported as ``censor_at`` (meaning "at least").
    Otherwise a path that outlives the supplied orders raises
    :class:`OrdersExhausted`.
    """
    return _batched_states(orders, [lam] * len(orders), t, size, rng, 0, censor_at)


def sample_sdfpbp_states(
    orders: Sequence[float],
    rates: Sequence[float],
    t: float,
    size: int,
    rng,
    censor_at: int | None = None,
) -> np.ndarray:
    """States at time ``t`` of ``size`` independent sojourn-built birth paths (start 1).

    ``censor_at`` as in :func:`sample_sdtfpp2_states`; with rates growing
    faster than ``j^{1/nu}`` paths can explode, so censoring is usually needed.
    """
    if len(orders) != len(rates):
        raise DomainError("orders and rates differ in length")
    return _batched_states(orders, rates, t, size, rng, 1, censor_at)


@dataclass(frozen=True)
class Estimate:
    """Monte-Carlo estimate with a 3-sigma binomial half-width."""

    value: float
    half_width: float
    samples: int

    def covers(self, x: float) -> bool:
        return abs(x - self.value) <= self.half_width


def _binomial(hits: int, samples: int, scale: float = 1.0) -> Estimate:
    p = hits / samples
    # floor the variance at one hit so an empty cell still has a nonzero width
    var = max(p * (1.0 - p), 1.0 / samples) / samples
    return Estimate(scale * p, scale * 3.0 * math.sqrt(var), samples)


def empirical_pmf(states: np.ndarray, values: Sequence[int]) -> list[Estimate]:
    """Empirical ``Pr{state = n}`` with 3-sigma half-widths for each ``n`` in ``values``."""
    states = np.asarray(states)
    return [_binomial(int(np.count_nonzero(states == n)), states.size) for n in values]


def estimate_sdtfpp1(
    orders: Sequence[float], lam: float, n: int, t: float, samples: int, rng
) -> Estimate:
    """Estimate ``Pr{S <= t < S + X_0}`` with ``S = X_1 + ... + X_n``, ``X_k ~ ML(alpha_k, lam)``.

    The SDTFPP-I transform ``lam^n s^{a_0-1} / prod (s^{a_k} + lam)`` is the
    survival transform of ``X_0`` times the density transforms of
    ``X_1 .. X_n``, so this probability equals the state-``n`` pmf.
    """
    if samples < 10_000:
        raise DomainError(f"need at least 10^4 samples, got {samples}")
    if len(orders) < n + 1:
        raise DomainError(f"state {n} needs {n + 1} orders")
    rng = make_rng(rng)
    s = np.zeros(samples)
    for k in range(1, n + 1):
        s += ml_variates(orders[k], lam, rng, samples)
    x0 = ml_variates(orders[0], lam, rng, samples)
    hits = int(np.count_nonzero((s <= t) & (t < s + x0)))
    return _binomial(hits, samples)


def estimate_sdfpbp(
    orders: Sequence[float], rates: Sequence[float], n: int, t: float, samples: int, rng
) -> Estimate:
    """Estimate the birth-process series at state ``n`` from its transform factorization.

    ``s^{nu_1-1} prod_{k<n} lambda_k / prod_k (s^{nu_k} + lambda_k)`` equals
    ``lambda_1 / lambda_n`` times the survival transform of
    ``Y_1 ~ ML(nu_1, lambda_1)`` times the density transforms of
    ``Y_2 .. Y_n``, so the pmf is
    ``(lambda_1 / lambda_n) Pr{S <= t < S + Y_1}`` with ``S = Y_2 + ... + Y_n``.
    """
    if samples < 10_000:
        raise DomainError(f"need at least 10^4 samples, got {samples}")
    if n < 1 or len(orders) < n or len(rates) < n:
        raise DomainError(f"state {n} needs {n} orders and rates")
    rng = make_rng(rng)
    s = np.zeros(samples)
    for k in range(1, n):
        s += ml_variates(orders[k], rates[k], rng, samples)
    y1 = ml_variates(orders[0], rates[0], rng, samples)
    hits = int(np.count_nonzero((s <= t) & (t < s + y1)))
    return _binomial(hits, samples, rates[0] / rates[n - 1])
