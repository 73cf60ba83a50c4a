from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracpoint import (
    LTClosedForm,
    OrderSequence,
    OrdersExhausted,
    Process,
    ml_eval,
    sdfpbp_pmf,
    sdtfpp1_pmf,
    sdtfpp2_pmf,
)
from fracpoint.errors import DomainError
from fracpoint.simulate import (
    Estimate,
    MLSampler,
    empirical_pmf,
    estimate_sdfpbp,
    estimate_sdtfpp1,
    make_rng,
    ml_quantile,
    ml_sample,
    ml_variates,
    sample_sdfpbp_states,
    sample_sdtfpp2_states,
    sampler_cdf,
    sampler_quantile,
    simulate_sdfpbp,
    simulate_sdtfpp2,
    spawn_rngs,
)
from fracpoint.transforms import talbot_invert_fn
from vectors import BIRTH_ORDERS, BIRTH_RATES, CAPUTO_ORDERS, CAPUTO_RATE, CAPUTO_T


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


# ---------------------------------------------------------------- variates


def test_exponential_mean():
    w = ml_variates(1.0, 2.0, 11, 10**6)
    assert abs(w.mean() - 0.5) <= 0.002


def test_survival_at_one():
    n = 10**6
    w = ml_variates(0.7, 1.0, 12, n)
    p = ml_eval(0.7, -1.0)
    assert abs(np.mean(w > 1.0) - p) <= 3 * binomial_sigma(p, n)


def test_median():
    n = 10**6
    median = ml_quantile(0.5, 1.0, 0.5)
    assert ml_eval(0.5, -math.sqrt(median)) == pytest.approx(0.5, abs=1e-12)
    w = ml_variates(0.5, 1.0, 13, n)
    # 3 sigma of the empirical fraction below the true median
    assert abs(np.mean(w <= median) - 0.5) <= 3 * binomial_sigma(0.5, n)


@pytest.mark.parametrize("beta", [0.3, 0.6, 0.9])
@pytest.mark.parametrize("t", [0.05, 0.7, 3.0])
def test_sampler_law_is_mittag_leffler(beta, t):
    lam = 1.4
    assert sampler_cdf(beta, lam, t) == pytest.approx(1.0 - ml_eval(beta, -lam * t**beta), abs=1e-10)


def test_wrong_power_on_log_term_is_detectable():
    # raising -ln U to 1/beta as well changes the law; the deterministic check sees it
    beta, lam, t = 0.6, 1.0, 1.0
    rng = np.random.default_rng(5)
    n = 10**6
    u, v = rng.random(n), 1.0 - rng.random(n)
    bracket = np.sin(beta * np.pi * (1 - v)) / np.sin(beta * np.pi * v)
    wrong = (-np.log(u)) ** (1 / beta) * bracket ** (1 / beta)
    p = 1.0 - ml_eval(beta, -lam * t**beta)
    assert abs(np.mean(wrong <= t) - p) > 10 * binomial_sigma(p, n)


def test_sampler_object_and_seeding():
    a = MLSampler(0.8, 1.0, np.random.default_rng(3))
    b = MLSampler(0.8, 1.0, np.random.default_rng(3))
    assert [ml_sample(a) for _ in range(5)] == [ml_sample(b) for _ in range(5)]
    assert ml_sample(MLSampler(1.0, 1.0, make_rng(1))) > 0.0
    with pytest.raises(DomainError):
        MLSampler(1.5, 1.0)


def test_exponential_path_is_exact():
    rng1, rng2 = np.random.default_rng(4), np.random.default_rng(4)
    assert ml_variates(1.0, 3.0, rng1, 4).tolist() == (-np.log(rng2.random(4)) / 3.0).tolist()


def test_spawned_streams_are_reproducible_and_distinct():
    a = [g.random() for g in spawn_rngs(9, 3)]
    b = [g.random() for g in spawn_rngs(9, 3)]
    assert a == b and len(set(a)) == 3


@pytest.mark.parametrize("beta", [0.4, 0.8])
def test_quantiles_agree(beta):
    for p in (0.1, 0.5, 0.9):
        assert sampler_quantile(beta, 1.0, p) == pytest.approx(ml_quantile(beta, 1.0, p), rel=1e-9)


# ---------------------------------------------------------------- paths


@given(seed=st.integers(0, 2**32 - 1), horizon=st.floats(0.0, 3.0))
def test_path_record_invariants(seed, horizon):
    orders = [0.6, 0.9, 0.7] + [0.8] * 200
    rec = simulate_sdtfpp2(orders, 1.0, horizon, seed)
    times = rec.event_times
    assert all(a < b for a, b in zip(times, times[1:]))
    assert all(x <= horizon for x in times)
    assert rec.terminal_state == len(times)
    birth = simulate_sdfpbp([1.0] * 400, [1.0] * 400, horizon, seed)
    assert birth.terminal_state == len(birth.event_times) + 1


def test_zero_horizon():
    assert simulate_sdtfpp2([0.5, 0.5], 1.0, 0.0, 1).terminal_state == 0
    assert simulate_sdfpbp([0.5], [1.0], 0.0, 1).terminal_state == 1


def test_reproducible_paths():
    orders = [0.6] * 50
    a = [simulate_sdtfpp2(orders, 1.0, 2.0, np.random.default_rng(7)) for _ in range(3)]
    b = [simulate_sdtfpp2(orders, 1.0, 2.0, np.random.default_rng(7)) for _ in range(3)]
    assert a == b


def test_orders_exhausted():
    with pytest.raises(OrdersExhausted):
        simulate_sdtfpp2([1.0], 100.0, 10.0, 0)
    with pytest.raises(OrdersExhausted):
        sample_sdtfpp2_states([1.0, 1.0], 100.0, 10.0, 1000, 0)


def test_censoring_reports_at_least_state():
    states = sample_sdtfpp2_states([1.0, 1.0, 1.0], 100.0, 10.0, 1000, 0, censor_at=2)
    assert set(states.tolist()) == {2}


def test_unit_orders_give_poisson():
    n = 200_000
    states = sample_sdtfpp2_states([1.0] * 40, 1.0, 1.0, n, 21)
    for est, k in zip(empirical_pmf(states, range(4)), range(4)):
        assert est.covers(math.exp(-1.0) / math.factorial(k))


def test_sdtfpp2_example_with_many_paths():
    params = OrderSequence.poisson([0.5, 0.8], 2.0)
    want = sdtfpp2_pmf(params, 1, 0.5).value
    hits = 0
    total = 0
    for rng in spawn_rngs(31, 10):
        states = sample_sdtfpp2_states([0.5, 0.8], 2.0, 0.5, 10**6, rng, censor_at=2)
        hits += int(np.count_nonzero(states == 1))
        total += states.size
    p = hits / total
    assert abs(p - want) <= 3 * binomial_sigma(want, total)


def test_yule_paths():
    lam, t, n = 1.0, 0.8, 100_000
    rates = [lam * j for j in range(1, 60)]
    states = sample_sdfpbp_states([1.0] * 59, rates, t, n, 3, censor_at=10)
    q = math.exp(-lam * t)
    for est, k in zip(empirical_pmf(states, [1, 2, 3]), [1, 2, 3]):
        assert est.covers(q * (1 - q) ** (k - 1))


def test_birth_first_state_occupancy():
    n = 200_000
    states = sample_sdfpbp_states([0.7, 0.9], [1.0, 2.0], 1.0, n, 8, censor_at=2)
    est = empirical_pmf(states, [1])[0]
    assert est.covers(ml_eval(0.7, -1.0))


def test_sojourn_paths_follow_their_own_transform():
    # state law of sojourn paths: s^{nu_n - 1} prod_{k<n} lam_k / prod_{k<=n}(s^{nu_k} + lam_k)
    nu, lam, t = (0.7, 0.9, 0.8), (1.0, 2.0, 3.0), 1.0
    states = sample_sdfpbp_states(list(nu) * 20, list(lam) * 20, t, 400_000, 17, censor_at=4)
    ests = empirical_pmf(states, [2, 3])
    for n, est in zip((2, 3), ests):
        def transform(s, n=n):
            num = s ** (nu[n - 1] - 1) * math.prod(lam[: n - 1])
            den = 1
            for a, r in zip(nu[:n], lam[:n]):
                den = den * (s**a + r)
            return num / den

        assert est.covers(talbot_invert_fn(transform, t))


def test_sojourn_paths_match_series_when_last_order_equals_first():
    nu, lam, t = (0.7, 0.9, 0.7), (1.0, 2.0, 3.0), 1.0
    states = sample_sdfpbp_states(list(nu) * 20, list(lam) * 20, t, 400_000, 19, censor_at=4)
    est = empirical_pmf(states, [3])[0]
    assert est.covers(sdfpbp_pmf(OrderSequence.birth(nu, lam), 3, t).value)


# ---------------------------------------------------------------- estimators


def test_sdtfpp1_estimator_state_zero():
    est = estimate_sdtfpp1([0.6, 0.9], 1.0, 0, 1.3, 200_000, 23)
    assert est.covers(ml_eval(0.6, -(1.3**0.6)))


def test_sdtfpp1_estimator_unit_orders():
    est = estimate_sdtfpp1([1.0] * 4, 1.0, 3, 1.0, 200_000, 24)
    assert est.covers(math.exp(-1.0) / 6)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_sdtfpp1_estimator_heterogeneous(n):
    params = OrderSequence.poisson(CAPUTO_ORDERS, CAPUTO_RATE)
    est = estimate_sdtfpp1(CAPUTO_ORDERS, CAPUTO_RATE, n, CAPUTO_T, 400_000, 100 + n)
    assert est.covers(sdtfpp1_pmf(params, n, CAPUTO_T).value)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sdfpbp_estimator_heterogeneous(n):
    params = OrderSequence.birth(BIRTH_ORDERS, BIRTH_RATES)
    est = estimate_sdfpbp(BIRTH_ORDERS, BIRTH_RATES, n, 1.0, 400_000, 200 + n)
    assert est.covers(sdfpbp_pmf(params, n, 1.0).value)


def test_estimator_sample_floor():
    with pytest.raises(DomainError):
        estimate_sdtfpp1([0.5], 1.0, 0, 1.0, 100, 0)
    with pytest.raises(DomainError):
        estimate_sdfpbp([0.5], [1.0], 1, 1.0, 100, 0)


def test_estimate_half_width_floor():
    est = empirical_pmf(np.zeros(100, dtype=int), [5])[0]
    assert isinstance(est, Estimate)
    assert (est.value, est.samples) == (0.0, 100)
    # an empty cell still gets the width of a single hit
    assert est.half_width == pytest.approx(3.0 * math.sqrt(1 / 100) / 10)
