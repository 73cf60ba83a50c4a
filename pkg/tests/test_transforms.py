from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracpoint import (
    DomainError,
    LTClosedForm,
    OrderSequence,
    Process,
    QuadratureFailure,
    forward_lt,
    lt_eval,
    sdtfpp2_pmf,
    talbot_invert,
)
from fracpoint.transforms import TALBOT_M, talbot_invert_fn

order = st.integers(6, 20).map(lambda i: round(i * 0.05, 2))


def test_sdtfpp1_state_zero_form():
    params = OrderSequence.poisson([0.7, 0.4], 1.5)
    s = 2.3
    want = s ** (0.7 - 1) / (s**0.7 + 1.5)
    assert lt_eval(LTClosedForm(Process.SDTFPP1, params, 0), s).real == pytest.approx(want, rel=1e-15)


def test_sdtfpp2_unit_orders_value():
    params = OrderSequence.poisson([1.0, 1.0], 1.0)
    assert lt_eval(LTClosedForm(Process.SDTFPP2, params, 1), 1.0) == pytest.approx(0.25, rel=1e-15)


def test_sdfpbp_state_one_form():
    params = OrderSequence.birth([0.6, 0.9], [2.0, 3.0])
    s = 0.7
    want = s ** (0.6 - 1) / (s**0.6 + 2.0)
    assert lt_eval(LTClosedForm(Process.SDFPBP, params, 1), s).real == pytest.approx(want, rel=1e-15)


@pytest.mark.parametrize("process", [Process.SDTFPP1, Process.SDTFPP2])
@pytest.mark.parametrize("n", [0, 1, 3])
def test_poisson_transform(process, n):
    lam, s = 1.7, 0.9
    params = OrderSequence.poisson([1.0] * 4, lam)
    got = lt_eval(LTClosedForm(process, params, n), s)
    assert got.real == pytest.approx(lam**n / (s + lam) ** (n + 1), rel=1e-14)


@pytest.mark.parametrize("s", [0.0, -1.0, 1j, -0.5 + 2j])
def test_left_half_plane_rejected(s):
    params = OrderSequence.poisson([0.5], 1.0)
    with pytest.raises(DomainError):
        lt_eval(LTClosedForm(Process.SDTFPP1, params, 0), s)


@given(orders=st.lists(order, min_size=3, max_size=3), lam=st.floats(0.1, 5.0),
       s=st.floats(0.01, 50.0), n=st.integers(1, 2),
       process=st.sampled_from([Process.SDTFPP1, Process.SDTFPP2, Process.SDFPBP]))
def test_real_axis_values_are_real_and_positive(orders, lam, s, n, process):
    if process is Process.SDFPBP:
        params = OrderSequence.birth(orders, [lam, 2 * lam, 0.5 * lam])
    else:
        params = OrderSequence.poisson(orders, lam)
    val = lt_eval(LTClosedForm(process, params, n), s)
    assert val.imag == 0.0
    assert val.real > 0.0


@given(re=st.floats(0.05, 10.0), im=st.floats(-10.0, 10.0))
def test_conjugate_symmetry(re, im):
    form = LTClosedForm(Process.SDTFPP2, OrderSequence.poisson([0.5, 0.8, 0.6], 1.0), 2)
    s = complex(re, im)
    assert lt_eval(form, s.conjugate()) == pytest.approx(lt_eval(form, s).conjugate(), rel=1e-13)


def test_two_processes_differ():
    params = OrderSequence.poisson([0.9, 0.6], 1.0)
    a = lt_eval(LTClosedForm(Process.SDTFPP1, params, 1), 1.0)
    b = lt_eval(LTClosedForm(Process.SDTFPP2, params, 1), 1.0)
    assert a == b  # at s = 1 every power of s is 1
    a2 = lt_eval(LTClosedForm(Process.SDTFPP1, params, 1), 2.0)
    b2 = lt_eval(LTClosedForm(Process.SDTFPP2, params, 1), 2.0)
    assert abs(a2 - b2) > 1e-3


def test_convolution_forms():
    unit = LTClosedForm(Process.CONV_UNIT, OrderSequence.poisson([1.0, 0.5, 0.7], 9.0), 2)
    s = 1.6
    assert unit(s) == pytest.approx(1.0 / ((1 + s) * (1 + s**0.5) * (1 + s**0.7)), rel=1e-15)
    general = LTClosedForm(Process.CONV_GENERAL, OrderSequence.birth([1.0, 0.7], [2.0, 1.0]), 2)
    assert general(s) == pytest.approx(2.0 / ((2.0 + s) * (1.0 + s**0.7)), rel=1e-15)


# ---------------------------------------------------------------- forward quadrature


def test_forward_exponential():
    out = forward_lt(lambda t: math.exp(-t), 1.0, 40.0)
    assert abs(out.value - 0.5) <= 1e-9
    assert out.tail_bound == pytest.approx(math.exp(-40.0))


def test_forward_constant():
    out = forward_lt(lambda t: 1.0, 2.0, 20.0)
    assert abs(out.value - 0.5) <= math.exp(-40.0) / 2 + 1e-15
    assert out.error_bound >= out.tail_bound


def test_forward_against_closed_form():
    params = OrderSequence.poisson([0.55, 0.8], 0.5)
    s = 1.3
    t_max = -math.log(1e-8 * s) / s
    out = forward_lt(lambda t: sdtfpp2_pmf(params, 1, t).value, s, t_max)
    want = lt_eval(LTClosedForm(Process.SDTFPP2, params, 1), s).real
    assert abs(out.value - want) <= 1e-6
    assert abs(out.value - want) <= out.error_bound + 1e-9


def test_forward_failure_is_raised():
    with pytest.raises(QuadratureFailure):
        forward_lt(lambda t: math.sin(1e4 * t) * (t > 0.5), 1.0, 30.0, limit=5)


@pytest.mark.parametrize("s, t_max", [(0.0, 1.0), (1.0, 0.0)])
def test_forward_domain(s, t_max):
    with pytest.raises(DomainError):
        forward_lt(lambda t: 1.0, s, t_max)


# ---------------------------------------------------------------- Talbot


def test_talbot_exponential():
    form = LTClosedForm(Process.SDTFPP1, OrderSequence.poisson([1.0], 1.0), 0)
    assert abs(talbot_invert(form, 1.0) - math.exp(-1.0)) <= 1e-10


def test_talbot_poisson_state_two():
    form = LTClosedForm(Process.SDTFPP2, OrderSequence.poisson([1.0] * 3, 1.0), 2)
    assert abs(talbot_invert(form, 1.0) - math.exp(-1.0) / 2) <= 1e-10


def test_talbot_deterministic_and_default_nodes():
    form = LTClosedForm(Process.SDTFPP1, OrderSequence.poisson([0.9, 0.6], 1.0), 1)
    assert TALBOT_M == 64
    assert talbot_invert(form, 1.0) == talbot_invert(form, 1.0, TALBOT_M)


def test_talbot_generic_callable():
    assert talbot_invert_fn(lambda s: 1 / s**2, 2.5) == pytest.approx(2.5, rel=1e-12)


def test_talbot_domain():
    form = LTClosedForm(Process.SDTFPP1, OrderSequence.poisson([0.9], 1.0), 0)
    with pytest.raises(DomainError):
        talbot_invert(form, 0.0)
    with pytest.raises(DomainError):
        talbot_invert(form, 1.0, 8)


def test_pole_listing():
    form = LTClosedForm(Process.SDFPBP, OrderSequence.birth([1.0, 0.5, 1.0], [2.0, 1.0, 3.0]), 3)
    assert form.poles() == [-3.0, -2.0]
    assert LTClosedForm(Process.SDTFPP1, OrderSequence.poisson([0.5], 1.0), 0).poles() == []
