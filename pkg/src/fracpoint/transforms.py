"""Laplace-domain closed forms and the two transform oracles.

* :func:`lt_eval` evaluates the closed-form transforms
  ``lambda^n s^{a_0 - 1} / prod_k (s^{a_k} + lambda)`` (SDTFPP-I),
  ``lambda^n s^{b_n - 1} / prod_k (s^{b_k} + lambda)`` (SDTFPP-II) and
  ``s^{nu_1 - 1} prod_{k<n} lambda_k / prod_k (s^{nu_k} + lambda_k)`` (SDFPBP).
* :func:`forward_lt` integrates a time-domain function against ``e^{-st}``.
* :func:`talbot_invert` inverts a closed form on the fixed Talbot contour.

Powers use the principal branch.  For orders below 1, ``s^a + lambda`` has no
zero on the principal sheet, so the only poles are at ``s = -lambda`` from
order-1 factors.  Those lie on the negative real axis, which the Talbot contour
never meets.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureFailure
from .params import OrderSequence, Process

__all__ = [
    "TALBOT_M",
    "LTClosedForm",
    "ForwardLT",
    "lt_eval",
    "forward_lt",
    "talbot_invert",
    "talbot_invert_fn",
]

#: Default number of Talbot contour nodes.
TALBOT_M = 64


@dataclass(frozen=True)
class LTClosedForm:
    """Closed-form transform of ``process`` at state ``n``.

    For the convolution laws ``n`` is the state implied by the orders
    (``len(orders) - 1`` for ``conv-unit``, ``len(orders)`` for ``conv-general``)
    and the transform is that of the density.
    """

    process: Process
    params: OrderSequence
    n: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "process", Process(self.process))
        self.params.require_states(self.n, self.process)

    def _factors(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """Orders and rates of the denominator factors ``s^a + rate``."""
        p = self.params
        if self.process in (Process.SDFPBP, Process.CONV_GENERAL):
            return p.orders[: self.n], p.rates[: self.n]
        lam = 1.0 if self.process is Process.CONV_UNIT else p.rate
        return p.orders[: self.n + 1], (lam,) * (self.n + 1)

    def __call__(self, s):
        """Evaluate at ``s`` (complex, float or mpmath number) without domain checks."""
        orders, rates = self._factors()
        p = self.params
        if self.process in (Process.SDTFPP1, Process.CONV_UNIT):
            num = rates[0] ** self.n * s ** (orders[0] - 1)
        elif self.process is Process.SDTFPP2:
            num = rates[0] ** self.n * s ** (orders[self.n] - 1)
        else:
            num = math.prod(p.rates[: self.n - 1]) * s ** (orders[0] - 1)
        den = 1
        for a, r in zip(orders, rates):
            den = den * (s**a + r)
        return num / den

    def poles(self) -> list[float]:
        """Real poles ``-rate`` contributed by order-1 factors."""
        orders, rates = self._factors()
        return sorted({-r for a, r in zip(orders, rates) if a == 1.0})


def lt_eval(form: LTClosedForm, s: complex) -> complex:
    """Closed-form Laplace transform at ``s`` with ``Re(s) > 0`` (principal branch)."""
    s = complex(s)
    if not s.real > 0.0:
        raise DomainError(f"Laplace variable needs Re(s) > 0, got {s!r}")
    return complex(form(s))


@dataclass(frozen=True)
class ForwardLT:
    """Numerical transform: ``value`` approximates the integral up to ``t_max``.

    ``tail_bound`` bounds the neglected ``int_{t_max}^inf`` for integrands in
    ``[0, 1]``; ``quad_error`` is the quadrature's own estimate.
    """

    value: float
    tail_bound: float
    quad_error: float

    @property
    def error_bound(self) -> float:
        return self.tail_bound + self.quad_error

    def __float__(self) -> float:
        return self.value


def forward_lt(
    pmf: Callable[[float], float],
    s: float,
    t_max: float,
    quad_tol: float = 1e-10,
    *,
    limit: int = 400,
) -> ForwardLT:
    """Adaptive quadrature of ``int_0^{t_max} pmf(t) e^{-st} dt``.

    The tail beyond ``t_max`` is not extrapolated; ``e^{-s t_max} / s`` is
    reported as its bound (valid for ``0 <= pmf <= 1``).

    Raises
    ------
    QuadratureFailure
        If the quadrature error estimate exceeds ``quad_tol * max(1, |value|)``
        or QUADPACK reports a problem.
    """
    s = float(s)
    if not s > 0.0:
        raise DomainError(f"s must be positive, got {s!r}")
    if not t_max > 0.0:
        raise DomainError(f"t_max must be positive, got {t_max!r}")
    out = integrate.quad(
        lambda t: pmf(t) * math.exp(-s * t),
        0.0,
        float(t_max),
        epsabs=quad_tol,
        epsrel=quad_tol,
        limit=limit,
        full_output=1,
    )
    value, err = out[0], out[1]
    # same acceptance rule QUADPACK applies: absolute or relative tolerance
    if len(out) > 3 or not err <= quad_tol * max(1.0, abs(value)) or not math.isfinite(value):
        message = out[3] if len(out) > 3 else f"error estimate {err:.3g} > {quad_tol:.3g}"
        raise QuadratureFailure(f"forward Laplace quadrature at s={s}: {message}")
    return ForwardLT(value, math.exp(-s * t_max) / s, err)


def _talbot_nodes(t: float, M: int):
    """Fixed-Talbot nodes ``s_k`` and weights (as mpmath numbers) for time ``t``."""
    r = mpmath.mpf(2 * M) / (5 * t)
    nodes = [mpmath.mpc(r)]
    weights = [mpmath.mpf(0.5) * mpmath.exp(r * t)]
    for k in range(1, M):
        theta = k * mpmath.pi / M
        cot = mpmath.cot(theta)
        s = r * theta * mpmath.mpc(cot, 1)
        sigma = theta + (theta * cot - 1) * cot
        nodes.append(s)
        weights.append(mpmath.exp(t * s) * mpmath.mpc(1, sigma))
    return r, nodes, weights


def talbot_invert_fn(F: Callable, t: float, contour_points: int = TALBOT_M, dps: int | None = None) -> float:
    """Invert an arbitrary transform ``F`` (callable on mpmath complex numbers) at ``t > 0``."""
    t = float(t)
    M = int(contour_points)
    if not t > 0.0:
        raise DomainError(f"inversion time must be positive, got {t!r}")
    if M < 16:
        raise DomainError(f"need at least 16 contour points, got {M}")
    # the contour weights reach e^{2M/5}; carry enough digits to absorb them
    with mpmath.workdps(dps or max(30, M)):
        r, nodes, weights = _talbot_nodes(t, M)
        acc = [mpmath.re(w * F(s)) for s, w in zip(nodes, weights)]
        return float(r / M * mpmath.fsum(acc))


def talbot_invert(form: LTClosedForm, t: float, contour_points: int = TALBOT_M) -> float:
    """Fixed-Talbot inverse of the closed form at ``t > 0``.

    Deterministic for fixed ``contour_points`` (``M``); accuracy is roughly
    ``0.6 M`` significant digits for these transforms.  Raises
    :class:`DomainError` if a pole sits within ``1e-6`` of the contour.
    """
    M = int(contour_points)
    if t > 0 and M >= 16:
        _check_poles(form, float(t), M)
    return talbot_invert_fn(form, t, M)


def _check_poles(form: LTClosedForm, t: float, M: int) -> None:
    poles = form.poles()
    if not poles:
        return
    r = 2.0 * M / (5.0 * t)
    theta = np.arange(1, M) * math.pi / M
    s = r * theta * (1.0 / np.tan(theta) + 1j)
    s = np.concatenate(([r + 0j], s))
    for pole in poles:
        if np.min(np.abs(s - pole)) < 1e-6:
            raise DomainError(f"pole at s={pole} lies on the Talbot contour for t={t}, M={M}")
