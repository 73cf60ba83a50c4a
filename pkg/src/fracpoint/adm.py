"""Adomian decomposition stages as sparse fractional polynomials.

Each governing equation is linear, so the decomposition reduces to
``u_k = L(u_{k-1})`` with ``L`` built from Riemann-Liouville integrals.  Every
stage is a finite sum ``sum_i c_i t^{rho_i}`` and the RL integral maps a
monomial to a monomial,

.. math::

    I^\\alpha t^\\rho = \\frac{\\Gamma(\\rho + 1)}{\\Gamma(\\rho + \\alpha + 1)} t^{\\rho + \\alpha},

so the stages are computed exactly up to floating-point rounding of the
coefficients.  This gives an oracle for the closed-form series that shares no
code with the composition tables.

Concurrency: each :class:`AdmEngine` memoizes stages in a dict guarded by a
re-entrant lock.  Insertions (and the computations that produce them) hold the
lock; completed entries are never mutated, so concurrent readers are safe.
"""

from __future__ import annotations

import functools
import math
import threading
from collections.abc import Iterable, Iterator, Mapping

from .errors import DomainError, NegativeExponent
from .params import OrderSequence, Process
from .series import SeriesSpec, series_terms

__all__ = [
    "MERGE_TOL",
    "FracPoly",
    "rl_integral",
    "rl_derivative",
    "AdmEngine",
    "adm_stage",
    "adm_partial_sum",
    "adm_partial_poly",
    "series_poly",
    "rl_relation",
]

#: Exponents closer than this are treated as equal and their coefficients summed.
MERGE_TOL = 1e-12


class FracPoly:
    """Finite sum ``sum c * t**rho`` with nonnegative exponents and no zero coefficients.

    Instances are immutable; arithmetic returns new polynomials.
    """

    __slots__ = ("_terms", "_index")

    def __init__(self, terms: Mapping[float, float] | Iterable[tuple[float, float]] = ()) -> None:
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[int, list[float]] = {}
        for rho, c in items:
            rho, c = float(rho), float(c)
            if rho < 0.0:
                if rho < -MERGE_TOL:
                    raise NegativeExponent(f"exponent {rho!r} is negative")
                rho = 0.0
            _accumulate(merged, rho, c)
        self._terms = tuple(sorted((r, c) for r, c in merged.values() if c != 0.0))
        self._index = {key: slot for key, slot in merged.items() if slot[1] != 0.0}

    @classmethod
    def _trusted(cls, terms: Iterable[tuple[float, float]]) -> FracPoly:
        """Build from nonzero terms whose exponents are already distinct and sorted."""
        self = cls.__new__(cls)
        self._terms = tuple(terms)
        self._index = {round(r / MERGE_TOL): [r, c] for r, c in self._terms}
        return self

    @classmethod
    def monomial(cls, coef: float, rho: float = 0.0) -> FracPoly:
        return cls([(rho, coef)])

    @classmethod
    def zero(cls) -> FracPoly:
        return cls()

    # container protocol ---------------------------------------------------
    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __repr__(self) -> str:
        body = " + ".join(f"{c:.6g}*t^{r:.6g}" for r, c in self._terms) or "0"
        return f"FracPoly({body})"

    @property
    def exponents(self) -> tuple[float, ...]:
        return tuple(r for r, _ in self._terms)

    def coefficient(self, rho: float) -> float:
        """Coefficient of ``t**rho`` (0 if absent), matching within :data:`MERGE_TOL`."""
        key = round(rho / MERGE_TOL)
        for probe in (key, key - 1, key + 1):
            slot = self._index.get(probe)
            if slot is not None and abs(slot[0] - rho) <= MERGE_TOL:
                return slot[1]
        return 0.0

    # arithmetic -----------------------------------------------------------
    def __add__(self, other: FracPoly) -> FracPoly:
        if len(other) > len(self):
            self, other = other, self
        if not other:
            return self
        merged = {key: [r, c] for key, (r, c) in self._index.items()}
        for rho, c in other._terms:
            _accumulate(merged, rho, c)
        out = FracPoly.__new__(FracPoly)
        out._index = {key: slot for key, slot in merged.items() if slot[1] != 0.0}
        out._terms = tuple(sorted((r, c) for r, c in out._index.values()))
        return out

    def __neg__(self) -> FracPoly:
        return FracPoly._trusted((r, -c) for r, c in self._terms)

    def __sub__(self, other: FracPoly) -> FracPoly:
        return self + (-other)

    def scale(self, factor: float) -> FracPoly:
        if factor == 0.0:
            return FracPoly.zero()
        return FracPoly._trusted((r, factor * c) for r, c in self._terms)

    def __mul__(self, factor: float) -> FracPoly:
        return self.scale(factor)

    __rmul__ = __mul__

    def evaluate(self, t: float) -> float:
        """Value at ``t >= 0``; at ``t = 0`` only the constant term survives."""
        if t < 0:
            raise DomainError(f"t must be >= 0, got {t!r}")
        if t == 0.0:
            return self.coefficient(0.0)
        return math.fsum(c * t**r for r, c in self._terms)

    __call__ = evaluate

    def max_rel_diff(self, other: FracPoly) -> float:
        """Largest termwise ``|c1 - c2| / max(|c1|, |c2|)`` after aligning exponents."""
        worst = 0.0
        for rho, c in (self - other):
            ref = max(abs(self.coefficient(rho)), abs(other.coefficient(rho)))
            worst = max(worst, abs(c) / ref if ref else math.inf)
        return worst


def _accumulate(merged: dict[int, list[float]], rho: float, c: float) -> None:
    key = round(rho / MERGE_TOL)
    for probe in (key, key - 1, key + 1):
        slot = merged.get(probe)
        if slot is not None and abs(slot[0] - rho) <= MERGE_TOL:
            slot[1] += c
            return
    merged[key] = [rho, c]


def _gamma_ratio(a: float, b: float) -> float:
    """``Gamma(a) / Gamma(b)`` for positive arguments."""
    if a < 170.0 and b < 170.0:
        return math.gamma(a) / math.gamma(b)
    return math.exp(math.lgamma(a) - math.lgamma(b))


def rl_integral(p: FracPoly, order: float) -> FracPoly:
    """Riemann-Liouville integral of order ``0 < order <= 1``, termwise."""
    order = float(order)
    if not 0.0 < order <= 1.0:
        raise DomainError(f"integral order must lie in (0, 1], got {order!r}")
    return FracPoly._trusted(
        (r + order, c * _gamma_ratio(r + 1.0, r + order + 1.0)) for r, c in p
    )


def rl_derivative(p: FracPoly, order: float) -> FracPoly:
    """Riemann-Liouville derivative ``d/dt I^{1-order}`` of order ``0 < order < 1``, termwise.

    Raises :class:`NegativeExponent` if any monomial would drop below ``t^0``
    (for instance the derivative of a constant).
    """
    order = float(order)
    if not 0.0 < order < 1.0:
        raise DomainError(f"derivative order must lie in (0, 1), got {order!r}")
    out = []
    for r, c in p:
        new = r - order
        if new < -MERGE_TOL:
            raise NegativeExponent(
                f"D^{order:g} t^{r:g} has exponent {new:g} < 0; the relation does not apply here"
            )
        new = max(new, 0.0)
        out.append((new, c * _gamma_ratio(r + 1.0, new + 1.0)))
    return FracPoly(out)


class AdmEngine:
    """Memoized stage recursion for one process and parameter set."""

    def __init__(self, process: Process | str, params: OrderSequence) -> None:
        self.process = Process(process)
        self.params = params
        self._memo: dict[tuple[int, int], FracPoly] = {}
        self._lock = threading.RLock()
        if self.process in (Process.SDTFPP1, Process.SDTFPP2, Process.CONV_UNIT):
            if params.is_birth:
                raise DomainError(f"{self.process.value} needs a single rate")
            self._first = 0
        else:
            if not params.is_birth:
                raise DomainError(f"{self.process.value} needs a rate sequence")
            self._first = 1

    def _check(self, n: int, k: int) -> None:
        if k < 0:
            raise DomainError(f"stage must be >= 0, got {k}")
        self.params.require_states(n, self.process)

    def stage(self, n: int, k: int) -> FracPoly:
        """Stage polynomial ``p_k(n, t)``."""
        self._check(n, k)
        hit = self._memo.get((n, k))
        if hit is not None:
            return hit
        with self._lock:
            # fill the whole (state, stage) triangle below (n, k) bottom-up
            for kk in range(k + 1):
                for m in range(self._first, n + 1):
                    if (m, kk) not in self._memo:
                        self._memo[(m, kk)] = self._compute(m, kk)
            return self._memo[(n, k)]

    def _get(self, m: int, k: int) -> FracPoly:
        if m < self._first:
            return FracPoly.zero()
        return self._memo[(m, k)]

    def _compute(self, m: int, k: int) -> FracPoly:
        if k == 0:
            return FracPoly.monomial(1.0) if m == self._first else FracPoly.zero()
        prev_same = self._get(m, k - 1)
        prev_below = self._get(m - 1, k - 1)
        orders = self.params.orders
        if self.process is Process.SDTFPP1 or self.process is Process.CONV_UNIT:
            lam = 1.0 if self.process is Process.CONV_UNIT else self.params.rate
            return rl_integral(prev_same - prev_below, orders[m]).scale(-lam)
        if self.process is Process.SDTFPP2:
            lam = self.params.rate
            below = rl_integral(prev_below, orders[m - 1]) if m > 0 else FracPoly.zero()
            return (rl_integral(prev_same, orders[m]) - below).scale(-lam)
        rates = self.params.rates
        inner = prev_same.scale(-rates[m - 1])
        if m > 1:
            inner = inner + prev_below.scale(rates[m - 2])
        return rl_integral(inner, orders[m - 1])

    def partial_poly(self, n: int, K: int) -> FracPoly:
        """``sum_{k=0}^{K} p_k(n, t)`` as a single polynomial."""
        total = FracPoly.zero()
        for k in range(K + 1):
            total = total + self.stage(n, k)
        return total


@functools.lru_cache(maxsize=128)
def _engine(process: Process, params: OrderSequence) -> AdmEngine:
    return AdmEngine(process, params)


def adm_stage(process: Process | str, params: OrderSequence, n: int, k: int) -> FracPoly:
    """Stage ``k`` of the decomposition for state ``n``; zero below the series start."""
    return _engine(Process(process), params).stage(n, k)


def adm_partial_poly(process: Process | str, params: OrderSequence, n: int, K: int) -> FracPoly:
    if K < 0:
        raise DomainError(f"K must be >= 0, got {K}")
    return _engine(Process(process), params).partial_poly(n, K)


def adm_partial_sum(process: Process | str, params: OrderSequence, n: int, K: int, t: float) -> float:
    """``sum_{k=0}^{K} p_k(n, t)`` evaluated stage by stage with compensated summation."""
    if K < 0:
        raise DomainError(f"K must be >= 0, got {K}")
    engine = _engine(Process(process), params)
    vals = []
    for k in range(K + 1):
        stage = engine.stage(n, k)
        if t == 0.0:
            vals.append(stage.coefficient(0.0))
        else:
            vals.extend(c * t**r for r, c in stage)
    return math.fsum(vals)


def series_poly(spec: SeriesSpec, K: int, first: int | None = None) -> FracPoly:
    """Closed-form series blocks ``first .. K`` (default: the truncation at ``K``)."""
    return FracPoly(series_terms(spec, K, first))


def rl_relation(poly_ii: FracPoly, orders: tuple[float, ...], n: int) -> FracPoly:
    """Map an SDTFPP-II state-``n`` polynomial to the SDTFPP-I one with the same orders.

    Applies ``I^{a_n - a_0}`` when ``a_n > a_0``, ``D^{a_0 - a_n}`` when
    ``a_n < a_0`` and the identity when they are equal.
    """
    delta = orders[n] - orders[0]
    if delta > 0.0:
        return rl_integral(poly_ii, delta)
    if delta < 0.0:
        return rl_derivative(poly_ii, -delta)
    return poly_ii
