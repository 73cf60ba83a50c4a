"""Coefficient tables and the truncation driver behind every closed-form series.

Every series in the package has the shape

.. math::

    p(t) = c \\sum_{k \\ge k_0} (-1)^k \\sum_{\\text{terms of block } k}
        a \\, s^{q} \\frac{t^{\\rho}}{\\Gamma(1 + \\rho)}

with a process prefactor ``c``, a scale ``s`` (the rate for the Poisson-type
processes, 1 otherwise), a positive coefficient ``a`` and an exponent ``rho``.
For the composition-indexed series, ``a`` is the sum of
``prod_j w_j^{k_j}`` over all compositions of block ``k`` that share the same
``rho = sum_j k_j a_j``.  Those sums are produced by a generating-function
recursion over the indices, so compositions with coinciding exponents are merged
instead of being visited one at a time.  For integer weights the coefficients
are exact Python integers.

Exponents are exact: every order is read as the decimal number it prints as
(``0.9`` is ``9/10``) and ``rho`` is kept as an integer numerator over a common
denominator.  Float exponents would carry ~1e-14 relative rounding, which the
cancellation between terms of size 1e15 and more turns into an O(1) error even
when the terms themselves are summed in extended precision.

The driver evaluates blocks in order and stops after two consecutive blocks
whose absolute magnitude ``sum |term|`` falls below
``max(abs_tol, rel_tol * |partial sum|)`` with the second no larger than the
first.
"""

from __future__ import annotations

import functools
import math
import sys
import threading
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy import special

from .compositions import IndexFamily, Kind, enumerate_family, lower_bounds
from .params import OrderSequence, Process, TruncationPolicy

__all__ = [
    "FlatTerms",
    "TermTable",
    "CompositionTable",
    "TfppTable",
    "FpbpTable",
    "SeriesSpec",
    "SeriesOutcome",
    "composition_spec",
    "tfpp_spec",
    "fpbp_spec",
    "sum_series",
    "partial_sum",
    "enumerated_block_sum",
    "series_terms",
]

_EPS = sys.float_info.epsilon


def rational_orders(exps: Sequence[float]) -> tuple[tuple[int, ...], int]:
    """Integer numerators and common denominator of the decimal forms of ``exps``.

    Orders are read at 15 significant digits, so ``6 * 0.05`` counts as ``0.3``
    (a change below one unit in the last place).  Exponent sums that agree as
    decimals then merge exactly instead of spawning separate terms.
    """
    fracs = [Fraction(format(float(a), ".15g")) for a in exps]
    den = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    return tuple(f.numerator * (den // f.denominator) for f in fracs), den


@dataclass
class FlatTerms:
    """All terms of blocks ``start .. kmax`` laid out contiguously."""

    start: int
    kmax: int
    offsets: np.ndarray  # index of the first term of each block, len = nblocks
    block: np.ndarray
    rho: np.ndarray  # float exponents, correctly rounded from rho_num / den
    rho_num: list  # exact exponent numerators
    den: int
    spow: np.ndarray
    logc: np.ndarray
    lg: np.ndarray  # log Gamma(1 + rho)
    coefs: list  # exact coefficients (int, float or mpf)


class TermTable:
    """Lazily extended list of blocks; subclasses provide :meth:`_block_terms`."""

    start: int
    den: int = 1

    def __init__(self) -> None:
        self._blocks: list[list[tuple[int, object, int]]] = []
        self._flat: FlatTerms | None = None
        self._lock = threading.Lock()

    def _block_terms(self, k: int) -> list[tuple[int, object, int]]:
        raise NotImplementedError

    def block(self, k: int) -> list[tuple[int, object, int]]:
        """``(rho numerator, coefficient, scale power)`` triples of block ``k``."""
        if k < self.start:
            return []
        self.flat(k)
        return self._blocks[k - self.start]

    def flat(self, kmax: int) -> FlatTerms:
        with self._lock:
            if self._flat is not None and self._flat.kmax >= kmax:
                return self._flat
            have = self.start + len(self._blocks) - 1
            # grow geometrically so repeated small extensions stay linear overall
            target = max(kmax, self.start + 2 * (have - self.start + 1))
            while self.start + len(self._blocks) <= target:
                self._blocks.append(self._block_terms(self.start + len(self._blocks)))
            self._flat = self._extend_flat(target)
            return self._flat

    def _extend_flat(self, kmax: int) -> FlatTerms:
        old = self._flat
        first = self.start if old is None else old.kmax + 1
        blocks = self._blocks[first - self.start : kmax - self.start + 1]
        sizes = np.array([len(b) for b in blocks], dtype=np.int64)
        base = 0 if old is None else len(old.rho)
        offsets = base + np.concatenate(([0], np.cumsum(sizes)[:-1]))
        rows = [(k, num, c, q) for k, b in enumerate(blocks, first) for num, c, q in b]
        block = np.array([r[0] for r in rows], dtype=np.int64)
        rho_num = [r[1] for r in rows]
        rho = np.array([num / self.den for num in rho_num], dtype=float)
        coefs = [r[2] for r in rows]
        spow = np.array([r[3] for r in rows], dtype=float)
        logc = np.array([_log_positive(c) for c in coefs], dtype=float)
        lg = special.gammaln(1.0 + rho)
        if old is not None:
            offsets = np.concatenate((old.offsets, offsets))
            block = np.concatenate((old.block, block))
            rho = np.concatenate((old.rho, rho))
            rho_num = old.rho_num + rho_num
            spow = np.concatenate((old.spow, spow))
            logc = np.concatenate((old.logc, logc))
            lg = np.concatenate((old.lg, lg))
            coefs = old.coefs + coefs
        return FlatTerms(
            self.start, kmax, offsets, block, rho, rho_num, self.den, spow, logc, lg, coefs
        )


def _log_positive(c) -> float:
    if isinstance(c, int):
        return math.log(c)
    return float(mpmath.log(c)) if isinstance(c, mpmath.mpf) else math.log(c)


class CompositionTable(TermTable):
    """Exponent-grouped sums over the compositions ``c`` with ``c[j] >= lower[j]``.

    Block ``k`` maps each distinct ``rho = sum_j c_j exps[j]`` to
    ``sum prod_j weights[j] ** c_j`` over the compositions of ``k`` with that
    exponent.  Index ``j`` contributes the generating function
    ``sum_{m >= lower[j]} (w_j z x^{a_j})^m``, which gives the two-term recursion

    ``D_j[k] = w_j^{r_j} x^{r_j a_j} D_{j-1}[k - r_j] + w_j x^{a_j} D_j[k - 1]``.
    """

    def __init__(
        self,
        lower: Sequence[int],
        exps: Sequence[float],
        weights: Sequence[float] | None = None,
        number: str = "int",
        dps: int | None = None,
    ) -> None:
        super().__init__()
        self.lower = tuple(int(r) for r in lower)
        self.exps = tuple(float(a) for a in exps)
        if len(self.lower) != len(self.exps):
            raise ValueError("lower bounds and exponents differ in length")
        self.start = sum(self.lower)
        self._num, self.den = rational_orders(self.exps)
        self.number = number
        self.dps = dps
        if weights is None:
            weights = (1,) * len(self.exps)
        if number == "int":
            if any(w != 1 for w in weights):
                raise ValueError("integer coefficients need unit weights")
            self._w = [1] * len(self.exps)
            self._one = 1
        elif number == "float":
            self._w = [float(w) for w in weights]
            self._one = 1.0
        elif number == "mp":
            self._w = [mpmath.mpf(w) for w in weights]
            self._one = mpmath.mpf(1)
        else:
            raise ValueError(f"unknown coefficient type {number!r}")
        # D[j][k]: exponent numerator -> coefficient, for indices 0..j summing to k
        self._D: list[list[dict[int, object]]] = [[] for _ in self.exps]

    def _block_terms(self, k: int) -> list[tuple[int, object, int]]:
        self._fill(k)
        return [(num, c, k) for num, c in sorted(self._D[-1][k].items())]

    def _fill(self, kmax: int) -> None:
        ctx = mpmath.workdps(self.dps) if self.number == "mp" else _nullctx()
        with ctx:
            for k in range(len(self._D[0]), kmax + 1):
                for j, (r, a, w) in enumerate(zip(self.lower, self._num, self._w)):
                    out: dict[int, object] = {}
                    kk = k - r
                    if kk >= 0:
                        if j == 0:
                            prev = {0: self._one} if kk == 0 else {}
                        else:
                            prev = self._D[j - 1][kk]
                        wr = w**r
                        shift = r * a
                        for num, c in prev.items():
                            out[num + shift] = c * wr
                    if k >= 1:
                        for num, c in self._D[j][k - 1].items():
                            key = num + a
                            out[key] = out[key] + c * w if key in out else c * w
                    self._D[j].append(out)


class _nullctx:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


class TfppTable(TermTable):
    """Equal-order series: term ``k`` is ``C(k+n, n) s^{k+n} t^{(k+n) alpha} / Gamma(...)``."""

    def __init__(self, alpha: float, n: int) -> None:
        super().__init__()
        self.alpha = float(alpha)
        (self._num,), self.den = rational_orders([self.alpha])
        self.n = int(n)
        self.start = 0

    def _block_terms(self, k: int) -> list[tuple[int, object, int]]:
        m = k + self.n
        return [(m * self._num, math.comb(m, self.n), m)]


class FpbpTable(TermTable):
    """Equal-order birth series: block ``k`` carries ``sum over Lambda^k_n of prod lambda_j^{k_j}``.

    That sum equals ``prod_{j >= 2} lambda_j`` times the complete homogeneous
    symmetric polynomial ``h_{k-n+1}(lambda_1, ..., lambda_n)``.
    """

    def __init__(self, nu: float, rates: Sequence[float], number: str = "float", dps=None) -> None:
        super().__init__()
        self.nu = float(nu)
        (self._num,), self.den = rational_orders([self.nu])
        self.number = number
        self.dps = dps
        conv = mpmath.mpf if number == "mp" else float
        ctx = mpmath.workdps(dps) if number == "mp" else _nullctx()
        with ctx:
            self.rates = [conv(r) for r in rates]
            self.n = len(self.rates)
            self._lead = functools.reduce(lambda a, b: a * b, self.rates[1:], conv(1))
        self.start = self.n - 1
        self._h: list = []  # h_m(rates) for m = 0, 1, ...
        self._hrows: list[list] = [[] for _ in self.rates]

    def _hm(self, m: int):
        ctx = mpmath.workdps(self.dps) if self.number == "mp" else _nullctx()
        with ctx:
            while len(self._h) <= m:
                mm = len(self._h)
                for j, x in enumerate(self.rates):
                    below = self._hrows[j - 1][mm] if j else (1 if mm == 0 else 0)
                    left = x * self._hrows[j][mm - 1] if mm else 0
                    self._hrows[j].append(below + left)
                self._h.append(self._hrows[-1][mm])
            return self._h[m]

    def _block_terms(self, k: int) -> list[tuple[int, object, int]]:
        ctx = mpmath.workdps(self.dps) if self.number == "mp" else _nullctx()
        with ctx:
            coef = self._lead * self._hm(k - self.start)
        return [(k * self._num, coef, 0)]


@functools.lru_cache(maxsize=512)
def _composition_table(lower, exps, weights, number, dps) -> CompositionTable:
    return CompositionTable(lower, exps, weights, number=number, dps=dps)


@functools.lru_cache(maxsize=256)
def _tfpp_table(alpha: float, n: int) -> TfppTable:
    return TfppTable(alpha, n)


@functools.lru_cache(maxsize=256)
def _fpbp_table(nu, rates, number, dps) -> FpbpTable:
    return FpbpTable(nu, rates, number=number, dps=dps)


@dataclass(frozen=True)
class SeriesSpec:
    """A fully parameterised series: table factory plus scale and prefactor."""

    kind: str  # "composition", "tfpp" or "fpbp"
    args: tuple
    scale: float
    prefactor: float
    exact_weights: bool  # coefficients are exact integers

    @property
    def start(self) -> int:
        return self.table().start

    def table(self, number: str | None = None, dps: int | None = None) -> TermTable:
        if self.kind == "tfpp":
            return _tfpp_table(*self.args)
        if self.kind == "fpbp":
            nu, rates = self.args
            if number == "mp":
                return _fpbp_table(nu, rates, "mp", dps)
            return _fpbp_table(nu, rates, "float", None)
        lower, exps, weights = self.args
        if self.exact_weights:
            return _composition_table(lower, exps, None, "int", None)
        if number == "mp":
            return _composition_table(lower, exps, weights, "mp", dps)
        return _composition_table(lower, exps, weights, "float", None)


_FAMILY = {
    Process.SDTFPP1: Kind.THETA,
    Process.CONV_UNIT: Kind.THETA,
    Process.SDTFPP2: Kind.OMEGA,
    Process.SDFPBP: Kind.LAMBDA,
    Process.CONV_GENERAL: Kind.LAMBDA,
}


def composition_spec(process: Process, params: OrderSequence, n: int) -> SeriesSpec:
    """Series of ``process`` at state ``n`` over its composition family."""
    process = Process(process)
    kind = _FAMILY[process]
    lower = lower_bounds(kind, n)
    if kind is Kind.LAMBDA:
        exps = params.orders[:n]
        weights = params.rates[:n]
        pre = (-1.0) ** (n - 1) * weights[0] / weights[-1]
        return SeriesSpec("composition", (lower, exps, weights), 1.0, pre, False)
    exps = params.orders[: n + 1]
    return SeriesSpec("composition", (lower, exps, None), params.rate, (-1.0) ** n, True)


def tfpp_spec(alpha: float, lam: float, n: int) -> SeriesSpec:
    return SeriesSpec("tfpp", (float(alpha), int(n)), float(lam), 1.0, True)


def fpbp_spec(nu: float, rates: Sequence[float], n: int) -> SeriesSpec:
    rates = tuple(float(r) for r in rates[:n])
    pre = (-1.0) ** (n - 1) * rates[0] / rates[-1]
    return SeriesSpec("fpbp", (float(nu), rates), 1.0, pre, False)


@dataclass(frozen=True)
class SeriesOutcome:
    value: float
    err_est: float
    k_used: int
    converged: bool
    finite: bool
    max_log_term: float


def _log_terms(flat: FlatTerms, spec: SeriesSpec, t: float, upto: int) -> np.ndarray:
    log_scale = math.log(spec.scale)
    return (
        flat.logc[:upto]
        + flat.spow[:upto] * log_scale
        + flat.rho[:upto] * math.log(t)
        - flat.lg[:upto]
        + math.log(abs(spec.prefactor))
    )


def _signs(flat: FlatTerms, spec: SeriesSpec, upto: int) -> np.ndarray:
    base = -1.0 if spec.prefactor < 0 else 1.0
    return np.where(flat.block[:upto] % 2 == 1, -base, base)


def sum_series(spec: SeriesSpec, t: float, policy: TruncationPolicy) -> SeriesOutcome:
    """Evaluate the series at ``t > 0`` under ``policy`` (stopping rule applies)."""
    table = spec.table()
    start = table.start
    kmax = min(start + 24, start + policy.k_max)
    while True:
        flat = table.flat(kmax)
        n_terms = _end_of_block(flat, kmax)
        offsets = flat.offsets[: kmax - start + 1]
        logt = _log_terms(flat, spec, t, n_terms)
        g = float(np.max(logt))
        scaled = np.exp(logt - g)
        with np.errstate(divide="ignore"):
            log_mags = np.log(np.add.reduceat(scaled, offsets)) + g
        signs = _signs(flat, spec, n_terms)
        with np.errstate(over="ignore", invalid="ignore"):
            terms = signs * np.exp(logt)
            block_vals = np.add.reduceat(terms, offsets)
        finite = bool(np.all(np.isfinite(terms)))
        stop = _find_stop(log_mags, block_vals, policy, finite and policy.mode != "extended")
        if stop is not None or kmax >= start + policy.k_max:
            break
        kmax = min(2 * kmax - start + 1, start + policy.k_max)

    converged = stop is not None
    last = stop if converged else len(offsets) - 1
    k_used = start + last
    upto = _end_of_block(flat, k_used)
    tail = math.exp(log_mags[last]) if np.isfinite(log_mags[last]) else 0.0
    max_log = float(np.max(logt[:upto]))

    if policy.mode == "extended" and converged:
        value, rounding = _extended_sum(spec, flat, t, upto, max_log, policy)
        return SeriesOutcome(value, tail + rounding, k_used, converged, True, max_log)

    used = terms[:upto]
    if policy.mode == "plain":
        # blocks are summed compensated in every mode; only the outer sum is naive
        bounds = list(flat.offsets[: last + 1]) + [upto]
        value = 0.0
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            value += math.fsum(used[lo:hi].tolist())
    else:
        value = math.fsum(used.tolist())
    mags = np.abs(used)
    # relative error of each term ~ eps * (absolute size of its log components)
    spread = (
        3.0
        + np.abs(flat.logc[:upto])
        + np.abs(flat.spow[:upto] * math.log(spec.scale))
        + np.abs(flat.rho[:upto] * math.log(t))
        + np.abs(flat.lg[:upto])
    )
    # per-term errors are independent, so they add in quadrature across terms
    rounding = float(_EPS * (math.sqrt(np.sum((mags * spread) ** 2)) + abs(value)))
    if policy.mode == "plain":
        rounding += float(_EPS * (last + 1) * np.sum(mags))
    if not finite:
        value, rounding = math.nan, math.inf
    return SeriesOutcome(value, tail + rounding, k_used, converged, finite, max_log)


def _find_stop(log_mags, block_vals, policy: TruncationPolicy, use_partial: bool) -> int | None:
    log_abs = math.log(policy.abs_tol)
    partial = 0.0
    for i, (lm, bv) in enumerate(zip(log_mags, block_vals)):
        partial += bv
        if i == 0:
            continue
        thr = log_abs
        if use_partial and partial != 0.0 and math.isfinite(partial):
            thr = max(thr, math.log(policy.rel_tol * abs(partial)))
        prev = log_mags[i - 1]
        if lm < thr and prev < thr and lm <= prev:
            return i
    return None


def _extended_sum(spec, flat, t, upto, max_log, policy) -> tuple[float, float]:
    # enough digits to carry the largest term down to the absolute tolerance
    need = int(math.ceil(max_log / math.log(10.0) - math.log10(policy.abs_tol))) + 10
    dps = max(policy.dps, need)
    table = spec.table("mp", dps)
    exact = table.flat(flat.kmax)
    with mpmath.workdps(dps):
        mt = mpmath.mpf(t)
        ms = mpmath.mpf(spec.scale)
        pre = mpmath.mpf(spec.prefactor)
        acc = []
        den = mpmath.mpf(exact.den)
        for i in range(upto):
            rho = exact.rho_num[i] / den
            term = exact.coefs[i] * ms ** int(exact.spow[i]) * mt**rho * mpmath.rgamma(1 + rho)
            acc.append(-term if exact.block[i] % 2 else term)
        value = pre * mpmath.fsum(acc)
        rounding = float(mpmath.mpf(10) ** (-dps + 2) * math.exp(min(max_log, 700.0)) * upto)
        return float(value), rounding


def _end_of_block(flat: FlatTerms, K: int) -> int:
    """Number of terms in blocks ``start .. K`` (the table may extend further)."""
    i = K - flat.start + 1
    return int(flat.offsets[i]) if i < len(flat.offsets) else len(flat.rho)


def partial_sum(spec: SeriesSpec, t: float, K: int, mode: str = "compensated") -> float:
    """Sum of blocks ``start .. K`` at ``t >= 0`` with no stopping rule."""
    table = spec.table()
    if K < table.start:
        return 0.0
    flat = table.flat(K)
    upto = _end_of_block(flat, K)
    if t == 0.0:
        return float(spec.prefactor * sum(c for c, r in zip(flat.coefs[:upto], flat.rho_num) if r == 0))
    terms = _signs(flat, spec, upto) * np.exp(_log_terms(flat, spec, t, upto))
    return math.fsum(terms.tolist()) if mode == "compensated" else float(np.sum(terms))


def series_terms(spec: SeriesSpec, K: int, first: int | None = None) -> list[tuple[float, float]]:
    """``(rho, coefficient of t^rho)`` for blocks ``first .. K``, Gamma included.

    ``first`` defaults to the series start, giving the truncation at ``K``.
    Monomials that share an exponent across blocks are merged.
    """
    table = spec.table()
    if K < table.start:
        return []
    flat = table.flat(K)
    upto = _end_of_block(flat, K)
    lo = 0 if first is None or first <= table.start else _end_of_block(flat, first - 1)
    out: dict[int, float] = {}
    rows = zip(flat.block[lo:upto], flat.rho_num[lo:upto], flat.coefs[lo:upto],
               flat.spow[lo:upto], flat.lg[lo:upto])
    for k, num, c, q, lg in rows:
        sign = -1.0 if k % 2 else 1.0
        val = sign * spec.prefactor * float(c) * spec.scale ** float(q) * math.exp(-lg)
        out[num] = out.get(num, 0.0) + val
    return [(num / flat.den, c) for num, c in sorted(out.items())]


def enumerated_block_sum(process: Process, params: OrderSequence, n: int, k: int, t: float) -> float:
    """Block ``k`` of the series summed literally over the enumerated composition family.

    Slow (one term per composition); used to check the grouped tables.
    """
    process = Process(process)
    kind = _FAMILY[process]
    family = IndexFamily(kind, n, k)
    spec = composition_spec(process, params, n)
    if kind is Kind.LAMBDA:
        exps = params.orders[:n]
        weights = params.rates[:n]
    else:
        exps = params.orders[: n + 1]
        weights = (params.rate,) * (n + 1)
    terms = []
    for comp in enumerate_family(family):
        rho = sum(c * a for c, a in zip(comp.parts, exps))
        logw = sum(c * math.log(w) for c, w in zip(comp.parts, weights))
        terms.append(math.exp(logw + rho * math.log(t) - math.lgamma(1.0 + rho)))
    sign = -1.0 if k % 2 else 1.0
    return sign * spec.prefactor * math.fsum(terms)
