"""Parameter containers shared by the series, transform and simulation code."""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

from .errors import DomainError
from .specfun import check_order

__all__ = ["Process", "OrderSequence", "TruncationPolicy", "EvalResult", "DEFAULT_POLICY"]


class Process(str, enum.Enum):
    """The three state-dependent processes plus the two convolution laws."""

    SDTFPP1 = "sdtfpp1"
    SDTFPP2 = "sdtfpp2"
    SDFPBP = "sdfpbp"
    CONV_UNIT = "conv-unit"
    CONV_GENERAL = "conv-general"


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class OrderSequence:
    """Fractional orders plus either one rate (Poisson type) or a rate per state (birth type).

    For the Poisson-type processes ``orders[j]`` is the order of state ``j``
    (``j = 0, 1, ...``).  For the birth process the states start at 1 and
    ``orders[j - 1]``, ``rates[j - 1]`` belong to state ``j``.
    """

    orders: tuple[float, ...]
    rate: float | None = None
    rates: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        orders = tuple(check_order(a) for a in self.orders)
        if not orders:
            raise DomainError("at least one order is required")
        object.__setattr__(self, "orders", orders)
        if (self.rate is None) == (self.rates is None):
            raise DomainError("give exactly one of `rate` or `rates`")
        if self.rate is not None:
            object.__setattr__(self, "rate", _positive("rate", self.rate))
        else:
            rates = tuple(_positive("rate", r) for r in self.rates)
            if len(rates) != len(orders):
                raise DomainError(
                    f"{len(orders)} orders but {len(rates)} rates; birth-type sequences pair them"
                )
            object.__setattr__(self, "rates", rates)

    @classmethod
    def poisson(cls, orders: Sequence[float], rate: float) -> OrderSequence:
        return cls(tuple(orders), rate=rate)

    @classmethod
    def birth(cls, orders: Sequence[float], rates: Sequence[float]) -> OrderSequence:
        return cls(tuple(orders), rates=tuple(rates))

    @property
    def is_birth(self) -> bool:
        return self.rates is not None

    def require_states(self, n: int, process: Process) -> None:
        """Raise unless the sequence covers state ``n`` of ``process``."""
        if process in (Process.SDTFPP1, Process.SDTFPP2, Process.CONV_UNIT):
            if self.is_birth:
                raise DomainError(f"{process.value} needs a single rate, not a rate sequence")
            if n < 0:
                raise DomainError(f"state must be >= 0, got {n}")
            if len(self.orders) < n + 1:
                raise DomainError(f"state {n} needs {n + 1} orders, got {len(self.orders)}")
        else:
            if not self.is_birth:
                raise DomainError(f"{process.value} needs a rate sequence")
            if n < 1:
                raise DomainError(f"birth-process states start at 1, got {n}")
            if len(self.orders) < n:
                raise DomainError(f"state {n} needs {n} orders and rates, got {len(self.orders)}")


@dataclass(frozen=True)
class TruncationPolicy:
    """How an infinite series is cut off and summed.

    ``mode`` is ``"plain"`` (naive float sum), ``"compensated"`` (exactly
    rounded float sum) or ``"extended"`` (mpmath with at least ``dps`` digits,
    raised automatically to cover the cancellation).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    k_max: int = 400
    mode: str = "compensated"
    dps: int = 40

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.k_max < 1:
            raise DomainError(f"k_max must be >= 1, got {self.k_max}")
        if self.mode not in ("plain", "compensated", "extended"):
            raise DomainError(f"unknown summation mode {self.mode!r}")
        if self.dps < 16:
            raise DomainError("extended precision needs dps >= 16")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class EvalResult:
    value: float
    err_est: float
    k_used: int
    reliable: bool
    note: str = field(default="", compare=False)

    def __float__(self) -> float:
        return self.value
