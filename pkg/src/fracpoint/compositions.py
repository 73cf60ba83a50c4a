"""The three multi-index families that drive every series in the package.

All three are weak compositions of ``k`` with some parts forced positive:

=========  ================  =========================================
family     indices           positivity
=========  ================  =========================================
``THETA``  ``k_0 .. k_n``    ``k_1 .. k_n >= 1``, ``k_0 >= 0``
``OMEGA``  ``k_0 .. k_n``    ``k_0 .. k_{n-1} >= 1``, ``k_n >= 0``
``LAMBDA`` ``k_1 .. k_n``    ``k_2 .. k_n >= 1``, ``k_1 >= 0``
=========  ================  =========================================

Members are streamed in lexicographic order of their parts.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "Kind",
    "IndexFamily",
    "Composition",
    "bounded_compositions",
    "enumerate_family",
    "count",
    "COUNT_LIMIT",
]

#: Counts above this raise ``OverflowError`` (the 128-bit unsigned range).
COUNT_LIMIT = 2**128 - 1


class Kind(enum.Enum):
    THETA = "theta"
    OMEGA = "omega"
    LAMBDA = "lambda"


@dataclass(frozen=True)
class Composition:
    """One member of a family; ``parts[0]`` is ``k_0`` (``k_1`` for LAMBDA)."""

    parts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.parts)


@dataclass(frozen=True)
class IndexFamily:
    kind: Kind
    n: int
    k: int

    def __post_init__(self) -> None:
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        min_n = 1 if self.kind is Kind.LAMBDA else 0
        if self.n < min_n:
            raise DomainError(f"{self.kind.name} family needs n >= {min_n}, got {self.n}")
        if self.k < 0:
            raise DomainError(f"total k must be nonnegative, got {self.k}")

    @property
    def lower_bounds(self) -> tuple[int, ...]:
        """Per-part minimum values, in part order."""
        return lower_bounds(self.kind, self.n)

    @property
    def start(self) -> int:
        """Smallest ``k`` for which the family is nonempty."""
        return sum(self.lower_bounds)

    def admits(self, comp: Composition) -> bool:
        parts = comp.parts
        return (
            len(parts) == len(self.lower_bounds)
            and sum(parts) == self.k
            and all(p >= lo for p, lo in zip(parts, self.lower_bounds))
        )


def lower_bounds(kind: Kind, n: int) -> tuple[int, ...]:
    kind = Kind(kind)
    if kind is Kind.THETA:
        return (0,) + (1,) * n
    if kind is Kind.OMEGA:
        return (1,) * n + (0,)
    return (0,) + (1,) * (n - 1)


def bounded_compositions(total: int, lower: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All tuples ``c`` with ``sum(c) == total`` and ``c[i] >= lower[i]``, lexicographically."""
    lower = tuple(lower)
    slack = total - sum(lower)
    if slack < 0 or not lower:
        if not lower and total == 0:
            yield ()
        return
    m = len(lower)
    # lexicographic order on c equals lexicographic order on the excess c - lower
    excess = [0] * m
    excess[-1] = slack
    while True:
        yield tuple(lo + e for lo, e in zip(lower, excess))
        # advance: bump the rightmost non-final part with a nonzero suffix after it
        tail = excess[-1]
        j = m - 2
        while j >= 0:
            if tail > 0:
                break
            tail += excess[j]
            j -= 1
        if j < 0:
            return
        excess[j] += 1
        rest = tail - 1
        for i in range(j + 1, m - 1):
            excess[i] = 0
        excess[-1] = rest


def enumerate_family(family: IndexFamily) -> Iterator[Composition]:
    """Stream every member of ``family`` exactly once, lexicographically."""
    for parts in bounded_compositions(family.k, family.lower_bounds):
        yield Composition(parts)


def count(family: IndexFamily) -> int:
    """Closed-form size: ``C(k, n)`` for THETA/OMEGA, ``C(k, n-1)`` for LAMBDA."""
    r = family.n - 1 if family.kind is Kind.LAMBDA else family.n
    c = math.comb(family.k, r)
    if c > COUNT_LIMIT:
        raise OverflowError(f"|{family.kind.name}^{family.k}_{family.n}| exceeds 128 bits")
    return c
