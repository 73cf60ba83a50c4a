"""Shared fixtures, test vectors and the acceptance summary hook."""

from __future__ import annotations

import time
from dataclasses import dataclass

import pytest
from hypothesis import HealthCheck, settings

from fracpoint import OrderSequence
from vectors import (
    BIRTH_ORDERS,
    BIRTH_RATES,
    CAPUTO_ORDERS,
    CAPUTO_RATE,
    POISSON_ORDERS,
    POISSON_RATE,
)

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def poisson_vec() -> OrderSequence:
    return OrderSequence.poisson(POISSON_ORDERS, POISSON_RATE)


@pytest.fixture
def caputo_vec() -> OrderSequence:
    return OrderSequence.poisson(CAPUTO_ORDERS, CAPUTO_RATE)


@pytest.fixture
def birth_vec() -> OrderSequence:
    return OrderSequence.birth(BIRTH_ORDERS, BIRTH_RATES)


@dataclass
class Criterion:
    """Times one acceptance criterion and records its verdict for the summary."""

    number: int
    title: str
    budget: float
    lines: list

    def __enter__(self) -> Criterion:
        self.detail = ""
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        elapsed = time.perf_counter() - self._t0
        ok = exc_type is None and elapsed < self.budget
        why = self.detail
        if exc_type is not None:
            why = f"{exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        elif elapsed >= self.budget:
            why = f"{why}; over runtime budget"
        line = (
            f"[{'PASS' if ok else 'FAIL'}] {self.number:2d}. {self.title} "
            f"({elapsed:.2f} s of {self.budget:g} s) {why}"
        )
        self.lines.append((self.number, line))
        print(line)
        if exc_type is None and not ok:
            raise AssertionError(f"criterion {self.number} took {elapsed:.2f} s > {self.budget} s")
        return False


@pytest.fixture
def criterion(request):
    """``with criterion(n, title, budget) as c: ...`` records pass/fail for the summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def make(number: int, title: str, budget: float) -> Criterion:
        return Criterion(number, title, budget, lines)

    return make


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
