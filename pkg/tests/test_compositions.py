from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracpoint.compositions import (
    COUNT_LIMIT,
    Composition,
    IndexFamily,
    Kind,
    bounded_compositions,
    count,
    enumerate_family,
)
from fracpoint.errors import DomainError


def brute_force(kind: Kind, n: int, k: int) -> list[tuple[int, ...]]:
    """Filter every tuple of the right length summing to ``k`` by the family's positivity rule."""
    length = n if kind is Kind.LAMBDA else n + 1
    out = []
    for parts in itertools.product(range(k + 1), repeat=length):
        if sum(parts) != k:
            continue
        if kind is Kind.THETA and all(p >= 1 for p in parts[1:]):
            out.append(parts)
        elif kind is Kind.OMEGA and all(p >= 1 for p in parts[:-1]):
            out.append(parts)
        elif kind is Kind.LAMBDA and all(p >= 1 for p in parts[1:]):
            out.append(parts)
    return sorted(out)


def parts_of(kind, n, k):
    return [c.parts for c in enumerate_family(IndexFamily(kind, n, k))]


def test_theta_example():
    assert parts_of(Kind.THETA, 1, 3) == [(0, 3), (1, 2), (2, 1)]


def test_theta_empty_below_start():
    assert parts_of(Kind.THETA, 2, 1) == []


def test_omega_example():
    assert parts_of(Kind.OMEGA, 1, 2) == [(1, 1), (2, 0)]


def test_count_examples():
    assert count(IndexFamily(Kind.THETA, 2, 5)) == 10
    assert count(IndexFamily(Kind.OMEGA, 3, 3)) == 1
    assert count(IndexFamily(Kind.LAMBDA, 3, 4)) == 6
    assert len(brute_force(Kind.LAMBDA, 3, 4)) == 6


@pytest.mark.parametrize("kind", list(Kind))
@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("k", [0, 1, 2, 4, 6])
def test_matches_brute_force_in_order(kind, n, k):
    assert parts_of(kind, n, k) == brute_force(kind, n, k)


@given(
    kind=st.sampled_from(list(Kind)),
    n=st.integers(1, 6),
    k=st.integers(0, 12),
)
def test_members_valid_unique_and_counted(kind, n, k):
    family = IndexFamily(kind, n, k)
    items = list(enumerate_family(family))
    assert all(family.admits(c) for c in items)
    assert all(c.total == k for c in items)
    assert len(set(items)) == len(items)
    assert items == sorted(items, key=lambda c: c.parts)
    assert len(items) == count(family)


def test_theta_omega_bijection():
    # reverse (k_0, k_1..k_n) -> (k_n, .., k_1, k_0): Theta's free slot moves to the end
    for n in range(0, 6):
        for k in range(0, 12):
            theta = {c.parts for c in enumerate_family(IndexFamily(Kind.THETA, n, k))}
            omega = {c.parts for c in enumerate_family(IndexFamily(Kind.OMEGA, n, k))}
            assert {p[::-1] for p in theta} == omega


def test_state_zero_families():
    assert parts_of(Kind.THETA, 0, 3) == [(3,)]
    assert parts_of(Kind.OMEGA, 0, 0) == [(0,)]


def test_family_validation():
    with pytest.raises(DomainError):
        IndexFamily(Kind.LAMBDA, 0, 3)
    with pytest.raises(DomainError):
        IndexFamily(Kind.THETA, 2, -1)
    assert IndexFamily("omega", 1, 1).kind is Kind.OMEGA


def test_start_matches_first_nonempty_total():
    for kind in Kind:
        for n in range(1, 5):
            family = IndexFamily(kind, n, 0)
            start = family.start
            assert count(IndexFamily(kind, n, start)) == 1
            if start > 0:
                assert count(IndexFamily(kind, n, start - 1)) == 0


def test_generator_is_lazy():
    stream = enumerate_family(IndexFamily(Kind.THETA, 10, 200))
    first = next(stream)
    assert first == Composition((0,) + (1,) * 9 + (191,))


def test_concurrent_enumerations_are_independent():
    a = enumerate_family(IndexFamily(Kind.OMEGA, 2, 4))
    b = enumerate_family(IndexFamily(Kind.OMEGA, 2, 4))
    first_a = next(a)
    rest_b = list(b)
    assert [first_a] + list(a) == rest_b


def test_bounded_compositions_edge_cases():
    assert list(bounded_compositions(0, ())) == [()]
    assert list(bounded_compositions(1, ())) == []
    assert list(bounded_compositions(2, (3,))) == []


def test_count_overflow():
    assert count(IndexFamily(Kind.THETA, 10, 200)) == math.comb(200, 10)
    with pytest.raises(OverflowError):
        count(IndexFamily(Kind.THETA, 70, 140))
    assert math.comb(140, 70) > COUNT_LIMIT
