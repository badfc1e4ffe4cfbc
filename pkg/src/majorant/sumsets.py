"""Frequency-set combinatorics: sumsets, majorant windows and B_j (Sidon) sets."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, NamedTuple

DEFAULT_ENUMERATION_LIMIT = 10**6


class EnumerationBudgetExceeded(RuntimeError):
    """Raised when a B_j test would enumerate more multisets than allowed."""


class FrequencySet:
    """Finite, sorted, duplicate-free set of integer frequencies."""

    __slots__ = ("_elements", "_members")

    def __init__(self, elements: Iterable[int] = ()):
        self._members = frozenset(int(e) for e in elements)
        self._elements = tuple(sorted(self._members))

    @property
    def elements(self) -> tuple[int, ...]:
        return self._elements

    def __iter__(self) -> Iterator[int]:
        return iter(self._elements)

    def __len__(self) -> int:
        return len(self._elements)

    def __contains__(self, n: object) -> bool:
        return n in self._members

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FrequencySet):
            return self._elements == other._elements
        if isinstance(other, (set, frozenset)):
            return self._members == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._elements)

    def __repr__(self) -> str:
        return f"FrequencySet({list(self._elements)})"

    def __neg__(self) -> FrequencySet:
        return FrequencySet(-e for e in self._elements)

    def __or__(self, other: Iterable[int]) -> FrequencySet:
        return FrequencySet((*self._elements, *other))

    def __add__(self, other: Iterable[int]) -> FrequencySet:
        """Algebraic (Minkowski) sum."""
        other = tuple(other)
        return FrequencySet(a + b for a in self._elements for b in other)

    def issubset(self, other: Iterable[int]) -> bool:
        return self._members <= set(other)

    @property
    def min(self) -> int:
        return self._elements[0]

    @property
    def max(self) -> int:
        return self._elements[-1]

    @property
    def span(self) -> int:
        return self._elements[-1] - self._elements[0] if self._elements else 0

    @classmethod
    def parse(cls, text: str) -> FrequencySet:
        """Parse a comma-separated list such as ``"0,1,3"``."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty frequency set")
        return cls(int(p) for p in parts)


def _check_order(j: int) -> None:
    if int(j) != j or j < 1:
        raise ValueError(f"order j must be a positive integer, got {j!r}")


def sumset(S: Iterable[int], j: int) -> FrequencySet:
    """All sums k_1 + ... + k_j with every k_i drawn from S."""
    _check_order(j)
    S = FrequencySet(S)
    out = S
    for _ in range(j - 1):
        out = out + S
    return out


def majorant_window(S: Iterable[int], j: int) -> FrequencySet:
    """The index window ``jS + (j-1)(-S)`` that contains every minimal-majorant frequency."""
    _check_order(j)
    S = FrequencySet(S)
    if j == 1 or len(S) == 0:
        return S
    return sumset(S, j) + sumset(-S, j - 1)


@dataclass(frozen=True)
class BjWitness:
    """Two distinct multiset representations of the same j-fold sum."""

    target: int
    rep_a: dict[int, int]
    rep_b: dict[int, int]

    @staticmethod
    def _terms(rep: dict[int, int]) -> str:
        return "+".join(str(k) for k in sorted(rep) for _ in range(rep[k]))

    def __str__(self) -> str:
        return f"{self._terms(self.rep_a)} = {self._terms(self.rep_b)}"


def multiset_count(size: int, j: int) -> int:
    return math.comb(size + j - 1, j)


def is_bj_set(
    S: Iterable[int], j: int, limit: int = DEFAULT_ENUMERATION_LIMIT
) -> tuple[bool, BjWitness | None]:
    """Test whether every j-fold sum from S has a unique multiset representation.

    Returns ``(True, None)`` for a B_j set, otherwise ``(False, witness)`` with the
    first collision found in lexicographic enumeration order.
    """
    _check_order(j)
    S = FrequencySet(S)
    if multiset_count(len(S), j) > limit:
        raise EnumerationBudgetExceeded(
            f"{multiset_count(len(S), j)} multisets of size {j} from {len(S)} elements "
            f"exceeds limit {limit}"
        )
    seen: dict[int, tuple[int, ...]] = {}
    for combo in combinations_with_replacement(S.elements, j):
        n = sum(combo)
        if n in seen:
            return False, BjWitness(n, dict(Counter(seen[n])), dict(Counter(combo)))
        seen[n] = combo
    return True, None


class GrowthRow(NamedTuple):
    j: int
    size: int
    growth_ok: bool


def sj_growth_report(S: Iterable[int], j_max: int) -> list[GrowthRow]:
    """Sizes of the index windows ``majorant_window(S, j)`` for j = 1..j_max.

    These are supports of the index window, not of the transform of a particular
    G: cancellation can make an actual support smaller, so the counting statement
    is about generic nonnegative coefficients. ``growth_ok`` is False wherever the
    window grew by fewer than two points over the previous order while |S| >= 2.
    """
    S = FrequencySet(S)
    if len(S) == 0:
        raise ValueError("S must be nonempty")
    _check_order(j_max)
    rows: list[GrowthRow] = []
    prev = None
    for j in range(1, j_max + 1):
        size = len(majorant_window(S, j))
        ok = prev is None or len(S) < 2 or size >= prev + 2
        rows.append(GrowthRow(j, size, ok))
        prev = size
    return rows
