"""Exact algebra of ultimately periodic subsets of the naturals.

An ultimately periodic set is a subset of N that, beyond a finite prefix,
equals a union of residue classes modulo some period.  Every cardinality,
inclusion, ordering, and density question about such sets is decidable with
integer arithmetic, which is what the rest of the library relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Iterator


def _divisors(n: int) -> list[int]:
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def _count_congruent(a: int, b: int, r: int, p: int) -> int:
    """Number of n in [a, b) with n % p == r (a, b, r >= 0)."""
    if b <= a:
        return 0
    return (b - 1 - r) // p - (a - 1 - r) // p


@dataclass(frozen=True)
class UPSet:
    """Canonical ultimately periodic subset of N.

    ``threshold`` is the length of the exceptional prefix, ``exceptions`` the
    members below it; at and beyond the threshold membership of n is
    ``n % period in residues``.  Construction canonicalizes (minimal period,
    minimal threshold), so structural equality coincides with extensional
    equality.
    """

    threshold: int
    period: int
    residues: frozenset[int]
    exceptions: frozenset[int]

    def __init__(self, threshold: int = 0, period: int = 1,
                 residues: Iterable[int] = (), exceptions: Iterable[int] = ()):
        h = int(threshold)
        p = int(period)
        rs = frozenset(int(r) for r in residues)
        xs = frozenset(int(x) for x in exceptions)
        if h < 0:
            raise ValueError("threshold must be >= 0")
        if p < 1:
            raise ValueError("period must be >= 1")
        if any(r < 0 or r >= p for r in rs):
            raise ValueError("residues must lie in [0, period)")
        if any(x < 0 or x >= h for x in xs):
            raise ValueError("exceptions must lie in [0, threshold)")
        h, p, rs, xs = self._canonical(h, p, rs, xs)
        object.__setattr__(self, "threshold", h)
        object.__setattr__(self, "period", p)
        object.__setattr__(self, "residues", rs)
        object.__setattr__(self, "exceptions", xs)

    @staticmethod
    def _canonical(h, p, rs, xs):
        # minimal period: smallest divisor q of p under which rs is shift invariant
        for q in _divisors(p):
            if all(((r + q) % p in rs) == (r in rs) for r in range(p)):
                p, rs = q, frozenset(r for r in rs if r < q)
                break
        # minimal threshold: peel off prefix positions that match the tail rule
        xs = set(xs)
        while h > 0:
            n = h - 1
            if (n in xs) == (n % p in rs):
                xs.discard(n)
                h -= 1
            else:
                break
        return h, p, frozenset(rs), frozenset(xs)

    # -- membership and basic predicates ------------------------------------

    def member(self, n: int) -> bool:
        if n < 0:
            return False
        if n < self.threshold:
            return n in self.exceptions
        return (n % self.period) in self.residues

    __contains__ = member

    @property
    def is_infinite(self) -> bool:
        return bool(self.residues)

    @property
    def is_empty(self) -> bool:
        return not self.residues and not self.exceptions

    def size(self) -> int | None:
        """Number of elements, or None when infinite."""
        if self.is_infinite:
            return None
        return len(self.exceptions)

    # -- counting / order ----------------------------------------------------

    def count_below(self, n: int) -> int:
        """|self ∩ [0, n)|."""
        if n <= 0:
            return 0
        cnt = sum(1 for x in self.exceptions if x < n)
        if n > self.threshold:
            cnt += sum(_count_congruent(self.threshold, n, r, self.period)
                       for r in self.residues)
        return cnt

    def rank(self, n: int) -> int:
        """Number of elements strictly below n."""
        return self.count_below(n)

    def nth(self, k: int) -> int:
        """The k-th smallest element, 0-indexed."""
        if k < 0:
            raise IndexError(f"nth index must be >= 0, got {k}")
        xs = sorted(self.exceptions)
        if k < len(xs):
            return xs[k]
        if not self.residues:
            raise IndexError(f"nth({k}) out of range for finite set of size {len(xs)}")
        m = k - len(xs)
        window = sorted(n for n in range(self.threshold, self.threshold + self.period)
                        if n % self.period in self.residues)
        q, r = divmod(m, len(window))
        return window[r] + q * self.period

    def successor(self, n: int) -> int:
        """Smallest element strictly greater than n."""
        k = self.rank(n + 1) if n >= 0 else 0
        try:
            return self.nth(k)
        except IndexError:
            raise IndexError(f"no element greater than {n} in finite set") from None

    def min_element(self) -> int:
        if self.is_empty:
            raise IndexError("empty set has no minimum")
        return self.nth(0)

    def iter_elements(self) -> Iterator[int]:
        k = 0
        while True:
            try:
                yield self.nth(k)
            except IndexError:
                return
            k += 1

    def elements_below(self, n: int) -> list[int]:
        return [x for x in sorted(self.exceptions) if x < n] + [
            m for m in range(self.threshold, max(self.threshold, n))
            if m % self.period in self.residues]

    # -- set algebra -----------------------------------------------------------

    def _pointwise(self, other: "UPSet", fn) -> "UPSet":
        h = max(self.threshold, other.threshold)
        p = lcm(self.period, other.period)
        xs = {n for n in range(h) if fn(self.member(n), other.member(n))}
        rs = set()
        for r in range(p):
            a = (r % self.period) in self.residues
            b = (r % other.period) in other.residues
            if fn(a, b):
                rs.add(r)
        return UPSet(h, p, rs, xs)

    def intersect(self, other: "UPSet") -> "UPSet":
        return self._pointwise(other, lambda a, b: a and b)

    def union(self, other: "UPSet") -> "UPSet":
        return self._pointwise(other, lambda a, b: a or b)

    def difference(self, other: "UPSet") -> "UPSet":
        return self._pointwise(other, lambda a, b: a and not b)

    def complement(self) -> "UPSet":
        rs = frozenset(r for r in range(self.period) if r not in self.residues)
        xs = frozenset(x for x in range(self.threshold) if x not in self.exceptions)
        return UPSet(self.threshold, self.period, rs, xs)

    __and__ = intersect
    __or__ = union
    __sub__ = difference

    def is_subset(self, other: "UPSet") -> bool:
        return self.difference(other).is_empty

    def is_superset(self, other: "UPSet") -> bool:
        return other.is_subset(self)

    def remove(self, points: Iterable[int]) -> "UPSet":
        pts = frozenset(int(x) for x in points)
        if not pts:
            return self
        return self.difference(UPSet.finite(pts))

    def add(self, points: Iterable[int]) -> "UPSet":
        pts = frozenset(int(x) for x in points)
        if not pts:
            return self
        return self.union(UPSet.finite(pts))

    # -- densities -------------------------------------------------------------

    def natural_density(self) -> Fraction:
        return Fraction(len(self.residues), self.period)

    def relative_density(self, within: "UPSet") -> Fraction:
        """Exact density of self inside ``within`` (by rank position)."""
        d = within.natural_density()
        if not within.is_infinite or d == 0:
            raise ValueError("relative density needs an infinite, positive-density host")
        return self.intersect(within).natural_density() / d

    # -- serialization -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {"h": self.threshold, "p": self.period,
                "R": sorted(self.residues), "X": sorted(self.exceptions)}

    def to_text(self) -> str:
        d = self.to_dict()
        return json.dumps({"h": d["h"], "p": d["p"], "R": d["R"], "X": d["X"]},
                          separators=(",", ":"))

    @staticmethod
    def from_dict(d: dict) -> "UPSet":
        return UPSet(d["h"], d["p"], d.get("R", []), d.get("X", []))

    @staticmethod
    def from_text(text: str) -> "UPSet":
        s = text.strip()
        if s.startswith("{"):
            return UPSet.from_dict(json.loads(s))
        if s == "N":
            return UPSet.universe()
        if s == "evens":
            return UPSet.evens()
        if s.startswith("multiples:"):
            return UPSet.multiples(int(s.split(":", 1)[1]))
        if s.startswith("coSingleton:"):
            body = s.split(":", 1)[1]
            base_text, i_text = body.rsplit(",", 1)
            return UPSet.from_text(base_text).remove([int(i_text)])
        if s.startswith("arith:"):
            i_text, d_text = s.split(":", 1)[1].split(",")
            return UPSet.arith(int(i_text), int(d_text))
        raise ValueError(f"unknown set shorthand: {text!r}")

    def __repr__(self) -> str:
        return f"UPSet(h={self.threshold},p={self.period},R={sorted(self.residues)},X={sorted(self.exceptions)})"

    # -- constructors -------------------------------------------------------------

    @staticmethod
    def universe() -> "UPSet":
        return UPSet(0, 1, [0], [])

    @staticmethod
    def empty() -> "UPSet":
        return UPSet(0, 1, [], [])

    @staticmethod
    def evens() -> "UPSet":
        return UPSet(0, 2, [0], [])

    @staticmethod
    def odds() -> "UPSet":
        return UPSet(0, 2, [1], [])

    @staticmethod
    def multiples(k: int) -> "UPSet":
        if k < 1:
            raise ValueError("multiples shorthand needs k >= 1")
        return UPSet(0, k, [0], [])

    @staticmethod
    def arith(start: int, step: int) -> "UPSet":
        """{start + k*step : k >= 0}."""
        if step < 1 or start < 0:
            raise ValueError("arith needs start >= 0 and step >= 1")
        return UPSet(start, step, [start % step], [])

    @staticmethod
    def finite(points: Iterable[int]) -> "UPSet":
        pts = frozenset(int(x) for x in points)
        if not pts:
            return UPSet.empty()
        if any(x < 0 for x in pts):
            raise ValueError("elements must be naturals")
        return UPSet(max(pts) + 1, 1, [], pts)

    @staticmethod
    def at_least(n: int) -> "UPSet":
        """{n, n+1, n+2, ...}."""
        return UPSet.arith(n, 1)


def intersect_all(sets: Iterable[UPSet]) -> UPSet:
    out = None
    for s in sets:
        out = s if out is None else out.intersect(s)
    if out is None:
        raise ValueError("intersection of an empty collection is undefined")
    return out
