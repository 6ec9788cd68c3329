import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from limitlab.upsets import UPSet, intersect_all


def raw_member(h, p, rs, xs, n):
    # defining semantics, independent of any canonicalization
    if n < h:
        return n in xs
    return (n % p) in rs


def parts():
    return st.tuples(
        st.integers(min_value=0, max_value=12),
        st.integers(min_value=1, max_value=12),
        st.sets(st.integers(min_value=0, max_value=11), max_size=12),
        st.sets(st.integers(min_value=0, max_value=11), max_size=12),
    ).map(lambda t: (t[0], t[1], {r for r in t[2] if r < t[1]},
                     {x for x in t[3] if x < t[0]}))


def upsets():
    return parts().map(lambda q: UPSet(*q))


class TestMembership:
    def test_defining_exclusion(self):
        co3 = UPSet.universe().remove([3])
        assert 3 not in co3
        assert 2 in co3 and 4 in co3

    def test_evens(self):
        assert 4 in UPSet.evens()
        assert 5 not in UPSet.evens()

    @given(parts())
    @settings(max_examples=200)
    def test_member_matches_table_oracle(self, q):
        h, p, rs, xs = q
        s = UPSet(h, p, rs, xs)
        bound = max(1, 10 * max(1, h) * p)
        for n in range(bound):
            assert s.member(n) == raw_member(h, p, rs, xs, n)


class TestCanonical:
    def test_period_reduction(self):
        s = UPSet(0, 2, [0, 1], [])
        assert (s.threshold, s.period, s.residues) == (0, 1, frozenset([0]))

    def test_threshold_reduction(self):
        s = UPSet(1, 2, [0], [0])
        assert s.threshold == 0 and s == UPSet.evens()

    @given(parts())
    @settings(max_examples=200)
    def test_idempotent_and_membership_preserving(self, q):
        h, p, rs, xs = q
        s = UPSet(h, p, rs, xs)
        again = UPSet(s.threshold, s.period, s.residues, s.exceptions)
        assert again == s
        bound = max(1, 10 * max(1, h) * p)
        assert all(s.member(n) == raw_member(h, p, rs, xs, n) for n in range(bound))

    @given(upsets(), upsets())
    @settings(max_examples=200)
    def test_structural_equality_is_extensional(self, a, b):
        bound = 10 * lcm_bound(a, b)
        same = all(a.member(n) == b.member(n) for n in range(bound))
        assert same == (a == b)


def lcm_bound(*sets):
    from math import lcm
    p = 1
    for s in sets:
        p = lcm(p, s.period)
    return p + max([s.threshold for s in sets] + [1])


class TestCombine:
    def test_intersect_multiples(self):
        assert UPSet.evens().intersect(UPSet.multiples(3)) == UPSet.multiples(6)

    def test_intersect_cofinite(self):
        a = UPSet.universe().remove([1])
        b = UPSet.universe().remove([2])
        assert a.intersect(b) == UPSet.universe().remove([1, 2])

    @given(upsets(), upsets())
    @settings(max_examples=200)
    def test_ops_match_pointwise_oracle(self, a, b):
        bound = 10 * lcm_bound(a, b)
        table = {
            "and": a.intersect(b), "or": a.union(b), "sub": a.difference(b)}
        for n in range(bound):
            ma, mb = a.member(n), b.member(n)
            assert table["and"].member(n) == (ma and mb)
            assert table["or"].member(n) == (ma or mb)
            assert table["sub"].member(n) == (ma and not mb)
        comp = a.complement()
        assert all(comp.member(n) != a.member(n) for n in range(bound))


class TestPredicates:
    def test_is_infinite(self):
        assert UPSet.evens().is_infinite
        assert not UPSet(3, 1, [], [0, 1, 2]).is_infinite

    def test_finite_size(self):
        assert UPSet(3, 1, [], [0, 1, 2]).size() == 3
        assert UPSet.evens().size() is None

    @given(upsets(), upsets())
    @settings(max_examples=200)
    def test_subset_matches_sweep(self, a, b):
        bound = 10 * lcm_bound(a, b)
        sweep = all((not a.member(n)) or b.member(n) for n in range(bound))
        assert a.is_subset(b) == sweep


class TestOrderOps:
    def test_nth_evens(self):
        assert UPSet.evens().nth(0) == 0
        assert UPSet.evens().nth(5) == 10

    def test_successor_skips_hole(self):
        assert UPSet.universe().remove([3]).successor(2) == 4

    def test_out_of_range(self):
        fin = UPSet.finite([1, 5])
        with pytest.raises(IndexError):
            fin.nth(2)
        with pytest.raises(IndexError):
            fin.successor(5)

    @given(upsets(), st.integers(min_value=0, max_value=50))
    @settings(max_examples=200)
    def test_nth_rank_roundtrip_vs_scan(self, s, k):
        bound = 10 * lcm_bound(s) + 60
        elems = [n for n in range(bound) if s.member(n)]
        if k < len(elems) and (s.is_infinite or k < len(s.exceptions)):
            assert s.nth(k) == elems[k]
            assert s.rank(elems[k]) == k
        for n in range(min(bound, 40)):
            assert s.rank(n) == sum(1 for e in elems if e < n)
            if s.member(n):
                assert s.nth(s.rank(n)) == n


class TestDensity:
    def test_evens(self):
        assert UPSet.evens().natural_density() == Fraction(1, 2)

    def test_finite_perturbation(self):
        assert UPSet.universe().remove([3]).natural_density() == 1

    def test_complement_law(self):
        s = UPSet(2, 6, [0, 3, 4], [1])
        assert s.complement().natural_density() == 1 - s.natural_density()

    @given(upsets())
    @settings(max_examples=60)
    def test_density_matches_counting(self, s):
        n = 10_000
        approx = Fraction(s.count_below(n), n)
        assert abs(approx - s.natural_density()) <= Fraction(1, n) * max(1, s.threshold + s.period)

    def test_relative_density_basics(self):
        assert UPSet.evens().relative_density(UPSet.universe()) == Fraction(1, 2)
        assert UPSet.multiples(4).relative_density(UPSet.evens()) == Fraction(1, 2)

    def test_relative_density_domain_error(self):
        with pytest.raises(ValueError):
            UPSet.evens().relative_density(UPSet.finite([1, 2]))

    @given(upsets(), upsets())
    @settings(max_examples=60)
    def test_relative_density_matches_counting(self, c, k):
        if not k.is_infinite:
            return
        n = 10_000
        got = c.relative_density(k)
        limit = k.nth(n - 1) + 1
        count = sum(1 for x in c.intersect(k).elements_below(limit))
        assert abs(Fraction(count, n) - got) <= Fraction(2 * max(1, k.threshold + k.period), n)
        if c.is_subset(k):
            assert 0 <= got <= 1


class TestSerialization:
    def test_round_trip_json(self):
        s = UPSet(3, 4, [1, 2], [0])
        assert UPSet.from_text(s.to_text()) == s
        assert json.loads(s.to_text()) == {"h": 3, "p": 4, "R": [1, 2], "X": [0]}

    def test_shorthands(self):
        assert UPSet.from_text("N") == UPSet.universe()
        assert UPSet.from_text("evens") == UPSet.evens()
        assert UPSet.from_text("multiples:6") == UPSet.multiples(6)
        assert UPSet.from_text("coSingleton:N,3") == UPSet.universe().remove([3])
        assert UPSet.from_text("arith:1,2") == UPSet.odds()

    def test_unknown_shorthand(self):
        with pytest.raises(ValueError):
            UPSet.from_text("frobnicate")

    @given(upsets())
    @settings(max_examples=100)
    def test_bit_exact_round_trip(self, s):
        text = s.to_text()
        assert UPSet.from_text(text).to_text() == text


def test_intersect_all():
    sets = [UPSet.evens(), UPSet.multiples(3), UPSet.universe()]
    assert intersect_all(sets) == UPSet.multiples(6)
    with pytest.raises(ValueError):
        intersect_all([])
