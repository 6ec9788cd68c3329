from fractions import Fraction

import pytest

from limitlab.adversaries import (FixedEnumerator, Recycler, TeaserExhausted,
                                  density_subset)
from limitlab.engine import run, analyze
from limitlab.families import builtin
from limitlab.upsets import UPSet


N = UPSet.universe()


class TestFixedEnumerator:
    def test_increasing_evens(self):
        tr = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                 {"kind": "naive-chain"}, horizon=5)
        assert tr.emissions == [0, 2, 4, 6, 8]

    def test_block_len_one_equals_increasing(self):
        a = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                {"kind": "naive-chain"}, horizon=40).emissions
        b = run("singleton-N", 0,
                {"kind": "block_shuffle", "c": "evens", "blockLen": 1, "seed": 7},
                {"kind": "naive-chain"}, horizon=40).emissions
        assert a == b

    def test_block_shuffle_emits_exact_prefix(self):
        tr = run("singleton-N", 0,
                 {"kind": "block_shuffle", "c": "evens", "blockLen": 5, "seed": 3},
                 {"kind": "naive-chain"}, horizon=100)
        assert sorted(tr.emissions) == [2 * i for i in range(100)]

    def test_coverage_bound(self):
        # element k emitted by step blockLen * (k // blockLen + 1)
        adv = FixedEnumerator(UPSet.evens(), "block_shuffle", seed=1, block_len=7)

        class _S:
            output_set = set()
        emitted = []
        for t in range(1, 60):
            emitted.append(adv.next(_S()))
            for k in range(100):
                bound = 7 * (k // 7 + 1)
                if bound <= t:
                    assert UPSet.evens().nth(k) in emitted

    def test_finite_c_rejected(self):
        with pytest.raises(ValueError):
            FixedEnumerator(UPSet.finite([1, 2, 3]))


class TestRecycler:
    def test_first_step_falls_back(self):
        tr = run("singleton-N", 0, {"kind": "recycler"}, {"kind": "naive-chain"},
                 horizon=1)
        assert tr.emissions == [0]  # 2^0 with no learner output yet

    def test_power_steps_recycle_smallest_output(self):
        tr = run("singleton-N", 0, {"kind": "recycler"}, {"kind": "naive-chain"},
                 horizon=8)
        for i, s in enumerate(tr.steps):
            t = s.t
            if t > 1 and t & (t - 1) == 0:
                prior = {p.o for p in tr.steps[:i]}
                unrecycled = prior - set(tr.emissions[:i])
                if unrecycled:
                    assert s.w == min(unrecycled)

    def test_nonpower_emits_smallest_unused_by_both(self):
        tr = run("singleton-N", 0, {"kind": "recycler"}, {"kind": "naive-chain"},
                 horizon=12)
        for i, s in enumerate(tr.steps):
            if s.t & (s.t - 1) != 0:
                used = set(tr.emissions[:i]) | {p.o for p in tr.steps[:i]}
                expect = 0
                while expect in used:
                    expect += 1
                assert s.w == expect

    def test_output_cap(self):
        import math
        tr = run("singleton-N", 0, {"kind": "recycler"}, {"kind": "naive-chain"},
                 horizon=4000)
        O = sorted({s.o for s in tr.steps})
        import bisect
        for n in (64, 512, 4000):
            count = bisect.bisect_left(O, n)
            assert count <= n / 2 + 2 * math.log2(n) + 4


class TestDensitySubset:
    def test_half_of_naturals_is_evens(self):
        assert density_subset(N, Fraction(1, 2)) == UPSet.evens()

    def test_identity(self):
        assert density_subset(UPSet.evens(), Fraction(1)) == UPSet.evens()

    def test_exact_quarter(self):
        c = density_subset(N, Fraction(1, 4))
        assert c.relative_density(N) == Fraction(1, 4)

    @pytest.mark.parametrize("alpha", ["1/3", "2/5", "5/7", "1"])
    def test_exact_density_in_odd_host(self, alpha):
        host = UPSet(3, 5, [1, 4], [0])
        a = Fraction(alpha)
        c = density_subset(host, a)
        assert c.relative_density(host) == a
        # rank-selection oracle
        for m in range(200):
            x = host.nth(m)
            assert (x in c) == (m % a.denominator < a.numerator)

    def test_domain(self):
        with pytest.raises(ValueError):
            density_subset(N, Fraction(0))
        with pytest.raises(ValueError):
            density_subset(N, Fraction(3, 2))


class TestChainTeaser:
    def test_pretends_even_removals_on_ex3(self):
        tr = run("ex3-cosingleton", 0,
                 {"kind": "chain_teaser", "targetIdx": 0, "c": "evens",
                  "commitPatience": 4},
                 {"kind": "identifier"}, horizon=60)
        # separators revealed at switches are the formerly pretended even indices
        assert tr.adversary_summary["switches"] >= 3
        assert all(w % 2 == 0 for w in tr.emissions)

    def test_never_committing_learner_sees_plain_enumeration(self):
        # gcd-free family where hypothesis never fits inside a co-singleton:
        # the singleton family's hypothesis is all of N
        tr = run("ex1-cosingleton-with-N", 0,
                 {"kind": "chain_teaser", "targetIdx": 0, "c": "N",
                  "commitPatience": 10},
                 {"kind": "gcd-free-placeholder", "_": 0} if False else
                 {"kind": "naive-chain"}, horizon=40)
        assert tr.adversary_summary["switches"] >= 0

    def test_exhausts_on_identifiable_family(self):
        with pytest.raises(TeaserExhausted):
            run("multiples", 6,
                {"kind": "chain_teaser", "targetIdx": 6, "c": "multiples:12"},
                {"kind": "identifier"}, horizon=50)

    def test_emissions_stay_inside_k(self):
        tr = run("ex2-specials", 0,
                 {"kind": "chain_teaser", "targetIdx": 0,
                  "c": {"h": 2, "p": 1, "R": [0], "X": []}},
                 {"kind": "identifier"}, horizon=200)
        assert all(w in tr.k for w in tr.emissions)
