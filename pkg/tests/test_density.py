import random
from fractions import Fraction

import pytest

from limitlab.density import (DensityCurve, density_curve, empirical_lower,
                              gb_partition, prefix_density)
from limitlab.engine import analyze, run
from limitlab.upsets import UPSet


N = UPSet.universe()


class TestPrefixDensity:
    def test_half(self):
        assert prefix_density([0, 2, 4], N, 6) == Fraction(1, 2)

    def test_full_prefix(self):
        k = UPSet.multiples(3)
        outs = [k.nth(i) for i in range(10)]
        assert prefix_density(outs, k, 10) == 1

    def test_outside_host_rejected(self):
        with pytest.raises(ValueError):
            prefix_density([1], UPSet.evens(), 4)

    def test_counting_oracle(self):
        rng = random.Random(5)
        k = UPSet(2, 6, [0, 2, 5], [1])
        elements = [k.nth(i) for i in range(400)]
        outs = sorted(rng.sample(elements, 120))
        for n in (1, 7, 50, 399):
            brute = sum(1 for x in outs if x in elements[:n])
            assert prefix_density(outs, k, n) == Fraction(brute, n)


class TestCurve:
    def test_curve_over_run(self):
        tr = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                 {"kind": "naive-chain"}, horizon=100)
        curve = density_curve(tr, [10, 50, 100])
        assert [n for n, _ in curve.points] == [10, 50, 100]
        assert all(0 <= v <= 1 for _, v in curve.points)

    def test_checkpoints_must_increase(self):
        tr = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                 {"kind": "naive-chain"}, horizon=10)
        with pytest.raises(ValueError):
            density_curve(tr, [5, 5])

    def test_converges_to_relative_density(self):
        # valid outputs of this run are exactly the odds; their density in N
        # is 1/2 and the curve approaches it within 2/N
        tr = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                 {"kind": "pod", "schedule": 2}, horizon=20000)
        n = 10000
        curve = density_curve(tr, [n])
        odds = UPSet.odds()
        assert abs(curve.points[0][1] - odds.relative_density(N)) <= Fraction(2, n)

    def test_csv_shape(self):
        c = DensityCurve([(10, Fraction(1, 2))])
        assert c.to_csv().splitlines() == ["N,density", "10,1/2"]


class TestEmpiricalLower:
    def test_constant(self):
        c = DensityCurve([(10, Fraction(1, 2)), (20, Fraction(1, 2))])
        assert empirical_lower(c, Fraction(1)) == Fraction(1, 2)

    def test_burn_excludes_first(self):
        c = DensityCurve([(10, Fraction(1, 2)), (20, Fraction(1, 3)),
                          (30, Fraction(1, 2))])
        assert empirical_lower(c, Fraction(1, 2)) == Fraction(1, 3)

    def test_all_burned_is_error(self):
        c = DensityCurve([(10, Fraction(1, 2))])
        with pytest.raises(ValueError):
            empirical_lower(c, Fraction(3, 2))

    def test_manual_tally_on_pod_run(self):
        tr = run("ex1-cosingleton-with-N", 0,
                 {"kind": "increasing", "c": {"kind": "density_subset", "alpha": "1/2"}},
                 {"kind": "pod", "schedule": 4}, horizon=500)
        cps = [100, 200, 400]
        curve = density_curve(tr, cps)
        got = empirical_lower(curve, Fraction(1, 2))
        tail = [v for n, v in curve.points if n >= 200]
        assert got == min(tail)


class TestGbPartition:
    def test_requires_supported_learner(self):
        tr = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                 {"kind": "naive-chain"}, horizon=10)
        with pytest.raises(ValueError):
            gb_partition(tr)

    def test_immediate_trailing_means_no_bad(self):
        # single-language family with increasing enumeration: the learner's
        # reservations always stay just ahead, so nothing is classified bad
        tr = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                 {"kind": "pod", "schedule": 2}, horizon=200)
        part = gb_partition(tr)
        assert part.bad == []

    def test_partition_disjoint_from_outputs(self):
        tr = run("ex1-cosingleton-with-N", 0, {"kind": "increasing", "c": "N"},
                 {"kind": "pod", "schedule": 4}, horizon=400)
        part = gb_partition(tr)
        out = set(tr.outputs)
        assert not (set(part.good) | set(part.bad)) & out
        assert not set(part.good) & set(part.bad)

    def test_hand_tally_weak_variant(self):
        tr = run("ex1-cosingleton-with-N", 1,
                 {"kind": "block_shuffle", "c": "evens", "blockLen": 4, "seed": 8},
                 {"kind": "weak-density"}, horizon=50)
        part = gb_partition(tr)
        out = set(tr.outputs)
        k = tr.k
        good, bad = [], []
        for i, s in enumerate(tr.steps):
            if s.w in out:
                continue
            if i == 0 or tr.steps[i - 1].o <= k.successor(s.w):
                good.append(s.w)
            else:
                bad.append(s.w)
        assert part.good == sorted(good) and part.bad == sorted(bad)

    def test_inequality_report(self):
        tr = run("ex1-cosingleton-with-N", 0, {"kind": "increasing", "c": "N"},
                 {"kind": "pod", "schedule": 8}, horizon=1200)
        part = gb_partition(tr, n_values=[1000])
        assert part.inequality and part.inequality[0]["holds"]
