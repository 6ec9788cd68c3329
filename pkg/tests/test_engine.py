import json

import pytest

from limitlab.engine import ProtocolViolation, Transcript, analyze, run
from limitlab.families import Family, builtin
from limitlab.upsets import UPSet


N = UPSet.universe()


class TestRunBasics:
    def test_pod_first_step_avoids_enumerated_string(self):
        tr = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                 {"kind": "pod", "schedule": "linear"}, horizon=1)
        assert tr.steps[0].w == 0
        assert tr.steps[0].o == 1  # smallest reserved string that is not 0

    def test_valid_flag_is_membership_in_k(self):
        tr = run("ex1-cosingleton-with-N", 1, {"kind": "increasing", "c": "evens"},
                 {"kind": "naive-chain"}, horizon=50)
        k = tr.k
        for s in tr.steps:
            assert s.valid == (s.o in k)

    def test_flag_soundness_recompute(self):
        tr = run("ex1-cosingleton-with-N", 1, {"kind": "increasing", "c": "evens"},
                 {"kind": "identifier"}, horizon=40, record_hyp=True)
        c = tr.declared_c
        for s in tr.steps:
            assert s.hyp_set is not None
            assert s.contained == s.hyp_set.is_subset(tr.k)
            assert s.full == c.is_subset(s.hyp_set)

    def test_hyp_set_matches_indices(self):
        tr = run("multiples", 6, {"kind": "increasing", "c": "multiples:12"},
                 {"kind": "naive-chain"}, horizon=25, record_hyp=True)
        for s in tr.steps:
            if s.hyp_indices:
                acc = None
                for idx in s.hyp_indices:
                    lang = tr.family.language_at(idx)
                    acc = lang if acc is None else acc.intersect(lang)
                assert acc == s.hyp_set

    def test_horizon_validation(self):
        with pytest.raises(ValueError):
            run("singleton-N", 0, {"kind": "increasing"}, {"kind": "naive-chain"}, 0)

    def test_enumerating_outside_k_is_rejected(self):
        fam = Family("odd-univ", explicit=[("odds", UPSet.odds())])
        with pytest.raises(ProtocolViolation, match="outside K"):
            run(fam, 0, {"kind": "increasing", "c": "evens"},
                {"kind": "naive-chain"}, horizon=5)


class TestProtocol:
    def test_adversary_outside_k(self):
        # enumerate odds against K = evens
        fam = Family("ev", explicit=[("evens", UPSet.evens())])
        with pytest.raises(ProtocolViolation, match="step 1"):
            run(fam, 0, {"kind": "increasing", "c": "arith:1,2"},
                {"kind": "naive-chain"}, horizon=5)


class TestDeterminism:
    def test_byte_identical_reruns(self):
        spec = ("ex1-cosingleton-with-N", 1,
                {"kind": "block_shuffle", "c": "evens", "blockLen": 5, "seed": 9},
                {"kind": "weak-density"})
        a = run(*spec, horizon=300).to_jsonl()
        b = run(*spec, horizon=300).to_jsonl()
        assert a == b

    def test_prefix_property(self):
        spec = ("ex1-cosingleton-with-N", 1,
                {"kind": "block_shuffle", "c": "evens", "blockLen": 5, "seed": 9},
                {"kind": "pod", "schedule": 3})
        long = run(*spec, horizon=200)
        short = run(*spec, horizon=120)
        long_lines = long.to_jsonl().splitlines()[1:121]
        short_lines = short.to_jsonl().splitlines()[1:]
        assert long_lines == short_lines

    def test_jsonl_round_numbers(self):
        tr = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                 {"kind": "naive-chain"}, horizon=5)
        lines = tr.to_jsonl().splitlines()
        header = json.loads(lines[0])["header"]
        assert header["kIndex"] == 0 and header["horizon"] == 5
        rec = json.loads(lines[1])
        assert set(rec) == {"t", "w", "o", "indices", "flags"}


class TestAnalyze:
    def test_all_valid_has_no_invalid_marker(self):
        tr = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                 {"kind": "naive-chain"}, horizon=30)
        assert analyze(tr).last_invalid_t is None

    def test_hand_built_tally(self):
        tr = run("ex1-cosingleton-with-N", 1, {"kind": "increasing", "c": "evens"},
                 {"kind": "identifier"}, horizon=5, record_hyp=True)
        rep = analyze(tr)
        manual_full = sum(1 for s in tr.steps if s.full)
        manual_changes = sum(1 for s in tr.steps[1:] if s.changed)
        assert rep.full_count == manual_full
        assert rep.mind_changes == manual_changes
        assert rep.outputs == sorted({s.o for s in tr.steps if s.valid})

    def test_gcd_stabilizes(self):
        tr = run("multiples", 6, {"kind": "increasing", "c": "multiples:12"},
                 {"kind": "gcd"}, horizon=60)
        rep = analyze(tr)
        assert rep.stabilization_t is not None
        assert rep.stabilization_t <= 20

    def test_coverage_warning_fields(self):
        tr = run("singleton-N", 0, {"kind": "increasing", "c": "evens"},
                 {"kind": "naive-chain"}, horizon=16)
        assert tr.coverage_ok and tr.coverage_checked == 16
