import csv
import json
from pathlib import Path

import pytest

from limitlab.cli import main


RUN_CFG = {
    "family": "ex1-cosingleton-with-N", "kIndex": 0,
    "adversary": {"kind": "increasing", "c": {"kind": "density_subset", "alpha": "1/2"}},
    "learner": {"kind": "pod", "schedule": 4},
    "horizon": 400, "seed": 3, "checkpoints": [100, 200, 400]}


def write_cfg(tmp_path, cfg, name="cfg.json") -> str:
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


class TestValidate:
    def test_ok(self, tmp_path, capsys):
        assert main(["validate", "--config", write_cfg(tmp_path, RUN_CFG)]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_missing_field(self, tmp_path, capsys):
        bad = dict(RUN_CFG)
        del bad["learner"]
        assert main(["validate", "--config", write_cfg(tmp_path, bad)]) == 1
        assert "learner" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        assert main(["validate", "--config", str(p)]) == 1


class TestRun:
    def test_writes_artifacts(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["run", "--config", write_cfg(tmp_path, RUN_CFG),
                   "--out", str(out)])
        assert rc == 0
        assert (out / "transcript.jsonl").exists()
        report = json.loads((out / "report.json").read_text())
        assert report["lastInvalidT"] is None
        rows = list(csv.reader((out / "curve.csv").read_text().splitlines()))
        assert rows[0] == ["N", "density"] and len(rows) == 4

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_cfg(tmp_path, RUN_CFG)
        a, b = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", cfg, "--out", str(a)])
        main(["run", "--config", cfg, "--out", str(b)])
        for name in ("transcript.jsonl", "report.json", "curve.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_protocol_violation_exit_code(self, tmp_path):
        cfg = dict(RUN_CFG)
        cfg["family"] = "multiples"
        cfg["kIndex"] = 6
        cfg["adversary"] = {"kind": "chain_teaser", "targetIdx": 6,
                            "c": "multiples:12"}
        cfg["learner"] = {"kind": "identifier"}
        assert main(["run", "--config", write_cfg(tmp_path, cfg),
                     "--out", str(tmp_path / "o")]) == 2

    def test_flag_overrides(self, tmp_path):
        out = tmp_path / "o"
        main(["run", "--config", write_cfg(tmp_path, RUN_CFG), "--out", str(out),
              "--horizon", "120", "--checkpoints", "60,120"])
        rows = (out / "curve.csv").read_text().splitlines()
        assert rows[1].startswith("60,") and rows[2].startswith("120,")


class TestSweep:
    def _sweep_cfg(self, tmp_path):
        return write_cfg(tmp_path, {
            "scenarios": {
                "pod-half": {**RUN_CFG},
                "weak-half": {**RUN_CFG, "learner": {"kind": "weak-density"}}},
            "horizons": [120, 240],
            "seeds": [0, 1]}, "sweep.json")

    def test_grid_rows(self, tmp_path):
        out = tmp_path / "s"
        rc = main(["sweep", "--config", self._sweep_cfg(tmp_path),
                   "--out", str(out), "--parallel", "1"])
        assert rc == 0
        rows = list(csv.DictReader((out / "sweep.csv").read_text().splitlines()))
        assert len(rows) == 8  # 2 scenarios x 2 horizons x 2 seeds

    def test_parallel_matches_serial(self, tmp_path):
        cfg = self._sweep_cfg(tmp_path)
        a, b = tmp_path / "p1", tmp_path / "p8"
        main(["sweep", "--config", cfg, "--out", str(a), "--parallel", "1"])
        main(["sweep", "--config", cfg, "--out", str(b), "--parallel", "4"])
        assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()

    def test_child_failure_keeps_partials(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {
            "scenarios": {
                "good": {**RUN_CFG, "horizon": 50},
                "bad": {**RUN_CFG, "horizon": 50, "kIndex": 0,
                        "family": "multiples",
                        "adversary": {"kind": "increasing", "c": "multiples:12"}}},
        }, "sweep2.json")
        out = tmp_path / "s2"
        rc = main(["sweep", "--config", cfg, "--out", str(out)])
        assert rc == 2
        rows = list(csv.DictReader((out / "sweep.csv").read_text().splitlines()))
        assert [r["scenario"] for r in rows] == ["good"]


class TestTopologyCmd:
    def test_table(self, capsys):
        assert main(["topology"]) == 0
        out = capsys.readouterr().out
        assert "ex2-specials" in out and "multiples" in out


class TestDemo:
    def test_named_demo_runs(self, tmp_path):
        rc = main(["demo", "gcd-multiples", "--out", str(tmp_path / "d"),
                   "--horizon", "200", "--checkpoints", "50,100"])
        assert rc == 0

    def test_unknown_demo(self, tmp_path, capsys):
        assert main(["demo", "nope", "--out", str(tmp_path)]) == 1
