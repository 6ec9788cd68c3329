"""Experiment runner.

Subcommands:
  run        one adversary-vs-learner run from a config file
  sweep      many runs (horizons x seeds x scenarios), merged summary CSV
  topology   identifiability verdict table for builtin or configured families
  demo       named ready-made scenarios
  validate   config check only

Exit codes: 0 clean, 1 config error, 2 protocol violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .adversaries import TeaserExhausted
from .density import density_curve, empirical_lower
from .engine import ProtocolViolation, analyze, resolve_family, run
from .families import BUILTIN_NAMES, builtin
from .learners import ConfigError
from .topology import verdict_table
from .upsets import UPSet

OUT_ENV = "LIMITLAB_OUT"

DEMOS = {
    "pod-vs-recycler": {
        "family": "singleton-N", "kIndex": 0,
        "adversary": {"kind": "recycler"},
        "learner": {"kind": "pod", "schedule": "linear"},
        "horizon": 100_000,
        "checkpoints": [10_000, 20_000, 40_000, 70_000, 100_000]},
    "pod-density-half": {
        "family": "ex1-cosingleton-with-N", "kIndex": 0,
        "adversary": {"kind": "increasing",
                      "c": {"kind": "density_subset", "alpha": "1/2"}},
        "learner": {"kind": "pod", "schedule": "linear"},
        "horizon": 100_000,
        "checkpoints": [10_000, 20_000, 40_000, 70_000, 100_000]},
    "weak-density-half": {
        "family": "ex1-cosingleton-with-N", "kIndex": 0,
        "adversary": {"kind": "increasing",
                      "c": {"kind": "density_subset", "alpha": "1/2"}},
        "learner": {"kind": "weak-density"},
        "horizon": 50_000,
        "checkpoints": [5_000, 10_000, 20_000, 35_000, 50_000]},
    "gcd-multiples": {
        "family": "multiples", "kIndex": 6,
        "adversary": {"kind": "increasing", "c": "multiples:12"},
        "learner": {"kind": "gcd"}, "horizon": 2_000,
        "checkpoints": [100, 500, 1000]},
    "teaser-ex2": {
        "family": "ex2-specials", "kIndex": 0,
        "adversary": {"kind": "chain_teaser", "targetIdx": 0,
                      "c": {"h": 2, "p": 1, "R": [0], "X": []},
                      "commitPatience": 10},
        "learner": {"kind": "identifier"}, "horizon": 10_000,
        "checkpoints": [1_000, 5_000, 10_000]},
}


def _load_config(args) -> dict:
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}")
    elif getattr(args, "demo_name", None):
        cfg = dict(DEMOS[args.demo_name])
    else:
        raise ConfigError("a --config file is required")
    for key in ("horizon", "seed"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "checkpoints", None):
        cfg["checkpoints"] = [int(x) for x in args.checkpoints.split(",")]
    return cfg


def _validate_config(cfg: dict):
    for field, kind in (("family", (str, dict)), ("kIndex", int),
                        ("adversary", dict), ("learner", dict), ("horizon", int)):
        if field not in cfg:
            raise ConfigError(f"config field {field!r} is missing")
        if not isinstance(cfg[field], kind):
            raise ConfigError(f"config field {field!r} has the wrong type")
    if cfg["horizon"] < 1:
        raise ConfigError("horizon must be >= 1")
    cps = cfg.get("checkpoints", [])
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ConfigError("checkpoints must increase")
    resolve_family(cfg["family"])


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV) or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _execute(cfg: dict) -> dict:
    tr = run(cfg["family"], cfg["kIndex"], cfg["adversary"], cfg["learner"],
             cfg["horizon"], seed=cfg.get("seed", 0), record_hyp=False)
    rep = analyze(tr)
    cps = cfg.get("checkpoints") or [max(1, cfg["horizon"] // 2), cfg["horizon"]]
    curve = density_curve(tr, cps)
    lower = empirical_lower(curve)
    return {"transcript": tr, "report": rep, "curve": curve, "lower": lower}


def cmd_run(args) -> int:
    cfg = _load_config(args)
    _validate_config(cfg)
    out = _out_dir(args)
    res = _execute(cfg)
    tr, rep, curve = res["transcript"], res["report"], res["curve"]
    (out / "transcript.jsonl").write_text(tr.to_jsonl())
    report = rep.to_dict()
    report["empiricalLowerDensity"] = str(res["lower"])
    report["adversarySummary"] = tr.adversary_summary
    (out / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    (out / "curve.csv").write_text(curve.to_csv())
    print(f"wrote {out}/transcript.jsonl, report.json, curve.csv")
    print(f"last invalid step: {rep.last_invalid_t}; "
          f"empirical lower density: {res['lower']}")
    return 0


def _sweep_cell(payload):
    name, cfg = payload
    res = _execute(cfg)
    rep = res["report"]
    return {"scenario": name, "horizon": cfg["horizon"], "seed": cfg.get("seed", 0),
            "lastInvalidT": rep.last_invalid_t if rep.last_invalid_t is not None else "",
            "mindChanges": rep.mind_changes,
            "fullCount": rep.full_count,
            "stabilizationT": rep.stabilization_t if rep.stabilization_t is not None else "",
            "outputCount": len(rep.outputs),
            "empiricalLowerDensity": str(res["lower"])}


SWEEP_COLUMNS = ["scenario", "horizon", "seed", "lastInvalidT", "mindChanges",
                 "fullCount", "stabilizationT", "outputCount", "empiricalLowerDensity"]


def cmd_sweep(args) -> int:
    spec = json.loads(Path(args.config).read_text())
    scenarios = spec.get("scenarios")
    if not scenarios:
        raise ConfigError("sweep config needs a 'scenarios' map")
    horizons = spec.get("horizons") or [None]
    seeds = spec.get("seeds") or [0]
    cells = []
    for name, base in scenarios.items():
        _validate_config({**base, "horizon": base.get("horizon", 1)})
        for h in horizons:
            for s in seeds:
                cfg = dict(base)
                if h is not None:
                    cfg["horizon"] = h
                cfg["seed"] = s
                cells.append((name, cfg))
    out = _out_dir(args)
    results = []
    failures = 0
    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            futures = [pool.submit(_sweep_cell, c) for c in cells]
            for f in futures:
                try:
                    results.append(f.result())
                except Exception as e:   # keep partial results
                    failures += 1
                    print(f"sweep cell failed: {e}", file=sys.stderr)
    else:
        for c in cells:
            try:
                results.append(_sweep_cell(c))
            except Exception as e:
                failures += 1
                print(f"sweep cell failed: {e}", file=sys.stderr)
    results.sort(key=lambda r: (r["scenario"], r["horizon"], r["seed"]))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS)
    w.writeheader()
    w.writerows(results)
    (out / "sweep.csv").write_text(buf.getvalue())
    print(f"wrote {out}/sweep.csv ({len(results)} rows)")
    return 0 if failures == 0 else 2


def cmd_topology(args) -> int:
    if args.config:
        fams = [("config", resolve_family(json.loads(Path(args.config).read_text())))]
    else:
        names = [n for n in BUILTIN_NAMES if n != "singleton-N"]
        fams = [(n, builtin(n)) for n in names]
    rows = verdict_table(fams)
    width = max(len(r["family"]) for r in rows) + 2
    print(f"{'family':<{width}}{'full':<8}partial")
    for r in rows:
        print(f"{r['family']:<{width}}{r['full']:<8}{r['partial']}")
    if args.out:
        out = _out_dir(args)
        (out / "topology.json").write_text(json.dumps(rows, indent=2) + "\n")
    return 0


def cmd_demo(args) -> int:
    if args.name not in DEMOS:
        raise ConfigError(f"unknown demo {args.name!r}; have {sorted(DEMOS)}")
    args.demo_name = args.name
    args.config = None
    return cmd_run(args)


def cmd_validate(args) -> int:
    cfg = _load_config(args)
    _validate_config(cfg)
    print("config ok")
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="limitlab",
                                description="enumeration-game simulator")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config path")
        sp.add_argument("--horizon", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help=f"output dir (default ${OUT_ENV} or ./out)")
        sp.add_argument("--checkpoints", help="comma-separated density checkpoints")

    sp = sub.add_parser("run", help="execute one run")
    common(sp)
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("sweep", help="run a scenario grid")
    common(sp)
    sp.add_argument("--parallel", type=int, default=1)
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("topology", help="identifiability verdicts")
    sp.add_argument("--config")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_topology)

    sp = sub.add_parser("demo", help="run a named demo scenario")
    sp.add_argument("name")
    common(sp)
    sp.set_defaults(fn=cmd_demo)

    sp = sub.add_parser("validate", help="check a config file")
    common(sp)
    sp.set_defaults(fn=cmd_validate)

    args = p.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError, KeyError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except (ProtocolViolation, TeaserExhausted) as e:
        print(f"protocol violation: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
