"""Exact density accounting over prefixes of the true language.

All values are rationals; the only approximation anywhere is that a finite
run stands in for a limit, which the callers handle by burning in and taking
a minimum over late checkpoints.
"""

from __future__ import annotations

import csv
import io
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .engine import Transcript
from .upsets import UPSet


@dataclass
class DensityCurve:
    points: list[tuple[int, Fraction]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["N", "density"])
        for n, v in self.points:
            w.writerow([n, f"{v.numerator}/{v.denominator}"])
        return buf.getvalue()


def prefix_density(outputs: list[int], k: UPSet, n: int) -> Fraction:
    """|outputs among the first n elements of k| / n, exactly."""
    if n < 1:
        raise ValueError("prefix length must be >= 1")
    if not k.is_infinite:
        raise ValueError("host language must be infinite")
    for x in outputs:
        if x not in k:
            raise ValueError(f"output {x} lies outside the host language")
    top = k.nth(n - 1)
    count = bisect_right(outputs, top)
    return Fraction(count, n)


def density_curve(tr: Transcript, checkpoints: list[int]) -> DensityCurve:
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValueError("checkpoints must increase")
    outputs = tr.valid_output_set()
    return DensityCurve([(n, prefix_density(outputs, tr.k, n)) for n in checkpoints])


def empirical_lower(curve: DensityCurve, burn_fraction: Fraction = Fraction(1, 2)) -> Fraction:
    """Minimum curve value at checkpoints past burn_fraction of the largest N."""
    if not curve.points:
        raise ValueError("empty curve")
    cutoff = Fraction(burn_fraction) * curve.points[-1][0]
    tail = [v for n, v in curve.points if n >= cutoff]
    if not tail:
        raise ValueError("all checkpoints fall inside the burn window")
    return min(tail)


@dataclass
class GbPartition:
    good: list[int]
    bad: list[int]
    inequality: list[dict]

    def to_dict(self) -> dict:
        return {"goodCount": len(self.good), "badCount": len(self.bad),
                "good": self.good[:32], "bad": self.bad[:32],
                "inequality": self.inequality}


def gb_partition(tr: Transcript, n_values: list[int] | None = None,
                 slack: int | None = None) -> GbPartition:
    """Classify enumerated strings the learner never produced as good (the
    learner was not far behind when they arrived) or bad, and check the
    counting inequality tying output mass to enumeration mass.

    Good for the priority-list learner: the previous output is at most the
    successor of the arriving string; for the reservation learner: all of the
    previous step's reserved block is.
    """
    kind = tr.learner_spec.get("kind", "")
    if kind not in ("weak-density", "weak_density", "pod"):
        raise ValueError("partition is defined for the weak-density and pod learners")
    if not isinstance(tr.declared_c, UPSet):
        raise ValueError("partition needs a declared enumerated set")
    c = tr.declared_c
    k = tr.k
    out_set = set(tr.outputs)
    pod_mode = kind == "pod"
    pod_elems: set[int] = set()
    if pod_mode:
        bound = max(tr.emissions) + 1
        for s in tr.steps:
            for blk in s.aux.get("pod_blocks", ()):
                if blk.items is not None:
                    pod_elems.update(v for v in blk.items if v < bound)
                else:
                    lo_v = blk.upset.nth(blk.lo)
                    if lo_v < bound:
                        hi = min(blk.hi, blk.upset.rank(bound))
                        pod_elems.update(blk.upset.nth(r) for r in range(blk.lo, hi))
    good, bad = [], []
    for i, s in enumerate(tr.steps):
        w = s.w
        if w not in c or w in out_set or (pod_mode and w in pod_elems):
            continue
        if i == 0:
            good.append(w)
            continue
        prev = tr.steps[i - 1]
        marker = prev.aux.get("pod_max") if pod_mode else prev.o
        if marker is None or marker <= k.successor(w):
            good.append(w)
        else:
            bad.append(w)
    inequality = []
    if pod_mode and n_values:
        sched = tr.learner_spec.get("schedule")
        s_const = sched if isinstance(sched, int) else None
        if isinstance(sched, dict) and sched.get("kind") == "constant":
            s_const = sched.get("s")
        if s_const:
            rep_slack = slack
            if rep_slack is None:
                last_nc = max((st.t for st in tr.steps if not st.contained), default=0)
                rep_slack = last_nc + s_const * s_const + 4 * s_const
            outputs = tr.valid_output_set()
            for n in n_values:
                top = k.nth(n - 1)
                o_count = bisect_right(outputs, top)
                c_count = c.intersect(k).count_below(top + 1)
                lhs = Fraction(2 + Fraction(4, s_const)) * o_count + rep_slack
                inequality.append({"N": n, "lhs": str(lhs), "rhs": c_count,
                                   "margin": str(lhs - c_count),
                                   "holds": lhs >= c_count,
                                   "slack": rep_slack})
    return GbPartition(sorted(good), sorted(bad), inequality)
