"""Deterministic adversary-vs-learner interaction loop.

Within a step the adversary moves first (seeing the full transcript so far,
including learner outputs), then the learner sees only the emission stream and
answers with a hypothesis and an output string.  The engine enforces the
protocol (emissions lie in K; outputs are never previously-emitted strings)
and records structural flags per step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .adversaries import Adversary, build_adversary
from .families import Family, builtin
from .learners import Learner, build_learner
from .upsets import UPSet


class ProtocolViolation(RuntimeError):
    pass


@dataclass
class Step:
    t: int
    w: int
    o: int
    hyp_indices: tuple[int, ...] | None
    hyp_descriptor: dict
    hyp_count: int
    valid: bool
    contained: bool
    full: bool | None           # None when the enumerated set is dynamic
    changed: bool
    hyp_set: UPSet | None = None
    aux: dict = field(default_factory=dict)

    def line(self) -> str:
        rec = {"t": self.t, "w": self.w, "o": self.o,
               "indices": list(self.hyp_indices) if self.hyp_indices is not None
               else self.hyp_descriptor,
               "flags": {"valid": self.valid, "contained": self.contained,
                         "full": self.full}}
        return json.dumps(rec, sort_keys=True, separators=(",", ":"))


class RunState:
    """Live view handed to the adversary each step."""

    def __init__(self, family: Family, k: UPSet):
        self.family = family
        self.k = k
        self.steps: list[Step] = []
        self.emissions: list[int] = []
        self.outputs: list[int] = []
        self.seen_set: set[int] = set()
        self.output_set: set[int] = set()
        self._probes: dict[int, bool] = {}

    def probe_result(self, idx: int) -> bool:
        return self._probes.get(idx, False)


@dataclass
class Transcript:
    family: Family
    k_index: int
    k: UPSet
    declared_c: UPSet | str | None
    adversary_spec: dict
    learner_spec: dict
    horizon: int
    seed: int
    steps: list[Step]
    coverage_ok: bool
    coverage_checked: int
    coverage_missing: list[int]
    adversary_summary: dict = field(default_factory=dict)

    @property
    def outputs(self) -> list[int]:
        return [s.o for s in self.steps]

    @property
    def emissions(self) -> list[int]:
        return [s.w for s in self.steps]

    def valid_output_set(self) -> list[int]:
        return sorted({s.o for s in self.steps if s.valid})

    def header(self) -> dict:
        c = self.declared_c
        c_txt = c.to_text() if isinstance(c, UPSet) else c
        return {"family": self.family.to_dict(), "kIndex": self.k_index,
                "declaredC": c_txt, "adversary": self.adversary_spec,
                "learner": self.learner_spec, "horizon": self.horizon,
                "seed": self.seed}

    def to_jsonl(self) -> str:
        lines = [json.dumps({"header": self.header()}, sort_keys=True,
                            separators=(",", ":"))]
        lines.extend(s.line() for s in self.steps)
        return "\n".join(lines) + "\n"


def resolve_family(spec) -> Family:
    if isinstance(spec, Family):
        return spec
    if isinstance(spec, str):
        return builtin(spec)
    if isinstance(spec, dict):
        fam = Family.from_dict(spec)
        return fam
    raise ValueError(f"cannot resolve family from {spec!r}")


def run(family, k_index: int, adversary_spec: dict, learner_spec: dict,
        horizon: int, seed: int = 0, record_hyp: bool | None = None) -> Transcript:
    """Execute one full interaction and return the transcript."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    fam = resolve_family(family)
    k = fam.language_at(k_index)
    if not k.is_infinite:
        raise ValueError("true language must be infinite")
    adversary_spec = dict(adversary_spec)
    adversary_spec.setdefault("seed", seed)
    adv = build_adversary(adversary_spec, fam, k_index, k)
    learner = build_learner(learner_spec) if isinstance(learner_spec, dict) else learner_spec
    learner_desc = learner_spec if isinstance(learner_spec, dict) else {"kind": learner.kind}
    learner.start(fam)
    if record_hyp is None:
        record_hyp = horizon <= 2000
    c = adv.declared_c
    c_fixed = c if isinstance(c, UPSet) else None

    state = RunState(fam, k)
    lang_cache: dict[int, UPSet] = {}
    for t in range(1, horizon + 1):
        w = adv.next(state)
        if w not in k:
            raise ProtocolViolation(f"step {t}: adversary emitted {w} outside K")
        move = learner.step(t, w)
        o = move.output
        if o in state.seen_set or o == w:
            raise ProtocolViolation(f"step {t}: learner output {o} was already enumerated")
        valid = o in k
        contained = move.hyp.subset_of(k)
        full = move.hyp.contains(c_fixed) if c_fixed is not None else None
        probes = {}
        for idx in adv.probe_indices():
            if idx not in lang_cache:
                lang_cache[idx] = fam.language_at(idx)
            probes[idx] = move.hyp.subset_of_lang(lang_cache[idx])
        step = Step(t=t, w=w, o=o, hyp_indices=move.hyp.indices(),
                    hyp_descriptor=move.hyp.descriptor(), hyp_count=move.hyp.count(),
                    valid=valid, contained=contained, full=full,
                    changed=move.changed,
                    hyp_set=move.hyp.upset() if record_hyp else None,
                    aux=move.aux)
        state.steps.append(step)
        state.emissions.append(w)
        state.outputs.append(o)
        state.seen_set.add(w)
        state.output_set.add(o)
        state._probes = probes

    coverage_ok, checked, missing = _coverage(adv, c_fixed, state, horizon)
    return Transcript(family=fam, k_index=k_index, k=k, declared_c=c,
                      adversary_spec=adversary_spec, learner_spec=learner_desc,
                      horizon=horizon, seed=seed, steps=state.steps,
                      coverage_ok=coverage_ok, coverage_checked=checked,
                      coverage_missing=missing,
                      adversary_summary=adv.summary())


def _coverage(adv: Adversary, c_fixed: UPSet | None, state: RunState,
              horizon: int) -> tuple[bool, int, list[int]]:
    if c_fixed is None:
        return True, 0, []
    guaranteed = min(adv.coverage_prefix(horizon), horizon)
    missing = [c_fixed.nth(r) for r in range(guaranteed)
               if c_fixed.nth(r) not in state.seen_set]
    return not missing, guaranteed, missing[:16]


@dataclass
class Report:
    horizon: int
    last_invalid_t: int | None
    last_not_contained_t: int | None
    full_count: int
    full_ts_head: list[int]
    mind_changes: int
    last_mind_change_t: int | None
    stabilization_t: int | None
    outputs: list[int]            # sorted valid outputs
    invalid_outputs: list[int]
    coverage_ok: bool
    coverage_checked: int
    coverage_missing: list[int]

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "lastInvalidT": self.last_invalid_t,
                "lastNotContainedT": self.last_not_contained_t,
                "fullCount": self.full_count, "fullTsHead": self.full_ts_head,
                "mindChanges": self.mind_changes,
                "lastMindChangeT": self.last_mind_change_t,
                "stabilizationT": self.stabilization_t,
                "outputCount": len(self.outputs),
                "invalidOutputs": self.invalid_outputs[:16],
                "coverage": {"ok": self.coverage_ok,
                             "checkedPrefix": self.coverage_checked,
                             "missing": self.coverage_missing}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def analyze(tr: Transcript) -> Report:
    last_invalid = None
    last_not_contained = None
    full_ts = []
    mind_changes = 0
    last_change = None
    for s in tr.steps:
        if not s.valid:
            last_invalid = s.t
        if not s.contained:
            last_not_contained = s.t
        if s.full:
            full_ts.append(s.t)
        if s.t > 1 and s.changed:
            mind_changes += 1
            last_change = s.t
    stab = None
    if tr.steps and isinstance(tr.declared_c, UPSet):
        ok_from = None
        for s in tr.steps:
            good = s.full is True and s.contained
            if good and ok_from is None:
                ok_from = s.t
            elif not good:
                ok_from = None
        stab = ok_from
    valid_outputs = sorted({s.o for s in tr.steps if s.valid})
    invalid = sorted({s.o for s in tr.steps if not s.valid})
    return Report(horizon=tr.horizon, last_invalid_t=last_invalid,
                  last_not_contained_t=last_not_contained,
                  full_count=len(full_ts), full_ts_head=full_ts[:32],
                  mind_changes=mind_changes, last_mind_change_t=last_change,
                  stabilization_t=stab, outputs=valid_outputs,
                  invalid_outputs=invalid, coverage_ok=tr.coverage_ok,
                  coverage_checked=tr.coverage_checked,
                  coverage_missing=tr.coverage_missing)
