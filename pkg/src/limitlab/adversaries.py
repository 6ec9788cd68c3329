"""Enumeration strategies.

An adversary produces one string per step, drawn from the true language K.
Fixed-set adversaries enumerate a declared infinite subset C of K (and state
it so the engine can compute fullness flags); adaptive adversaries react to
the learner's visible behaviour and declare their set "dynamic".
"""

from __future__ import annotations

import random
from fractions import Fraction

from .families import CoSingleton, Family
from .upsets import UPSet


class TeaserExhausted(RuntimeError):
    """No further pretend language exists: the family/witness pair admits
    stable identification, so the teaser is out of moves."""


class Adversary:
    kind = "abstract"
    declared_c: UPSet | str | None = None   # UPSet, or "dynamic"

    def next(self, state) -> int:
        """Produce the next string.  ``state`` exposes the full run so far:
        .emissions, .outputs, .steps, .k, .probe(idx)."""
        raise NotImplementedError

    def probe_indices(self) -> tuple[int, ...]:
        """Family indices whose containment of the current hypothesis the
        engine should evaluate after each step."""
        return ()

    def coverage_prefix(self, horizon: int) -> int:
        """How many leading elements of the declared set are guaranteed to be
        emitted within `horizon` steps (0 when not applicable)."""
        return 0

    def summary(self) -> dict:
        return {}


class FixedEnumerator(Adversary):
    """Enumerates a fixed infinite set, either in increasing order or in
    consecutive blocks, each block emitted in a seeded shuffle."""

    def __init__(self, c: UPSet, policy: str = "increasing",
                 seed: int = 0, block_len: int = 1):
        if not c.is_infinite:
            raise ValueError("enumerated set must be infinite")
        self.c = c
        self.policy = policy
        self.seed = seed
        self.block_len = int(block_len)
        self.declared_c = c
        self.kind = policy
        if policy == "increasing":
            self.block_len = 1
        elif policy != "block_shuffle":
            raise ValueError(f"unknown enumeration policy {policy!r}")
        if self.block_len < 1:
            raise ValueError("block length must be >= 1")
        self._block: list[int] = []
        self._emitted = 0

    def next(self, state) -> int:
        if not self._block:
            b = self._emitted // self.block_len
            ranks = list(range(b * self.block_len, (b + 1) * self.block_len))
            if self.block_len > 1:
                rng = random.Random(self.seed * 1_000_003 + b)
                rng.shuffle(ranks)
            self._block = [self.c.nth(r) for r in reversed(ranks)]
        self._emitted += 1
        return self._block.pop()

    def coverage_prefix(self, horizon: int) -> int:
        # element k is emitted by step block_len * (k // block_len + 1)
        return self.block_len * (horizon // self.block_len)


class Recycler(Adversary):
    """Sweeps K from below, but at every power-of-two step re-emits the
    smallest learner output it has not yet used, capping how much credit the
    learner can collect.  Enumerates all of K, so C = K."""

    kind = "recycler"

    def __init__(self, k: UPSet):
        if not k.is_infinite:
            raise ValueError("true language must be infinite")
        self.k = k
        self.declared_c = k
        self._emitted: set[int] = set()
        self._sweep = 0   # rank cursor into k
        self._t = 0

    def _fallback(self, state) -> int:
        outputs = state.output_set
        while True:
            v = self.k.nth(self._sweep)
            if v not in self._emitted and v not in outputs:
                return v
            self._sweep += 1

    def next(self, state) -> int:
        self._t += 1
        v = None
        if self._t & (self._t - 1) == 0:  # power of two (1, 2, 4, ...)
            recyclable = [o for o in state.output_set if o not in self._emitted]
            if recyclable:
                v = min(recyclable)
        if v is None:
            v = self._fallback(state)
        self._emitted.add(v)
        return v

    def coverage_prefix(self, horizon: int) -> int:
        # at least the non-power steps sweep K from below
        import math
        return max(0, horizon - int(math.log2(horizon)) - 2)


def density_subset(k: UPSet, alpha: Fraction) -> UPSet:
    """The subset of k keeping ranks r with r mod b < a, where alpha = a/b;
    its relative density in k is exactly alpha."""
    alpha = Fraction(alpha)
    if not (0 < alpha <= 1):
        raise ValueError("density must lie in (0, 1]")
    if not k.is_infinite:
        raise ValueError("host set must be infinite")
    a, b = alpha.numerator, alpha.denominator
    c = len(k.residues)          # elements per period in the tail
    period_count = _lcm(b, c)
    big_period = k.period * (period_count // c)
    m0 = k.rank(k.threshold)     # number of prefix elements
    first_tail = k.nth(m0)
    residues = set()
    for j in range(period_count):
        if (m0 + j) % b < a:
            residues.add(k.nth(m0 + j) % big_period)
    exceptions = {k.nth(m) for m in range(m0) if m % b < a}
    return UPSet(first_tail, big_period, residues, exceptions)


def _lcm(x: int, y: int) -> int:
    from math import lcm
    return lcm(x, y)


class ChainTeaser(Adversary):
    """Feeds the learner an infinite trace of a pretend language strictly
    below the target; each time the learner's hypothesis has committed below
    the pretend language for `patience` consecutive steps, reveals a string
    separating the pretend language from the target and moves on to the next
    pretend language.

    Requires the target to fail the partial-enumeration separation condition
    for the witness set c (checked at construction), otherwise the supply of
    pretend languages dries up and the teaser raises ``TeaserExhausted``.
    """

    kind = "chain_teaser"
    declared_c = "dynamic"

    def __init__(self, family: Family, target_idx: int, c: UPSet,
                 patience: int = 10, search_window: int = 4096):
        from .topology import fails_td_partial
        self.family = family
        self.target_idx = target_idx
        self.target = family.language_at(target_idx)
        if not c.intersect(self.target).is_infinite:
            raise ValueError("witness set must meet the target infinitely often")
        failing, _ = fails_td_partial(family, c, target_idx)
        if not failing:
            raise TeaserExhausted(
                "target admits stable identification under this witness; "
                "no pretend-language supply")
        self.c = c
        self.patience = patience
        self.search_window = search_window
        self.emitted: set[int] = set()
        self.commit_run = 0
        self.cursor = -1            # enumeration position within c ∩ pretend
        self.switches = 0
        self.pretend_idx: int | None = None
        self.pretend: UPSet | None = None
        self._choose_first()

    # ---- pretend-language supply

    def _cosingleton_schema(self) -> CoSingleton | None:
        fam = self.family
        if len(fam.schemas) == 1 and isinstance(fam.schemas[0], CoSingleton) \
                and not fam.removed:
            return fam.schemas[0]
        return None

    def _next_pretend(self, must_contain: int | None) -> tuple[int, UPSet]:
        sch = self._cosingleton_schema()
        if sch is not None:
            pool = self.c.intersect(sch.index_set).intersect(self.target)
            lo = max(self.emitted | {must_contain or 0}) if (self.emitted or must_contain) else -1
            try:
                i = pool.successor(lo)
            except IndexError:
                raise TeaserExhausted("no fresh pretend language in the index tail")
            gidx = self.family.start + len(self.family.live_explicit) + sch.index_set.rank(i)
            return gidx, self.family.language_at(gidx)
        # generic windowed search over the family order
        target_trace = self.c.intersect(self.target)
        for idx in self.family.indices(limit=self.search_window):
            if idx == self.target_idx or idx == self.pretend_idx:
                continue
            lang = self.family.language_at(idx)
            trace = self.c.intersect(lang)
            if not trace.is_infinite:
                continue
            if not trace.is_subset(target_trace) or trace == target_trace:
                continue
            if any(e not in lang for e in self.emitted):
                continue
            if must_contain is not None and must_contain not in lang:
                continue
            return idx, lang
        raise TeaserExhausted("pretend-language search window exhausted")

    def _choose_first(self):
        self.pretend_idx, self.pretend = self._next_pretend(None)
        self.trace = self.c.intersect(self.pretend)

    def probe_indices(self) -> tuple[int, ...]:
        return (self.pretend_idx,)

    # ---- emission

    def _separator(self) -> int | None:
        """An unemitted element of c separating the pretend language from the
        target (it lies in the target but not in the pretend language)."""
        gap = self.c.intersect(self.target).difference(self.pretend)
        x = None
        k = 0
        while True:
            try:
                cand = gap.nth(k)
            except IndexError:
                return x
            if cand not in self.emitted:
                return cand
            k += 1

    def next(self, state) -> int:
        committed = False
        if state.steps:
            committed = state.probe_result(self.pretend_idx)
        self.commit_run = self.commit_run + 1 if committed else 0
        if self.commit_run >= self.patience:
            sep = self._separator()
            new_idx, new_lang = self._next_pretend(sep)
            self.commit_run = 0
            self.switches += 1
            self.pretend_idx, self.pretend = new_idx, new_lang
            self.trace = self.c.intersect(self.pretend)
            if sep is not None:
                self.emitted.add(sep)
                return sep
        while True:
            try:
                v = self.trace.successor(self.cursor)
            except IndexError:
                raise TeaserExhausted("pretend trace ran dry")
            self.cursor = v
            if v not in self.emitted:
                self.emitted.add(v)
                return v

    def summary(self) -> dict:
        return {"switches": self.switches, "finalPretend": self.pretend_idx}


def build_adversary(spec: dict, family: Family, k_idx: int, k: UPSet) -> Adversary:
    kind = spec.get("kind")
    seed = spec.get("seed", 0)
    if kind in ("increasing", "block_shuffle"):
        c = _resolve_c(spec.get("c"), k)
        return FixedEnumerator(c, kind, seed=seed,
                               block_len=spec.get("blockLen", spec.get("block_len", 1)))
    if kind == "recycler":
        return Recycler(k)
    if kind == "chain_teaser":
        c = _resolve_c(spec.get("c"), k)
        return ChainTeaser(family, spec.get("targetIdx", k_idx), c,
                           patience=spec.get("commitPatience", 10),
                           search_window=spec.get("searchWindow", 4096))
    raise ValueError(f"unknown adversary kind {kind!r}")


def _resolve_c(c_spec, k: UPSet) -> UPSet:
    if c_spec is None:
        return k
    if isinstance(c_spec, UPSet):
        return c_spec
    if isinstance(c_spec, str):
        return UPSet.from_text(c_spec)
    if isinstance(c_spec, dict):
        if c_spec.get("kind") == "density_subset":
            return density_subset(k, Fraction(c_spec["alpha"]))
        return UPSet.from_dict(c_spec)
    raise ValueError(f"cannot resolve enumerated set from {c_spec!r}")
