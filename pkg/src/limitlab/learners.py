"""Learner algorithms.

Every learner exposes, per step, a hypothesis (a finite intersection of
family languages, reported through a ``HypView``) and one output string.
"Output any string" is always resolved as the smallest string not yet used by
either party, and learners never repeat their own outputs.

The chain learners materialize at most t consistent languages at step t.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from math import gcd
from typing import Callable

from .chains import ChainDelta, UsedTracker, chain_for
from .families import ArithProg, Family, Multiples, ordinal_of_pair
from .upsets import UPSet


class ConfigError(ValueError):
    pass


INDEX_LIST_CAP = 64


# -- hypothesis views -------------------------------------------------------------


class HypView:
    """Engine-facing interface to one step's hypothesis."""

    def count(self) -> int:
        raise NotImplementedError

    def indices(self) -> tuple[int, ...] | None:
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def upset(self) -> UPSet:
        raise NotImplementedError

    def contains(self, c: UPSet) -> bool:
        raise NotImplementedError

    def subset_of(self, k: UPSet) -> bool:
        raise NotImplementedError

    def subset_of_lang(self, lang: UPSet) -> bool:
        raise NotImplementedError

    def min_unused(self, used: UsedTracker) -> int:
        raise NotImplementedError


class ChainView(HypView):
    """Prefix of the consistent chain; valid during the step it was issued."""

    def __init__(self, chain, depth: int, skip_slot: int | None = None):
        self.chain = chain
        self.depth = depth
        self.skip_slot = skip_slot  # cofinite only: one instance slot excluded

    def _ensure_c(self, c: UPSet):
        if self.chain._c is not c:
            self.chain.register_c(c)

    def _ensure_k(self, k: UPSet):
        if self.chain._k is not k:
            self.chain.register_k(k)

    def count(self) -> int:
        n = self.chain.prefix_count(self.depth)
        return n - (1 if self.skip_slot is not None else 0)

    def indices(self) -> tuple[int, ...] | None:
        if self.count() > INDEX_LIST_CAP:
            return None
        idxs = self.chain.prefix_indices(self.depth)
        if self.skip_slot is not None:
            skip_g = self.chain.slot_global[self.skip_slot]
            idxs = [i for i in idxs if i != skip_g]
        return tuple(idxs)

    def descriptor(self) -> dict:
        d = {"consistent_prefix": self.chain.prefix_count(self.depth)}
        if self.skip_slot is not None:
            d["excluding"] = self.chain.slot_global[self.skip_slot]
        return d

    def _skip_param(self) -> int | None:
        if self.skip_slot is None:
            return None
        return self.chain.slot_param[self.skip_slot]

    def upset(self) -> UPSet:
        s = self.chain.prefix_upset(self.depth)
        p = self._skip_param()
        if p is not None:
            s = s.add([p])
        return s

    def contains(self, c: UPSet) -> bool:
        self._ensure_c(c)
        if self.chain.prefix_contains_c(self.depth):
            return True
        p = self._skip_param()
        if p is None:
            return False
        # excluding one language can only add back its removed param
        return c.remove([p]).is_subset(self.chain.prefix_upset(self.depth))

    def subset_of(self, k: UPSet) -> bool:
        self._ensure_k(k)
        ok = self.chain.prefix_subset_k(self.depth)
        p = self._skip_param()
        if not ok or p is None:
            return ok
        return p in k

    def subset_of_lang(self, lang: UPSet) -> bool:
        ok = self.chain.prefix_subset_of(self.depth, lang)
        p = self._skip_param()
        if not ok or p is None:
            return ok
        return p in lang

    def min_unused(self, used: UsedTracker) -> int:
        x = self.chain.prefix_min_unused(self.depth, used)
        p = self._skip_param()
        if p is not None and p not in used and p < x:
            return p
        return x


class SetView(HypView):
    """Hypothesis given directly as a set plus its family indices."""

    def __init__(self, m: UPSet, idxs: tuple[int, ...]):
        self.m = m
        self.idxs = idxs

    def count(self) -> int:
        return len(self.idxs)

    def indices(self) -> tuple[int, ...] | None:
        return self.idxs

    def descriptor(self) -> dict:
        return {"indices": list(self.idxs)}

    def upset(self) -> UPSet:
        return self.m

    def contains(self, c: UPSet) -> bool:
        return c.is_subset(self.m)

    def subset_of(self, k: UPSet) -> bool:
        return self.m.is_subset(k)

    def subset_of_lang(self, lang: UPSet) -> bool:
        return self.m.is_subset(lang)

    def min_unused(self, used: UsedTracker) -> int:
        if not self.m.is_infinite:
            raise RuntimeError("hypothesis set exhausted")
        return used.low_in(self.m)


@dataclass
class Move:
    hyp: HypView
    output: int
    changed: bool
    aux: dict = field(default_factory=dict)


class Learner:
    kind = "abstract"

    def start(self, family: Family) -> None:
        raise NotImplementedError

    def step(self, t: int, w: int) -> Move:
        raise NotImplementedError


# -- chain-prefix learner (widest infinite prefix each step) ------------------------


class ChainPrefixLearner(Learner):
    """Hypothesis = the longest prefix of the materialized consistent list
    whose intersection is infinite (the whole list when every prefix is);
    outputs the smallest unused string of it.

    This single rule serves both generation (``naive-chain``) and
    identification (``identifier``) roles.
    """

    def __init__(self, kind: str = "naive-chain"):
        self.kind = kind

    def start(self, family: Family):
        self.chain = chain_for(family)
        self.used = UsedTracker()
        self._prev_sig = None

    def step(self, t: int, w: int) -> Move:
        self.used.add(w)
        delta = self.chain.observe(w, t)
        if self.chain.n == 0:
            raise RuntimeError("no consistent language materialized; family/adversary mismatch")
        j = self.chain.largest_infinite_prefix()
        if j == 0:
            j = 1  # single languages are infinite, so this cannot happen; stay safe
        o = self.chain.prefix_min_unused(j, self.used)
        self.used.add(o)
        sig = self._sig(j)
        changed = sig != self._prev_sig
        self._prev_sig = sig
        return Move(ChainView(self.chain, j), o, changed, aux={"depth": j})

    def _sig(self, j: int):
        ch = self.chain
        if ch.cofinite:
            _, ne, inst = ch._split(j)
            return ("cof", inst, ch.cores[min(ne, len(ch.cores) - 1)],
                    self._inst_checksum(j))
        return ("plain", ch.prefix_upset(j))

    def _inst_checksum(self, j: int):
        # prefix instance params are an ascending range of the alive-param list;
        # (count, last param) pins the multiset
        ch = self.chain
        slot, _, inst = ch._split(j)
        if inst == 0:
            return (0, -1)
        last_slot = ch.fen_inst.select(inst)
        return (inst, ch.slot_param[last_slot])


def naive_chain() -> Learner:
    return ChainPrefixLearner("naive-chain")


def identifier() -> Learner:
    return ChainPrefixLearner("identifier")


# -- anchored descent (the stable-hypothesis chain walker) ---------------------------


@dataclass
class AnchorStep:
    old_k: int
    new_k: int
    rel: str              # init | equal | subset | superset | incomparable
    ancestor: int | None  # depth of the least common chain ancestor, if any


class AnchoredTracker:
    """Maintains a depth pointer into the chain: descend one level per stable
    step while the next intersection is infinite; on a chain change, fall back
    to the deepest agreeing infinite prefix (or restart at depth 1)."""

    def __init__(self, chain):
        self.chain = chain
        self.k = 0
        self._sig = None

    def _signature(self, j: int):
        # adjacency makes (instance count, last param, core) pin the set:
        # params only die or get appended above the current maximum
        ch = self.chain
        if ch.cofinite:
            _, ne, inst = ch._split(j)
            last = ch.slot_param[ch.fen_inst.select(inst)] if inst else -1
            return ("cof", inst, last, ch.cores[min(ne, len(ch.cores) - 1)])
        return ("plain", ch.prefix_upset(j))

    def advance(self, delta: ChainDelta) -> AnchorStep:
        ch = self.chain
        if self.k == 0:
            self.k = 1
            self._sig = self._signature(1)
            return AnchorStep(0, 1, "init", None)
        old_k = self.k
        d = delta.max_agree
        if d >= old_k + 1:
            # same chain as far as the comparison depth; descend if possible
            cand = old_k + 1
            if ch.prefix_infinite(cand):
                new_k = cand
                rel = "equal" if ch.prefix_sets_equal(old_k, new_k) else "subset"
            else:
                new_k = old_k
                rel = "equal"
            anc = None
        else:
            k_star = d
            while k_star >= 1 and not ch.prefix_infinite(k_star):
                k_star -= 1
            if k_star >= 1:
                new_k = k_star
                rel = "equal" if self._signature(k_star) == self._sig else "superset"
                anc = None
            else:
                new_k = 1
                rel, anc = self._restart_relation(old_k, d)
        self.k = new_k
        self._sig = self._signature(new_k)
        return AnchorStep(old_k, new_k, rel, anc)

    def _restart_relation(self, old_k: int, d: int) -> tuple[str, int | None]:
        ch = self.chain
        if self._sig == self._signature(1):
            return "equal", None
        if not ch.cofinite and isinstance(self._sig, tuple) and self._sig[0] == "plain":
            old_set: UPSet = self._sig[1]
            new_set = ch.prefix_upset(1)
            if new_set.is_subset(old_set):
                return "superset", None
            if old_set.is_subset(new_set):
                return "subset", None
        # cofinite: the old set left the chain entirely; exact subset tests
        # would need the dropped exclusion multiset, and this step only occurs
        # when the very first consistent language dies.  Treat as incomparable.
        anc = min(d, old_k, 1) if d >= 1 else None
        return "incomparable", anc


class AnchoredChainLearner(Learner):
    """Outputs the smallest unused string of the anchored intersection."""

    kind = "anchored-chain"

    def start(self, family: Family):
        self.chain = chain_for(family)
        self.anchor = AnchoredTracker(self.chain)
        self.used = UsedTracker()

    def step(self, t: int, w: int) -> Move:
        self.used.add(w)
        delta = self.chain.observe(w, t)
        info = self.anchor.advance(delta)
        o = self.chain.prefix_min_unused(info.new_k, self.used)
        self.used.add(o)
        return Move(ChainView(self.chain, info.new_k), o,
                    changed=info.rel not in ("equal",),
                    aux={"depth": info.new_k, "rel": info.rel})


def anchored_chain() -> Learner:
    return AnchoredChainLearner()


# -- priority-list learner (aggressive fallback with tokens) --------------------------


class WeakDensityLearner(Learner):
    """Anchored hypothesis plus a priority list fed by aggressive guesses.

    On steps where the hypothesis strictly shrinks, grows, or jumps to a
    common chain ancestor, the learner queues unused strings of the chosen
    aggressive set up to just past the largest string seen, plus a token's
    worth beyond; queued strings are emitted first whenever they precede the
    hypothesis' next output.
    """

    kind = "weak-density"

    def start(self, family: Family):
        self.chain = chain_for(family)
        self.anchor = AnchoredTracker(self.chain)
        self.used = UsedTracker()
        self.slist: list[int] = []      # priority heap
        self.sset: set[int] = set()
        self.gaps: list[int] = []       # unused values below used.max, ascending
        self._gap_top = -1
        self._gap_ptr = 0               # scan frontier into gaps
        self._last_agg: tuple[int, int] | None = None   # (kill epoch, depth)

    # gap bookkeeping: values between successive used.max watermarks

    def _note_used(self, v: int):
        if v > self._gap_top:
            self.gaps.extend(range(self._gap_top + 1, v))
            self._gap_top = v
        self.used.add(v)

    def _scan_gaps(self, f_depth: int, hi: int):
        """Queue unused gap values <= hi belonging to the aggressive set.

        While the aggressive set only shrinks (no kills, non-decreasing
        depth), previously rejected values stay rejected, so the scan pointer
        never needs to back up; a kill or an upward jump forces a rescan."""
        epoch = self.chain.kills_total
        lineage = self._last_agg is not None and \
            self._last_agg[0] == epoch and f_depth >= self._last_agg[1]
        if not lineage:
            self.gaps = [g for g in self.gaps if g not in self.used]
            self._gap_ptr = 0
        self._last_agg = (epoch, f_depth)
        i = self._gap_ptr
        gaps = self.gaps
        while i < len(gaps) and gaps[i] <= hi:
            g = gaps[i]
            i += 1
            if g in self.used or g in self.sset:
                continue
            if self.chain.prefix_member(f_depth, g):
                self._push_s(g)
        self._gap_ptr = i

    def _push_s(self, v: int):
        if v not in self.sset:
            self.sset.add(v)
            heapq.heappush(self.slist, v)

    def _peek_s(self) -> int | None:
        while self.slist:
            v = self.slist[0]
            if v in self.used:
                heapq.heappop(self.slist)
                self.sset.discard(v)
                continue
            return v
        return None

    def _pop_s(self) -> int:
        v = heapq.heappop(self.slist)
        self.sset.discard(v)
        return v

    def _aggressive(self, f_depth: int, token: int):
        w_top = self.used.max
        wprime = self.chain.prefix_min_from(f_depth, w_top + 1)
        if wprime is None:
            return
        self._scan_gaps(f_depth, wprime)
        self._push_s(wprime)
        x = wprime
        for _ in range(token):
            x = self.chain.prefix_min_from(f_depth, x + 1)
            if x is None:
                break
            self._push_s(x)

    def step(self, t: int, w: int) -> Move:
        self._note_used(w)
        delta = self.chain.observe(w, t)
        info = self.anchor.advance(delta)
        rule = None
        if info.rel in ("init", "equal"):
            rule = "stay"
        elif info.rel == "subset":
            self._aggressive(info.old_k, 2)
            rule = "shrink"
        elif info.rel == "superset":
            self._aggressive(info.new_k, 2)
            rule = "grow"
        else:  # incomparable
            if info.ancestor is not None:
                self._aggressive(info.ancestor, 2 * (info.new_k - info.ancestor))
                rule = "ancestor"
            else:
                rule = "stray"
        if rule in ("stay", "stray"):
            s_min = self._peek_s()
            nxt = self.chain.prefix_min_unused(info.new_k, self.used)
            if s_min is not None and s_min < nxt:
                o = self._pop_s()
            else:
                o = nxt
        else:
            o = self._pop_next_s()
        self._note_used(o)
        return Move(ChainView(self.chain, info.new_k), o,
                    changed=info.rel not in ("equal",),
                    aux={"depth": info.new_k, "rel": info.rel, "rule": rule,
                         "s_size": len(self.sset)})

    def _pop_next_s(self) -> int:
        v = self._peek_s()
        if v is None:
            # aggressive set was exhausted above the watermark; fall back
            return self.chain.prefix_min_unused(self.anchor.k, self.used)
        return self._pop_s()


def weak_density() -> Learner:
    return WeakDensityLearner()


# -- block-reservation learner ("pod") -------------------------------------------------


class _Block:
    """Reserved strings: either an explicit sorted list or a rank range of a set."""

    __slots__ = ("items", "upset", "lo", "hi", "pos")

    def __init__(self, items=None, upset=None, lo=0, hi=0):
        self.items = items
        self.upset = upset
        self.lo = lo
        self.hi = hi
        self.pos = 0 if items is not None else lo

    def current(self) -> int | None:
        if self.items is not None:
            return self.items[self.pos] if self.pos < len(self.items) else None
        return self.upset.nth(self.pos) if self.pos < self.hi else None

    def advance(self):
        self.pos += 1

    def max_value(self) -> int:
        if self.items is not None:
            return self.items[-1]
        return self.upset.nth(self.hi - 1)

    def size(self) -> int:
        if self.items is not None:
            return len(self.items)
        return self.hi - self.lo

    def elements(self) -> list[int]:
        if self.items is not None:
            return list(self.items)
        return [self.upset.nth(r) for r in range(self.lo, self.hi)]


class PodLearner(Learner):
    """Reserves a block of fresh strings from the (aggressive) hypothesis each
    step and outputs the smallest reserved string still available."""

    kind = "pod"

    def __init__(self, schedule: str | int = "linear"):
        if schedule == "linear":
            self.s_fn: Callable[[int], int] = lambda t: t
            self.schedule_desc = "linear"
        else:
            s = int(schedule)
            if s < 2:
                raise ConfigError("constant pod schedule needs s >= 2")
            self.s_fn = lambda t: s
            self.schedule_desc = f"constant:{s}"

    def start(self, family: Family):
        self.chain = chain_for(family)
        self.anchor = AnchoredTracker(self.chain)
        self.used = UsedTracker()
        self.pool: list[tuple[int, int, _Block]] = []   # (current value, serial, block)
        self._serial = 0
        self.frontier = 0
        self.holes: list[int] = []
        self.high_used: list[int] = []   # used values at or above the frontier
        self.hole_cap = 5_000_000

    def _note_adversary(self, w: int):
        self.used.add(w)
        if w >= self.frontier:
            insort(self.high_used, w)

    def _push_block(self, b: _Block):
        cur = b.current()
        if cur is not None:
            self._serial += 1
            heapq.heappush(self.pool, (cur, self._serial, b))

    def _reserve(self, depth: int, count: int) -> list[_Block]:
        """Take the `count` smallest strings of the depth intersection that are
        unused and unreserved; update frontier and holes."""
        blocks: list[_Block] = []
        low_items: list[int] = []
        keep_holes: list[int] = []
        for h in self.holes:
            if count > len(low_items) and h not in self.used and \
                    self.chain.prefix_member(depth, h):
                low_items.append(h)
            else:
                if h not in self.used:
                    keep_holes.append(h)
        self.holes = keep_holes
        if low_items:
            blocks.append(_Block(items=low_items))
        need = count - len(low_items)
        while need > 0:
            ba = self.chain.band_above(depth, self.frontier)
            if ba is not None:
                band, r0 = ba
                blocks.extend(self._reserve_ranges(band, r0, need))
                need = 0
            else:
                x = self.chain.prefix_min_from(depth, self.frontier)
                taken = []
                scan = self.frontier
                while len(taken) < need and x is not None:
                    for v in range(scan, x):
                        if v not in self.used:
                            self.holes.append(v)
                    if x not in self.used:
                        taken.append(x)
                    scan = x + 1
                    x = self.chain.prefix_min_from(depth, x + 1)
                self.frontier = scan
                if taken:
                    blocks.append(_Block(items=taken))
                need -= len(taken)
                if x is None:
                    break
        if len(self.holes) > self.hole_cap:
            raise RuntimeError("reservation hole list exceeded cap; "
                               "scenario too sparse for this schedule")
        self.holes.sort()
        for b in blocks:
            self._push_block(b)
        return blocks

    def _reserve_ranges(self, band: UPSet, r0: int, need: int) -> list[_Block]:
        """Fresh rank ranges of `band` from rank r0, split around used values."""
        out = []
        while need > 0:
            lo_val = band.nth(r0)
            i = bisect_left(self.high_used, lo_val)
            if i < len(self.high_used):
                u = self.high_used[i]
                r_stop = band.rank(u)  # ranks of band values strictly below u
            else:
                u = None
                r_stop = r0 + need
            r_end = min(r0 + need, r_stop)
            if r_end > r0:
                out.append(_Block(upset=band, lo=r0, hi=r_end))
                need -= r_end - r0
                span_hi = band.nth(r_end - 1) + 1
                self._add_span_holes(band, self.frontier, span_hi)
                self.frontier = span_hi
                r0 = r_end
            if need > 0 and u is not None:
                # blocked by a used value; hop over it
                span_hi = u + 1
                self._add_span_holes(band, self.frontier, span_hi)
                self.frontier = span_hi
                r0 = band.rank(self.frontier)
        cut = bisect_left(self.high_used, self.frontier)
        if cut:
            self.high_used = self.high_used[cut:]
        return out

    def _add_span_holes(self, band: UPSet, lo: int, hi: int):
        if hi <= lo:
            return
        missing = (hi - lo) - (band.rank(hi) - band.rank(lo))
        if missing == 0:
            return
        for v in range(lo, hi):
            if v not in band and v not in self.used:
                self.holes.append(v)

    def _pop_output(self) -> int:
        while self.pool:
            val, serial, blk = heapq.heappop(self.pool)
            cur = blk.current()
            if cur != val:
                self._push_block(blk)
                continue
            blk.advance()
            self._push_block(blk)
            if val in self.used:
                continue
            return val
        raise RuntimeError("reservation pool exhausted; pods must stay nonempty")

    def step(self, t: int, w: int) -> Move:
        self._note_adversary(w)
        delta = self.chain.observe(w, t)
        info = self.anchor.advance(delta)
        if info.rel in ("init", "equal"):
            src, rule = info.new_k, "stay"
        elif info.rel == "subset":
            src, rule = info.old_k, "shrink"      # aggressive: the pre-shrink set
        elif info.rel == "superset":
            src, rule = info.new_k, "grow"
        else:
            if info.ancestor is not None:
                src, rule = info.ancestor, "ancestor"
            else:
                src, rule = info.new_k, "stray"
        s = self.s_fn(t)
        blocks = self._reserve(src, s)
        o = self._pop_output()
        self.used.add(o)
        pod_max = max(b.max_value() for b in blocks) if blocks else None
        return Move(ChainView(self.chain, info.new_k), o,
                    changed=info.rel not in ("equal",),
                    aux={"depth": info.new_k, "rel": info.rel, "rule": rule,
                         "pod_size": s, "pod_max": pod_max, "pod_blocks": blocks})


def pod(schedule: str | int = "linear") -> Learner:
    return PodLearner(schedule)


# -- gcd learner for divisor-structured families ----------------------------------------


class GcdLearner(Learner):
    """For the multiples family, hypothesizes the multiples of the running
    gcd of the inputs; for progressions, the progression from the smallest
    input with the running difference gcd."""

    kind = "gcd"

    def start(self, family: Family):
        if len(family.schemas) == 1 and isinstance(family.schemas[0], Multiples):
            self.mode = "multiples"
        elif len(family.schemas) == 1 and isinstance(family.schemas[0], ArithProg):
            self.mode = "arith"
        else:
            raise ConfigError("gcd learner needs the multiples or arithprog family")
        if family.removed:
            raise ConfigError("gcd learner does not support string-removed families")
        self.family = family
        self.used = UsedTracker()
        self.g = 0
        self.amin: int | None = None
        self._prev = None

    def step(self, t: int, w: int) -> Move:
        self.used.add(w)
        if self.mode == "multiples":
            self.g = gcd(self.g, w)
            g = self.g if self.g else 1   # only zeros seen: no information yet
            m = UPSet.multiples(g)
            idxs = (g,)
        else:
            if self.amin is None or w < self.amin:
                if self.amin is not None:
                    self.g = gcd(self.g, self.amin - w)
                self.amin = w
            else:
                self.g = gcd(self.g, w - self.amin)
            g = self.g if self.g else self.amin  # single value: step by itself
            m = UPSet.arith(self.amin, g)
            idxs = (self.family.start + ordinal_of_pair(self.amin, g),)
        view = SetView(m, idxs)
        o = view.min_unused(self.used)
        self.used.add(o)
        changed = m != self._prev
        self._prev = m
        return Move(view, o, changed, aux={"gcd": self.g, "min": self.amin})


def gcd_learner() -> Learner:
    return GcdLearner()


# -- semi-index adapters ------------------------------------------------------------------


class ElementToSemiIndex(Learner):
    """Wraps an element-producing learner: reports up to t smallest-index
    consistent languages that contain its output and have an infinite
    intersection (falling back to the smallest containing language)."""

    def __init__(self, inner: Learner):
        self.inner = inner
        self.kind = f"element-to-semiindex({inner.kind})"

    def start(self, family: Family):
        self.inner.start(family)
        self.family = family
        self.chain = chain_for(family)
        self._prev_desc = None

    def step(self, t: int, w: int) -> Move:
        inner_move = self.inner.step(t, w)
        o = inner_move.output
        self.chain.observe(w, t)
        view = self._wrap_view(t, o)
        desc = view.descriptor()
        changed = desc != self._prev_desc
        self._prev_desc = desc
        return Move(view, o, changed, aux={"inner": inner_move.aux})

    def _wrap_view(self, t: int, o: int) -> HypView:
        ch = self.chain
        if ch.cofinite:
            skip = None
            slot = ch.param_slot.get(o)
            if slot is not None and ch.slot_alive[slot]:
                skip = slot
            n = ch.n
            avail = n - (1 if skip is not None else 0)
            take = min(t, avail)
            if take >= 1:
                depth = take
                if skip is not None and ch.fen_alive.prefix(skip + 1) <= take:
                    depth = take + 1  # the skipped slot sits inside the prefix
                # the prefix must consist of languages containing o: explicit
                # entries might not; verify and truncate
                depth = self._truncate_explicit(depth, o, skip)
                if depth >= 1:
                    return ChainView(ch, depth, skip_slot=skip)
            return self._fallback(o)
        # plain regime: filter the materialized list
        cands = []
        acc = None
        for idx, lang in ch.slots:
            if len(cands) >= t:
                break
            if o in lang:
                nxt = lang if acc is None else acc.intersect(lang)
                if not nxt.is_infinite:
                    break
                acc = nxt
                cands.append(idx)
        if cands:
            return SetView(acc, tuple(cands))
        return self._fallback(o)

    def _truncate_explicit(self, depth: int, o: int, skip) -> int:
        ch = self.chain
        while depth >= 1:
            _, ne, _ = ch._split(depth)
            core = ch.cores[min(ne, len(ch.cores) - 1)]
            if o in core or ne == 0:
                return depth
            depth = self._depth_without_last_explicit(depth, ne)
        return 0

    def _depth_without_last_explicit(self, depth: int, ne: int) -> int:
        # drop下 to just before the ne-th explicit slot
        ch = self.chain
        slot = ch.expl_slots[ne - 1]
        return ch.fen_alive.prefix(slot + 1) - 1

    def _fallback(self, o: int) -> HypView:
        fam = self.family
        for idx in fam.indices(limit=512):
            lang = fam.language_at(idx)
            if o in lang:
                return SetView(lang, (idx,))
        raise RuntimeError(f"no family language contains output {o}")


class SemiIndexToElement(Learner):
    """Wraps a hypothesis-producing learner, outputting the smallest unused
    string of its intersection."""

    def __init__(self, inner: Learner):
        self.inner = inner
        self.kind = f"semiindex-to-element({inner.kind})"

    def start(self, family: Family):
        self.inner.start(family)
        self.used = UsedTracker()

    def step(self, t: int, w: int) -> Move:
        self.used.add(w)
        inner_move = self.inner.step(t, w)
        o = inner_move.hyp.min_unused(self.used)
        self.used.add(o)
        return Move(inner_move.hyp, o, inner_move.changed,
                    aux={"inner_output": inner_move.output})


def element_to_semiindex(inner: Learner) -> Learner:
    return ElementToSemiIndex(inner)


def semiindex_to_element(inner: Learner) -> Learner:
    return SemiIndexToElement(inner)


# -- config construction --------------------------------------------------------------------


def build_learner(spec: dict) -> Learner:
    kind = spec.get("kind")
    if kind in ("naive-chain", "naive_chain"):
        inner = naive_chain()
    elif kind in ("anchored-chain", "anchored_chain"):
        inner = anchored_chain()
    elif kind in ("weak-density", "weak_density"):
        inner = weak_density()
    elif kind == "pod":
        sched = spec.get("schedule", "linear")
        if isinstance(sched, dict):
            sched = sched.get("s", "linear") if sched.get("kind") == "constant" else "linear"
        inner = pod(sched)
    elif kind == "identifier":
        inner = identifier()
    elif kind == "gcd":
        inner = gcd_learner()
    else:
        raise ConfigError(f"unknown learner kind {kind!r}")
    wrap = spec.get("wrap")
    if wrap in (None, "none"):
        return inner
    if wrap == "element_to_semiindex":
        return element_to_semiindex(inner)
    if wrap == "semiindex_to_element":
        return semiindex_to_element(inner)
    if wrap == "both":
        return semiindex_to_element(element_to_semiindex(inner))
    raise ConfigError(f"unknown wrap {wrap!r}")
