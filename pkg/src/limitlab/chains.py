"""Incremental tracking of the consistent-language chain.

Learners repeatedly need, per step: the ordered list of consistent languages
materialized so far, the chain of its prefix intersections, how that chain
changed across a step, and fast ordering/membership queries against a chosen
prefix intersection.  Recomputing any of this from scratch is quadratic in the
horizon, so this module maintains it incrementally.

Two regimes share one interface:

* ``PlainChain`` keeps languages and prefix intersections as explicit sets.
  Exact and simple; for families whose consistent list stays small
  (multiples, progressions, finite families).
* ``CofiniteChain`` serves families generated by one co-singleton schema,
  where the consistent list grows with the horizon but every prefix
  intersection is "core minus finitely many index elements".  Prefix state
  lives in Fenwick trees over materialized slots, keeping per-step queries
  logarithmic.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

from .families import CoSingleton, Family, SeenDigest
from .upsets import UPSet, intersect_all

BIG = 1 << 60


class Fenwick:
    def __init__(self):
        self.tree: list[int] = [0]
        self.n = 0

    def append(self, v: int):
        self.n += 1
        self.tree.append(0)
        i = self.n
        lowbit = i & (-i)
        total = v
        j = i - 1
        while j > i - lowbit:
            total += self.tree[j]
            j -= j & (-j)
        self.tree[i] = total

    def add(self, i: int, delta: int):
        i += 1
        while i <= self.n:
            self.tree[i] += delta
            i += i & (-i)

    def prefix(self, count: int) -> int:
        s = 0
        i = min(count, self.n)
        while i > 0:
            s += self.tree[i]
            i -= i & (-i)
        return s

    def total(self) -> int:
        return self.prefix(self.n)

    def select(self, k: int) -> int:
        """0-based slot of the k-th set bit (k >= 1); n if fewer exist."""
        pos = 0
        remaining = k
        bit = 1 << self.n.bit_length()
        while bit:
            nxt = pos + bit
            if nxt <= self.n and self.tree[nxt] < remaining:
                pos = nxt
                remaining -= self.tree[nxt]
            bit >>= 1
        return pos


@dataclass
class ChainDelta:
    """What changed in the consistent list across one observation."""
    kill_ranks: list[int]   # pre-kill alive ranks; only min is load-bearing
    appended: int
    old_len: int
    new_len: int
    max_agree: int          # largest depth whose prefix intersection is unchanged
    pure_growth: bool


class UsedTracker:
    """All strings consumed so far by either party, with low-water marks."""

    def __init__(self):
        self.values: set[int] = set()
        self.max = -1
        self._low = 0
        self._set_low: dict[UPSet, int] = {}

    def add(self, v: int):
        self.values.add(v)
        if v > self.max:
            self.max = v

    @property
    def low(self) -> int:
        """Smallest natural not used; monotone."""
        while self._low in self.values:
            self._low += 1
        return self._low

    def low_in(self, s: UPSet) -> int:
        """Smallest element of s not used; cursors persist per set value, and
        used never shrinks, so they only move forward."""
        k = s.rank(self._set_low.get(s, 0))
        while True:
            try:
                x = s.nth(k)
            except IndexError:
                raise RuntimeError("set exhausted while hunting an unused element")
            if x not in self.values:
                self._set_low[s] = x
                return x
            k += 1

    def __contains__(self, v: int) -> bool:
        return v in self.values


class PlainChain:
    """Exact chain over an explicitly materialized consistent list."""

    cofinite = False

    def __init__(self, family: Family):
        self.family = family
        self.seen: set[int] = set()
        self.digest = SeenDigest()
        self.slots: list[tuple[int, UPSet]] = []
        self.scan = family.start
        self.kills_total = 0
        self.prefixes: list[UPSet] = []
        self._c: UPSet | None = None
        self._k: UPSet | None = None

    def register_c(self, c: UPSet):
        self._c = c

    def register_k(self, k: UPSet, k_idx: int | None = None):
        self._k = k

    @property
    def n(self) -> int:
        return len(self.slots)

    def observe(self, w: int | None, target_len: int) -> ChainDelta:
        old_list = [s for _, s in self.slots]
        old_len = len(old_list)
        kill_ranks: list[int] = []
        if w is not None and w not in self.seen:
            self.seen.add(w)
            self.digest.add(w)
            keep = []
            for rank, (idx, lang) in enumerate(self.slots, start=1):
                if w in lang:
                    keep.append((idx, lang))
                else:
                    kill_ranks.append(rank)
                    self.kills_total += 1
            self.slots = keep
        appended = self._extend(target_len)
        new_list = [s for _, s in self.slots]
        self.prefixes = []
        acc = None
        for _, s in self.slots:
            acc = s if acc is None else acc.intersect(s)
            self.prefixes.append(acc)
        max_agree = self._max_agree(old_list, new_list)
        return ChainDelta(kill_ranks, appended, old_len, len(new_list), max_agree,
                          pure_growth=not kill_ranks)

    def _extend(self, target_len: int) -> int:
        added = 0
        bound = self.family._consistency_scan_bound(self.digest)
        total = self.family.count()
        while len(self.slots) < target_len:
            if bound is not None and self.scan > bound:
                break
            if total is not None and self.scan - self.family.start >= total:
                break
            idx = self.scan
            self.scan += 1
            if self.family._digest_consistent(idx, self.digest):
                self.slots.append((idx, self.family.language_at(idx)))
                added += 1
        return added

    def _max_agree(self, old: list[UPSet], new: list[UPSet]) -> int:
        if old == new:
            return BIG
        agree = 0
        acc_old = acc_new = None
        for i in range(1, max(len(old), len(new)) + 1):
            if i <= len(old):
                acc_old = old[i - 1] if acc_old is None else acc_old.intersect(old[i - 1])
            if i <= len(new):
                acc_new = new[i - 1] if acc_new is None else acc_new.intersect(new[i - 1])
            if acc_old is None or acc_new is None or acc_old != acc_new:
                return agree
            agree = i
        return agree

    # depths are 1-based; values past the list length use the padded tail

    def _eff(self, j: int) -> int:
        return max(1, min(j, self.n))

    def prefix_infinite(self, j: int) -> bool:
        return self.prefixes[self._eff(j) - 1].is_infinite

    def prefix_upset(self, j: int) -> UPSet:
        return self.prefixes[self._eff(j) - 1]

    def prefix_indices(self, j: int) -> list[int]:
        return [idx for idx, _ in self.slots[:self._eff(j)]]

    def prefix_count(self, j: int) -> int:
        return self._eff(j)

    def prefix_sets_equal(self, i: int, j: int) -> bool:
        return self.prefix_upset(i) == self.prefix_upset(j)

    def prefix_contains_c(self, j: int) -> bool:
        return self._c.is_subset(self.prefix_upset(j))

    def prefix_subset_k(self, j: int) -> bool:
        return self.prefix_upset(j).is_subset(self._k)

    def prefix_subset_of(self, j: int, lang: UPSet) -> bool:
        return self.prefix_upset(j).is_subset(lang)

    def prefix_min_from(self, j: int, lo: int) -> int | None:
        s = self.prefix_upset(j)
        k = s.rank(max(lo, 0))
        try:
            return s.nth(k)
        except IndexError:
            return None

    def prefix_min_unused(self, j: int, used: UsedTracker) -> int:
        s = self.prefix_upset(j)
        if not s.is_infinite:
            raise RuntimeError("prefix intersection exhausted; should be infinite")
        return used.low_in(s)

    def largest_infinite_prefix(self) -> int:
        j = 0
        for i in range(1, self.n + 1):
            if self.prefixes[i - 1].is_infinite:
                j = i
            else:
                break
        return j

    def band_above(self, j: int, lo: int) -> tuple[UPSet, int] | None:
        """A pure UPSet tail of the prefix intersection starting at value lo."""
        s = self.prefix_upset(j)
        return s, s.rank(max(lo, 0))

    def prefix_member(self, j: int, x: int) -> bool:
        return x in self.prefix_upset(j)


class CofiniteChain:
    """Chain for a family of one co-singleton schema plus explicit entries.

    Every prefix intersection of depth j has the shape
        (core(j) ∩ base' minus the instance params in the prefix) ∪ (core(j) ∩ extras')
    where core(j) intersects the explicit-like languages in the prefix.
    """

    cofinite = True

    def __init__(self, family: Family):
        if len(family.schemas) != 1 or not isinstance(family.schemas[0], CoSingleton):
            raise ValueError("CofiniteChain requires exactly one co-singleton schema")
        self.family = family
        sch: CoSingleton = family.schemas[0]
        self.schema = sch
        W = family.removed
        self.base = sch.base.remove(W) if W else sch.base
        self.extras = frozenset(e for e in sch.extras if e not in W)
        self.live_index = sch.index_set.remove(W) if W else sch.index_set
        self.seen: set[int] = set()
        self.seen_ok = True
        # slot arrays; instances appear in ascending param order
        self.slot_global: list[int] = []
        self.slot_param: list[int | None] = []
        self.slot_alive: list[bool] = []
        self.params: list[int] = []        # all materialized instance params, ascending
        self.fen_alive = Fenwick()
        self.fen_inst = Fenwick()
        self.fen_viol = Fenwick()
        self.param_slot: dict[int, int] = {}
        self.expl_langs: list[UPSet] = []
        self.expl_slots: list[int] = []
        self.cores: list[UPSet] = [UPSet.universe()]
        self._core_cache: dict[int, dict] = {}
        self._subset_cache: dict[tuple[int, UPSet], tuple] = {}
        self._region0_cursor: dict[int, int] = {}
        self._expl_ptr = 0
        self._inst_live_k = 0
        self.kills_total = 0
        self._c: UPSet | None = None
        self._k: UPSet | None = None

    def register_c(self, c: UPSet):
        self._c = c
        for slot, p in enumerate(self.slot_param):
            if p is not None and self.slot_alive[slot] and p in c:
                self.fen_viol.add(slot, 1)
        self._core_cache.clear()

    def register_k(self, k: UPSet, k_idx: int | None = None):
        self._k = k
        self._core_cache.clear()

    @property
    def n(self) -> int:
        return self.fen_alive.total()

    # ---- materialization

    def _next_instance(self) -> tuple[int, int] | None:
        fam = self.family
        try:
            ordinal = fam._live_ordinal(0, self._inst_live_k)
        except IndexError:
            return None
        count = self.schema.instance_count()
        if count is not None and ordinal >= count:
            return None
        param = self.schema.param(ordinal)
        gidx = fam.start + len(fam.live_explicit) + self._inst_live_k
        return gidx, param

    def observe(self, w: int | None, target_len: int) -> ChainDelta:
        old_len = self.n
        kill_ranks: list[int] = []
        if w is not None and w not in self.seen:
            self.seen.add(w)
            if w not in self.base and w not in self.extras:
                self.seen_ok = False
            doomed = [pos for pos, lang in enumerate(self.expl_langs) if w not in lang]
            for pos in reversed(doomed):
                slot = self.expl_slots[pos]
                kill_ranks.append(self.fen_alive.prefix(slot + 1))
                self._kill_slot(slot)
                del self.expl_langs[pos]
                del self.expl_slots[pos]
            if doomed:
                self._rebuild_cores()
            slot = self.param_slot.get(w)
            if slot is not None and self.slot_alive[slot]:
                kill_ranks.append(self.fen_alive.prefix(slot + 1))
                self._kill_slot(slot)
            if not self.seen_ok:
                for slot, p in enumerate(self.slot_param):
                    if p is not None and self.slot_alive[slot]:
                        kill_ranks.append(self.fen_alive.prefix(slot + 1))
                        self._kill_slot(slot)
        kill_ranks.sort()
        appended = self._extend(target_len)
        new_len = self.n
        if kill_ranks:
            max_agree = kill_ranks[0] - 1
        elif appended:
            max_agree = old_len
        else:
            max_agree = BIG
        return ChainDelta(kill_ranks, appended, old_len, new_len, max_agree,
                          pure_growth=not kill_ranks)

    def _kill_slot(self, slot: int):
        self.kills_total += 1
        self.slot_alive[slot] = False
        self.fen_alive.add(slot, -1)
        p = self.slot_param[slot]
        if p is not None:
            self.fen_inst.add(slot, -1)
            if self._c is not None and p in self._c:
                self.fen_viol.add(slot, -1)

    def _append_slot(self, gidx: int, param: int | None, lang: UPSet | None):
        slot = len(self.slot_global)
        self.slot_global.append(gidx)
        self.slot_param.append(param)
        self.slot_alive.append(True)
        self.fen_alive.append(1)
        self.fen_inst.append(0 if param is None else 1)
        self.fen_viol.append(1 if (param is not None and self._c is not None
                                   and param in self._c) else 0)
        if param is not None:
            self.param_slot[param] = slot
            self.params.append(param)
        else:
            self.expl_langs.append(lang)
            self.expl_slots.append(slot)
            self._rebuild_cores()

    def _rebuild_cores(self):
        self.cores = [UPSet.universe()]
        for lang in self.expl_langs:
            self.cores.append(self.cores[-1].intersect(lang))
        self._core_cache.clear()
        self._subset_cache.clear()
        self._region0_cursor.clear()

    def _extend(self, target_len: int) -> int:
        added = 0
        fam = self.family
        while self.n < target_len:
            if self._expl_ptr < len(fam.live_explicit):
                pos = fam.live_explicit[self._expl_ptr]
                gidx = fam.start + self._expl_ptr
                self._expl_ptr += 1
                lang = fam._strip(fam.explicit[pos][1])
                if all(v in lang for v in self.seen):
                    self._append_slot(gidx, None, lang)
                    added += 1
                continue
            if not self.seen_ok:
                break
            nxt = self._next_instance()
            if nxt is None:
                break
            gidx, param = nxt
            self._inst_live_k += 1
            if param in fam.removed:
                # collapsed instance; its language is base'|extras', core-like
                self._append_slot(gidx, None, self._collapsed_lang())
                added += 1
            elif param not in self.seen:
                self._append_slot(gidx, param, None)
                added += 1
        return added

    def _collapsed_lang(self) -> UPSet:
        return self.base.add(self.extras)

    # ---- structure queries (depths 1-based; past n uses the padded tail)

    def _eff(self, j: int) -> int:
        return max(1, min(j, self.n))

    def _split(self, j: int) -> tuple[int, int, int]:
        j = self._eff(j)
        slot = self.fen_alive.select(j)
        inst = self.fen_inst.prefix(slot + 1)
        return slot, j - inst, inst

    def inst_count(self, j: int) -> int:
        return self._split(j)[2]

    def _core_info(self, ne: int) -> dict:
        info = self._core_cache.get(ne)
        if info is None:
            core = self.cores[min(ne, len(self.cores) - 1)]
            band = core.intersect(self.base)
            e0 = tuple(sorted(e for e in self.extras if e in core))
            info = {"core": core, "band": band, "e0": e0,
                    "region0": band.difference(self.live_index)}
            if self._c is not None:
                info["c_static_ok"] = self._c.remove(e0).is_subset(band)
            if self._k is not None:
                spill = band.difference(self._k)
                info["k_spill"] = (sorted(spill.exceptions)
                                   if not spill.is_infinite else None)
                info["k_e0_ok"] = all(e in self._k for e in e0)
            self._core_cache[ne] = info
        return info

    def prefix_infinite(self, j: int) -> bool:
        _, ne, _ = self._split(j)
        return self._core_info(ne)["band"].is_infinite

    def prefix_upset(self, j: int) -> UPSet:
        slot, ne, _ = self._split(j)
        info = self._core_info(ne)
        params = [self.slot_param[s] for s in range(slot + 1)
                  if self.slot_param[s] is not None and self.slot_alive[s]]
        return info["band"].remove(params).add(info["e0"])

    def prefix_indices(self, j: int) -> list[int]:
        j = self._eff(j)
        out = []
        for slot, g in enumerate(self.slot_global):
            if self.slot_alive[slot]:
                out.append(g)
                if len(out) >= j:
                    break
        return out

    def prefix_count(self, j: int) -> int:
        return self._eff(j)

    def prefix_sets_equal(self, i: int, j: int) -> bool:
        i, j = self._eff(i), self._eff(j)
        if i == j:
            return True
        _, nei, insti = self._split(i)
        _, nej, instj = self._split(j)
        return insti == instj and \
            self.cores[min(nei, len(self.cores) - 1)] == self.cores[min(nej, len(self.cores) - 1)]

    def _param_in_prefix(self, param: int, j: int) -> bool:
        slot = self.param_slot.get(param)
        if slot is None or not self.slot_alive[slot]:
            return False
        return self.fen_alive.prefix(slot + 1) <= self._eff(j)

    def prefix_contains_c(self, j: int) -> bool:
        slot, ne, _ = self._split(j)
        if not self._core_info(ne).get("c_static_ok", False):
            return False
        return self.fen_viol.prefix(slot + 1) == 0

    def prefix_subset_k(self, j: int) -> bool:
        _, ne, _ = self._split(j)
        info = self._core_info(ne)
        if not info.get("k_e0_ok", False):
            return False
        spill = info.get("k_spill")
        if spill is None:
            return False
        return all(self._param_in_prefix(d, j) for d in spill)

    def prefix_subset_of(self, j: int, lang: UPSet) -> bool:
        _, ne, _ = self._split(j)
        key = (ne, lang)
        cached = self._subset_cache.get(key)
        if cached is None:
            info = self._core_info(ne)
            e0_ok = all(e in lang for e in info["e0"])
            spill = info["band"].difference(lang)
            spill_list = sorted(spill.exceptions) if not spill.is_infinite else None
            cached = (e0_ok, spill_list)
            if len(self._subset_cache) < 256:
                self._subset_cache[key] = cached
        e0_ok, spill_list = cached
        if not e0_ok or spill_list is None:
            return False
        return all(self._param_in_prefix(d, j) for d in spill_list)

    def prefix_member(self, j: int, x: int) -> bool:
        _, ne, _ = self._split(j)
        info = self._core_info(ne)
        if x in info["e0"]:
            return True
        return x in info["band"] and not self._param_in_prefix(x, j)

    # ---- ordering helpers
    #
    # Members of the depth-j intersection fall into four classes:
    #   (a) extras inside the core (e0, finitely many);
    #   (b) band elements outside the index region (region0, never excluded);
    #   (c) materialized index params beyond the prefix boundary;
    #   (d) index-region band elements past the materialization frontier.

    @staticmethod
    def _upset_min_from(s: UPSet, lo: int) -> int | None:
        k = s.rank(max(lo, 0))
        try:
            return s.nth(k)
        except IndexError:
            return None

    def _candidate_c(self, j: int, lo: int, used: UsedTracker | None) -> int | None:
        _, ne, inst = self._split(j)
        core = self._core_info(ne)["core"]
        q = inst
        while True:
            q += 1
            slot = self.fen_inst.select(q)
            if slot >= len(self.slot_param) or self.fen_inst.prefix(slot + 1) < q:
                return None
            p = self.slot_param[slot]
            if p is None:
                continue
            if p < lo or (used is not None and p in used) or p not in core:
                continue
            return p

    def _candidate_d(self, j: int, lo: int, used: UsedTracker | None) -> int | None:
        _, ne, _ = self._split(j)
        info = self._core_info(ne)
        frontier = (self.params[-1] + 1) if self.params else 0
        iband = info["band"].intersect(self.live_index)
        x = self._upset_min_from(iband, max(lo, frontier))
        while x is not None and used is not None and x in used:
            x = self._upset_min_from(iband, x + 1)
        return x

    def prefix_min_from(self, j: int, lo: int) -> int | None:
        _, ne, _ = self._split(j)
        info = self._core_info(ne)
        cands = [e for e in info["e0"] if e >= lo][:1]
        r0 = self._upset_min_from(info["region0"], lo)
        if r0 is not None:
            cands.append(r0)
        c = self._candidate_c(j, lo, None)
        if c is not None:
            cands.append(c)
        d = self._candidate_d(j, lo, None)
        if d is not None:
            cands.append(d)
        return min(cands) if cands else None

    def prefix_min_unused(self, j: int, used: UsedTracker) -> int:
        _, ne, _ = self._split(j)
        info = self._core_info(ne)
        cands = []
        for e in info["e0"]:
            if e not in used:
                cands.append(e)
                break
        cur = max(self._region0_cursor.get(ne, 0), used.low)
        r0 = self._upset_min_from(info["region0"], cur)
        while r0 is not None and r0 in used:
            r0 = self._upset_min_from(info["region0"], r0 + 1)
        if r0 is not None:
            self._region0_cursor[ne] = r0
            cands.append(r0)
        c = self._candidate_c(j, used.low, used)
        if c is not None:
            cands.append(c)
        d = self._candidate_d(j, used.low, used)
        if d is not None:
            cands.append(d)
        if not cands:
            raise RuntimeError("prefix intersection exhausted; should be infinite")
        return min(cands)

    def band_above(self, j: int, lo: int) -> tuple[UPSet, int] | None:
        """A pure UPSet tail of the intersection from value lo up, if the
        region above lo is free of exclusions."""
        _, ne, _ = self._split(j)
        info = self._core_info(ne)
        frontier = self.params[-1] if self.params else -1
        top_e0 = info["e0"][-1] if info["e0"] else -1
        if lo <= max(frontier, top_e0):
            return None
        band = info["band"]
        return band, band.rank(lo)

    def largest_infinite_prefix(self) -> int:
        n = self.n
        if n == 0:
            return 0
        if self.prefix_infinite(n):
            return n
        # only explicit-core changes can make a band finite; walk those few levels
        j = n
        while j >= 1 and not self.prefix_infinite(j):
            j -= 1
        return j

    def max_materialized_param(self) -> int:
        return self.params[-1] if self.params else -1


def chain_for(family: Family):
    if len(family.schemas) == 1 and isinstance(family.schemas[0], CoSingleton):
        return CofiniteChain(family)
    return PlainChain(family)
