"""Finitely presented, ordered collections of languages.

A family is a finite list of explicit languages followed by instances of at
most a few schema generators, under a fixed global order:

* covered global indices start at ``family.start`` and are contiguous;
* explicit entries occupy the first covered indices, in list order;
* schema instances follow, round-robin across schemas in declaration order
  (with a single schema this is just the schema's own instance order).

Removing a finite string set W replaces every language by L minus W and merges
extensional duplicates, keeping the smallest global index; the family order is
otherwise preserved.  All of that is derived lazily from the accumulated W, so
removing W1 then W2 is literally the same family as removing their union.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt
from typing import Iterable, Iterator

from .upsets import UPSet


class UnsupportedSchema(ValueError):
    """Raised when an analysis only defined for shipped schema shapes is
    asked about something else."""


# -- arithmetic-progression pairing -------------------------------------------
# ordinal 0, 1, 2, ... walks diagonals of constant i + d:
#   (1,1), (1,2), (2,1), (1,3), (2,2), (3,1), ...

def pair_of_ordinal(j: int) -> tuple[int, int]:
    if j < 0:
        raise IndexError("ordinal must be >= 0")
    s = (1 + isqrt(1 + 8 * j)) // 2  # diagonal number: i + d == s + 1
    while s * (s - 1) // 2 > j:
        s -= 1
    while (s + 1) * s // 2 <= j:
        s += 1
    i = j - s * (s - 1) // 2 + 1
    return i, s + 1 - i


def ordinal_of_pair(i: int, d: int) -> int:
    if i < 1 or d < 1:
        raise ValueError("progression parameters must be >= 1")
    s = i + d - 1
    return s * (s - 1) // 2 + (i - 1)


# -- schemas -------------------------------------------------------------------

@dataclass(frozen=True)
class CoSingleton:
    """Instances remove one index element from a base set and append fixed
    extras: instance(i) = (base - {i}) | extras for i in index_set."""

    base: UPSet
    index_set: UPSet
    extras: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "extras", frozenset(self.extras))
        if not self.base.is_infinite:
            raise ValueError("coSingleton base must be infinite")
        if not self.index_set.is_subset(self.base.remove(self.extras)):
            raise ValueError("index set must lie inside base minus extras")
        if any(e in self.base for e in self.extras):
            raise ValueError("extras must be disjoint from base")

    kind = "coSingleton"

    def instance_count(self) -> int | None:
        return self.index_set.size()

    def param(self, ordinal: int) -> int:
        return self.index_set.nth(ordinal)

    def ordinal_of(self, i: int) -> int | None:
        if i not in self.index_set:
            return None
        return self.index_set.rank(i)

    def instance(self, ordinal: int) -> UPSet:
        i = self.param(ordinal)
        return self.base.remove([i]).add(self.extras)

    def instance_name(self, ordinal: int) -> str:
        return f"co({self.param(ordinal)})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_dict(),
                "indexSet": self.index_set.to_dict(), "extras": sorted(self.extras)}


@dataclass(frozen=True)
class Multiples:
    """instance ordinal j is the multiples of j+1."""

    kind = "multiples"

    def instance_count(self) -> int | None:
        return None

    def param(self, ordinal: int) -> int:
        return ordinal + 1

    def instance(self, ordinal: int) -> UPSet:
        return UPSet.multiples(ordinal + 1)

    def instance_name(self, ordinal: int) -> str:
        return f"mult({ordinal + 1})"

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class ArithProg:
    """instance ordinal j is the progression {i + k*d} for the j-th pair
    (i, d) in diagonal order."""

    kind = "arithProg"

    def instance_count(self) -> int | None:
        return None

    def param(self, ordinal: int) -> tuple[int, int]:
        return pair_of_ordinal(ordinal)

    def instance(self, ordinal: int) -> UPSet:
        i, d = pair_of_ordinal(ordinal)
        return UPSet.arith(i, d)

    def instance_name(self, ordinal: int) -> str:
        i, d = pair_of_ordinal(ordinal)
        return f"ap({i},{d})"

    def to_dict(self) -> dict:
        return {"kind": self.kind}


Schema = CoSingleton | Multiples | ArithProg


def schema_from_dict(d: dict) -> Schema:
    kind = d["kind"]
    if kind == "coSingleton":
        return CoSingleton(UPSet.from_dict(d["base"]), UPSet.from_dict(d["indexSet"]),
                           frozenset(d.get("extras", [])))
    if kind == "multiples":
        return Multiples()
    if kind == "arithProg":
        return ArithProg()
    raise UnsupportedSchema(f"unknown schema kind {kind!r}")


# -- seen-string digest for fast consistency ------------------------------------

class SeenDigest:
    """Summary of an observed string set sufficient for O(1) consistency
    checks against schema instances.  Supports incremental growth."""

    def __init__(self, seen: Iterable[int] = ()):
        self.values: set[int] = set()
        self.min: int | None = None
        self.gcd_all = 0
        self._anchor: int | None = None
        self.gcd_diffs = 0  # gcd of pairwise differences
        for v in seen:
            self.add(v)

    def add(self, v: int):
        v = int(v)
        if v in self.values:
            return
        self.values.add(v)
        if self.min is None or v < self.min:
            self.min = v
        self.gcd_all = gcd(self.gcd_all, v)
        if self._anchor is None:
            self._anchor = v
        else:
            self.gcd_diffs = gcd(self.gcd_diffs, abs(v - self._anchor))


# -- the family -------------------------------------------------------------------

class Family:
    """Ordered language collection: explicit entries then schema instances,
    with an accumulated removed-string set W folded into every language."""

    def __init__(self, name: str, explicit: Iterable[tuple[str, UPSet]] = (),
                 schemas: Iterable[Schema] = (), start: int = 0,
                 removed: Iterable[int] = (), allow_duplicates: bool = False):
        self.name = name
        self.explicit = tuple((str(n), s) for n, s in explicit)
        self.schemas = tuple(schemas)
        self.start = int(start)
        self.removed = frozenset(int(x) for x in removed)
        self.allow_duplicates = bool(allow_duplicates)
        for nm, s in self.explicit:
            if not s.is_infinite:
                raise ValueError(f"explicit language {nm!r} must be infinite")
        self._removed_set = UPSet.finite(self.removed) if self.removed else None
        self._compute_suppression()
        if not allow_duplicates:
            self._check_window_duplicates()

    # ---- removal handling

    def _strip(self, s: UPSet) -> UPSet:
        return s.difference(self._removed_set) if self._removed_set else s

    def _compute_suppression(self):
        """Duplicate groups created by removal; keepers are the smallest index."""
        self.live_explicit: list[int] = []      # positions into self.explicit
        self._suppressed_ordinals: list[frozenset[int]] = []
        if not self.removed:
            # merging only happens through remove_strings; a fresh family with
            # duplicates is rejected by the window check instead
            self.live_explicit = list(range(len(self.explicit)))
            self._suppressed_ordinals = [frozenset() for _ in self.schemas]
            return
        expl = [(pos, self._strip(s)) for pos, (nm, s) in enumerate(self.explicit)]
        seen_sets: list[UPSet] = []
        for pos, s in expl:
            if any(s == t for t in seen_sets):
                continue
            seen_sets.append(s)
            self.live_explicit.append(pos)
        live_expl_sets = seen_sets
        W = self.removed
        for sch in self.schemas:
            supp: set[int] = set()
            if isinstance(sch, CoSingleton):
                t0 = self._strip(sch.base).add(e for e in sch.extras if e not in W)
                group = sorted(i for i in W if i in sch.index_set)
                group_ords = [sch.index_set.rank(i) for i in group]
                if group_ords:
                    keep = group_ords[0]
                    supp.update(group_ords[1:])
                    if any(e == t0 for e in live_expl_sets):
                        supp.add(keep)
                for e in live_expl_sets:
                    d1 = t0.difference(e)
                    d2 = e.difference(t0)
                    if d2.is_empty and d1.size() == 1:
                        (i,) = d1.exceptions
                        if i in sch.index_set and i not in W:
                            supp.add(sch.index_set.rank(i))
            elif isinstance(sch, Multiples):
                for e in live_expl_sets:
                    dens = e.natural_density()
                    if dens.numerator == 1:
                        i = dens.denominator
                        if self._strip(UPSet.multiples(i)) == e:
                            supp.add(i - 1)
            elif isinstance(sch, ArithProg):
                # chain rule (see _arith_suppressed) covers instance/instance
                # merges; here only explicit-vs-instance
                for e in live_expl_sets:
                    dens = e.natural_density()
                    if dens.numerator != 1 or e.is_empty:
                        continue
                    d = dens.denominator
                    m0 = e.min_element()
                    for j in range(len(W) + 1):
                        i = m0 - j * d
                        if i < 1:
                            break
                        if i - d in W:
                            continue  # suppressed into its chain head already
                        if self._strip(UPSet.arith(i, d)) == e:
                            supp.add(ordinal_of_pair(i, d))
                            break
            self._suppressed_ordinals.append(frozenset(supp))

    def _arith_suppressed(self, sch: ArithProg, ordinal: int) -> bool:
        i, d = pair_of_ordinal(ordinal)
        return i - d >= 1 and (i - d) in self.removed

    def _ordinal_suppressed(self, schema_pos: int, ordinal: int) -> bool:
        if ordinal in self._suppressed_ordinals[schema_pos]:
            return True
        sch = self.schemas[schema_pos]
        if isinstance(sch, ArithProg) and self.removed:
            return self._arith_suppressed(sch, ordinal)
        return False

    def _live_ordinal(self, schema_pos: int, k: int) -> int:
        """The k-th non-suppressed instance ordinal of a schema."""
        sch = self.schemas[schema_pos]
        supp = self._suppressed_ordinals[schema_pos]
        count = sch.instance_count()
        if isinstance(sch, ArithProg) and self.removed:
            # walk diagonals, discounting suppressed pairs analytically
            passed = 0
            j = 0
            while True:
                if not self._ordinal_suppressed(schema_pos, j):
                    if passed == k:
                        return j
                    passed += 1
                j += 1
        ordinal = k
        for s in sorted(supp):
            if s <= ordinal:
                ordinal += 1
        if count is not None and ordinal >= count:
            raise IndexError(f"schema exhausted at live ordinal {k}")
        return ordinal

    def _live_count(self, schema_pos: int) -> int | None:
        count = self.schemas[schema_pos].instance_count()
        if count is None:
            return None
        return count - sum(1 for s in self._suppressed_ordinals[schema_pos] if s < count)

    def _check_window_duplicates(self, window: int = 24):
        seen: dict[str, int] = {}
        for idx in self.indices(limit=window):
            key = self.language_at(idx).to_text()
            if key in seen:
                raise ValueError(
                    f"duplicate languages at indices {seen[key]} and {idx}; "
                    "pass allow_duplicates=True to permit")
            seen[key] = idx

    # ---- order rule decode

    def _decode(self, idx: int) -> tuple[str, int]:
        """Map a covered global index to ('expl', pos) or a (schema_pos, k)
        live-instance slot encoded as ('inst:<schema_pos>', k)."""
        pos = idx - self.start
        if pos < 0:
            raise IndexError(f"index {idx} below family start {self.start}")
        ne = len(self.live_explicit)
        if pos < ne:
            return "expl", self.live_explicit[pos]
        q = pos - ne
        counts = [self._live_count(i) for i in range(len(self.schemas))]
        if not self.schemas:
            raise IndexError(f"index {idx} not covered by family order")
        if len(self.schemas) == 1:
            c = counts[0]
            if c is not None and q >= c:
                raise IndexError(f"index {idx} not covered by family order")
            return "inst:0", q
        # round-robin across schemas, dropping exhausted ones
        remaining = list(range(len(self.schemas)))
        taken = [0] * len(self.schemas)
        while True:
            alive = [i for i in remaining if counts[i] is None or taken[i] < counts[i]]
            if not alive:
                raise IndexError(f"index {idx} not covered by family order")
            if q < len(alive):
                sp = alive[q]
                return f"inst:{sp}", taken[sp]
            q -= len(alive)
            for i in alive:
                taken[i] += 1
            remaining = alive

    def language_at(self, idx: int) -> UPSet:
        kind, k = self._decode(idx)
        if kind == "expl":
            return self._strip(self.explicit[k][1])
        sp = int(kind.split(":")[1])
        ordinal = self._live_ordinal(sp, k)
        return self._strip(self.schemas[sp].instance(ordinal))

    def name_at(self, idx: int) -> str:
        kind, k = self._decode(idx)
        if kind == "expl":
            return self.explicit[k][0]
        sp = int(kind.split(":")[1])
        return self.schemas[sp].instance_name(self._live_ordinal(sp, k))

    def count(self) -> int | None:
        total = len(self.live_explicit)
        for i in range(len(self.schemas)):
            c = self._live_count(i)
            if c is None:
                return None
            total += c
        return total

    def indices(self, limit: int | None = None) -> Iterator[int]:
        n = self.count()
        idx = self.start
        emitted = 0
        while (n is None or idx - self.start < n) and (limit is None or emitted < limit):
            yield idx
            idx += 1
            emitted += 1

    # ---- consistency

    def make_digest(self, seen: Iterable[int]) -> SeenDigest:
        return SeenDigest(seen)

    def _digest_consistent(self, idx: int, digest: SeenDigest) -> bool:
        if self.removed and digest.values & self.removed:
            return False
        kind, k = self._decode(idx)
        if kind == "expl":
            lang = self._strip(self.explicit[k][1])
            return all(v in lang for v in digest.values)
        sp = int(kind.split(":")[1])
        sch = self.schemas[sp]
        ordinal = self._live_ordinal(sp, k)
        if isinstance(sch, CoSingleton):
            i = sch.param(ordinal)
            combined_ok = all(v in sch.base or v in sch.extras for v in digest.values)
            if i in self.removed:  # collapsed instance: language is base|extras minus W
                return combined_ok
            return combined_ok and i not in digest.values
        if isinstance(sch, Multiples):
            return digest.gcd_all % sch.param(ordinal) == 0
        if isinstance(sch, ArithProg):
            i, d = sch.param(ordinal)
            if digest.min is None:
                return True
            if digest.min < i or (digest.min - i) % d != 0:
                return False
            return digest.gcd_diffs % d == 0
        raise UnsupportedSchema(str(sch))

    def _consistency_scan_bound(self, digest: SeenDigest) -> int | None:
        """Largest covered index that could still be consistent, or None if
        consistent languages may appear arbitrarily late."""
        if self.removed and digest.values & self.removed:
            return self.start - 1  # nothing is consistent
        top = self.start + len(self.live_explicit) - 1
        for sch in self.schemas:
            if isinstance(sch, CoSingleton):
                if all(v in sch.base or v in sch.extras for v in digest.values):
                    return None  # cofinitely many instances stay consistent
                continue  # no instance is consistent
            if isinstance(sch, Multiples):
                if digest.gcd_all == 0:
                    return None
                # the largest consistent divisor is gcd(seen) at ordinal g-1
                top = max(top, self.start + len(self.live_explicit) + digest.gcd_all)
                continue
            if isinstance(sch, ArithProg):
                if digest.min is None or digest.gcd_diffs == 0:
                    return None
                s_max = digest.min + digest.gcd_diffs  # consistent pairs have i + d <= min + g
                top = max(top, self.start + len(self.live_explicit)
                          + (s_max * (s_max + 1)) // 2 + 1)
                continue
            raise UnsupportedSchema(str(sch))
        return top

    def consistent_prefix(self, seen: Iterable[int], m: int) -> list[tuple[int, UPSet]]:
        """First m languages (family order) containing every seen string.
        Returns fewer only when the family provably has fewer consistent
        members."""
        digest = self.make_digest(seen)
        bound = self._consistency_scan_bound(digest)
        out: list[tuple[int, UPSet]] = []
        total = self.count()
        for idx in self.indices():
            if len(out) >= m:
                break
            if bound is not None and idx > bound:
                break
            if total is not None and idx - self.start >= total:
                break
            if self._digest_consistent(idx, digest):
                out.append((idx, self.language_at(idx)))
        return out

    # ---- surgery

    def remove_strings(self, w: Iterable[int]) -> "Family":
        w = frozenset(int(x) for x in w)
        if not w:
            return self
        return Family(self.name, self.explicit, self.schemas, self.start,
                      self.removed | w, self.allow_duplicates)

    # ---- config round trip

    def to_dict(self) -> dict:
        return {"version": 1, "name": self.name,
                "explicit": [{"name": n, "set": s.to_dict()} for n, s in self.explicit],
                "schemas": [s.to_dict() for s in self.schemas],
                "start": self.start, "removed": sorted(self.removed),
                "allowDuplicates": self.allow_duplicates}

    @staticmethod
    def from_dict(d: dict) -> "Family":
        if d.get("version", 1) != 1:
            raise ValueError(f"unsupported family config version {d.get('version')}")
        explicit = [(e["name"], UPSet.from_dict(e["set"]) if isinstance(e["set"], dict)
                     else UPSet.from_text(e["set"])) for e in d.get("explicit", [])]
        schemas = [schema_from_dict(s) for s in d.get("schemas", [])]
        return Family(d.get("name", "custom"), explicit, schemas,
                      d.get("start", 0), d.get("removed", ()),
                      d.get("allowDuplicates", False))

    def __repr__(self) -> str:
        return f"Family({self.name!r}, explicit={len(self.explicit)}, schemas={len(self.schemas)}, W={sorted(self.removed)})"


# -- builtin catalog ---------------------------------------------------------------
#
# The specials encoding is fixed per family and is part of the interface:
# reserved low integers hold the special strings and ordinary content shifts
# up by a constant.  For "ex2-specials": special A -> 0, special B -> 1,
# natural n -> n + 2.

N = UPSet.universe()


def builtin(name: str) -> Family:
    if name == "ex1-cosingleton-with-N":
        return Family(name, explicit=[("L0", N)],
                      schemas=[CoSingleton(N, UPSet.at_least(1))])
    if name == "ex2-specials":
        base = UPSet.at_least(2)
        return Family(name, explicit=[("L0", UPSet.finite([0]).union(base))],
                      schemas=[CoSingleton(base, UPSet.at_least(3),
                                           frozenset([1]))])
    if name == "ex3-cosingleton":
        return Family(name, schemas=[CoSingleton(N, UPSet.at_least(1))])
    if name == "ex4-finite":
        return Family(name, explicit=[
            ("N", N), ("evens", UPSet.evens()), ("mult3", UPSet.multiples(3)),
            ("co5", N.remove([5]))])
    if name == "multiples":
        return Family(name, schemas=[Multiples()], start=1)
    if name == "arithprog":
        return Family(name, schemas=[ArithProg()], start=1)
    if name == "singleton-N":
        return Family(name, explicit=[("N", N)])
    raise ValueError(f"unknown builtin family {name!r}")


BUILTIN_NAMES = ("ex1-cosingleton-with-N", "ex2-specials", "ex3-cosingleton",
                 "ex4-finite", "multiples", "arithprog", "singleton-N")
