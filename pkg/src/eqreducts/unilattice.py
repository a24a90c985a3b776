"""Kernel tuples, the generation order on them, and closed monoids of unary operations.

A unary operation with finite range is described up to permutations by the
sorted sizes of its kernel classes, the last one infinite (written w). A
closed monoid containing the permutations is the downward closure of a finite
antichain of such tuples, except for the monoid of all unary operations, which
is represented by a flag.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .eqcore import OrbitRelation, canonical_labels, enumerate_partitions
from .errors import ParseError, ResourceError, ValidationError

OMEGA = math.inf
W = OMEGA


def _norm(entries: Iterable) -> tuple:
    out = []
    for x in entries:
        if x == OMEGA or x == "w":
            out.append(OMEGA)
        else:
            x = int(x)
            if x < 1:
                raise ValidationError("kernel tuple entries must be positive")
            out.append(x)
    return tuple(sorted(out))


def make_kernel_tuple(sizes: Iterable, full: bool = True) -> tuple:
    t = _norm(sizes)
    if not t:
        raise ValidationError("kernel tuple needs at least one class")
    if full and t[-1] != OMEGA:
        raise ValidationError("a full kernel tuple needs an infinite class")
    return t


def format_tuple(t: Sequence) -> str:
    return "(" + ",".join("w" if x == OMEGA else str(x) for x in t) + ")"


def parse_tuple(text: str) -> tuple:
    m = re.fullmatch(r"\s*\(\s*([0-9w\s,]*)\)\s*", text)
    if m is None:
        raise ParseError("expected a tuple like (1,2,w)", 0)
    items = [x.strip() for x in m.group(1).split(",") if x.strip()]
    return _norm(OMEGA if x == "w" else int(x) for x in items)


def _covers(a: float, s: float) -> bool:
    if a == OMEGA:
        return s == OMEGA
    return s >= a


def seq_leq(a: Sequence, b: Sequence) -> bool:
    """a is below b: some partition of b's indices into len(a) classes covers a entrywise."""
    a = tuple(sorted(a, reverse=True))
    b = tuple(b)
    if not a:
        return True
    if len(a) > len(b):
        return False
    return _leq(a, b)


@lru_cache(maxsize=200_000)
def _leq(a: tuple, b: tuple) -> bool:
    n = len(b)
    full = (1 << n) - 1

    # assign disjoint nonempty subsets of b to the entries of a (largest first);
    # leftovers can join any class since sums only grow.
    @lru_cache(maxsize=None)
    def rec(i: int, used: int) -> bool:
        if i == len(a):
            return True
        free = [j for j in range(n) if not used >> j & 1]
        remaining = len(a) - i - 1
        if len(free) - 1 < remaining:
            return False
        for r in range(1, len(free) - remaining + 1):
            for sub in itertools.combinations(free, r):
                s = sum(b[j] for j in sub)
                if _covers(a[i], s):
                    mask = used
                    for j in sub:
                        mask |= 1 << j
                    if rec(i + 1, mask):
                        return True
        return False

    return rec(0, 0)


def antichain_reduce(tuples: Iterable[Sequence]) -> frozenset:
    items = sorted({tuple(t) for t in tuples}, key=lambda t: (len(t), t), reverse=True)
    keep: list = []
    for t in items:
        if any(seq_leq(t, u) for u in keep):
            continue
        keep = [u for u in keep if not seq_leq(u, t)]
        keep.append(t)
    return frozenset(keep)


@dataclass(frozen=True)
class MonoidDescriptor:
    antichain: frozenset = frozenset()
    top: bool = False

    def __post_init__(self):
        if self.top and self.antichain:
            object.__setattr__(self, "antichain", frozenset())
        for t in self.antichain:
            if not t or t[-1] != OMEGA:
                raise ValidationError(f"generator {format_tuple(t)} is not a full kernel tuple")
        for s, t in itertools.permutations(self.antichain, 2):
            if seq_leq(s, t):
                raise ValidationError("generators must be pairwise incomparable")

    @property
    def name(self) -> str:
        if self.top:
            return "TOP"
        if not self.antichain:
            return "I"
        if self.antichain == frozenset({(OMEGA,)}):
            return "I+"
        return "{" + ", ".join(format_tuple(t) for t in self.generators()) + "}"

    def generators(self) -> list:
        return sorted(self.antichain, key=lambda t: (len(t), t))

    def is_I(self) -> bool:
        return not self.top and not self.antichain

    def is_I_plus(self) -> bool:
        return not self.top and self.antichain == frozenset({(OMEGA,)})

    def as_json(self):
        if self.top:
            return "TOP"
        return [[("w" if x == OMEGA else x) for x in t] for t in self.generators()]


I_MONOID = MonoidDescriptor()
I_PLUS = MonoidDescriptor(frozenset({(OMEGA,)}))
TOP = MonoidDescriptor(top=True)


def monoid_from(tuples: Iterable[Sequence]) -> MonoidDescriptor:
    return MonoidDescriptor(antichain_reduce(make_kernel_tuple(t) for t in tuples))


def monoid_member(kappa: Sequence, M: MonoidDescriptor) -> bool:
    if M.top:
        return True
    kappa = make_kernel_tuple(kappa)
    return any(seq_leq(kappa, g) for g in M.antichain)


def monoid_join(M1: MonoidDescriptor, M2: MonoidDescriptor) -> MonoidDescriptor:
    if M1.top or M2.top:
        return TOP
    return MonoidDescriptor(antichain_reduce(M1.antichain | M2.antichain))


def monoid_leq(M1: MonoidDescriptor, M2: MonoidDescriptor) -> bool:
    if M2.top:
        return True
    if M1.top:
        return False
    return all(monoid_member(g, M2) for g in M1.antichain)


def _subset_sums(t: Sequence) -> set:
    finite = [x for x in t if x != OMEGA]
    sums = {0}
    for x in finite:
        sums |= {s + x for s in sums}
    sums.discard(0)
    return sums


def monoid_meet(M1: MonoidDescriptor, M2: MonoidDescriptor, cap: int = 64) -> MonoidDescriptor:
    """Intersection of the two downward closures, as an antichain."""
    if M1.top:
        return M2
    if M2.top:
        return M1
    result: set = set()
    for g in M1.antichain:
        for h in M2.antichain:
            values = sorted(_subset_sums(g) | _subset_sums(h))
            if any(v > cap for v in values):
                raise ResourceError(f"generator sums exceed the meet cap {cap}")
            max_len = min(len(g), len(h))
            entries = values + [OMEGA]
            for length in range(1, max_len + 1):
                for head in itertools.combinations_with_replacement(entries, length - 1):
                    cand = tuple(sorted(head)) + (OMEGA,)
                    if seq_leq(cand, g) and seq_leq(cand, h):
                        result.add(cand)
    return MonoidDescriptor(antichain_reduce(result))


# ---------------------------------------------------------------------------
# unary polymorphisms of a relation


def capped_profiles(k: int) -> list:
    """Nondecreasing sequences over {1..k-1, w} of length <= k ending in w."""
    vals = list(range(1, k)) + [OMEGA]
    out = []
    for length in range(1, k + 1):
        for head in itertools.combinations_with_replacement(vals, length - 1):
            out.append(tuple(head) + (OMEGA,))
    return out


def cap_tuple(kappa: Sequence, k: int) -> tuple:
    """Entries >= k act like w on relations of arity k; keep the k largest classes."""
    t = sorted((OMEGA if x == OMEGA or x >= k else int(x)) for x in kappa)
    return tuple(t[-k:])


@lru_cache(maxsize=None)
def _groupings(nblocks: int, kappa: tuple) -> tuple:
    """Partitions of blocks into groups that fit injectively into classes of sizes kappa."""
    caps = sorted(kappa, reverse=True)
    out = []
    for part in enumerate_partitions(nblocks):
        sizes = sorted((part.count(g) for g in range(max(part) + 1)), reverse=True)
        if len(sizes) <= len(caps) and all(s <= c for s, c in zip(sizes, caps)):
            out.append(tuple(part))
    return tuple(out)


def unary_preserves(kappa: Sequence, rel: OrbitRelation) -> bool:
    kappa = tuple(kappa)
    k = rel.arity
    if len(kappa) > k or any(x != OMEGA and x >= k for x in kappa) or sorted(kappa) != list(kappa):
        raise ValidationError(f"kernel profile {format_tuple(kappa)} is not capped at arity {k}")
    for p in rel.orbits:
        for grouping in _groupings(p.n_blocks, kappa):
            merged = canonical_labels([grouping[b] for b in p])
            if merged not in rel.orbits:
                return False
    return True


def monoid_of_relation(rel: OrbitRelation) -> MonoidDescriptor:
    k = rel.arity
    if unary_preserves((1,) * (k - 1) + (OMEGA,), rel) if k > 1 else unary_preserves((OMEGA,), rel):
        return TOP
    good = [p for p in capped_profiles(k) if unary_preserves(p, rel)]
    return MonoidDescriptor(antichain_reduce(good))
