"""Equality patterns (orbits of tuples) and relations given as finite sets of patterns."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import partition_cap
from .errors import ArityError, ParseError, ResourceError, ValidationError


class Partition(tuple):
    """Restricted-growth label sequence naming one orbit of k-tuples.

    Subclasses tuple so that plain label tuples hash and compare equal to it.
    """

    __slots__ = ()

    def __new__(cls, labels: Iterable[int]):
        labels = tuple(int(x) for x in labels)
        if not labels:
            raise ArityError("a partition needs at least one position")
        top = -1
        for x in labels:
            if x < 0 or x > top + 1:
                raise ValidationError(f"labels {labels} are not in restricted-growth form")
            top = max(top, x)
        return super().__new__(cls, labels)

    @classmethod
    def _trusted(cls, labels: tuple) -> "Partition":
        return super().__new__(cls, labels)

    @property
    def arity(self) -> int:
        return len(self)

    @property
    def labels(self) -> tuple:
        return tuple(self)

    @property
    def n_blocks(self) -> int:
        return max(self) + 1

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_blocks)]
        for pos, lab in enumerate(self):
            out[lab].append(pos)
        return out

    def literal(self) -> str:
        return "[" + ",".join(str(x + 1) for x in self) + "]"

    def __repr__(self) -> str:
        return f"Partition({tuple(self)})"


def canonical_labels(values: Sequence) -> tuple:
    seen: dict = {}
    out = []
    for v in values:
        if v not in seen:
            seen[v] = len(seen)
        out.append(seen[v])
    return tuple(out)


def pattern_of(values: Sequence) -> Partition:
    if len(values) == 0:
        raise ArityError("pattern_of needs a nonempty tuple")
    return Partition._trusted(canonical_labels(values))


def _check_cap(k: int) -> None:
    cap = partition_cap()
    if k > cap:
        raise ResourceError(f"arity {k} exceeds the partition cap {cap} (set EQ_PARTITION_CAP)")


@lru_cache(maxsize=None)
def _partitions(k: int) -> tuple:
    out = []
    labels = [0] * k

    def rec(i: int, top: int) -> None:
        if i == k:
            out.append(Partition._trusted(tuple(labels)))
            return
        for lab in range(top + 2):
            labels[i] = lab
            rec(i + 1, max(top, lab))

    rec(1, 0)
    return tuple(out)


def enumerate_partitions(k: int) -> tuple:
    """All restricted-growth sequences of length k in lexicographic order."""
    if k < 1:
        raise ArityError("arity must be positive")
    _check_cap(k)
    return _partitions(k)


@lru_cache(maxsize=None)
def _partition_array(k: int) -> np.ndarray:
    arr = np.array(_partitions(k), dtype=np.int8).reshape(-1, k)
    arr.setflags(write=False)
    return arr


def partition_array(k: int) -> np.ndarray:
    """Same enumeration as a read-only (Bell(k), k) integer array."""
    enumerate_partitions(k)
    return _partition_array(k)


@lru_cache(maxsize=None)
def partition_index(k: int) -> dict:
    return {p: i for i, p in enumerate(_partitions(k))}


@dataclass(frozen=True)
class OrbitRelation:
    arity: int
    orbits: frozenset

    def __post_init__(self):
        if self.arity < 1:
            raise ArityError("relation arity must be positive")
        fixed = frozenset(p if isinstance(p, Partition) else Partition(p) for p in self.orbits)
        for p in fixed:
            if len(p) != self.arity:
                raise ArityError(f"orbit {p.literal()} does not have arity {self.arity}")
        object.__setattr__(self, "orbits", fixed)

    def __contains__(self, values) -> bool:
        return contains(self, values)

    def __len__(self) -> int:
        return len(self.orbits)

    def sorted_orbits(self) -> list:
        return sorted(self.orbits)

    def mask(self) -> int:
        """Bitmask over enumerate_partitions(arity) of the member orbits."""
        index = partition_index(self.arity)
        enumerate_partitions(self.arity)
        m = 0
        for p in self.orbits:
            m |= 1 << index[p]
        return m

    def literal(self) -> str:
        return "orbits { " + ", ".join(p.literal() for p in self.sorted_orbits()) + " }"

    def has_all_equal(self) -> bool:
        return (0,) * self.arity in self.orbits

    @classmethod
    def full(cls, arity: int) -> "OrbitRelation":
        return cls(arity, frozenset(enumerate_partitions(arity)))


def contains(rel: OrbitRelation, values: Sequence) -> bool:
    if len(values) != rel.arity:
        raise ArityError(f"tuple of length {len(values)} for relation of arity {rel.arity}")
    return pattern_of(values) in rel.orbits


def relation_from_predicate(arity: int, pred: Callable[[tuple], bool]) -> OrbitRelation:
    return OrbitRelation(arity, frozenset(p for p in enumerate_partitions(arity) if pred(p)))


# builtin relations; arguments for the R family are ordered x1,y1,x2,y2,...

def _pairs_differ(p, n):
    return any(p[2 * i] != p[2 * i + 1] for i in range(n))


def _r(n):
    return lambda p: _pairs_differ(p, n)


def _runder(n):
    return lambda p: _pairs_differ(p, n) or len(set(p)) == 1


def _rneq(n):
    def pred(p):
        if not _pairs_differ(p, n):
            return False
        xs = p[0::2]
        ys = p[1::2]
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                if xs[i] == ys[j] or xs[i] == xs[j] or ys[i] == ys[j]:
                    return False
        return True
    return pred


_FIXED = {
    "neq": (2, lambda p: p[0] != p[1]),
    "eq": (2, lambda p: p[0] == p[1]),
    "I": (4, lambda p: p[0] != p[1] or p[2] == p[3]),
    "N": (4, lambda p: (p[0] == p[1] and p[2] == p[3] and p[0] != p[2]) or len(set(p)) == 4),
    "odd3": (3, lambda p: len(set(p)) in (1, 3)),
}
_FAMILIES = {"R": _r, "Runder": _runder, "Rneq": _rneq}
_ALIASES = {"ODD3": "odd3", "ODD_3": "odd3", "ne": "neq", "!=": "neq"}


@lru_cache(maxsize=None)
def _builtin(name: str, n) -> OrbitRelation:
    if name in _FIXED:
        arity, pred = _FIXED[name]
        return relation_from_predicate(arity, pred)
    return relation_from_predicate(2 * n, _FAMILIES[name](n))


def builtin_relation(name: str, *params: int) -> OrbitRelation:
    """Named relations: neq, eq, I, N, odd3, R(n), Runder(n), Rneq(n)."""
    m = re.fullmatch(r"\s*(\w+)\s*(?:\(\s*(\d+)\s*\))?\s*", name)
    if m is None:
        raise ValidationError(f"unknown relation {name!r}")
    base = _ALIASES.get(m.group(1), m.group(1))
    if m.group(2) is not None:
        params = (int(m.group(2)),) + tuple(params)
    if base in _FIXED:
        if params:
            raise ValidationError(f"relation {base} takes no parameter")
        return _builtin(base, None)
    if base in _FAMILIES:
        if len(params) != 1:
            raise ValidationError(f"relation {base} needs exactly one parameter n")
        n = int(params[0])
        if n < 2 or 2 * n > partition_cap():
            raise ValidationError(f"{base}({n}) out of range: need 2 <= n and 2n <= {partition_cap()}")
        return _builtin(base, n)
    raise ValidationError(f"unknown relation {name!r}")


BUILTIN_RELATION_NAMES = ("neq", "eq", "I", "N", "odd3", "R(n)", "Runder(n)", "Rneq(n)")


# orbit literal syntax: [1,1,2] with 1-based block ids

_LIT = re.compile(r"\[\s*(\d+(?:\s*,\s*\d+)*)\s*\]")


def parse_orbit_literal(text: str) -> Partition:
    m = _LIT.fullmatch(text.strip())
    if m is None:
        raise ParseError("malformed orbit literal", 0)
    ids = [int(x) for x in m.group(1).split(",")]
    if min(ids) < 1:
        raise ValidationError("orbit block ids are 1-based")
    return Partition([x - 1 for x in ids])


def parse_orbits(text: str) -> OrbitRelation:
    """Parse `orbits { [1,1,1], [1,2,3] }`. An empty set needs `orbits/k {}`."""
    m = re.fullmatch(r"\s*orbits\s*(?:/\s*(\d+))?\s*\{(.*)\}\s*", text, re.S)
    if m is None:
        raise ParseError("expected 'orbits { ... }'", 0)
    body = m.group(2)
    parts = [parse_orbit_literal(x.group(0)) for x in _LIT.finditer(body)]
    leftover = _LIT.sub("", body).replace(",", "").strip()
    if leftover:
        raise ParseError("unexpected text inside orbit set", m.start(2) + body.find(leftover.split()[0]))
    if m.group(1):
        arity = int(m.group(1))
    elif parts:
        arity = len(parts[0])
    else:
        raise ValidationError("empty orbit set needs an explicit arity: orbits/k {}")
    return OrbitRelation(arity, frozenset(parts))
