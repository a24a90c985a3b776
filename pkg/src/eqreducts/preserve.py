"""Preservation of orbit relations by decision-list operations.

Exact search. Whether two output positions are equal depends only on which
rule fires at each position and on equalities between key arguments *inside
one input tuple*. So each input tuple can be described by an orbit of the
relation plus an injective valuation of its blocks into the argument's support
or fresh values, and values of different input tuples never need to be
compared. The search fills the n x k input matrix cell by cell and prunes as
soon as no output pattern outside the relation remains reachable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_BUDGET
from .eqcore import OrbitRelation, Partition, canonical_labels, contains, enumerate_partitions, pattern_of
from .errors import ResourceError, ValidationError
from .patops import Const, Fresh, PatternOperation, concrete_outputs, evaluate


@dataclass(frozen=True)
class Witness:
    inputs: tuple  # n concrete tuples, each in the relation
    output: tuple  # concrete output tuple
    pattern: Partition

    def as_dict(self) -> dict:
        return {
            "inputs": [list(t) for t in self.inputs],
            "output": list(self.output),
            "pattern": self.pattern.literal(),
        }


@dataclass(frozen=True)
class PreservationVerdict:
    preserves: bool
    witness: Optional[Witness] = None
    nodes: int = 0

    @property
    def verdict(self) -> str:
        return "Preserves" if self.preserves else "Violates"


@dataclass(frozen=True)
class SampledVerdict:
    violates: bool
    samples: int
    seed: int
    witness: Optional[Witness] = None

    @property
    def verdict(self) -> str:
        return "Violates" if self.violates else "NoCounterexampleFound"


def violation_arity_bound(rel: OrbitRelation) -> int:
    return len(rel.orbits)


def replay(op: PatternOperation, rel: OrbitRelation, inputs: Sequence[Sequence[int]]) -> Witness:
    """Concrete re-evaluation of a candidate witness."""
    for t in inputs:
        if not contains(rel, t):
            raise AssertionError(f"witness input {t} is not in the relation")
    out = concrete_outputs(op, inputs)
    return Witness(tuple(tuple(t) for t in inputs), tuple(out), pattern_of(out))


def estimate_cost(op: PatternOperation, rel: OrbitRelation) -> int:
    """Upper bound on complete input matrices: (sum over orbits of valuations)^n."""
    total = 1
    for i in range(op.arity):
        s = len(op.arg_support(i))
        per = 0
        for p in rel.orbits:
            b = p.n_blocks
            per += sum(_falling(s, c) * _comb(b, c) for c in range(min(s, b) + 1))
        total *= max(per, 1)
    return total


def _falling(n, k):
    out = 1
    for i in range(k):
        out *= n - i
    return out


def _comb(n, k):
    from math import comb

    return comb(n, k)


class _Search:
    def __init__(self, op: PatternOperation, rel: OrbitRelation, target, budget: int):
        self.op = op
        self.rel = rel
        self.n = op.arity
        self.k = rel.arity
        self.budget = budget
        self.nodes = 0
        n, k = self.n, self.k
        rules = op.rules
        self.supports = [sorted(op.arg_support(i)) for i in range(n)]
        # match[i][v] for constants v, matchf[i] for fresh values
        self.match = []
        self.matchf = []
        for i in range(n):
            d = {}
            for v in self.supports[i]:
                d[v] = sum(1 << r for r, rule in enumerate(rules) if rule.patterns[i].matches(v))
            self.match.append(d)
            self.matchf.append(sum(1 << r for r, rule in enumerate(rules) if rule.patterns[i].matches(None)))
        const_vals = sorted({r.output.value for r in rules if isinstance(r.output, Const)})
        cbit = {v: 1 << i for i, v in enumerate(const_vals)}
        self.rule_const = [cbit[r.output.value] if isinstance(r.output, Const) else 0 for r in rules]
        self.rule_value = [r.output.value if isinstance(r.output, Const) else None for r in rules]
        keysets = sorted({r.output.key for r in rules if isinstance(r.output, Fresh)})
        self.keysets = keysets
        self.rule_keyset = [keysets.index(r.output.key) if isinstance(r.output, Fresh) else -1 for r in rules]
        self.fresh_mask = sum(1 << r for r, rule in enumerate(rules) if isinstance(rule.output, Fresh))
        self.arg_keysets = [[ks for ks, key in enumerate(keysets) if i in key] for i in range(n)]
        self.pairs = {}
        for idx, (a, b) in enumerate(itertools.combinations(range(k), 2)):
            self.pairs[(a, b)] = self.pairs[(b, a)] = 1 << idx
        self.all_pairs = (1 << (k * (k - 1) // 2)) - 1
        if target is not None:
            cands = [Partition(target)]
        else:
            cands = [q for q in enumerate_partitions(k) if q not in rel.orbits]
        self.bad_masks = [self._eqmask(q) for q in cands]
        self.bad_set = frozenset(cands)
        self.prefixes = set()
        for p in rel.orbits:
            for j in range(1, k + 1):
                self.prefixes.add(tuple(p[:j]))
        self._const_cache: dict = {}
        self.safe: set = set()

    def _eqmask(self, q) -> int:
        m = 0
        for (a, b), bit in self.pairs.items():
            if a < b and q[a] == q[b]:
                m |= bit
        return m

    def _consts(self, alive: int) -> int:
        c = self._const_cache.get(alive)
        if c is None:
            c = 0
            a = alive
            r = 0
            while a:
                if a & 1:
                    c |= self.rule_const[r]
                a >>= 1
                r += 1
            self._const_cache[alive] = c
        return c

    def _can_eq(self, a1: int, a2: int, bit: int, sep: list) -> bool:
        if self._consts(a1) & self._consts(a2):
            return True
        common = a1 & a2 & self.fresh_mask
        r = 0
        while common:
            if common & 1 and not sep[self.rule_keyset[r]] & bit:
                return True
            common >>= 1
            r += 1
        return False

    def _reachable(self, can: int) -> bool:
        for m in self.bad_masks:
            if m & ~can == 0:
                return True
        return False

    def run(self, order: str = "row"):
        k, n = self.k, self.n
        alive = [(1 << len(self.op.rules)) - 1] * k
        sep = [0] * len(self.keysets)
        can = self.all_pairs
        if not self.bad_masks or not self.rel.orbits:
            return None
        if order == "row":
            self.cells = [(i, j) for i in range(n) for j in range(k)]
        else:
            self.cells = [(i, j) for j in range(k) for i in range(n)]
        self.labels = [[] for _ in range(n)]
        self.values = [[] for _ in range(n)]
        self.tops = [-1] * n
        if self._step(0, alive, sep, can):
            return [tuple(v) for v in self.values]
        return None

    def _step(self, idx, alive, sep, can) -> bool:
        if idx == len(self.cells):
            return self._finish(alive, sep)
        i, j = self.cells[idx]
        partial = tuple((i2, tuple(v)) for i2, v in enumerate(self.values) if 0 < len(v) < self.k)
        key = (idx, tuple(alive), tuple(sep), partial)
        if key in self.safe:
            return False
        labels, values, top = self.labels[i], self.values[i], self.tops[i]
        prefix = tuple(labels)
        choices = []
        for lab in range(top + 1):
            choices.append((lab, values[labels.index(lab)]))
        if prefix + (top + 1,) in self.prefixes:
            used = set(values)
            for v in self.supports[i]:
                if v not in used:
                    choices.append((top + 1, v))
            choices.append((top + 1, -(top + 2)))
        for lab, v in choices:
            if prefix + (lab,) not in self.prefixes:
                continue
            self.nodes += 1
            if self.nodes > self.budget:
                raise ResourceError(
                    f"preservation search exceeded the budget of {self.budget} nodes "
                    f"(estimate {estimate_cost(self.op, self.rel)} complete assignments)"
                )
            m = self.match[i][v] if v >= 0 else self.matchf[i]
            new_alive = alive[:]
            new_alive[j] = alive[j] & m
            new_sep = sep
            if self.arg_keysets[i]:
                new_sep = sep[:]
                for jj in range(j):
                    if values[jj] != v:
                        bit = self.pairs[(j, jj)]
                        for ks in self.arg_keysets[i]:
                            new_sep[ks] |= bit
            new_can = can
            aj = new_alive[j]
            for jj in range(self.k):
                if jj == j:
                    continue
                bit = self.pairs[(j, jj)]
                if new_can & bit and not self._can_eq(aj, new_alive[jj], bit, new_sep):
                    new_can &= ~bit
            if not self._reachable(new_can):
                continue
            labels.append(lab)
            values.append(v)
            self.tops[i] = max(top, lab)
            found = self._step(idx + 1, new_alive, new_sep, new_can)
            if found:
                return True
            labels.pop()
            values.pop()
            self.tops[i] = top
        if len(self.safe) < 4_000_000:
            self.safe.add(key)
        return False

    def _finish(self, alive, sep):
        outs = []
        for a in alive:
            r = (a & -a).bit_length() - 1
            outs.append(r)
        labels = []
        reps: list = []
        for j, r in enumerate(outs):
            lab = None
            for idx, jj in enumerate(reps):
                rr = outs[jj]
                if self.rule_value[r] is not None:
                    same = self.rule_value[rr] == self.rule_value[r]
                else:
                    same = rr == r and not sep[self.rule_keyset[r]] & self.pairs[(j, jj)]
                if same:
                    lab = idx
                    break
            if lab is None:
                lab = len(reps)
                reps.append(j)
            labels.append(lab)
        return tuple(labels) in self.bad_set


def _concretize(search: _Search, rows) -> list:
    nxt = max(search.op.support() | {-1}) + 1
    out = []
    for row in rows:
        table: dict = {}
        conc = []
        for v in row:
            if v >= 0:
                conc.append(v)
            else:
                if v not in table:
                    table[v] = nxt
                    nxt += 1
                conc.append(table[v])
        out.append(tuple(conc))
    return out


def preserves_exact(
    op: PatternOperation,
    rel: OrbitRelation,
    budget: int = DEFAULT_BUDGET,
    target: Optional[Sequence[int]] = None,
    order: str = "row",
) -> PreservationVerdict:
    """Exact decision. With `target`, only violations with that output pattern count."""
    if target is not None:
        target = canonical_labels(target)
        if len(target) != rel.arity:
            raise ValidationError("target pattern has the wrong arity")
        if target in rel.orbits:
            raise ValidationError("target pattern is inside the relation")
    search = _Search(op, rel, target, budget)
    rows = search.run(order)
    if rows is None:
        return PreservationVerdict(True, None, search.nodes)
    inputs = _concretize(search, rows)
    w = replay(op, rel, inputs)
    if w.pattern in rel.orbits:
        raise AssertionError("symbolic witness does not replay")
    return PreservationVerdict(False, w, search.nodes)


# ---------------------------------------------------------------------------
# sampling


def _instantiate(rng: np.random.Generator, orbits: list, count: int, pool: int) -> np.ndarray:
    """count random tuples: uniform orbit, uniform injective block -> pool map."""
    k = len(orbits[0])
    labels = np.asarray(orbits, dtype=np.int64)
    idx = rng.integers(0, len(orbits), size=count)
    keys = rng.random((count, pool))
    perm = np.argsort(keys, axis=1)[:, :k]
    return np.take_along_axis(perm, labels[idx], axis=1)


def preserves_sampled(op, rel: OrbitRelation, samples: int = 1000, seed: int = 0,
                      value_pool_size: Optional[int] = None) -> SampledVerdict:
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    pool = value_pool_size if value_pool_size is not None else 4 * rel.arity
    if not rel.orbits:
        return SampledVerdict(False, samples, seed)
    need = max(p.n_blocks for p in rel.orbits)
    if pool < need:
        raise ValidationError(f"value pool of size {pool} cannot instantiate an orbit with {need} blocks")
    orbits = rel.sorted_orbits()
    rng = np.random.default_rng(seed)
    if hasattr(op, "sampled_output_pattern"):
        for _ in range(samples):
            res = op.sampled_output_pattern(rng, orbits, pool)
            if res[0] not in rel.orbits:
                return SampledVerdict(True, samples, seed, op.witness_from_sample(rel, res))
        return SampledVerdict(False, samples, seed)
    for _ in range(samples):
        rows = _instantiate(rng, orbits, op.arity, pool)
        inputs = [tuple(int(x) for x in r) for r in rows]
        outs = [evaluate(op, [inputs[i][j] for i in range(op.arity)]) for j in range(rel.arity)]
        if pattern_of(outs) not in rel.orbits:
            return SampledVerdict(True, samples, seed, replay(op, rel, inputs))
    return SampledVerdict(False, samples, seed)
