"""An infinite antichain of negative relations C_n and the operations H_n separating them.

C_n is the 2n-ary relation on columns (x_1, y_1, ..., x_n, y_n) defined by
"some x_i differs from y_i" together with, for every index set A with
1 < |A| < n, the cyclic clause "y_{j1} != x_{j2} or ... or y_{jr} != x_{j1}".

H_n is an operation of arity m = |C_n restricted to {1..n+1}|. Its inputs
are the m rows of that finite relation, in lexicographic order. It maps the
column of x_j and the column of y_j to j, and sends every other argument
tuple to its own fresh value.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .eqcore import OrbitRelation, Partition, canonical_labels, contains, partition_array, pattern_of
from .eqformula import And, Eq, EqFormula, Not, Or
from .errors import ValidationError
from .patops import Const, In, PatternOperation, Rule, build_operation
from .preserve import SampledVerdict, Witness, _instantiate, preserves_sampled


def _cycles(n: int) -> list:
    return [A for r in range(2, n) for A in itertools.combinations(range(n), r)]


def gamma_holds(values: np.ndarray, n: int) -> np.ndarray:
    """Row-wise truth of gamma_n on an array of shape (rows, 2n)."""
    X = values[:, 0::2]
    Y = values[:, 1::2]
    ok = (X != Y).any(axis=1)
    for A in _cycles(n):
        clause = np.zeros(len(values), dtype=bool)
        for a, b in zip(A, A[1:] + A[:1]):
            clause |= Y[:, a] != X[:, b]
        ok &= clause
    return ok


def gamma_formula(n: int) -> EqFormula:
    """gamma_n as an AST over variables x1, y1, ..., xn, yn."""
    xs = [f"x{i}" for i in range(1, n + 1)]
    ys = [f"y{i}" for i in range(1, n + 1)]
    parts = [Or(tuple(Not(Eq(x, y)) for x, y in zip(xs, ys)))]
    for A in _cycles(n):
        parts.append(Or(tuple(Not(Eq(ys[a], xs[b])) for a, b in zip(A, A[1:] + A[:1]))))
    variables = tuple(v for pair in zip(xs, ys) for v in pair)
    return EqFormula(variables, And(tuple(parts)), declared=True)


@dataclass(frozen=True)
class GammaRelation:
    n: int
    relation: OrbitRelation

    def __contains__(self, values) -> bool:
        return contains(self.relation, values)


def c_relation(n: int) -> GammaRelation:
    if not 3 <= n <= 5:
        raise ValidationError("C_n is supported for 3 <= n <= 5")
    parts = partition_array(2 * n)
    keep = gamma_holds(parts, n)
    orbits = frozenset(Partition._trusted(tuple(int(v) for v in row)) for row in parts[keep])
    return GammaRelation(n, OrbitRelation(2 * n, orbits))


def enumerate_small_rows(n: int) -> np.ndarray:
    """All tuples of C_n with entries in {1..n+1}, in lexicographic order."""
    grid = np.indices((n + 1,) * (2 * n), dtype=np.int8).reshape(2 * n, -1).T + 1
    return grid[gamma_holds(grid, n)]


@dataclass
class HubieOperation:
    n: int
    rows: np.ndarray  # shape (m, 2n); row j is the j-th argument
    _rule_index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for p in range(2 * self.n):
            key = self.rows[:, p].tobytes()
            j = p // 2 + 1
            if self._rule_index.setdefault(key, j) != j:
                raise ValidationError(f"column tuples of H_{self.n} collide across outputs")

    @property
    def m(self) -> int:
        return int(self.rows.shape[0])

    @property
    def arity(self) -> int:
        return self.m

    @property
    def name(self) -> str:
        return f"H{self.n}"

    def rule_columns(self) -> list:
        return [(self.rows[:, p].copy(), p // 2 + 1) for p in range(2 * self.n)]

    def apply(self, args: np.ndarray) -> list:
        """Concrete output on m argument tuples of common length (array of shape (m, L))."""
        args = np.asarray(args)
        if args.shape[0] != self.m:
            raise ValidationError(f"H_{self.n} takes {self.m} arguments")
        col = args.astype(self.rows.dtype) if np.all((args >= 0) & (args < 128)) else None
        fresh: dict = {}
        out = []
        nxt = self.n + 1
        for p in range(args.shape[1]):
            j = None
            if col is not None and np.array_equal(col[:, p], args[:, p]):
                j = self._rule_index.get(col[:, p].tobytes())
            if j is not None:
                out.append(j)
                continue
            key = args[:, p].tobytes()
            if key not in fresh:
                fresh[key] = nxt
                nxt += 1
            out.append(fresh[key])
        return out

    def sampled_output_pattern(self, rng: np.random.Generator, orbits: list, pool: int, chunk: int = 64):
        """Draw m random relation rows lazily and return (output pattern, rows or None).

        Rows are generated chunk by chunk. Once every pair of output positions has
        been told apart and no position can still match a rule column, the output
        is all distinct and the remaining rows cannot change it, so drawing stops.
        """
        k = len(orbits[0])
        rules = self.rows
        alive = np.ones((k, 2 * self.n), dtype=bool)
        same = np.ones((k, k), dtype=bool)
        drawn = []
        start = 0
        while start < self.m:
            stop = min(start + chunk, self.m)
            block = _instantiate(rng, orbits, stop - start, pool)
            drawn.append(block)
            seg = rules[start:stop].astype(np.int64)
            alive &= (block[:, :, None] == seg[:, None, :]).all(axis=0)
            same &= (block[:, :, None] == block[:, None, :]).all(axis=0)
            start = stop
            if not alive.any() and not (same & ~np.eye(k, dtype=bool)).any():
                return Partition._trusted(tuple(range(k))), None
        args = np.concatenate(drawn, axis=0)
        return pattern_of(self.apply(args)), args

    def witness_from_sample(self, rel: OrbitRelation, res) -> Witness:
        _, args = res
        inputs = tuple(tuple(int(v) for v in row) for row in args)
        for t in inputs:
            if not contains(rel, t):
                raise AssertionError("sampled row is not in the relation")
        out = tuple(self.apply(args))
        return Witness(inputs, out, pattern_of(out))

    def to_pattern_operation(self) -> PatternOperation:
        """The same operation as a decision list: one all-constant rule per column."""
        rules = []
        seen = set()
        for column, j in self.rule_columns():
            key = column.tobytes()
            if key in seen:
                continue
            seen.add(key)
            rules.append(Rule(tuple(In(int(v)) for v in column), Const(j)))
        return build_operation(rules, self.m, name=self.name, symbolic_only=False)


def hubie_operation(n: int) -> HubieOperation:
    if not 3 <= n <= 4:
        raise ValidationError("H_n is supported for n in {3, 4}")
    return HubieOperation(n, enumerate_small_rows(n))


@dataclass(frozen=True)
class ViolationReport:
    ok: bool
    output: tuple
    pattern: Partition
    rows_in_relation: bool

    def as_dict(self) -> dict:
        return {"ok": self.ok, "witness": {"output": list(self.output), "pattern": self.pattern.literal()},
                "rows_in_relation": self.rows_in_relation}


def hubie_violation_check(n: int, op: Optional[HubieOperation] = None,
                          rel: Optional[GammaRelation] = None) -> ViolationReport:
    op = op or hubie_operation(n)
    rel = rel or c_relation(n)
    rows_ok = all(contains(rel.relation, tuple(int(v) for v in row)) for row in op.rows)
    out = tuple(op.apply(op.rows))
    pattern = pattern_of(out)
    expected = pattern_of([i for i in range(1, n + 1) for _ in range(2)])
    ok = rows_ok and pattern == expected and pattern not in rel.relation.orbits
    return ViolationReport(ok, out, pattern, rows_ok)


def cross_check(n: int, k: int, samples: int = 10_000, seed: int = 42,
                op: Optional[HubieOperation] = None) -> SampledVerdict:
    """Sampled test that H_n preserves C_k for k != n."""
    if n == k:
        raise ValidationError("cross preservation needs n != k")
    op = op or hubie_operation(n)
    return preserves_sampled(op, c_relation(k).relation, samples=samples, seed=seed)


def continuum_report(n: int, ks: Iterable[int], samples: int = 10_000, seed: int = 42) -> dict:
    op = hubie_operation(n)
    viol = hubie_violation_check(n, op)
    cross = []
    for k in ks:
        v = cross_check(n, k, samples, seed, op)
        entry = {"k": k, "samples": samples, "seed": seed, "verdict": v.verdict}
        if v.witness is not None:
            entry["witness"] = v.witness.as_dict()
        cross.append(entry)
    return {"n": n, "m": op.m, "violation": viol.as_dict(), "cross": cross}


_AVAILABLE = (3, 4)


def antichain_demo(A: Iterable[int], B: Iterable[int], samples: int = 10_000, seed: int = 42) -> dict:
    """Evidence that the clones of {C_n : n in A} and {C_n : n in B} differ.

    Index i stands for n = 3 + i. Each n in the symmetric difference yields an
    operation H_n that violates C_n exactly and, by sampling, preserves every C_k
    on the other side.
    """
    A = {3 + int(i) for i in A}
    B = {3 + int(i) for i in B}
    if A == B:
        raise ValidationError("the two index sets are identical")
    if not (A | B) <= set(_AVAILABLE):
        raise ValidationError("indices must map to n in {3, 4}")
    separations = []
    for n in sorted(A ^ B):
        inside, other = (A, B) if n in A else (B, A)
        op = hubie_operation(n)
        viol = hubie_violation_check(n, op)
        cross = []
        for k in sorted(other):
            v = cross_check(n, k, samples, seed, op)
            cross.append({"k": k, "samples": samples, "seed": seed, "verdict": v.verdict})
        separations.append({
            "operation": f"H{n}",
            "violates": {"relation": f"C{n}", "exact": viol.ok, "pattern": viol.pattern.literal()},
            "preserves_sampled": cross,
            "member_of": "B" if inside is A else "A",
            "not_member_of": "A" if inside is A else "B",
        })
    return {"A": sorted(A), "B": sorted(B), "separations": separations}
