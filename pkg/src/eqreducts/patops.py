"""Operations on the naturals presented as first-match decision lists.

Outputs are either constants or values of a fresh injective stream keyed by
some argument positions. Output equality is symbolic: a fresh value never
equals a constant, and values from different streams never coincide.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .errors import ValidationError

# ---------------------------------------------------------------------------
# patterns and outputs


@dataclass(frozen=True)
class ArgPattern:
    kind: str  # "any", "in", "notin"
    values: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in ("any", "in", "notin"):
            raise ValidationError(f"unknown pattern kind {self.kind!r}")
        object.__setattr__(self, "values", frozenset(int(v) for v in self.values))
        if self.kind == "in" and not self.values:
            raise ValidationError("In(empty set) never matches")
        if self.kind == "any" and self.values:
            raise ValidationError("Any takes no values")
        if any(v < 0 for v in self.values):
            raise ValidationError("pattern values must be natural numbers")

    def matches(self, value) -> bool:
        """value is an int (a named natural) or any non-int object (a fresh symbol)."""
        if self.kind == "any":
            return True
        named = isinstance(value, int)
        if self.kind == "in":
            return named and value in self.values
        return not named or value not in self.values

    def __str__(self) -> str:
        if self.kind == "any":
            return "any"
        vals = sorted(self.values)
        if self.kind == "in":
            return f"={vals[0]}" if len(vals) == 1 else "in{" + ",".join(map(str, vals)) + "}"
        return "notin{" + ",".join(map(str, vals)) + "}"


ANY = ArgPattern("any")


def In(*values) -> ArgPattern:
    if len(values) == 1 and isinstance(values[0], (set, frozenset, list, tuple, range)):
        values = tuple(values[0])
    return ArgPattern("in", frozenset(values))


def NotIn(*values) -> ArgPattern:
    if len(values) == 1 and isinstance(values[0], (set, frozenset, list, tuple, range)):
        values = tuple(values[0])
    return ArgPattern("notin", frozenset(values))


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self) -> str:
        return f"const {self.value}"


@dataclass(frozen=True)
class Fresh:
    stream: str
    key: tuple  # 0-based argument positions

    def __str__(self) -> str:
        return f"fresh {self.stream} key(" + ",".join(str(k + 1) for k in self.key) + ")"


OutputSpec = Union[Const, Fresh]


@dataclass(frozen=True)
class ConstVal:
    value: int


@dataclass(frozen=True)
class FreshVal:
    stream: str
    key: tuple


OutputTerm = Union[ConstVal, FreshVal]


@dataclass(frozen=True)
class Rule:
    patterns: tuple
    output: OutputSpec

    def matches(self, args: Sequence) -> bool:
        return all(p.matches(a) for p, a in zip(self.patterns, args))

    def is_catch_all(self) -> bool:
        return all(p.kind == "any" for p in self.patterns)

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.patterns) + ")->" + str(self.output)


@dataclass(frozen=True)
class PatternOperation:
    arity: int
    rules: tuple
    name: str = "op"
    default_added: bool = False
    symbolic_only: bool = False  # user-built: realizability as a function is not checked

    def __post_init__(self):
        _validate(self.arity, self.rules)

    def fire(self, args: Sequence) -> Rule:
        for r in self.rules:
            if r.matches(args):
                return r
        raise AssertionError("decision list is not total")

    def __call__(self, *args) -> OutputTerm:
        return evaluate(self, args)

    def support(self) -> frozenset:
        out = set()
        for r in self.rules:
            for p in r.patterns:
                out |= p.values
            if isinstance(r.output, Const):
                out.add(r.output.value)
        return frozenset(out)

    def arg_support(self, i: int) -> frozenset:
        out = set()
        for r in self.rules:
            out |= r.patterns[i].values
        return frozenset(out)

    def to_dsl(self) -> str:
        body = " ".join(f"{r};" for r in self.rules)
        return f"op {self.name}/{self.arity} := rules {{ {body} }}"


def _validate(arity: int, rules) -> None:
    if arity < 1:
        raise ValidationError("operation arity must be positive")
    if not rules:
        raise ValidationError("rule list is empty")
    streams: dict = {}
    for idx, r in enumerate(rules):
        if len(r.patterns) != arity:
            raise ValidationError(f"rule {idx + 1} has {len(r.patterns)} patterns, expected {arity}")
        out = r.output
        if isinstance(out, Fresh):
            if not out.key:
                raise ValidationError(f"rule {idx + 1}: fresh output needs a nonempty key")
            if any(k < 0 or k >= arity for k in out.key) or len(set(out.key)) != len(out.key):
                raise ValidationError(f"rule {idx + 1}: bad key positions")
            if out.stream in streams:
                raise ValidationError(f"stream {out.stream!r} used by rules {streams[out.stream] + 1} and {idx + 1}")
            streams[out.stream] = idx
        elif isinstance(out, Const):
            if out.value < 0:
                raise ValidationError("constant outputs must be natural numbers")
        else:
            raise ValidationError("unknown output spec")
    if not rules[-1].is_catch_all():
        raise ValidationError("last rule must be a catch-all")


def build_operation(rules: Iterable, arity: Optional[int] = None, name: str = "op",
                    symbolic_only: bool = True) -> PatternOperation:
    """Validate a rule list, appending a Fresh(all positions) default if it is not total."""
    rules = [r if isinstance(r, Rule) else Rule(tuple(r[0]), r[1]) for r in rules]
    if not rules:
        raise ValidationError("rule list is empty")
    if arity is None:
        arity = len(rules[0].patterns)
    for r in rules:
        if len(r.patterns) != arity:
            raise ValidationError("inconsistent rule arity")
    added = False
    if not rules[-1].is_catch_all():
        used = {r.output.stream for r in rules if isinstance(r.output, Fresh)}
        stream = "default"
        while stream in used:
            stream += "_"
        rules.append(Rule((ANY,) * arity, Fresh(stream, tuple(range(arity)))))
        added = True
    return PatternOperation(arity, tuple(rules), name, added, symbolic_only)


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class Named:
    value: int


@dataclass(frozen=True)
class FreshSym:
    index: int


def _plain(v):
    if isinstance(v, Named):
        return v.value
    if isinstance(v, FreshSym):
        return ("fresh", v.index)
    return v


def evaluate(op: PatternOperation, args: Sequence) -> OutputTerm:
    if len(args) != op.arity:
        raise ValidationError(f"{op.name} takes {op.arity} arguments")
    args = tuple(_plain(a) for a in args)
    r = op.fire(args)
    if isinstance(r.output, Const):
        return ConstVal(r.output.value)
    return FreshVal(r.output.stream, tuple(args[k] for k in r.output.key))


def apply_symbolic(op: PatternOperation, columns: Sequence[Sequence]):
    """Apply op componentwise to n argument columns of common length m."""
    from .eqcore import pattern_of

    if len(columns) != op.arity:
        raise ValidationError("need one column per argument")
    m = len(columns[0])
    if any(len(c) != m for c in columns):
        raise ValidationError("columns must have a common length")
    outs = [evaluate(op, [columns[i][j] for i in range(op.arity)]) for j in range(m)]
    return outs, pattern_of(outs)


def concrete_outputs(op: PatternOperation, inputs: Sequence[Sequence[int]]) -> list:
    """Realize outputs as naturals: constants as themselves, fresh terms as new numbers."""
    terms = [evaluate(op, [inputs[i][j] for i in range(op.arity)]) for j in range(len(inputs[0]))]
    used = {t.value for t in terms if isinstance(t, ConstVal)}
    nxt = max(used | op.support() | {-1}) + 1
    table: dict = {}
    out = []
    for t in terms:
        if isinstance(t, ConstVal):
            out.append(t.value)
        else:
            if t not in table:
                table[t] = nxt
                nxt += 1
            out.append(table[t])
    return out


# ---------------------------------------------------------------------------
# builtins

OMEGA = math.inf


def f_k(k: int) -> PatternOperation:
    if k < 3:
        raise ValidationError("f_k needs k >= 3")
    rules = []
    for i in range(k):
        pats = tuple(ANY if j == i else In(i + 1) for j in range(k))
        rules.append(Rule(pats, Const(i + 1)))
    rules.append(Rule((ANY,) * k, Fresh("s", tuple(range(k)))))
    return PatternOperation(k, tuple(rules), f"f{k}")


def g_k(k: int) -> PatternOperation:
    if k < 3:
        raise ValidationError("g_k needs k >= 3")
    rules = []
    for r in f_k(k).rules[:-1]:
        rules.append(Rule((In(0),) + r.patterns, r.output))
    rules.append(Rule((In(0),) + (ANY,) * k, Fresh("sf", tuple(range(1, k + 1)))))
    rules.append(Rule((ANY,) * (k + 1), Fresh("s", tuple(range(k + 1)))))
    return PatternOperation(k + 1, tuple(rules), f"g{k}")


def bar(k: int) -> PatternOperation:
    if k < 1:
        raise ValidationError("bar needs k >= 1")
    rules = [Rule((In(j), ANY), Const(j)) for j in range(k)]
    rules.append(Rule((ANY, ANY), Fresh("s", (0, 1))))
    return PatternOperation(2, tuple(rules), f"bar{k}")


def generic_injection(n: int = 2) -> PatternOperation:
    if n < 1:
        raise ValidationError("arity must be positive")
    return PatternOperation(n, (Rule((ANY,) * n, Fresh("s", tuple(range(n)))),), f"inj{n}")


def constant(c: int, n: int = 1) -> PatternOperation:
    return PatternOperation(n, (Rule((ANY,) * n, Const(c)),), f"const{c}")


def projection(n: int, i: int) -> PatternOperation:
    """Projection onto argument i (1-based), up to an injective renaming of values."""
    if not 1 <= i <= n:
        raise ValidationError("projection index out of range")
    return PatternOperation(n, (Rule((ANY,) * n, Fresh("p", (i - 1,))),), f"proj{n}_{i}")


def richard() -> PatternOperation:
    rules = (
        Rule((In(1, 2), ANY), Fresh("s", (1,))),
        Rule((ANY, ANY), Fresh("d", (0, 1))),
    )
    return PatternOperation(2, rules, "richard")


def quasilinear_xor(C: Iterable[int] = (0,), a: int = 1, b: int = 0) -> PatternOperation:
    C = frozenset(C)
    if not C or a == b:
        raise ValidationError("need a nonempty set C and two distinct outputs")
    rules = (
        Rule((In(C), NotIn(C)), Const(a)),
        Rule((NotIn(C), In(C)), Const(a)),
        Rule((ANY, ANY), Const(b)),
    )
    return PatternOperation(2, rules, "qxor")


def essential_finite(r: int) -> PatternOperation:
    """Binary essential operation with exactly r values."""
    if r < 2:
        raise ValidationError("essential_finite needs r >= 2")
    rules = [Rule((In(0), In(0)), Const(1))]
    rules += [Rule((In(j), ANY), Const(j)) for j in range(2, r)]
    rules.append(Rule((ANY, ANY), Const(0)))
    return PatternOperation(2, tuple(rules), f"ess{r}")


def unary_from_kernel(kappa: Sequence, cap: Optional[int] = None) -> PatternOperation:
    """Unary operation whose kernel classes have the given sizes.

    Finite classes use consecutive naturals starting at 0 and output 1, 2, ...
    The last omega class is the catch-all. Any further omega class needs `cap`,
    a finite size that behaves like omega on relations of arity <= cap.
    """
    kappa = list(kappa)
    if not kappa or kappa[-1] != OMEGA:
        raise ValidationError("kernel tuple must end in omega")
    extra = sum(1 for x in kappa[:-1] if x == OMEGA)
    if extra and cap is None:
        raise ValidationError("several omega classes need a finite cap size")
    sizes = [cap if x == OMEGA else int(x) for x in kappa[:-1]]
    rules = []
    nxt = 0
    for out, size in enumerate(sizes, start=1):
        if size < 1:
            raise ValidationError("class sizes must be positive")
        rules.append(Rule((In(range(nxt, nxt + size)),), Const(out)))
        nxt += size
    rules.append(Rule((ANY,), Const(len(sizes) + 1)))
    return PatternOperation(1, tuple(rules), "unary")


def builtin_operation(name: str, *params) -> PatternOperation:
    import re

    m = re.fullmatch(r"\s*([A-Za-z_]+?)_?(\d+)?\s*(?:\((.*)\))?\s*", name)
    if m is None:
        raise ValidationError(f"unknown operation {name!r}")
    base = m.group(1)
    args = list(params)
    if m.group(2) is not None:
        args = [int(m.group(2))] + args
    if m.group(3):
        args = [int(x) for x in m.group(3).split(",") if x.strip()] + args
    table = {
        "f": f_k, "fk": f_k, "g": g_k, "gk": g_k, "bar": bar,
        "inj": generic_injection, "injection": generic_injection, "generic_injection": generic_injection,
        "constant": constant, "const": constant, "projection": projection, "proj": projection,
        "ess": essential_finite, "essential_finite": essential_finite,
    }
    if base == "richard":
        return richard()
    if base in ("qxor", "quasilinear_xor"):
        if not args:
            return quasilinear_xor()
        raise ValidationError("quasilinear_xor with parameters is available from Python only")
    if base == "f" and not args:
        raise ValidationError("f needs k")
    if base in table:
        try:
            return table[base](*args)
        except TypeError as exc:
            raise ValidationError(f"bad parameters for {base}: {exc}") from None
    raise ValidationError(f"unknown operation {name!r}")


# ---------------------------------------------------------------------------
# structural analyses


class _Fresh:
    """A generic value outside the support; distinct instances are distinct values."""

    __slots__ = ("tag",)

    def __init__(self, tag):
        self.tag = tag

    def __repr__(self):
        return f"F{self.tag}"


def _arg_values(op: PatternOperation, i: int, nfresh: int) -> list:
    return sorted(op.arg_support(i)) + [_Fresh((i, j)) for j in range(nfresh)]


def _pair_options(op: PatternOperation, i: int) -> list:
    """Canonical (a_i, b_i) choices: constants or generic values, equal or not."""
    vals = sorted(op.arg_support(i))
    fa, fb = _Fresh((i, 0)), _Fresh((i, 1))
    opts = [(x, y) for x in vals + [fa] for y in vals + [fa, fb]]
    return [(x, y) for x, y in opts if not (y is fb and x is not fa)]


def directional_injectivity(op: PatternOperation) -> set:
    """1-based directions i in which op is injective."""
    result = set(range(1, op.arity + 1))
    options = [_pair_options(op, i) for i in range(op.arity)]
    for combo in itertools.product(*options):
        a = tuple(p[0] for p in combo)
        b = tuple(p[1] for p in combo)
        if evaluate(op, a) != evaluate(op, b):
            continue
        for i in range(op.arity):
            if a[i] is not b[i] and a[i] != b[i]:
                result.discard(i + 1)
        if not result:
            break
    return result


@dataclass(frozen=True)
class DependencyProfile:
    depends: tuple
    essentially_unary: bool


def dependency_profile(op: PatternOperation) -> DependencyProfile:
    depends = []
    for i in range(op.arity):
        found = False
        rows = [_arg_values(op, j, 1) for j in range(op.arity)]
        alts = _arg_values(op, i, 2)
        for row in itertools.product(*rows):
            base = evaluate(op, row)
            for v in alts:
                if v is row[i] or v == row[i]:
                    continue
                other = row[:i] + (v,) + row[i + 1:]
                if evaluate(op, other) != base:
                    found = True
                    break
            if found:
                break
        depends.append(found)
    return DependencyProfile(tuple(depends), sum(depends) <= 1)


def _cell_table(op: PatternOperation) -> dict:
    cells = [_arg_values(op, i, 1) for i in range(op.arity)]
    return {combo: op.fire(combo) for combo in itertools.product(*cells)}, cells


def is_quasilinear(op: PatternOperation) -> bool:
    table, cells = _cell_table(op)
    outputs = set()
    for rule in table.values():
        if isinstance(rule.output, Fresh):
            return False
        outputs.add(rule.output.value)
    if len(outputs) > 2:
        return False
    if len(outputs) <= 1:
        return True
    hi = max(outputs)
    g = {c: int(r.output.value == hi) for c, r in table.items()}
    base = tuple(c[0] for c in cells)
    g0 = g[base]
    phi = []
    for i, cell in enumerate(cells):
        phi.append({x: g[base[:i] + (x,) + base[i + 1:]] ^ g0 for x in cell})
    for combo, val in g.items():
        acc = g0
        for i, x in enumerate(combo):
            acc ^= phi[i][x]
        if acc != val:
            return False
    return True


def _section_kind(outputs: list) -> str:
    if all(o == outputs[0] for o in outputs):
        return "constant"
    for x, y in itertools.combinations(outputs, 2):
        if x == y:
            return "other"
    return "injective"


def binary_bar_membership(op: PatternOperation) -> bool:
    if op.arity != 2:
        raise ValidationError("binary_bar_membership needs a binary operation")
    if not directional_injectivity(op):
        return False
    fixed = [_arg_values(op, i, 2) for i in range(2)]
    free = [_arg_values(op, i, 2) for i in range(2)]
    for v in fixed[0]:
        if _section_kind([evaluate(op, (v, x)) for x in free[1]]) == "other":
            return False
    for v in fixed[1]:
        if _section_kind([evaluate(op, (x, v)) for x in free[0]]) == "other":
            return False
    return True
