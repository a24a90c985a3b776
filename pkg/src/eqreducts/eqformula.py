"""Quantifier-free equality logic and primitive positive formulas.

Semantics are decided by enumerating partitions of the variable set, which is
sound and complete for formulas whose only atoms are equalities.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .eqcore import (
    OrbitRelation,
    Partition,
    canonical_labels,
    enumerate_partitions,
    partition_array,
)
from .errors import ParseError, ResourceError, ValidationError

# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Node"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Implies:
    left: "Node"
    right: "Node"


Node = Union[Eq, Const, Not, And, Or, Implies]


@dataclass(frozen=True)
class EqFormula:
    variables: tuple
    body: Node
    declared: bool = False

    def __str__(self) -> str:
        return format_node(self.body)


def format_node(node: Node) -> str:
    if isinstance(node, Eq):
        return f"{node.left}={node.right}"
    if isinstance(node, Const):
        return "true" if node.value else "false"
    if isinstance(node, Not):
        inner = node.arg
        if isinstance(inner, Eq):
            return f"{inner.left}!={inner.right}"
        return f"!({format_node(inner)})"
    if isinstance(node, And):
        return " & ".join(_wrap(a, (Or, Implies)) for a in node.args) or "true"
    if isinstance(node, Or):
        return " | ".join(_wrap(a, (Implies,)) for a in node.args) or "false"
    return f"({format_node(node.left)}) -> ({format_node(node.right)})"


def _wrap(node: Node, kinds) -> str:
    s = format_node(node)
    return f"({s})" if isinstance(node, kinds) else s


def node_variables(node: Node) -> list:
    seen: dict = {}

    def walk(n):
        if isinstance(n, Eq):
            seen.setdefault(n.left, None)
            seen.setdefault(n.right, None)
        elif isinstance(n, Not):
            walk(n.arg)
        elif isinstance(n, (And, Or)):
            for a in n.args:
                walk(a)
        elif isinstance(n, Implies):
            walk(n.left)
            walk(n.right)

    walk(node)
    return list(seen)


# ---------------------------------------------------------------------------
# lexer and parser

_TOKEN = re.compile(
    r"\s*(?:(?P<comment>\#[^\n]*)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)"
    r"|(?P<sym>->|!=|:=|\.\.|[=&|!(),:;{}\[\]/<>+-]))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            if rest.strip() == "":
                break
            off = pos + (len(rest) - len(rest.lstrip()))
            raise ParseError(f"unexpected character {text[off]!r}", off)
        pos = m.end()
        if m.group("comment") is not None:
            continue
        for kind in ("ident", "int", "sym"):
            if m.group(kind) is not None:
                tokens.append(Token(kind, m.group(kind), m.start(kind)))
                break
    tokens.append(Token("eof", "", len(text)))
    return tokens


class Parser:
    """Recursive-descent parser over a token list; reused by the language-file reader."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "ident") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.pos += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            self.error("expected identifier")
        self.pos += 1
        return t.text

    def integer(self) -> int:
        t = self.tok
        if t.kind != "int":
            self.error("expected integer")
        self.pos += 1
        return int(t.text)

    def error(self, message: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{message}, found {found}", t.offset)

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")

    # variable lists
    def var_list(self) -> list:
        names = [*self._var_item()]
        while self.accept(","):
            names.extend(self._var_item())
        return names

    def _var_item(self) -> list:
        start = self.tok
        first = self.ident()
        if not self.accept(".."):
            return [first]
        last = self.ident()
        m1 = re.fullmatch(r"(.*?)(\d+)", first)
        m2 = re.fullmatch(r"(.*?)(\d+)", last)
        if not m1 or not m2 or m1.group(1) != m2.group(1) or int(m1.group(2)) > int(m2.group(2)):
            raise ParseError(f"bad variable range {first}..{last}", start.offset)
        return [f"{m1.group(1)}{i}" for i in range(int(m1.group(2)), int(m2.group(2)) + 1)]

    def header(self) -> Optional[list]:
        if self.at("vars") and self.peek().kind == "ident":
            self.pos += 1
            names = self.var_list()
            if not (self.accept(";") or self.accept(":")):
                self.error("expected ';' or ':' after variable declaration")
            if len(set(names)) != len(names):
                raise ParseError("duplicate variable in declaration", self.tok.offset)
            return names
        return None

    # quantifier-free formulas
    def implication(self) -> Node:
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Node:
        args = [self.conjunction()]
        while self.accept("|"):
            args.append(self.conjunction())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conjunction(self) -> Node:
        args = [self.unary()]
        while self.accept("&"):
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self) -> Node:
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("("):
            node = self.implication()
            self.expect(")")
            return node
        if self.accept("true"):
            return Const(True)
        if self.accept("false"):
            return Const(False)
        left = self.ident()
        if self.accept("="):
            return Eq(left, self.ident())
        if self.accept("!="):
            return Not(Eq(left, self.ident()))
        self.error("expected '=' or '!='")

    def formula(self) -> EqFormula:
        declared = self.header()
        start = self.tok.offset
        body = self.implication()
        used = node_variables(body)
        if declared is not None:
            missing = [v for v in used if v not in declared]
            if missing:
                raise ParseError(f"undeclared variable {missing[0]!r}", start)
            return EqFormula(tuple(declared), body, True)
        return EqFormula(tuple(used), body, False)

    # pp formulas
    def pp_formula(self) -> "PpFormula":
        declared = self.header()
        bound: list = []
        if self.accept("exists"):
            bound = self.var_list()
            self.expect(":")
        conjuncts = [self.pp_atom()]
        while self.accept("&"):
            conjuncts.append(self.pp_atom())
        conjuncts = [c for c in conjuncts if c is not None]
        seen: dict = {}
        for c in conjuncts:
            for v in c.variables():
                seen.setdefault(v, None)
        if declared is not None:
            free = list(declared)
        else:
            free = [v for v in seen if v not in bound]
        for v in seen:
            if v not in free and v not in bound:
                raise ParseError(f"undeclared variable {v!r}", self.tok.offset)
        return PpFormula(tuple(free), tuple(bound), tuple(conjuncts))

    def pp_atom(self):
        if self.accept("true"):
            return None
        name = self.ident()
        if self.accept("("):
            args = [self.ident()]
            while self.accept(","):
                args.append(self.ident())
            self.expect(")")
            return BaseAtom(name, tuple(args))
        if self.accept("="):
            return EqAtom(name, self.ident())
        if self.accept("!="):
            return NeqAtom(name, self.ident())
        self.error("expected '(' , '=' or '!='")


def parse_formula(text: str) -> EqFormula:
    p = Parser(text)
    f = p.formula()
    p.expect_eof()
    return f


# ---------------------------------------------------------------------------
# evaluation over partitions


def _var_positions(variables: Sequence[str]) -> dict:
    return {v: i for i, v in enumerate(variables)}


def _eval_node(node: Node, arr: np.ndarray, pos: dict) -> np.ndarray:
    if isinstance(node, Eq):
        return arr[:, pos[node.left]] == arr[:, pos[node.right]]
    if isinstance(node, Const):
        return np.full(arr.shape[0], node.value, dtype=bool)
    if isinstance(node, Not):
        return ~_eval_node(node.arg, arr, pos)
    if isinstance(node, And):
        out = np.ones(arr.shape[0], dtype=bool)
        for a in node.args:
            out &= _eval_node(a, arr, pos)
        return out
    if isinstance(node, Or):
        out = np.zeros(arr.shape[0], dtype=bool)
        for a in node.args:
            out |= _eval_node(a, arr, pos)
        return out
    return ~_eval_node(node.left, arr, pos) | _eval_node(node.right, arr, pos)


# ---------------------------------------------------------------------------
# CNF


@dataclass(frozen=True, order=True)
class Literal:
    """positive=True, atom=None is the constant False."""

    positive: bool
    atom: Optional[tuple]

    @property
    def is_false(self) -> bool:
        return self.atom is None

    def __str__(self) -> str:
        if self.atom is None:
            return "false"
        a, b = self.atom
        return f"{a}={b}" if self.positive else f"{a}!={b}"


FALSE_LIT = Literal(True, None)
Clause = tuple


@dataclass(frozen=True)
class CnfFormula:
    variables: tuple
    clauses: tuple

    def __post_init__(self):
        for c in self.clauses:
            if len(c) == 0:
                raise ValidationError("empty clause; use the single literal False")
            for lit in c:
                if lit.atom is not None and not set(lit.atom) <= set(self.variables):
                    raise ValidationError(f"literal {lit} uses an undeclared variable")

    def __str__(self) -> str:
        if not self.clauses:
            return "true"
        return " & ".join("(" + " | ".join(str(l) for l in c) + ")" for c in self.clauses)

    def to_eqformula(self) -> EqFormula:
        conj = []
        for c in self.clauses:
            disj = []
            for lit in c:
                if lit.atom is None:
                    disj.append(Const(False))
                else:
                    e = Eq(*lit.atom)
                    disj.append(e if lit.positive else Not(e))
            conj.append(disj[0] if len(disj) == 1 else Or(tuple(disj)))
        if not conj:
            return EqFormula(self.variables, Const(True), True)
        return EqFormula(self.variables, conj[0] if len(conj) == 1 else And(tuple(conj)), True)


def make_literal(positive: bool, a: str, b: str, order: Mapping[str, int]):
    """Returns a Literal, or True/False when the literal is constant."""
    if a == b:
        return positive
    if order[a] > order[b]:
        a, b = b, a
    return Literal(positive, (a, b))


def make_clause(lits: Iterable) -> Optional[tuple]:
    """Normalize a clause; None means tautology."""
    out: list = []
    seen = set()
    for lit in lits:
        if lit is True:
            return None
        if lit is False or lit == FALSE_LIT:
            continue
        if Literal(not lit.positive, lit.atom) in seen:
            return None
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out) if out else (FALSE_LIT,)


def _nnf(node: Node, negate: bool):
    if isinstance(node, Eq):
        return ("lit", not negate, node.left, node.right)
    if isinstance(node, Const):
        return ("const", node.value != negate)
    if isinstance(node, Not):
        return _nnf(node.arg, not negate)
    if isinstance(node, Implies):
        return _nnf(Or((Not(node.left), node.right)), negate)
    kind = isinstance(node, And) != negate
    return ("and" if kind else "or", [_nnf(a, negate) for a in node.args])


def to_cnf(f: EqFormula) -> CnfFormula:
    order = _var_positions(f.variables)

    def conv(n) -> list:
        tag = n[0]
        if tag == "const":
            return [] if n[1] else [[False]]
        if tag == "lit":
            lit = make_literal(n[1], n[2], n[3], order)
            if lit is True:
                return []
            return [[lit]]
        parts = [conv(a) for a in n[1]]
        if tag == "and":
            return [c for p in parts for c in p]
        acc: list = [[]]
        for p in parts:
            acc = [a + b for a in acc for b in p]
        return acc

    clauses = []
    seen = set()
    for raw in conv(_nnf(f.body, False)):
        c = make_clause(raw)
        if c is not None and c not in seen:
            seen.add(c)
            clauses.append(c)
    return CnfFormula(tuple(f.variables), tuple(clauses))


class _Evaluator:
    """Caches per-atom truth vectors over all partitions of the variable set."""

    def __init__(self, variables: Sequence[str]):
        n = len(variables)
        if n == 0:
            self.arr = np.zeros((1, 0), dtype=np.int8)
        else:
            self.arr = partition_array(n)
        self.pos = _var_positions(variables)
        self.size = self.arr.shape[0]
        self._atoms: dict = {}

    def atom(self, a: str, b: str) -> np.ndarray:
        key = (a, b)
        vec = self._atoms.get(key)
        if vec is None:
            vec = self.arr[:, self.pos[a]] == self.arr[:, self.pos[b]]
            self._atoms[key] = vec
        return vec

    def literal(self, lit: Literal) -> np.ndarray:
        if lit.atom is None:
            return np.zeros(self.size, dtype=bool) if lit.positive else np.ones(self.size, dtype=bool)
        v = self.atom(*lit.atom)
        return v if lit.positive else ~v

    def clause(self, c) -> np.ndarray:
        out = np.zeros(self.size, dtype=bool)
        for lit in c:
            out |= self.literal(lit)
        return out

    def cnf(self, clauses) -> np.ndarray:
        out = np.ones(self.size, dtype=bool)
        for c in clauses:
            out &= self.clause(c)
        return out


def _evaluator(variables) -> _Evaluator:
    return _Evaluator(tuple(variables))


def _to_cnf_any(f) -> CnfFormula:
    if isinstance(f, CnfFormula):
        return f
    if isinstance(f, EqFormula):
        return to_cnf(f)
    if isinstance(f, ExtendedHornFormula):
        return f.to_cnf()
    raise TypeError(f"not a formula: {type(f).__name__}")


def truth_vector(f, variables: Optional[Sequence[str]] = None) -> np.ndarray:
    """Truth value of f on every partition of the variable set, in enumeration order."""
    variables = tuple(variables if variables is not None else f.variables)
    ev = _evaluator(variables)
    if isinstance(f, EqFormula):
        return _eval_node(f.body, ev.arr, ev.pos)
    return ev.cnf(_to_cnf_any(f).clauses)


def equivalent(f, g) -> bool:
    if set(f.variables) != set(g.variables):
        raise ValidationError("formulas must share the same variable set")
    variables = tuple(f.variables)
    return bool(np.array_equal(truth_vector(f, variables), truth_vector(g, variables)))


def _positions_for(f, arity: int) -> tuple:
    """Variable order used when reading a formula as a relation of the given arity."""
    names = list(f.variables)
    if not getattr(f, "declared", False):
        if all(re.fullmatch(r"x\d+", v) for v in names) and names:
            idx = [int(v[1:]) for v in names]
            if min(idx) >= 1 and max(idx) <= arity:
                return tuple(f"x{i}" for i in range(1, arity + 1))
    if len(names) != arity:
        raise ValidationError(f"formula has {len(names)} variables but arity {arity} was requested")
    return tuple(names)


def formula_to_relation(f, arity: Optional[int] = None) -> OrbitRelation:
    if arity is None:
        arity = len(f.variables)
    variables = _positions_for(f, arity)
    parts = enumerate_partitions(arity)
    vec = truth_vector(f, variables)
    return OrbitRelation(arity, frozenset(p for p, ok in zip(parts, vec) if ok))


def orbit_description(p: Partition, variables: Sequence[str]) -> Node:
    lits: list = []
    reps: list = []
    for block in p.blocks():
        first = block[0]
        reps.append(first)
        for other in block[1:]:
            lits.append(Eq(variables[first], variables[other]))
    for i, j in itertools.combinations(reps, 2):
        lits.append(Not(Eq(variables[i], variables[j])))
    if not lits:
        return Const(True)
    return lits[0] if len(lits) == 1 else And(tuple(lits))


def relation_to_formula(rel: OrbitRelation) -> EqFormula:
    variables = tuple(f"x{i}" for i in range(1, rel.arity + 1))
    disj = [orbit_description(p, variables) for p in rel.sorted_orbits()]
    if not disj:
        body: Node = Const(False)
    else:
        body = disj[0] if len(disj) == 1 else Or(tuple(disj))
    return EqFormula(variables, body, True)


def relation_cnf(rel: OrbitRelation) -> CnfFormula:
    """One clause per missing orbit, excluding exactly that orbit."""
    variables = tuple(f"x{i}" for i in range(1, rel.arity + 1))
    clauses = []
    for q in enumerate_partitions(rel.arity):
        if q in rel.orbits:
            continue
        lits = []
        for i, j in itertools.combinations(range(rel.arity), 2):
            lits.append(Literal(q[i] != q[j], (variables[i], variables[j])))
        clauses.append(tuple(lits) if lits else (FALSE_LIT,))
    return CnfFormula(variables, tuple(clauses))


def reduce(f: CnfFormula) -> CnfFormula:
    """Delete clauses, then literals, while equivalence holds; repeat to a fixpoint."""
    ev = _evaluator(f.variables)
    clauses = [list(c) for c in f.clauses]
    target = ev.cnf(f.clauses)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(clauses):
            rest = clauses[:i] + clauses[i + 1:]
            if np.array_equal(ev.cnf(rest), target):
                clauses = rest
                changed = True
            else:
                i += 1
        for ci in range(len(clauses)):
            j = 0
            while j < len(clauses[ci]):
                cand = clauses[ci][:j] + clauses[ci][j + 1:]
                if not cand:
                    cand = [FALSE_LIT]
                if cand == clauses[ci]:
                    j += 1
                    continue
                trial = clauses[:ci] + [cand] + clauses[ci + 1:]
                if np.array_equal(ev.cnf(trial), target):
                    clauses[ci] = cand
                    changed = True
                    if cand == [FALSE_LIT]:
                        break
                else:
                    j += 1
    return CnfFormula(f.variables, tuple(tuple(c) for c in clauses))


@lru_cache(maxsize=4096)
def reduced_definition(rel: OrbitRelation) -> CnfFormula:
    return reduce(relation_cnf(rel))


# ---------------------------------------------------------------------------
# classification


def _components(vertices: Iterable[str], edges: Iterable[tuple]) -> list:
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict = {}
    for v in parent:
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def clause_components(clause) -> list:
    atoms = [lit.atom for lit in clause if lit.atom is not None]
    verts = {v for a in atoms for v in a}
    return _components(sorted(verts), atoms)


def is_horn_clause(clause) -> bool:
    return sum(1 for lit in clause if lit.positive and lit.atom is not None) <= 1


def is_negative_clause(clause) -> bool:
    positives = [lit for lit in clause if lit.positive and lit.atom is not None]
    if not positives:
        return True
    return len(clause) == 1


def is_connected_horn_clause(clause) -> bool:
    if not is_horn_clause(clause):
        return False
    n = len(clause_components(clause))
    if any(lit.positive and lit.atom is not None for lit in clause):
        return n <= 1
    return n <= 2


@dataclass(frozen=True)
class FormulaClassFlags:
    horn: Optional[bool] = None
    negative: Optional[bool] = None
    connected_horn: Optional[bool] = None
    extended_horn: Optional[bool] = None
    connected_extended_horn: Optional[bool] = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


# ---------------------------------------------------------------------------
# extended Horn formulas

ExtAtom = Optional[tuple]  # (a, b) or None for False


@dataclass(frozen=True)
class ExtendedHornFormula:
    variables: tuple
    conjuncts: tuple  # of (premise tuple, conclusion tuple)

    def __post_init__(self):
        for prem, concl in self.conjuncts:
            if not prem or not concl:
                raise ValidationError("extended Horn clauses need nonempty premise and conclusion")

    def to_cnf(self) -> CnfFormula:
        order = _var_positions(self.variables)
        clauses = []
        for prem, concl in self.conjuncts:
            negs = []
            for a in prem:
                if a is None:
                    negs = None  # premise contains False: vacuous
                    break
                negs.append(make_literal(False, a[0], a[1], order))
            if negs is None:
                continue
            for c in concl:
                pos = FALSE_LIT if c is None else make_literal(True, c[0], c[1], order)
                clause = make_clause(negs + [pos])
                if clause is not None and clause not in clauses:
                    clauses.append(clause)
        return CnfFormula(self.variables, tuple(clauses))

    def __str__(self) -> str:
        def atoms(xs):
            return " & ".join("false" if a is None else f"{a[0]}={a[1]}" for a in xs)
        return " & ".join(f"({atoms(p)} -> {atoms(c)})" for p, c in self.conjuncts) or "true"


def ext_conjunct_graph(prem, concl) -> list:
    atoms = [a for a in list(prem) + list(concl) if a is not None]
    verts = {v for a in atoms for v in a}
    return _components(sorted(verts), atoms)


def is_connected_ext_conjunct(prem, concl) -> bool:
    if any(c is None for c in concl):
        return True
    if not any(c is not None for c in concl):
        return True
    return len(ext_conjunct_graph(prem, concl)) <= 1


def horn_to_extended(f: CnfFormula) -> ExtendedHornFormula:
    conj = []
    anchor = f.variables[0] if f.variables else None
    for c in f.clauses:
        if not is_horn_clause(c):
            raise ValidationError("formula is not Horn")
        prem = tuple(l.atom for l in c if not l.positive)
        pos = [l for l in c if l.positive]
        concl: tuple = (pos[0].atom,) if pos and pos[0].atom is not None else (None,)
        if not prem:
            if concl[0] is not None:
                prem = ((concl[0][0], concl[0][0]),)
            else:
                if anchor is None:
                    raise ValidationError("unsatisfiable formula without variables")
                prem = ((anchor, anchor),)
        conj.append((prem, concl))
    return ExtendedHornFormula(f.variables, tuple(conj))


def classify_formula(f) -> FormulaClassFlags:
    if isinstance(f, ExtendedHornFormula):
        return FormulaClassFlags(
            extended_horn=True,
            connected_extended_horn=all(is_connected_ext_conjunct(p, c) for p, c in f.conjuncts),
        )
    cnf = _to_cnf_any(f)
    horn = all(is_horn_clause(c) for c in cnf.clauses)
    flags = dict(
        horn=horn,
        negative=all(is_negative_clause(c) for c in cnf.clauses),
        connected_horn=horn and all(is_connected_horn_clause(c) for c in cnf.clauses),
        extended_horn=horn,
    )
    if horn:
        ext = horn_to_extended(cnf)
        flags["connected_extended_horn"] = all(is_connected_ext_conjunct(p, c) for p, c in ext.conjuncts)
    else:
        flags["connected_extended_horn"] = False
    return FormulaClassFlags(**flags)


def _ext_vector(ev: _Evaluator, conjuncts) -> np.ndarray:
    out = np.ones(ev.size, dtype=bool)
    for prem, concl in conjuncts:
        p = np.ones(ev.size, dtype=bool)
        for a in prem:
            p &= np.zeros(ev.size, dtype=bool) if a is None else ev.atom(*a)
        c = np.ones(ev.size, dtype=bool)
        for a in concl:
            c &= np.zeros(ev.size, dtype=bool) if a is None else ev.atom(*a)
        out &= ~p | c
    return out


def _atom(a: str, b: str, order) -> tuple:
    return (a, b) if order[a] < order[b] else (b, a)


def _closure_pairs(atoms, variables) -> set:
    """All unordered pairs forced equal by a set of equality atoms."""
    comps = _components(variables, [a for a in atoms if a is not None])
    order = _var_positions(variables)
    pairs = set()
    for comp in comps:
        comp = sorted(comp, key=order.__getitem__)
        pairs.update(itertools.combinations(comp, 2))
    return pairs


def expand_horn(f: ExtendedHornFormula) -> ExtendedHornFormula:
    """Expanded Horn form of an extended Horn formula.

    First adds, for every premise equivalence E on the variables, the strongest
    connected clause with premise E that the formula implies (E -> false for the
    inclusion-minimal inconsistent E). Then strengthens disconnected clauses
    without false by, in order, adding x=y to the premise, adding x=y to the
    conclusion, or replacing the conclusion by false, accepting a step only when
    equivalence is kept.
    """
    variables = tuple(f.variables)
    order = _var_positions(variables)
    n = len(variables)
    ev = _evaluator(variables)
    phi = _ext_vector(ev, f.conjuncts)
    arr = ev.arr
    conj = [tuple(c) for c in f.conjuncts]

    def present(c):
        return c in conj

    inconsistent: list = []
    for part in enumerate_partitions(n) if n else ():
        premise_pairs = [
            _atom(variables[i], variables[j], order)
            for i, j in itertools.combinations(range(n), 2)
            if part[i] == part[j]
        ]
        prem_vec = np.ones(ev.size, dtype=bool)
        for a in premise_pairs:
            prem_vec = prem_vec & ev.atom(*a)
        models = phi & prem_vec
        # premise atoms: a spanning star per nontrivial block
        prem_atoms = []
        for block in part.blocks():
            for other in block[1:]:
                prem_atoms.append((variables[block[0]], variables[other]))
        if not models.any():
            if any(_refines(q, part) for q in inconsistent):
                continue
            inconsistent.append(part)
            prem = tuple(prem_atoms) or ((variables[0], variables[0]),)
            cand = (prem, (None,))
            if not present(cand):
                conj.append(cand)
            continue
        sub = arr[models]
        implied = [
            _atom(variables[i], variables[j], order)
            for i, j in itertools.combinations(range(n), 2)
            if part[i] != part[j] and bool(np.all(sub[:, i] == sub[:, j]))
        ]
        if not implied:
            continue
        comps = _components(variables, prem_atoms + implied)
        prem_vars = {v for a in prem_atoms for v in a}
        if not prem_atoms:
            # trivial premise: one clause per component of implied atoms
            for comp in comps:
                cs = set(comp)
                concl = tuple(a for a in implied if a[0] in cs)
                if not concl:
                    continue
                anchor = concl[0][0]
                cand = (((anchor, anchor),), concl)
                if not present(cand):
                    conj.append(cand)
            continue
        home = [c for c in comps if prem_vars <= set(c)]
        if not home:
            continue
        cs = set(home[0])
        concl = tuple(a for a in implied if a[0] in cs)
        if concl:
            cand = (tuple(prem_atoms), concl)
            if not present(cand):
                conj.append(cand)

    # strengthening phase
    all_pairs = [_atom(a, b, order) for a, b in itertools.combinations(variables, 2)]
    changed = True
    while changed:
        changed = False
        for idx, (prem, concl) in enumerate(conj):
            if any(c is None for c in concl) or is_connected_ext_conjunct(prem, concl):
                continue
            step = _strengthen_once(ev, phi, conj, idx, variables, all_pairs)
            if step is not None:
                conj[idx] = step
                changed = True
                break
    out = []
    for c in conj:
        if c not in out:
            out.append(c)
    result = ExtendedHornFormula(variables, tuple(out))
    if not np.array_equal(_ext_vector(ev, result.conjuncts), phi):
        raise AssertionError("expand_horn lost equivalence")
    return result


def _refines(fine: Partition, coarse: Partition) -> bool:
    """True if every block of `fine` is inside a block of `coarse`."""
    return all(coarse[i] == coarse[j] for i, j in itertools.combinations(range(len(fine)), 2) if fine[i] == fine[j])


def _strengthen_once(ev, phi, conj, idx, variables, all_pairs):
    prem, concl = conj[idx]
    prem_closure = _closure_pairs(prem, variables)
    both_closure = _closure_pairs(list(prem) + list(concl), variables)

    def ok(new):
        trial = conj[:idx] + [new] + conj[idx + 1:]
        return np.array_equal(_ext_vector(ev, trial), phi)

    for a in all_pairs:
        if a in prem_closure:
            continue
        new = (tuple(prem) + (a,), concl)
        if ok(new):
            return new
    for a in all_pairs:
        if a in both_closure:
            continue
        new = (prem, tuple(concl) + (a,))
        if ok(new):
            return new
    new = (prem, (None,))
    if ok(new):
        return new
    return None


# ---------------------------------------------------------------------------
# primitive positive formulas


@dataclass(frozen=True)
class EqAtom:
    left: str
    right: str

    def variables(self):
        return (self.left, self.right)

    def __str__(self):
        return f"{self.left}={self.right}"


@dataclass(frozen=True)
class NeqAtom:
    left: str
    right: str

    def variables(self):
        return (self.left, self.right)

    def __str__(self):
        return f"{self.left}!={self.right}"


@dataclass(frozen=True)
class BaseAtom:
    relation: str
    args: tuple

    def variables(self):
        return self.args

    def __str__(self):
        return f"{self.relation}({','.join(self.args)})"


PpAtom = Union[EqAtom, NeqAtom, BaseAtom]


@dataclass(frozen=True)
class PpFormula:
    free: tuple
    bound: tuple
    conjuncts: tuple

    def __post_init__(self):
        names = set(self.free) | set(self.bound)
        if len(names) != len(self.free) + len(self.bound):
            raise ValidationError("free and bound variables must be distinct")
        for c in self.conjuncts:
            for v in c.variables():
                if v not in names:
                    raise ValidationError(f"variable {v!r} is neither free nor bound")

    def __str__(self) -> str:
        body = " & ".join(str(c) for c in self.conjuncts) or "true"
        head = f"vars {','.join(self.free)}; "
        if self.bound:
            return f"{head}exists {','.join(self.bound)}: {body}"
        return head + body


def parse_pp(text: str) -> PpFormula:
    p = Parser(text)
    f = p.pp_formula()
    p.expect_eof()
    return f


def _resolve(env: Mapping[str, OrbitRelation], name: str) -> OrbitRelation:
    if name in env:
        return env[name]
    from .eqcore import builtin_relation

    try:
        return builtin_relation(name)
    except ValidationError:
        raise ValidationError(f"unresolved relation name {name!r}") from None


def pp_evaluate(pp: PpFormula, env: Mapping[str, OrbitRelation]) -> OrbitRelation:
    """Relation defined by pp over the infinite domain, via search over partitions."""
    from .config import partition_cap

    order = list(pp.free) + list(pp.bound)
    total = len(order)
    if total > partition_cap():
        raise ResourceError(f"{total} variables exceed the partition cap {partition_cap()}")
    pos = {v: i for i, v in enumerate(order)}
    checks: list = [[] for _ in range(max(total, 1))]
    for c in pp.conjuncts:
        idx = [pos[v] for v in c.variables()]
        if isinstance(c, BaseAtom):
            rel = _resolve(env, c.relation)
            if rel.arity != len(c.args):
                raise ValidationError(f"{c.relation} has arity {rel.arity}, used with {len(c.args)} arguments")
            checks[max(idx)].append(("rel", tuple(idx), rel.orbits))
        elif isinstance(c, EqAtom):
            checks[max(idx)].append(("eq", idx[0], idx[1]))
        else:
            checks[max(idx)].append(("ne", idx[0], idx[1]))
    nfree = len(pp.free)
    labels = [0] * total
    found: set = set()

    def ok_at(i) -> bool:
        for chk in checks[i]:
            if chk[0] == "rel":
                if canonical_labels([labels[j] for j in chk[1]]) not in chk[2]:
                    return False
            elif chk[0] == "eq":
                if labels[chk[1]] != labels[chk[2]]:
                    return False
            elif labels[chk[1]] == labels[chk[2]]:
                return False
        return True

    def bound(i, top) -> bool:
        if i == total:
            return True
        for lab in range(top + 2):
            labels[i] = lab
            if ok_at(i) and bound(i + 1, max(top, lab)):
                return True
        return False

    def free(i, top):
        if i == nfree:
            if bound(i, top):
                found.add(tuple(labels[:nfree]))
            return
        for lab in range(top + 2):
            labels[i] = lab
            if ok_at(i):
                free(i + 1, max(top, lab))

    if total == 0:
        raise ValidationError("pp formula needs at least one free variable")
    if nfree == 0:
        raise ValidationError("pp formula needs at least one free variable")
    free(0, -1)
    return OrbitRelation(nfree, frozenset(Partition._trusted(p) for p in found))


@dataclass(frozen=True)
class SearchLimits:
    max_bound_vars: int = 2
    max_atoms: int = 2


def pp_search_bounded(
    target: OrbitRelation,
    base: Mapping[str, OrbitRelation],
    limits: SearchLimits = SearchLimits(),
) -> Optional[PpFormula]:
    """Best-effort search for a pp definition of target; returned formulas are verified."""
    from .config import partition_cap

    k = target.arity
    if k + limits.max_bound_vars > partition_cap():
        raise ResourceError("search variable count exceeds the partition cap")
    free = tuple(f"x{i}" for i in range(1, k + 1))
    use_neq = "neq" in base
    names = sorted(base)
    for nbound in range(limits.max_bound_vars + 1):
        bound = tuple(f"u{i}" for i in range(1, nbound + 1))
        allv = free + bound
        atoms: list = []
        for name in names:
            rel = base[name]
            if name == "neq":
                continue
            for args in itertools.product(allv, repeat=rel.arity):
                atoms.append(BaseAtom(name, args))
        for a, b in itertools.combinations(allv, 2):
            atoms.append(EqAtom(a, b))
            if use_neq:
                atoms.append(NeqAtom(a, b))
        for size in range(1, limits.max_atoms + 1):
            for combo in itertools.combinations_with_replacement(range(len(atoms)), size):
                conj = tuple(atoms[i] for i in combo)
                if nbound and not _canonical_bound_use(conj, bound):
                    continue
                pp = PpFormula(free, bound, conj)
                if pp_evaluate(pp, base) == target:
                    return pp
    return None


def _canonical_bound_use(conj, bound) -> bool:
    """Every bound variable occurs, and first occurrences follow the naming order."""
    seen = []
    for c in conj:
        for v in c.variables():
            if v in bound and v not in seen:
                seen.append(v)
    return tuple(seen) == bound


# ---------------------------------------------------------------------------
# pp definitions of connected Horn clauses from the relation Runder(2) and neq

RUNDER2 = "Runder2"


def clause_relation(clause, variables: Sequence[str]) -> OrbitRelation:
    cnf = CnfFormula(tuple(variables), (tuple(clause),))
    return formula_to_relation(EqFormula(tuple(variables), cnf.to_eqformula().body, True), len(variables))


def connected_horn_pp(clause, variables: Sequence[str]) -> PpFormula:
    """pp definition over {Runder2, neq} of a connected Horn clause.

    Each component is glued into a chain u_i with Runder2(u_{i-1}, c_i, u_i, u_i),
    which forces u_l = c_0 exactly when the whole component is constant.
    """
    if not is_connected_horn_clause(clause):
        raise ValidationError("clause is not connected Horn")
    variables = tuple(variables)
    order = _var_positions(variables)
    negs = [l.atom for l in clause if not l.positive and l.atom is not None]
    pos = [l.atom for l in clause if l.positive and l.atom is not None]
    counter = itertools.count(1)
    bound: list = []
    conj: list = []

    def chain(comp, tag) -> str:
        comp = sorted(comp, key=order.__getitem__)
        prev = comp[0]
        for c in comp[1:]:
            u = f"{tag}{next(counter)}"
            bound.append(u)
            conj.append(BaseAtom(RUNDER2, (prev, c, u, u)))
            prev = u
        return prev

    if pos:
        x0, y0 = pos[0]
        verts = sorted({v for a in negs for v in a} | {x0, y0}, key=order.__getitem__)
        comps = _components(verts, negs)
        cx = next(c for c in comps if x0 in c)
        cy = next(c for c in comps if y0 in c)
        if set(cx) == set(cy):
            return PpFormula(variables, (), ())
        cx = [x0] + [v for v in sorted(cx, key=order.__getitem__) if v != x0]
        cy = [y0] + [v for v in sorted(cy, key=order.__getitem__) if v != y0]
        ul = _chain_ordered(cx, "u", counter, bound, conj)
        vk = _chain_ordered(cy, "v", counter, bound, conj)
        conj.append(EqAtom(ul, vk))
    else:
        comps = clause_components(clause)
        if not comps:
            # the clause false
            z = variables[0]
            return PpFormula(variables, (), (NeqAtom(z, z),))
        if len(comps) == 1:
            comp = sorted(comps[0], key=order.__getitem__)
            ul = chain(comp, "u")
            conj.append(NeqAtom(comp[0], ul))
        else:
            c1 = sorted(comps[0], key=order.__getitem__)
            c2 = sorted(comps[1], key=order.__getitem__)
            ul = chain(c1, "u")
            vk = chain(c2, "v")
            z = "z0"
            bound.append(z)
            conj.append(BaseAtom(RUNDER2, (c1[-1], ul, z, z)))
            conj.append(BaseAtom(RUNDER2, (c2[-1], vk, z, z)))
            conj.append(NeqAtom(ul, vk))
    return PpFormula(variables, tuple(bound), tuple(conj))


def _chain_ordered(comp, tag, counter, bound, conj) -> str:
    prev = comp[0]
    for c in comp[1:]:
        u = f"{tag}{next(counter)}"
        bound.append(u)
        conj.append(BaseAtom(RUNDER2, (prev, c, u, u)))
        prev = u
    return prev
