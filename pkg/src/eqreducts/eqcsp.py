"""CSP(Gamma) for equality languages: polynomial solvers for the tractable cases and a brute-force oracle.

Instance file format:

    instance over lang.lang {
        vars x, y, z;
        odd3(x, y, z);
        neq(x, y);
    }

Relation names resolve through the named language file (relative to the
instance file) and then through the builtins; `instance { ... }` uses builtins
only.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .classify import CspVerdict, csp_verdict
from .config import partition_cap
from .eqcore import OrbitRelation, builtin_relation, contains, enumerate_partitions
from .eqformula import Parser, reduced_definition
from .errors import ParseError, ResourceError, ValidationError
from .langfile import LanguageFile, load_language

BRUTE_MAX_VARS = 8


@dataclass(frozen=True)
class Instance:
    variables: tuple
    constraints: tuple  # (relation name, argument variables)
    relations: Mapping[str, OrbitRelation] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        names = set(self.variables)
        if len(names) != len(self.variables):
            raise ValidationError("duplicate variable")
        for rel, args in self.constraints:
            if rel not in self.relations:
                raise ValidationError(f"unresolved relation {rel!r}")
            if len(args) != self.relations[rel].arity:
                raise ValidationError(f"{rel} has arity {self.relations[rel].arity}, got {len(args)} arguments")
            for a in args:
                if a not in names:
                    raise ValidationError(f"undeclared variable {a!r}")

    def language(self) -> dict:
        used = {r for r, _ in self.constraints}
        return {name: rel for name, rel in self.relations.items() if name in used}

    def satisfied_by(self, assignment: Mapping[str, int]) -> bool:
        return all(
            contains(self.relations[rel], tuple(assignment[a] for a in args))
            for rel, args in self.constraints
        )


@dataclass(frozen=True)
class Solution:
    sat: bool
    assignment: Optional[dict] = None

    def __str__(self) -> str:
        if not self.sat:
            return "Unsat"
        return "Sat(" + ", ".join(f"{k}={v}" for k, v in self.assignment.items()) + ")"


UNSAT = Solution(False)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def _class_assignment(inst: Instance, uf: _UnionFind) -> dict:
    ids: dict = {}
    out = {}
    for v in inst.variables:
        out[v] = ids.setdefault(uf.find(v), len(ids))
    return out


def _horn_clauses(inst: Instance) -> list:
    """Ground the reduced Horn definition of every constraint over instance variables."""
    ground = []
    for rel, args in inst.constraints:
        f = reduced_definition(inst.relations[rel])
        env = dict(zip(f.variables, args))
        for clause in f.clauses:
            ground.append([(lit.positive, None if lit.atom is None else (env[lit.atom[0]], env[lit.atom[1]]))
                           for lit in clause])
    return ground


def solve(inst: Instance, certificate: Optional[CspVerdict] = None) -> Solution:
    lang = inst.language()
    actual = csp_verdict(lang) if lang else CspVerdict(True, "constant")
    if certificate is None:
        certificate = actual
    elif certificate != actual:
        raise ValidationError(f"certificate {certificate} does not match the language ({actual})")
    if not certificate.tractable:
        raise ValidationError("the language is NP-complete; use brute_solve")
    if certificate.reason == "constant":
        sol = {v: 0 for v in inst.variables}
        assert inst.satisfied_by(sol)
        return Solution(True, sol)
    uf = _UnionFind(inst.variables)
    clauses = _horn_clauses(inst)
    changed = True
    while changed:
        changed = False
        for clause in clauses:
            forced = all(uf.find(a) == uf.find(b) for pos, atom in clause if not pos for a, b in [atom])
            if not forced:
                continue
            head = [atom for pos, atom in clause if pos]
            if not head or head[0] is None:
                return UNSAT
            a, b = head[0]
            if uf.union(a, b):
                changed = True
    sol = _class_assignment(inst, uf)
    if not inst.satisfied_by(sol):
        return UNSAT
    return Solution(True, sol)


def brute_solve(inst: Instance) -> Solution:
    n = len(inst.variables)
    if n > min(BRUTE_MAX_VARS, partition_cap()):
        raise ResourceError(f"brute force is limited to {BRUTE_MAX_VARS} variables")
    if n == 0:
        return Solution(True, {}) if inst.satisfied_by({}) else UNSAT
    for p in enumerate_partitions(n):
        sol = dict(zip(inst.variables, p))
        if inst.satisfied_by(sol):
            return Solution(True, sol)
    return UNSAT


def random_instance(relations: Mapping[str, OrbitRelation], n_vars: int, n_constraints: int,
                    rng: random.Random) -> Instance:
    names = sorted(relations)
    variables = tuple(f"v{i}" for i in range(n_vars))
    cons = []
    for _ in range(n_constraints):
        name = rng.choice(names)
        args = tuple(rng.choice(variables) for _ in range(relations[name].arity))
        cons.append((name, args))
    return Instance(variables, tuple(cons), dict(relations))


_HEAD = re.compile(r"\s*instance\s*(?:over\s+(\S+)\s*)?\{", re.S)


def parse_instance(text: str, base_dir: Optional[Path] = None) -> Instance:
    m = _HEAD.match(text)
    if m is None:
        raise ParseError("expected 'instance [over FILE] {'", 0)
    lang = LanguageFile()
    if m.group(1) and m.group(1) != "builtins":
        path = Path(m.group(1))
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            lang = load_language(path)
        except OSError as exc:
            raise ParseError(f"cannot read language file {path}: {exc.strerror}", m.start(1)) from None
    body_start = m.end()
    p = Parser(text[body_start:])
    variables = []
    cons = []
    relations: dict = {}
    while not p.accept("}"):
        if p.accept("vars"):
            variables.extend(p.var_list())
            p.expect(";")
            continue
        offset = p.tok.offset
        name = p.ident()
        p.expect("(")
        args = [p.ident()]
        while p.accept(","):
            args.append(p.ident())
        p.expect(")")
        p.expect(";")
        try:
            relations.setdefault(name, lang.relation(name))
        except ValidationError as exc:
            raise ParseError(str(exc), body_start + offset) from None
        cons.append((name, tuple(args)))
    p.expect_eof()
    try:
        return Instance(tuple(variables), tuple(cons), relations)
    except ValidationError as exc:
        raise ParseError(str(exc), body_start) from None


def load_instance(path) -> Instance:
    path = Path(path)
    return parse_instance(path.read_text(), path.parent)
