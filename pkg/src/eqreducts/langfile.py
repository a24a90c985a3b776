"""Text formats: `.lang` files with named relations and operations.

    # comments start with '#'
    rel N    := builtin N;
    rel R2   := builtin Runder(2);
    rel T    := orbits { [1,1,2], [1,2,1], [1,2,3] };
    rel D    := formula x1 = x2 | x2 = x3;
    rel I2   := pp exists z: N(x, y, z, w) & z = w;
    op  r    := builtin richard;
    op  g/2  := rules { (=0, any) -> const 0; (any, any) -> fresh h key(1,2); };

Names must be unique within a file. Later definitions may refer to earlier
relations in pp bodies; anything else resolves to the builtins.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .eqcore import OrbitRelation, builtin_relation, parse_orbits
from .eqformula import Parser, formula_to_relation, pp_evaluate
from .errors import ParseError, ValidationError
from .patops import ANY, Const, Fresh, In, NotIn, PatternOperation, Rule, build_operation, builtin_operation


@dataclass
class LanguageFile:
    relations: dict = field(default_factory=dict)
    operations: dict = field(default_factory=dict)

    def relation(self, name: str) -> OrbitRelation:
        if name in self.relations:
            return self.relations[name]
        return builtin_relation(name)

    def operation(self, name: str) -> PatternOperation:
        if name in self.operations:
            return self.operations[name]
        return builtin_operation(name)


def _until(p: Parser, stop: str) -> str:
    """Raw text of the tokens up to (not including) the next `stop` token."""
    start = p.tok.offset
    while not p.at(stop):
        if p.tok.kind == "eof":
            p.error(f"expected {stop!r}")
        p.pos += 1
    return p.text[start:p.tok.offset].strip()


def _arg_pattern(p: Parser):
    if p.accept("any") or p.accept("_"):
        return ANY
    if p.accept("="):
        return In(p.integer())
    if p.accept("!="):
        return NotIn(p.integer())
    kind = p.ident()
    if kind not in ("in", "notin"):
        p.error("expected any, =v, !=v, in{...} or notin{...}")
    p.expect("{")
    vals = []
    if not p.at("}"):
        vals.append(p.integer())
        while p.accept(","):
            vals.append(p.integer())
    p.expect("}")
    return In(vals) if kind == "in" else NotIn(vals)


def _rule(p: Parser, arity: int) -> Rule:
    p.expect("(")
    pats = [_arg_pattern(p)]
    while p.accept(","):
        pats.append(_arg_pattern(p))
    p.expect(")")
    if len(pats) != arity:
        p.error(f"rule has {len(pats)} patterns, operation arity is {arity}")
    p.expect("->")
    if p.accept("const"):
        return Rule(tuple(pats), Const(p.integer()))
    p.expect("fresh")
    stream = p.ident()
    key = tuple(range(arity))
    if p.accept("key"):
        p.expect("(")
        ks = [p.integer()]
        while p.accept(","):
            ks.append(p.integer())
        p.expect(")")
        key = tuple(k - 1 for k in ks)
    return Rule(tuple(pats), Fresh(stream, key))


def parse_language(text: str) -> LanguageFile:
    lang = LanguageFile()
    p = Parser(text)
    while p.tok.kind != "eof":
        if p.accept("rel"):
            offset = p.tok.offset
            name = p.ident()
            if name in lang.relations or name in lang.operations:
                raise ParseError(f"duplicate name {name!r}", offset)
            p.expect(":=")
            lang.relations[name] = _relation_body(p, lang)
            p.expect(";")
        elif p.accept("op"):
            offset = p.tok.offset
            name = p.ident()
            if name in lang.relations or name in lang.operations:
                raise ParseError(f"duplicate name {name!r}", offset)
            arity = p.integer() if p.accept("/") else None
            p.expect(":=")
            lang.operations[name] = _operation_body(p, name, arity)
            p.expect(";")
        else:
            p.error("expected 'rel' or 'op'")
    return lang


def _relation_body(p: Parser, lang: LanguageFile) -> OrbitRelation:
    offset = p.tok.offset
    try:
        if p.accept("builtin"):
            return builtin_relation(_until(p, ";"))
        if p.at("orbits"):
            start = p.tok.offset
            while not p.at("}"):
                if p.tok.kind == "eof":
                    p.error("expected '}'")
                p.pos += 1
            end = p.tok.offset + 1
            p.pos += 1
            return parse_orbits(p.text[start:end])
        if p.accept("formula"):
            return formula_to_relation(p.formula())
        if p.accept("pp"):
            return pp_evaluate(p.pp_formula(), lang.relations)
    except ValidationError as exc:
        raise ParseError(str(exc), offset) from None
    p.error("expected builtin, orbits, formula or pp")


def _operation_body(p: Parser, name: str, arity: Optional[int]) -> PatternOperation:
    offset = p.tok.offset
    if p.accept("builtin"):
        try:
            return builtin_operation(_until(p, ";"))
        except ValidationError as exc:
            raise ParseError(str(exc), offset) from None
    p.expect("rules")
    if arity is None:
        p.error("rule lists need an explicit arity: op name/n := rules {...}")
    p.expect("{")
    rules = []
    while not p.accept("}"):
        rules.append(_rule(p, arity))
        if not p.accept(";") and not p.at("}"):
            p.error("expected ';' or '}'")
    try:
        return build_operation(rules, arity, name=name)
    except ValidationError as exc:
        raise ParseError(str(exc), offset) from None


def load_language(path) -> LanguageFile:
    return parse_language(Path(path).read_text())
