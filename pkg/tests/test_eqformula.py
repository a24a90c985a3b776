import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from eqreducts.eqcore import OrbitRelation, builtin_relation, enumerate_partitions
from eqreducts.eqformula import (
    RUNDER2,
    And,
    CnfFormula,
    Const,
    Eq,
    FALSE_LIT,
    Implies,
    Literal,
    Not,
    Or,
    SearchLimits,
    classify_formula,
    connected_horn_pp,
    equivalent,
    expand_horn,
    formula_to_relation,
    horn_to_extended,
    is_connected_horn_clause,
    parse_formula,
    parse_pp,
    pp_evaluate,
    pp_search_bounded,
    reduce,
    reduced_definition,
    relation_cnf,
    relation_to_formula,
    to_cnf,
)
from eqreducts.errors import ParseError


def holds(node, env) -> bool:
    """Direct evaluation of an AST under a concrete assignment."""
    if isinstance(node, Eq):
        return env[node.left] == env[node.right]
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Not):
        return not holds(node.arg, env)
    if isinstance(node, And):
        return all(holds(a, env) for a in node.args)
    if isinstance(node, Or):
        return any(holds(a, env) for a in node.args)
    if isinstance(node, Implies):
        return not holds(node.left, env) or holds(node.right, env)
    raise TypeError(node)


def oracle_relation(f, variables) -> OrbitRelation:
    k = len(variables)
    return OrbitRelation(k, frozenset(p for p in enumerate_partitions(k) if holds(f.body, dict(zip(variables, p)))))


def cnf_holds(cnf: CnfFormula, env) -> bool:
    def lit(l):
        if l.atom is None:
            return not l.positive
        return (env[l.atom[0]] == env[l.atom[1]]) == l.positive
    return all(any(lit(l) for l in c) for c in cnf.clauses)


relations3 = st.sets(st.sampled_from(enumerate_partitions(3))).map(lambda s: OrbitRelation(3, frozenset(s)))
relations4 = st.sets(st.sampled_from(enumerate_partitions(4))).map(lambda s: OrbitRelation(4, frozenset(s)))


# parsing


def test_parse_disjunction():
    f = parse_formula("x1=x2 | x3!=x4")
    assert f.body == Or((Eq("x1", "x2"), Not(Eq("x3", "x4"))))
    assert f.variables == ("x1", "x2", "x3", "x4")


def test_parse_conjunction():
    f = parse_formula("x!=y & y!=z & x!=z")
    assert isinstance(f.body, And) and len(f.body.args) == 3
    assert all(isinstance(a, Not) for a in f.body.args)


def test_parse_error_offset():
    with pytest.raises(ParseError) as info:
        parse_formula("x1=")
    assert info.value.offset == 3


def test_declared_header():
    f = parse_formula("vars x1..x3; x1=x3")
    assert f.variables == ("x1", "x2", "x3")
    with pytest.raises(ParseError):
        parse_formula("vars x, y; x=z")


def test_comments_and_implication():
    f = parse_formula("x=y -> y=z  # transitivity fragment")
    assert isinstance(f.body, Implies)


# normal forms


def test_cnf_examples():
    assert to_cnf(parse_formula("x=y")).clauses == ((Literal(True, ("x", "y")),),)
    assert to_cnf(parse_formula("x=y | x!=y")).clauses == ()
    clauses = to_cnf(parse_formula("!(x=y & u=v)")).clauses
    assert [set(c) for c in clauses] == [{Literal(False, ("x", "y")), Literal(False, ("u", "v"))}]


@pytest.mark.parametrize("text", [
    "x=y -> (y=z | x=z)", "!(a=b & b=c) | c=d", "(x=y & y!=z) | (x!=y & y=z)", "true", "false", "x=y & x!=y",
])
def test_cnf_equivalent_to_source(text):
    f = parse_formula(text)
    cnf = to_cnf(f)
    for p in enumerate_partitions(len(f.variables)) if f.variables else [()]:
        env = dict(zip(f.variables, p))
        assert holds(f.body, env) == cnf_holds(cnf, env)


def test_equivalent_examples():
    taut = to_cnf(parse_formula("x=y | x!=y"))
    assert equivalent(taut, CnfFormula(("x", "y"), ()))
    assert equivalent(parse_formula("x=y"), parse_formula("y=x"))
    assert not equivalent(parse_formula("x=y"), parse_formula("x!=y"))


def test_reduce_examples():
    assert str(reduce(to_cnf(parse_formula("x=y | x=y | u!=v")))) in ("(x=y | u!=v)", "(u!=v | x=y)")
    assert str(reduce(to_cnf(parse_formula("x!=y & (x!=y | u!=v)")))) == "(x!=y)"


# relations


@pytest.mark.parametrize("text, arity, size", [("x1=x2", 2, 1), ("x1!=x2", 2, 1), ("x1=x2 | x2=x3", 3, 3)])
def test_formula_to_relation_small(text, arity, size):
    rel = formula_to_relation(parse_formula(text), arity)
    assert len(rel.orbits) == size
    assert rel == oracle_relation(parse_formula(text), [f"x{i}" for i in range(1, arity + 1)])


def test_delta3_relation():
    f = parse_formula("vars x1,y1,x2,y2,x3,y3; x1!=y1 | x2!=y2 | x3!=y3")
    rel = formula_to_relation(f)
    bad = [p for p in enumerate_partitions(6) if p[0] == p[1] and p[2] == p[3] and p[4] == p[5]]
    assert len(rel.orbits) == len(enumerate_partitions(6)) - len(bad)
    assert classify_formula(to_cnf(f)).horn and classify_formula(to_cnf(f)).negative


def test_horn_clause_with_l1_is_I():
    f = parse_formula("vars x1..x4; x1=x2 -> x3=x4")
    assert formula_to_relation(f) == builtin_relation("I")


def test_relation_to_formula_examples():
    assert formula_to_relation(relation_to_formula(OrbitRelation(2, frozenset({(0, 0)}))), 2).orbits == {(0, 0)}
    assert str(relation_to_formula(OrbitRelation(2, frozenset()))) == "false"
    odd = relation_to_formula(builtin_relation("odd3"))
    assert isinstance(odd.body, Or) and len(odd.body.args) == 2


@pytest.mark.parametrize("k", [1, 2, 3])
def test_round_trip_exhaustive(k):
    parts = enumerate_partitions(k)
    for r in range(len(parts) + 1):
        for subset in itertools.combinations(parts, r):
            rel = OrbitRelation(k, frozenset(subset))
            assert formula_to_relation(relation_to_formula(rel), k) == rel


@settings(max_examples=60, deadline=None)
@given(relations4)
def test_round_trip_and_reduce_arity4(rel):
    assert formula_to_relation(relation_to_formula(rel), 4) == rel
    red = reduced_definition(rel)
    assert formula_to_relation(red, 4) == rel
    assert reduce(red) == red


@settings(max_examples=40, deadline=None)
@given(relations4)
def test_reduced_form_is_minimal(rel):
    red = reduced_definition(rel)
    for i, clause in enumerate(red.clauses):
        dropped = CnfFormula(red.variables, red.clauses[:i] + red.clauses[i + 1:])
        assert not equivalent(dropped, red)
        if len(clause) > 1:
            for j in range(len(clause)):
                shorter = clause[:j] + clause[j + 1:]
                smaller = CnfFormula(red.variables, red.clauses[:i] + (shorter,) + red.clauses[i + 1:])
                assert not equivalent(smaller, red)


def test_reduce_keeps_non_horn():
    f = reduce(to_cnf(parse_formula("x1=x2 | x3=x4")))
    assert not classify_formula(f).horn
    assert reduce(f) == f


# classification


def test_classify_examples():
    assert classify_formula(to_cnf(parse_formula("x1=x2 | x3=x4"))).horn is False
    ru = reduced_definition(builtin_relation("Runder", 2))
    assert classify_formula(expand_horn(horn_to_extended(ru))).connected_extended_horn


@settings(max_examples=60, deadline=None)
@given(relations4)
def test_flag_monotonicity(rel):
    flags = classify_formula(reduced_definition(rel))
    if flags.negative:
        assert flags.horn
    if flags.connected_horn:
        assert flags.horn
        ext = horn_to_extended(reduced_definition(rel))
        assert classify_formula(ext).connected_extended_horn


def test_expand_adds_forced_consequence():
    f = to_cnf(parse_formula("x=y & y=z -> z=w"))
    ext = expand_horn(horn_to_extended(f))
    assert equivalent(ext.to_cnf(), f)
    assert any(concl == (("x", "w"),) or ("x", "w") in concl for _, concl in ext.conjuncts)


def test_expand_is_a_fixpoint():
    f = to_cnf(parse_formula("x1!=x2 | x1=x3"))
    ext = expand_horn(horn_to_extended(f))
    again = expand_horn(ext)
    assert set(again.conjuncts) == set(ext.conjuncts)


@settings(max_examples=30, deadline=None)
@given(relations4)
def test_expand_preserves_meaning(rel):
    red = reduced_definition(rel)
    if not classify_formula(red).horn or not red.clauses:
        return
    ext = expand_horn(horn_to_extended(red))
    assert formula_to_relation(ext.to_cnf(), 4) == rel


# pp formulas


def test_pp_I_from_N():
    pp = parse_pp("vars a,b,c,d; exists u,v,w: N(a,b,u,v) & N(a,b,v,w) & N(u,w,c,d)")
    assert pp_evaluate(pp, {}) == builtin_relation("I")


def test_pp_runder2_from_odd3():
    pp = parse_pp(
        "vars x1,x2,x3,x4; exists y1,y2,y3,y4,y5: odd3(x1,x2,y1) & odd3(x1,x2,y2) & odd3(y1,y2,y3)"
        " & odd3(y3,y4,y5) & odd3(x3,x4,y4) & odd3(x3,x4,y5)"
    )
    assert pp_evaluate(pp, {}) == builtin_relation("Runder", 2)


def test_pp_gluing_R3_to_R2():
    pp = parse_pp("vars x1,y1,x2,y2; exists u,v: u=v & R3(x1,y1,x2,y2,u,v)")
    assert pp_evaluate(pp, {"R3": builtin_relation("R", 3)}) == builtin_relation("R", 2)


def horn_clause_relation():
    f = parse_formula("vars u1,v1,u2,v2,u,v; u1=v1 & u2=v2 -> u=v")
    return formula_to_relation(f)


def test_ppdef_with_shifted_index_matches_clause():
    pp = parse_pp("vars u1,v1,u2,v2,u,v; exists w1,w2,w3: I(w1,w3,u,v) & I(u1,v1,w1,w2) & I(u2,v2,w2,w3)")
    assert pp_evaluate(pp, {}) == horn_clause_relation()


def test_ppdef_as_printed_is_weaker():
    # with I(w1, w_l, u, v) and l = 2 the chain is cut short, so the clause is not enforced
    pp = parse_pp("vars u1,v1,u2,v2,u,v; exists w1,w2,w3: I(w1,w2,u,v) & I(u1,v1,w1,w2) & I(u2,v2,w2,w3)")
    assert pp_evaluate(pp, {}) != horn_clause_relation()


def test_pp_monotone_in_env():
    pp = parse_pp("vars x,y; exists z: A(x,z) & A(z,y)")
    small = OrbitRelation(2, frozenset({(0, 1)}))
    big = OrbitRelation(2, frozenset({(0, 1), (0, 0)}))
    assert pp_evaluate(pp, {"A": small}).orbits <= pp_evaluate(pp, {"A": big}).orbits


def _connected_horn_clauses(k: int):
    vs = [f"x{i}" for i in range(1, k + 1)]
    pairs = list(itertools.combinations(vs, 2))
    for r in range(0, len(pairs) + 1):
        for negs in itertools.combinations(pairs, r):
            heads = [None] + [p for p in pairs if p not in negs]
            for head in heads:
                lits = [Literal(False, a) for a in negs]
                lits.append(FALSE_LIT if head is None else Literal(True, head))
                if head is None and negs:
                    lits = lits[:-1]
                clause = tuple(sorted(set(lits)))
                if is_connected_horn_clause(clause):
                    yield clause, vs


def test_connected_horn_pp_construction_exhaustive():
    env = {RUNDER2: builtin_relation("Runder", 2)}
    seen = 0
    for clause, vs in _connected_horn_clauses(4):
        pp = connected_horn_pp(clause, vs)
        expected = OrbitRelation(4, frozenset(p for p in enumerate_partitions(4) if cnf_holds(CnfFormula(tuple(vs), (clause,)), dict(zip(vs, p)))))
        assert pp_evaluate(pp, env) == expected, str(clause)
        seen += 1
    assert seen > 100


def test_pp_search_examples():
    found = pp_search_bounded(builtin_relation("neq"), {"N": builtin_relation("N")})
    assert found is not None
    assert pp_evaluate(found, {"N": builtin_relation("N")}) == builtin_relation("neq")
    found = pp_search_bounded(builtin_relation("R", 2), {"R3": builtin_relation("R", 3)})
    assert found is not None
    assert pp_evaluate(found, {"R3": builtin_relation("R", 3)}) == builtin_relation("R", 2)
    assert pp_search_bounded(builtin_relation("odd3"), {"R2": builtin_relation("Runder", 2)}, SearchLimits(0, 2)) is None


def test_relation_cnf_defines_relation():
    rng = random.Random(3)
    parts = enumerate_partitions(4)
    for _ in range(20):
        rel = OrbitRelation(4, frozenset(p for p in parts if rng.random() < 0.5))
        assert formula_to_relation(relation_cnf(rel), 4) == rel
