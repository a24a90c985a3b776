import itertools
import random

import pytest

from eqreducts.classify import (
    CspVerdict,
    classify_language,
    connected_horn_definition,
    csp_verdict,
    rchain_profile,
    syntactic_route,
)
from eqreducts.eqcore import OrbitRelation, builtin_relation, enumerate_partitions, parse_orbits, relation_from_predicate
from eqreducts.eqformula import classify_formula, formula_to_relation, parse_formula, relation_to_formula
from eqreducts.unilattice import OMEGA


def B(name):
    return builtin_relation(name)


def test_N_neq_is_exactly_H():
    pos = classify_language({"N": B("N"), "neq": B("neq")})
    assert pos.interval_case == "II" and pos.monoid.is_I()
    assert pos.flags.above_H and not pos.flags.above_B
    assert pos.landmark == "H"


def test_runder2_neq_is_S():
    pos = classify_language({"R2": B("Runder(2)"), "neq": B("neq")})
    f = pos.flags
    assert f.above_H and f.above_B and f.above_S and f.inside_S and not f.above_R
    assert pos.landmark == "S"


def test_rneq3_is_above_R():
    pos = classify_language([B("Rneq(3)")])
    assert pos.flags.above_R and not pos.flags.inside_S


def test_two_equal_among_three_is_level_K3():
    rel = relation_from_predicate(3, lambda p: len(set(p)) < 3)
    pos = classify_language([rel])
    assert pos.interval_case == "Thm8"
    assert pos.k == OMEGA
    assert pos.level == "K3"


def test_equality_is_everything():
    pos = classify_language([B("eq")])
    assert pos.interval_case == "Thm8" and pos.level == "O"


def test_odd3_has_constants():
    pos = classify_language([B("odd3")])
    assert pos.monoid.is_I_plus()
    assert pos.flags.above_S and not pos.flags.above_R and not pos.flags.inside_S


def test_singleton_case():
    # all equal, exactly one coordinate off, or all distinct: the only non-injective
    # unary polymorphisms collapse everything but one point, so k = 1
    rel = parse_orbits("orbits { [1,1,1,1], [1,1,1,2], [1,1,2,1], [1,2,1,1], [1,2,2,2], [1,2,3,4] }")
    pos = classify_language([rel])
    assert pos.monoid.name == "{(1,w)}"
    assert pos.interval_case == "Singleton" and pos.k == 1


def test_two_values_or_injective_is_K3_with_k2():
    rel = parse_orbits(
        "orbits { [1,1,1,1], [1,1,1,2], [1,1,2,1], [1,1,2,2], [1,2,1,1], [1,2,1,2], [1,2,2,1], [1,2,2,2], [1,2,3,4] }"
    )
    pos = classify_language([rel])
    assert pos.monoid.name == "{(w,w)}"
    assert pos.interval_case == "Thm8" and pos.k == 2 and pos.level == "K3"


@pytest.mark.parametrize("lang, expected", [
    ({"a": "Runder(2)", "n": "neq"}, {3: True, 4: True}),
    ({"a": "Runder(3)", "n": "neq"}, {3: False, 4: True}),
])
def test_rchain_profile(lang, expected):
    assert rchain_profile({k: B(v) for k, v in lang.items()}, 4) == expected


@pytest.mark.slow
def test_rchain_profile_runder4():
    assert rchain_profile({"a": B("Runder(4)"), "n": B("neq")}, 4) == {3: False, 4: False}


def test_csp_verdicts():
    assert csp_verdict([B("odd3")]) == CspVerdict(True, "binary_injection")
    nonhorn = formula_to_relation(parse_formula("x1=x2 | x2=x3"))
    assert csp_verdict([nonhorn, B("neq")]) == CspVerdict(False, None)
    assert csp_verdict([B("I"), B("neq")]) == CspVerdict(True, "binary_injection")
    two_equal = relation_from_predicate(3, lambda p: len(set(p)) < 3)
    assert csp_verdict([two_equal]) == CspVerdict(True, "constant")


def test_connected_horn_definition_examples():
    assert connected_horn_definition(B("N")) is None
    cert = connected_horn_definition(B("Runder(2)"))
    assert cert is not None and formula_to_relation(cert, 4) == B("Runder(2)")
    assert classify_formula(cert).connected_horn


def test_classification_invariant_under_formula_copies():
    rng = random.Random(4)
    parts = enumerate_partitions(4)
    for _ in range(15):
        rel = OrbitRelation(4, frozenset(p for p in parts if rng.random() < 0.6))
        copy = formula_to_relation(relation_to_formula(rel), 4)
        a, b = classify_language([rel, B("neq")]), classify_language([copy, B("neq")])
        assert a.flags == b.flags and a.monoid == b.monoid


def test_flag_chain_on_arity3_corpus():
    for r in range(0, 6):
        for sub in itertools.combinations(enumerate_partitions(3), r):
            rel = OrbitRelation(3, frozenset(sub))
            route = syntactic_route(rel)
            if route.connected_horn:
                assert route.bar_connected
            if route.bar_connected:
                assert route.horn
            if route.negative:
                assert route.horn
