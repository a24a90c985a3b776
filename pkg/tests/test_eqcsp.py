import random
from pathlib import Path

import pytest

from eqreducts.classify import CspVerdict
from eqreducts.eqcore import builtin_relation, relation_from_predicate
from eqreducts.eqcsp import (
    Instance,
    brute_solve,
    load_instance,
    parse_instance,
    random_instance,
    solve,
)
from eqreducts.errors import ParseError, ResourceError, ValidationError

DATA = Path(__file__).resolve().parent.parent / "data"

TRACTABLE = {
    "horn_N": {"N": builtin_relation("N"), "neq": builtin_relation("neq")},
    "odd": {"odd3": builtin_relation("odd3"), "neq": builtin_relation("neq")},
    "runder": {"R2": builtin_relation("Runder(2)"), "neq": builtin_relation("neq"), "eq": builtin_relation("eq")},
    "constant": {"T": relation_from_predicate(3, lambda p: len(set(p)) < 3), "eq": builtin_relation("eq")},
}


@pytest.mark.parametrize("name", sorted(TRACTABLE))
def test_solver_agrees_with_brute_force(name):
    rels = TRACTABLE[name]
    rng = random.Random(hash(name) % 1000)
    for _ in range(150):
        inst = random_instance(rels, rng.randint(1, 6), rng.randint(1, 8), rng)
        fast, slow = solve(inst), brute_solve(inst)
        assert fast.sat == slow.sat
        if fast.sat:
            assert inst.satisfied_by(fast.assignment)


def test_adding_constraints_never_helps():
    rels = TRACTABLE["horn_N"]
    rng = random.Random(9)
    for _ in range(100):
        inst = random_instance(rels, 5, 4, rng)
        extra = random_instance(rels, 5, 2, rng)
        bigger = Instance(inst.variables, inst.constraints + extra.constraints, rels)
        if solve(bigger).sat:
            assert solve(inst).sat


def test_triangle_of_inequalities():
    inst = load_instance(DATA / "triangle.csp")
    sol = solve(inst)
    assert sol.sat and len(set(sol.assignment.values())) == 3


def test_instance_over_language_file():
    inst = load_instance(DATA / "horn.csp")
    assert solve(inst).sat == brute_solve(inst).sat


def test_unsat_example():
    text = "instance { vars x, y; eq(x, y); neq(x, y); }"
    inst = parse_instance(text)
    assert not solve(inst).sat and not brute_solve(inst).sat
    assert str(solve(inst)) == "Unsat"


def test_np_complete_language_is_refused():
    text = "instance { vars x, y, z; neq(x, y); }"
    inst = parse_instance(text)
    nonhorn = relation_from_predicate(3, lambda p: p[0] == p[1] or p[1] == p[2])
    bad = Instance(("a", "b", "c"), (("D", ("a", "b", "c")), ("neq", ("a", "b"))), {"D": nonhorn, "neq": builtin_relation("neq")})
    with pytest.raises(ValidationError):
        solve(bad)
    assert brute_solve(bad).sat
    with pytest.raises(ValidationError):
        solve(inst, CspVerdict(True, "constant"))


def test_brute_limit():
    variables = tuple(f"v{i}" for i in range(9))
    inst = Instance(variables, (), {})
    with pytest.raises(ResourceError):
        brute_solve(inst)


@pytest.mark.parametrize("text", [
    "instance { vars x; nope(x); }",
    "instance { vars x; neq(x, y); }",
    "instance { vars x, y; neq(x); }",
    "vars x;",
    "instance { vars x; neq(x, x) }",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_instance(text)
