import itertools

import pytest
from hypothesis import given, strategies as st

from eqreducts.eqcore import (
    OrbitRelation,
    Partition,
    builtin_relation,
    contains,
    enumerate_partitions,
    parse_orbit_literal,
    parse_orbits,
    pattern_of,
)
from eqreducts.errors import ArityError, ParseError, ResourceError, ValidationError


def bell_via_stirling(n: int) -> int:
    # S(n, k) = k S(n-1, k) + S(n-1, k-1)
    S = [[0] * (n + 1) for _ in range(n + 1)]
    S[0][0] = 1
    for i in range(1, n + 1):
        for k in range(1, i + 1):
            S[i][k] = k * S[i - 1][k] + S[i - 1][k - 1]
    return sum(S[n])


def equivalence_relations(n: int) -> set:
    """Brute force: all ways to label n positions by values in range(n), up to renaming."""
    seen = set()
    for labels in itertools.product(range(n), repeat=n):
        classes = frozenset(frozenset(i for i in range(n) if labels[i] == v) for v in set(labels))
        seen.add(classes)
    return seen


@pytest.mark.parametrize("values, labels", [((5, 5, 7), (0, 0, 1)), ((3, 1, 3, 2), (0, 1, 0, 2)), ((9,), (0,))])
def test_pattern_of_examples(values, labels):
    assert pattern_of(values) == labels


def test_pattern_of_empty_is_an_arity_error():
    with pytest.raises(ArityError):
        pattern_of(())


@pytest.mark.parametrize("k", range(1, 9))
def test_enumerate_partitions_matches_bell_numbers(k):
    parts = enumerate_partitions(k)
    assert len(parts) == bell_via_stirling(k)
    assert list(parts) == sorted(parts)
    assert len(set(parts)) == len(parts)


@pytest.mark.parametrize("k", [1, 3, 4, 5])
def test_enumeration_against_equivalence_relation_count(k):
    assert len(enumerate_partitions(k)) == len(equivalence_relations(k))


def test_enumeration_is_restricted_growth():
    for p in enumerate_partitions(6):
        assert p[0] == 0
        for i in range(1, len(p)):
            assert p[i] <= 1 + max(p[:i])


def test_partition_cap(monkeypatch):
    with pytest.raises(ResourceError, match="10"):
        enumerate_partitions(11)
    monkeypatch.setenv("EQ_PARTITION_CAP", "4")
    with pytest.raises(ResourceError):
        enumerate_partitions(5)


def test_partition_rejects_non_canonical_labels():
    with pytest.raises(ValidationError):
        Partition((1, 0))
    with pytest.raises(ValidationError):
        Partition((0, 2))


@pytest.mark.parametrize(
    "name, values, expected",
    [("odd3", (4, 4, 4), True), ("odd3", (1, 1, 2), False), ("neq", (0, 0), False), ("neq", (0, 3), True)],
)
def test_contains_examples(name, values, expected):
    assert contains(builtin_relation(name), values) is expected


def test_contains_arity_mismatch():
    with pytest.raises(ArityError):
        contains(builtin_relation("neq"), (1, 2, 3))


def test_odd3_orbits():
    assert builtin_relation("odd3").orbits == {Partition((0, 0, 0)), Partition((0, 1, 2))}


def test_N_orbits():
    rel = builtin_relation("N")
    assert rel.orbits == {Partition((0, 0, 1, 1)), Partition((0, 1, 2, 3))}


def test_I_is_the_implication():
    rel = builtin_relation("I")
    for p in enumerate_partitions(4):
        assert (p in rel.orbits) == (p[0] != p[1] or p[2] == p[3])


def test_runder2_misses_exactly_one_shape():
    rel = builtin_relation("Runder", 2)
    missing = set(enumerate_partitions(4)) - rel.orbits
    assert missing == {Partition((0, 0, 1, 1))}
    assert len(rel.orbits) == 14


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_family_inclusions(n):
    R, Ru, Rn = (builtin_relation(x, n) for x in ("R", "Runder", "Rneq"))
    assert R.orbits <= Ru.orbits
    assert Rn.orbits <= R.orbits


@pytest.mark.parametrize("bad", [("R", 1), ("R", 6), ("foo",), ("neq", 2)])
def test_builtin_errors(bad):
    with pytest.raises(ValidationError):
        builtin_relation(*bad)


def test_builtin_accepts_call_syntax():
    assert builtin_relation("Runder(3)") == builtin_relation("Runder", 3)
    assert builtin_relation("ODD3") == builtin_relation("odd3")


def test_orbit_literals():
    assert parse_orbit_literal("[1,1,2]") == (0, 0, 1)
    rel = parse_orbits("orbits { [1,1,1], [1,2,3] }")
    assert rel == builtin_relation("odd3")
    assert parse_orbits("orbits/2 {}") == OrbitRelation(2, frozenset())
    assert rel.literal() == "orbits { [1,1,1], [1,2,3] }"
    with pytest.raises(ParseError):
        parse_orbits("orbits { [1,1,2] junk }")


def test_relation_arity_validation():
    with pytest.raises(ArityError):
        OrbitRelation(2, frozenset({Partition((0, 0, 0))}))


values = st.lists(st.integers(0, 6), min_size=1, max_size=7)


@given(values, st.permutations(list(range(50))))
def test_pattern_invariant_under_injective_renaming(vals, perm):
    renamed = [perm[v] * 7 + 1 for v in vals]
    assert pattern_of(vals) == pattern_of(renamed)


@given(st.lists(st.integers(0, 5), min_size=3, max_size=3), st.permutations(list(range(10))))
def test_contains_depends_only_on_pattern(vals, perm):
    for name in ("odd3",):
        rel = builtin_relation(name)
        assert contains(rel, vals) == contains(rel, [perm[v] for v in vals])
