"""Locate a finite equality language in the lattice of local clones above the permutations.

Each position is decided by testing one canonical witness operation, and every
operational answer in the injective-monoid case is cross-checked against the
matching syntactic characterization.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from .config import DEFAULT_BUDGET
from .eqcore import OrbitRelation, enumerate_partitions
from .eqformula import (
    CnfFormula,
    FALSE_LIT,
    Literal,
    classify_formula,
    expand_horn,
    formula_to_relation,
    horn_to_extended,
    is_connected_horn_clause,
    reduced_definition,
)
from .errors import CrossValidationError
from .patops import (
    PatternOperation,
    bar,
    essential_finite,
    f_k,
    generic_injection,
    quasilinear_xor,
    richard,
)
from .preserve import preserves_exact, preserves_sampled
from .unilattice import (
    OMEGA,
    I_MONOID,
    MonoidDescriptor,
    monoid_meet,
    monoid_member,
    monoid_of_relation,
    TOP,
)

log = logging.getLogger(__name__)

Language = Union[Sequence[OrbitRelation], Mapping[str, OrbitRelation]]


def _named(gamma: Language) -> list:
    if isinstance(gamma, Mapping):
        return list(gamma.items())
    return [(f"R{i + 1}", r) for i, r in enumerate(gamma)]


@dataclass(frozen=True)
class IIFlags:
    above_H: bool
    above_B: bool
    above_S: bool
    above_R: bool
    inside_S: bool
    rchain_level: Optional[int] = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Evidence:
    claim: str
    holds: bool
    detail: dict

    def as_dict(self) -> dict:
        return {"claim": self.claim, "holds": self.holds, "detail": self.detail}


@dataclass(frozen=True)
class ClonePosition:
    monoid: MonoidDescriptor
    interval_case: str  # "II", "Thm8" or "Singleton"
    flags: Optional[IIFlags] = None
    k: Optional[Union[int, float]] = None
    level: Optional[str] = None
    landmark: Optional[str] = None
    evidence: tuple = ()

    def as_dict(self) -> dict:
        out = {
            "monoid": self.monoid.as_json(),
            "case": self.interval_case,
            "evidence": [e.as_dict() for e in self.evidence],
        }
        if self.flags is not None:
            out["flags"] = self.flags.as_dict()
        if self.k is not None:
            out["k"] = "w" if self.k == OMEGA else self.k
        if self.level is not None:
            out["level"] = self.level
        if self.landmark is not None:
            out["landmark"] = self.landmark
        return out


# ---------------------------------------------------------------------------
# syntactic certificates


def _block_atoms(block, variables) -> list:
    return [(variables[block[0]], variables[b]) for b in block[1:]]


def connected_horn_definition(rel: OrbitRelation) -> Optional[CnfFormula]:
    """A connected Horn definition of rel, or None when none exists.

    For every missing orbit q it looks for an implied clause of one of the
    shapes (block(u) all equal & block(v) all equal) -> u=v, or the negation
    of one or two blocks being constant. Such a clause exists for q exactly when
    some connected Horn clause implied by rel excludes q.
    """
    variables = tuple(f"x{i}" for i in range(1, rel.arity + 1))
    members = list(rel.orbits)
    clauses: list = []

    def implied(clause) -> bool:
        for p in members:
            if not any(_lit_holds(lit, p) for lit in clause):
                return False
        return True

    for q in enumerate_partitions(rel.arity):
        if q in rel.orbits:
            continue
        blocks = q.blocks()
        nontrivial = [b for b in blocks if len(b) > 1]
        cands = []
        for b1, b2 in itertools.combinations(blocks, 2):
            negs = [Literal(False, a) for a in _block_atoms(b1, variables) + _block_atoms(b2, variables)]
            cands.append(tuple(negs) + (Literal(True, (variables[b1[0]], variables[b2[0]])),))
        for b in nontrivial:
            cands.append(tuple(Literal(False, a) for a in _block_atoms(b, variables)))
        for b1, b2 in itertools.combinations(nontrivial, 2):
            cands.append(tuple(Literal(False, a) for a in _block_atoms(b1, variables) + _block_atoms(b2, variables)))
        if not blocks or (len(blocks) == 1 and not nontrivial):
            cands.append((FALSE_LIT,))
        for c in cands:
            if implied(c):
                if c not in clauses:
                    clauses.append(c)
                break
        else:
            return None
    cnf = CnfFormula(variables, tuple(clauses))
    assert all(is_connected_horn_clause(c) for c in cnf.clauses)
    if formula_to_relation(cnf, rel.arity) != rel:
        raise AssertionError("connected Horn certificate is not equivalent to the relation")
    return cnf


def _lit_holds(lit: Literal, p) -> bool:
    if lit.atom is None:
        return not lit.positive
    i = int(lit.atom[0][1:]) - 1
    j = int(lit.atom[1][1:]) - 1
    return (p[i] == p[j]) == lit.positive


@dataclass(frozen=True)
class SyntacticRoute:
    horn: bool
    negative: bool
    bar_connected: bool
    connected_horn: bool
    reduced: str
    expanded: Optional[str]
    connected_certificate: Optional[str]


def syntactic_route(rel: OrbitRelation) -> SyntacticRoute:
    red = reduced_definition(rel)
    flags = classify_formula(red)
    expanded = None
    bar_ok = False
    if flags.horn:
        ext = expand_horn(horn_to_extended(red)) if red.variables else None
        if ext is not None:
            expanded = str(ext)
            bar_ok = bool(classify_formula(ext).connected_extended_horn)
        else:
            bar_ok = True
    cert = connected_horn_definition(rel)
    return SyntacticRoute(
        horn=bool(flags.horn),
        negative=bool(flags.negative),
        bar_connected=bar_ok,
        connected_horn=cert is not None,
        reduced=str(red),
        expanded=expanded,
        connected_certificate=None if cert is None else str(cert),
    )


# ---------------------------------------------------------------------------
# operational checks


def _preserves_all(op: PatternOperation, named, budget: int):
    for name, rel in named:
        v = preserves_exact(op, rel, budget=budget)
        if not v.preserves:
            return False, {"relation": name, "witness": v.witness.as_dict()}
    return True, {}


def _per_relation(op: PatternOperation, rel: OrbitRelation, budget: int) -> bool:
    return preserves_exact(op, rel, budget=budget).preserves


def language_monoid(named) -> MonoidDescriptor:
    M = TOP
    for _, rel in named:
        M = monoid_meet(M, monoid_of_relation(rel))
    return M


def classify_language(gamma: Language, budget: int = DEFAULT_BUDGET, rchain_max: int = 0) -> ClonePosition:
    named = _named(gamma)
    M = language_monoid(named)
    evidence: list = [Evidence("monoid", True, {"monoid": M.as_json()})]
    if M.is_I() or M.is_I_plus():
        return _classify_II(named, M, budget, rchain_max, evidence)
    return _classify_thm8(named, M, budget, evidence)


def _classify_II(named, M, budget, rchain_max, evidence) -> ClonePosition:
    inj, b1, f3, rich = generic_injection(2), bar(1), f_k(3), richard()
    per: dict = {}
    for name, rel in named:
        route = syntactic_route(rel)
        ops = {
            "H": _per_relation(inj, rel, budget),
            "B": _per_relation(b1, rel, budget),
            "S": _per_relation(f3, rel, budget),
            "Rich": _per_relation(rich, rel, budget),
        }
        syn = {
            "H": route.horn,
            "B": route.horn and route.bar_connected,
            "S": route.connected_horn,
            "R": route.negative,
        }
        op_r = ops["Rich"] and ops["H"]
        checks = [("H", ops["H"], syn["H"]), ("B", ops["B"], syn["B"]), ("S", ops["S"], syn["S"]), ("R", op_r, syn["R"])]
        for label, o, s in checks:
            if o != s:
                raise CrossValidationError(
                    f"relation {name}: operational test for {label} says {o}, syntactic route says {s}"
                )
        per[name] = (ops, op_r, route)
    above_H = all(v[0]["H"] for v in per.values())
    above_B = all(v[0]["B"] for v in per.values())
    above_S = all(v[0]["S"] for v in per.values())
    above_R = all(v[1] for v in per.values())
    inside_S = M.is_I() and not above_R
    for label, value, op_name in [
        ("above_H", above_H, "binary injection"),
        ("above_B", above_B, "bar(1)"),
        ("above_S", above_S, "f3"),
        ("above_R", above_R, "richard and binary injection"),
    ]:
        detail = {"witness_operation": op_name, "relations": {}}
        for name, (ops, op_r, route) in per.items():
            entry = {}
            if label == "above_H":
                entry = {"preserved": ops["H"], "reduced_definition": route.reduced, "horn": route.horn}
            elif label == "above_B":
                entry = {"preserved": ops["B"], "expanded": route.expanded, "connected_extended_horn": route.bar_connected}
            elif label == "above_S":
                entry = {"preserved": ops["S"], "connected_horn_definition": route.connected_certificate}
            else:
                entry = {"preserved": op_r, "negative": route.negative}
            detail["relations"][name] = entry
        evidence.append(Evidence(label, value, detail))
    rchain = None
    if rchain_max >= 3:
        prof = rchain_profile(dict(named), rchain_max, budget=budget)
        evidence.append(Evidence("rchain_profile", True, {str(k): v for k, v in prof.items()}))
        rchain = 2
        for k in sorted(prof):
            if prof[k]:
                rchain = k
            else:
                break
    flags = IIFlags(above_H, above_B, above_S, above_R, inside_S, rchain)
    landmark = None
    if M.is_I():
        if not above_H:
            landmark = "cl(I)"
        elif not above_B:
            landmark = "H"
        elif above_S and not above_R:
            landmark = "S"
    return ClonePosition(M, "II", flags=flags, landmark=landmark, evidence=tuple(evidence))


def _max_arity(named) -> int:
    return max((rel.arity for _, rel in named), default=1)


def _monoid_k(M: MonoidDescriptor, limit: int):
    if M.top:
        return OMEGA
    k = 0
    for L in range(1, limit + 1):
        if monoid_member((OMEGA,) * L, M):
            k = L
        else:
            break
    return k


def _classify_thm8(named, M, budget, evidence) -> ClonePosition:
    a = _max_arity(named)
    longest = max((len(g) for g in M.antichain), default=1)
    k = _monoid_k(M, longest + 1)
    evidence.append(Evidence("k", True, {"k": "w" if k == OMEGA else k}))
    if k == 1:
        return ClonePosition(M, "Singleton", k=1, level="unary", evidence=tuple(evidence))
    q_ok, q_detail = _preserves_all(quasilinear_xor(), named, budget)
    evidence.append(Evidence("quasilinear", q_ok, q_detail))
    top_r = a if k == OMEGA else min(k, a)
    results = {}
    for r in range(2, max(top_r, 2) + 1):
        ok, detail = _preserves_all(essential_finite(r), named, budget)
        results[r] = ok
        evidence.append(Evidence(f"range<={r}", ok, detail))
    # chain consistency: a finite-range witness generates everything below it
    best = None
    for r in sorted(results):
        if results[r]:
            if best is not None and best != r - 1:
                raise CrossValidationError(f"essential_finite({r}) preserves but a smaller range witness does not")
            if best is None and r != 2:
                raise CrossValidationError(f"essential_finite({r}) preserves but essential_finite(2) does not")
            best = r
    if best is not None and not q_ok:
        raise CrossValidationError("a finite-range witness preserves but the quasilinear witness does not")
    if k != OMEGA and k + 1 <= a:
        over, _ = _preserves_all(essential_finite(k + 1), named, budget)
        if over:
            raise CrossValidationError(f"essential_finite({k + 1}) preserves although k = {k}")
    if best is None:
        level = "Q" if q_ok else "unary"
    elif k == OMEGA and best >= a:
        level = "O"
    else:
        level = f"K{best + 1}"
    return ClonePosition(M, "Thm8", k=k, level=level, evidence=tuple(evidence))


def rchain_profile(gamma: Language, max_k: int = 4, budget: int = DEFAULT_BUDGET,
                   samples: int = 10_000, seed: int = 0) -> dict:
    """k -> does f_k preserve every relation (exact for k <= 4, sampled above)."""
    named = _named(gamma)
    out = {}
    for k in range(3, max_k + 1):
        op = f_k(k)
        ok = True
        for _, rel in named:
            if k <= 4:
                v = preserves_exact(op, rel, budget=budget)
                good = v.preserves
            else:
                log.warning("f_%d checked by sampling only; the verdict is not conclusive", k)
                good = not preserves_sampled(op, rel, samples, seed).violates
            if not good:
                ok = False
                break
        out[k] = ok
    return out


@dataclass(frozen=True)
class CspVerdict:
    tractable: bool
    reason: Optional[str]  # "constant", "binary_injection" or None

    def __str__(self) -> str:
        return f"PolynomialTime({self.reason})" if self.tractable else "NPComplete"


def csp_verdict(gamma: Language, budget: int = DEFAULT_BUDGET) -> CspVerdict:
    named = _named(gamma)
    ok, _ = _preserves_all(generic_injection(2), named, budget)
    if ok:
        return CspVerdict(True, "binary_injection")
    if all(rel.has_all_equal() for _, rel in named):
        return CspVerdict(True, "constant")
    return CspVerdict(False, None)
