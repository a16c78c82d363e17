"""The quotiented-term monad induced by the free construction, truncated.

Object action, unit and flattening multiplication all operate on the carrier
*names* of the quotient spaces (one name per class, the printed canonical
representative). Flattening can leave the depth bound, so the multiplication
is a partial map with an ``overflow`` value; every law check reports how many
instances were skipped because an intermediate overflowed.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Mapping

from .errors import (
    EMLawViolation,
    NotAModel,
    NotNonexpansive,
    PreconditionViolation,
    QeqlogError,
)
from .free import FreeAlgebra, OVERFLOW, build_free
from .gmet import FuzzySpace, GMetSpec, is_nonexpansive
from .qalg import QuantAlgebra, Theory, eval_term, is_homomorphism, is_model
from .terms import App, Signature, Term, Var, term_to_str


def rename_term(t: Term, f: Mapping[str, str]) -> Term:
    if isinstance(t, Var):
        return Var(f[t.name])
    return App(t.op, tuple(rename_term(a, f) for a in t.args))


class MonadInstance:
    """Free-construction cache for one theory, spec and depth."""

    def __init__(self, sig: Signature, theory: Theory, spec: GMetSpec,
                 depth: int, budget: int | None = None):
        self.sig = sig
        self.theory = theory
        self.spec = spec
        self.depth = depth
        self.budget = budget
        self._cache: dict[FuzzySpace, FreeAlgebra] = {}
        self._lock = threading.Lock()

    def free(self, sp: FuzzySpace) -> FreeAlgebra:
        # append-only cache; the lock keeps concurrent builders from racing
        with self._lock:
            if sp not in self._cache:
                self._cache[sp] = build_free(
                    self.sig, self.theory, self.spec, sp, self.depth, self.budget
                )
            return self._cache[sp]


def m_object(mi: MonadInstance, sp: FuzzySpace) -> FuzzySpace:
    """Quotient space of the free algebra on sp."""
    return mi.free(sp).space


def m_map(mi: MonadInstance, f: Mapping[str, str], src: FuzzySpace,
          dst: FuzzySpace) -> dict[str, str]:
    """Homomorphic extension of a nonexpansive map, on class names.

    Renaming variables preserves term depth, so with equal depth bounds on
    both sides this never overflows.
    """
    if not is_nonexpansive(f, src, dst):
        raise NotNonexpansive("m_map requires a nonexpansive map")
    fa_src, fa_dst = mi.free(src), mi.free(dst)
    out = {
        fa_src.class_name(c): fa_dst.class_name(fa_dst.class_of(rename_term(rep, f)))
        for c, rep in enumerate(fa_src.classes)
    }
    for t in fa_src.base.universe:
        name = fa_src.class_name(fa_src.class_of(t))
        if fa_dst.class_name(fa_dst.class_of(rename_term(t, f))) != out[name]:
            raise QeqlogError(
                f"mapped classes disagree on members of {name}"
            )
    return out


def m_unit(mi: MonadInstance, sp: FuzzySpace) -> dict[str, str]:
    """Carrier element to the name of its variable's class."""
    fa = mi.free(sp)
    return {a: fa.class_name(c) for a, c in fa.unit.items()}


def m_mult(mi: MonadInstance, sp: FuzzySpace):
    """Flattening: map each class over class-names to a class over sp.

    Substitutes the canonical representative for each named inner class;
    entries whose flattened term exceeds the depth bound map to OVERFLOW.
    """
    fa = mi.free(sp)
    outer = mi.free(fa.space)
    rep_of_name = {fa.class_name(c): rep for c, rep in enumerate(fa.classes)}
    out: dict[str, object] = {}
    for c, rep in enumerate(outer.classes):
        flattened = _flatten(rep, rep_of_name)
        if fa.base.term_in_universe(flattened):
            out[outer.class_name(c)] = fa.class_name(fa.class_of(flattened))
        else:
            out[outer.class_name(c)] = OVERFLOW
    return out


def _flatten(t: Term, rep_of_name: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return rep_of_name[t.name]
    return App(t.op, tuple(_flatten(a, rep_of_name) for a in t.args))


@dataclass(frozen=True)
class LawReport:
    law: str
    checked: int
    skipped_overflow: int
    failed: int
    first_failure: str | None = None

    @property
    def coverage(self) -> float:
        total = self.checked + self.skipped_overflow
        return 1.0 if total == 0 else self.checked / total


def check_monad_laws(mi: MonadInstance, sp: FuzzySpace) -> list[LawReport]:
    """Unit laws and associativity, pointwise on classes, with overflow skips."""
    sp1 = m_object(mi, sp)
    unit = m_unit(mi, sp)
    mult = m_mult(mi, sp)
    fa = mi.free(sp)
    outer = mi.free(sp1)
    reports = []

    # mult . unit_M = id  (unit of M(sp), then flatten)
    unit_m = m_unit(mi, sp1)
    checked = failed = 0
    first = None
    for name in sp1.carrier:
        res = mult[unit_m[name]]
        checked += 1
        if res != name:
            failed += 1
            first = first or f"mult(unit_M({name})) = {res}"
    reports.append(LawReport("mult.unit_M=id", checked, 0, failed, first))

    # mult . M(unit) = id  (rename generators to their unit classes, flatten)
    checked = failed = 0
    first = None
    for c, rep in enumerate(fa.classes):
        renamed = rename_term(rep, unit)
        res = mult[outer.class_name(outer.class_of(renamed))]
        checked += 1
        if res != fa.class_name(c):
            failed += 1
            first = first or f"mult(M(unit)({fa.class_name(c)})) = {res}"
    reports.append(LawReport("mult.M(unit)=id", checked, 0, failed, first))

    # mult . M(mult) = mult . mult_M  on classes of M^3
    sp2 = m_object(mi, sp1)
    f3 = mi.free(sp2)
    mult1 = m_mult(mi, sp1)
    checked = skipped = failed = 0
    first = None
    for c3, rep3 in enumerate(f3.classes):
        name3 = f3.class_name(c3)
        # path A: flatten the outer level first
        mid_a = mult1[name3]
        res_a = OVERFLOW if mid_a is OVERFLOW else mult[mid_a]
        # path B: push the inner flattening through, then flatten
        if any(mult[v.name] is OVERFLOW for v in _term_vars(rep3)):
            res_b = OVERFLOW
        else:
            renamed = rename_term(rep3, {k: v for k, v in mult.items() if v is not OVERFLOW})
            res_b = mult[outer.class_name(outer.class_of(renamed))]
        if res_a is OVERFLOW or res_b is OVERFLOW:
            skipped += 1
            continue
        checked += 1
        if res_a != res_b:
            failed += 1
            first = first or f"{name3}: {res_a} != {res_b}"
    reports.append(LawReport("mult.M(mult)=mult.mult_M", checked, skipped, failed, first))
    return reports


def _term_vars(t: Term):
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from _term_vars(a)


@dataclass(frozen=True)
class EMCandidate:
    """A space with a candidate structure map from its quotient classes."""

    space: FuzzySpace
    h: Mapping[str, str]


def em_from_model(mi: MonadInstance, alg: QuantAlgebra) -> EMCandidate:
    """Structure map of a model: evaluate each class representative in it."""
    if not is_model(alg, mi.spec, mi.theory, mi.budget):
        raise NotAModel(f"algebra does not model {mi.theory.name}")
    fa = mi.free(alg.space)
    identity = {a: a for a in alg.space.carrier}
    h = {
        fa.class_name(c): eval_term(alg, identity, rep)
        for c, rep in enumerate(fa.classes)
    }
    for t in fa.base.universe:
        if eval_term(alg, identity, t) != h[fa.class_name(fa.class_of(t))]:
            raise QeqlogError(
                f"structure map disagrees on class members: {term_to_str(t)}"
            )
    for x in fa.space.carrier:
        for y in fa.space.carrier:
            if alg.space.d(h[x], h[y]) > fa.space.d(x, y):
                raise NotNonexpansive("structure map is not nonexpansive")
    cand = EMCandidate(alg.space, h)
    reports = check_em_laws(mi, cand)
    if any(r.failed for r in reports):
        raise EMLawViolation(f"structure map fails {reports}")
    return cand


def check_em_laws(mi: MonadInstance, cand: EMCandidate) -> list[LawReport]:
    """Unit law h(unit(a)) = a and multiplication law h.M(h) = h.mult."""
    fa = mi.free(cand.space)
    unit = m_unit(mi, cand.space)
    mult = m_mult(mi, cand.space)
    outer = mi.free(fa.space)
    h = cand.h
    reports = []

    checked = failed = 0
    first = None
    for a in cand.space.carrier:
        checked += 1
        if h[unit[a]] != a:
            failed += 1
            first = first or f"h(unit({a})) = {h[unit[a]]}"
    reports.append(LawReport("h.unit=id", checked, 0, failed, first))

    checked = skipped = failed = 0
    first = None
    for c2, rep2 in enumerate(outer.classes):
        name2 = outer.class_name(c2)
        lhs = h[fa.class_name(fa.class_of(rename_term(rep2, h)))]
        mid = mult[name2]
        if mid is OVERFLOW:
            skipped += 1
            continue
        rhs = h[mid]
        checked += 1
        if lhs != rhs:
            failed += 1
            first = first or f"{name2}: {lhs} != {rhs}"
    reports.append(LawReport("h.M(h)=h.mult", checked, skipped, failed, first))
    return reports


def model_from_em(mi: MonadInstance, cand: EMCandidate) -> tuple[QuantAlgebra, list[LawReport]]:
    """Read operation tables off a lawful structure map.

    op(a1..an) is the image under h of the class of op applied to the
    generator variables; needs depth >= 2 so those applications exist.
    """
    reports = check_em_laws(mi, cand)
    if any(r.failed for r in reports):
        raise EMLawViolation(
            "; ".join(f"{r.law}: {r.first_failure}" for r in reports if r.failed)
        )
    if mi.depth < 2 and any(ar > 0 for _, ar in mi.sig.ops):
        raise QeqlogError("reading op tables off a structure map needs depth >= 2")
    fa = mi.free(cand.space)
    ops: dict[str, dict[tuple[str, ...], str]] = {}
    for op, arity in mi.sig.ops:
        table = {}
        for args in itertools.product(cand.space.carrier, repeat=arity):
            t = App(op, tuple(Var(a) for a in args))
            table[args] = cand.h[fa.class_name(fa.class_of(t))]
        ops[op] = table
    return QuantAlgebra(cand.space, mi.sig, ops), reports


def check_hom_image_model(
    alg_a: QuantAlgebra,
    alg_b: QuantAlgebra,
    f: Mapping[str, str],
    g: Mapping[str, str],
    theory: Theory,
    spec: GMetSpec,
    budget: int | None = None,
) -> bool:
    """Homomorphic image along a map with a nonexpansive right inverse models
    everything the domain models; checks the hypotheses, then the conclusion."""
    if not is_homomorphism(f, alg_a, alg_b):
        raise PreconditionViolation("f is not a homomorphism")
    if not is_nonexpansive(g, alg_b.space, alg_a.space):
        raise PreconditionViolation("g is not nonexpansive")
    if any(f[g[b]] != b for b in alg_b.space.carrier):
        raise PreconditionViolation("f∘g is not the identity")
    if not is_model(alg_a, spec, theory, budget):
        raise PreconditionViolation("the domain algebra is not a model")
    return is_model(alg_b, spec, theory, budget)
