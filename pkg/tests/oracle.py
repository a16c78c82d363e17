"""Brute-force reference for the saturation engine.

Completely independent implementation: no union-find, no class
representatives, no minimal-parameter shortcut. Facts are materialized
up-closed sets of (s, t, eps) triples plus a plain set of equal pairs, and
every rule is applied by exhaustive enumeration over all universe terms and
all grid parameter vectors until nothing changes.
"""
from __future__ import annotations

import itertools

from qeqlog.gmet import DistAtom, EqAtom
from qeqlog.terms import App, Var, apply_subst, enumerate_universe


class OracleDB:
    def __init__(self, sig, theory, spec, target, depth):
        self.grid = target.grid
        self.universe = enumerate_universe(sig, target.carrier, depth)
        self.index = {t: i for i, t in enumerate(self.universe)}
        self.sig = sig
        self.theory = theory
        self.spec = spec
        self.target = target
        n = len(self.universe)
        q = self.grid.q
        self.eq = {(i, i) for i in range(n)}
        self.dist = {(i, j, q) for i in range(n) for j in range(n)}
        self._saturate()

    def _add_dist(self, i, j, eps) -> bool:
        new = {(i, j, e) for e in range(eps, self.grid.q + 1)} - self.dist
        self.dist |= new
        return bool(new)

    def _add_eq(self, i, j) -> bool:
        if (i, j) in self.eq:
            return False
        self.eq.add((i, j))
        return True

    def _saturate(self):
        q = self.grid.q
        n = len(self.universe)
        for a in self.target.carrier:
            for b in self.target.carrier:
                self._add_dist(
                    self.index[Var(a)], self.index[Var(b)], self.target.d(a, b)
                )
        changed = True
        while changed:
            changed = False
            # symmetry / transitivity of equality
            for (i, j) in list(self.eq):
                changed |= self._add_eq(j, i)
            for (i, j) in list(self.eq):
                for (j2, k) in list(self.eq):
                    if j2 == j:
                        changed |= self._add_eq(i, k)
            # congruence
            for op, arity in self.sig.ops:
                if arity == 0:
                    continue
                apps = [
                    (i, t) for i, t in enumerate(self.universe)
                    if isinstance(t, App) and t.op == op
                ]
                for (i1, t1), (i2, t2) in itertools.product(apps, apps):
                    if all(
                        (self.index[a], self.index[b]) in self.eq
                        for a, b in zip(t1.args, t2.args)
                    ):
                        changed |= self._add_eq(i1, i2)
            # left/right congruence of equality with distances
            for (i, j) in list(self.eq):
                for (j2, k, e) in list(self.dist):
                    if j2 == j:
                        changed |= self._add_dist(i, k, e)
                for (k, j2, e) in list(self.dist):
                    if j2 == j:
                        changed |= self._add_dist(k, i, e)
            # Horn clauses, all term assignments, all parameter vectors
            for clause in self.spec.clauses:
                params = sorted(
                    {p for atom in (*clause.premises, clause.conclusion)
                     if isinstance(atom, DistAtom) for p in atom.eps.params()}
                )
                for values in itertools.product(range(n), repeat=len(clause.vars)):
                    env = dict(zip(clause.vars, values))
                    for pvec in itertools.product(range(q + 1), repeat=len(params)):
                        penv = dict(zip(params, pvec))
                        ok = True
                        for p in clause.premises:
                            if isinstance(p, EqAtom):
                                if (env[p.x], env[p.y]) not in self.eq:
                                    ok = False
                                    break
                            else:
                                e = min(q, p.eps.eval(penv, q))
                                if (env[p.x], env[p.y], e) not in self.dist:
                                    ok = False
                                    break
                        if not ok:
                            continue
                        c = clause.conclusion
                        if isinstance(c, EqAtom):
                            changed |= self._add_eq(env[c.x], env[c.y])
                        else:
                            e = min(q, c.eps.eval(penv, q))
                            changed |= self._add_dist(env[c.x], env[c.y], e)
            # substitution instances of every axiom
            for j in self.theory.judgments:
                ctx = j.context
                elems = ctx.carrier
                for targets in itertools.product(range(n), repeat=len(elems)):
                    sigma = {
                        e: self.universe[t] for e, t in zip(elems, targets)
                    }
                    if any(
                        (targets[a], targets[b], ctx.dist[a][b]) not in self.dist
                        for a in range(len(elems))
                        for b in range(len(elems))
                    ):
                        continue
                    lhs = apply_subst(sigma, j.lhs)
                    rhs = apply_subst(sigma, j.rhs)
                    if lhs not in self.index or rhs not in self.index:
                        continue
                    li, ri = self.index[lhs], self.index[rhs]
                    if j.eps is None:
                        changed |= self._add_eq(li, ri)
                    else:
                        changed |= self._add_dist(li, ri, j.eps)

    def equal(self, s, t) -> bool:
        return (self.index[s], self.index[t]) in self.eq

    def distance(self, s, t) -> int:
        i, j = self.index[s], self.index[t]
        return min(e for (a, b, e) in self.dist if (a, b) == (i, j))
