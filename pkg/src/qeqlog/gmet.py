"""Finite fuzzy-relation spaces and Horn-definable classes of them.

All distances live on a finite grid {0, 1/q, ..., 1} and are stored as integer
numerators over q, so every comparison, sum and infimum is exact. A class of
spaces (FREL, PMET, MET, or user-defined) is a finite list of Horn clauses over
atoms ``x = y`` and ``d(x, y) <= expr``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import BudgetExceeded, GridMismatch, SpecViolation, UnsupportedPreset


@dataclass(frozen=True)
class EpsGrid:
    """The value set {0, 1/q, ..., 1}; members are handled as numerators over q."""

    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("grid denominator must be >= 1")

    def value(self, x) -> int:
        """Parse a math value (Fraction, exact string, int, decimal float) to a numerator."""
        if isinstance(x, Fraction):
            f = x
        elif isinstance(x, bool):
            raise GridMismatch(f"not a distance: {x!r}")
        elif isinstance(x, int):
            f = Fraction(x)
        elif isinstance(x, float):
            f = Fraction(str(x))
        elif isinstance(x, str):
            f = Fraction(x)
        else:
            raise GridMismatch(f"cannot read grid value from {x!r}")
        scaled = f * self.q
        if scaled.denominator != 1 or not (0 <= scaled <= self.q):
            raise GridMismatch(f"{f} is not on the grid with denominator {self.q}")
        return int(scaled)

    def fraction(self, num: int) -> Fraction:
        return Fraction(num, self.q)

    def format(self, num: int) -> str:
        return str(Fraction(num, self.q))

    def values(self) -> range:
        return range(self.q + 1)


@dataclass(frozen=True)
class FuzzySpace:
    """Finite carrier with a total grid-valued distance table."""

    grid: EpsGrid
    carrier: tuple[str, ...]
    dist: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(set(self.carrier)) != len(self.carrier):
            raise ValueError("duplicate carrier element")
        if any(not name for name in self.carrier):
            raise ValueError("empty carrier element name")
        n = len(self.carrier)
        if len(self.dist) != n or any(len(row) != n for row in self.dist):
            raise ValueError("distance table shape does not match carrier")
        for row in self.dist:
            for v in row:
                if not isinstance(v, int) or not (0 <= v <= self.grid.q):
                    raise GridMismatch(f"distance {v!r} off the grid (q={self.grid.q})")
        object.__setattr__(self, "_idx", {a: i for i, a in enumerate(self.carrier)})

    @classmethod
    def of(cls, grid: EpsGrid, carrier: Iterable[str], dist_rows) -> "FuzzySpace":
        """Build from any grid-parseable entries (fractions, strings, floats)."""
        carrier = tuple(carrier)
        rows = tuple(tuple(grid.value(v) for v in row) for row in dist_rows)
        return cls(grid, carrier, rows)

    @classmethod
    def from_json(cls, obj, grid: EpsGrid) -> "FuzzySpace":
        return cls.of(grid, [str(a) for a in obj["carrier"]], obj["dist"])

    def to_json(self) -> dict:
        return {
            "carrier": list(self.carrier),
            "dist": [[self.grid.format(v) for v in row] for row in self.dist],
        }

    def index(self, name: str) -> int:
        return self._idx[name]

    def d(self, a: str, b: str) -> int:
        return self.dist[self._idx[a]][self._idx[b]]


def point_space(grid: EpsGrid, name: str = "pt") -> FuzzySpace:
    return FuzzySpace(grid, (name,), ((0,),))


# --- epsilon expression language: constants, parameters, +, min(.,1) ---

class EpsExpr:
    __slots__ = ()

    def eval(self, env: Mapping[str, int], q: int) -> int:
        raise NotImplementedError

    def params(self) -> frozenset[str]:
        raise NotImplementedError


@dataclass(frozen=True)
class EpsConst(EpsExpr):
    value: Fraction

    def eval(self, env, q):
        scaled = self.value * q
        if scaled.denominator != 1:
            raise GridMismatch(f"clause constant {self.value} off the grid (q={q})")
        return int(scaled)

    def params(self):
        return frozenset()


@dataclass(frozen=True)
class EpsParam(EpsExpr):
    name: str

    def eval(self, env, q):
        return env[self.name]

    def params(self):
        return frozenset((self.name,))


@dataclass(frozen=True)
class EpsPlus(EpsExpr):
    terms: tuple[EpsExpr, ...]

    def eval(self, env, q):
        return sum(t.eval(env, q) for t in self.terms)

    def params(self):
        out: frozenset[str] = frozenset()
        for t in self.terms:
            out |= t.params()
        return out


@dataclass(frozen=True)
class EpsMin1(EpsExpr):
    inner: EpsExpr

    def eval(self, env, q):
        return min(q, self.inner.eval(env, q))

    def params(self):
        return self.inner.params()


def eps_expr_from_json(obj) -> EpsExpr:
    if isinstance(obj, str):
        try:
            return EpsConst(Fraction(obj))
        except ValueError:
            return EpsParam(obj)
    if isinstance(obj, (int, float)):
        return EpsConst(Fraction(str(obj)))
    if isinstance(obj, dict):
        if "plus" in obj:
            return EpsPlus(tuple(eps_expr_from_json(t) for t in obj["plus"]))
        if "min1" in obj:
            return EpsMin1(eps_expr_from_json(obj["min1"]))
    raise ValueError(f"bad epsilon expression: {obj!r}")


def eps_expr_to_json(e: EpsExpr):
    if isinstance(e, EpsConst):
        return str(e.value)
    if isinstance(e, EpsParam):
        return e.name
    if isinstance(e, EpsPlus):
        return {"plus": [eps_expr_to_json(t) for t in e.terms]}
    if isinstance(e, EpsMin1):
        return {"min1": eps_expr_to_json(e.inner)}
    raise TypeError(e)


@dataclass(frozen=True)
class EqAtom:
    x: str
    y: str


@dataclass(frozen=True)
class DistAtom:
    x: str
    y: str
    eps: EpsExpr


Atom = EqAtom | DistAtom


@dataclass(frozen=True)
class HornClause:
    name: str
    vars: tuple[str, ...]
    premises: tuple[Atom, ...]
    conclusion: Atom

    def __post_init__(self):
        declared = set(self.vars)
        for atom in (*self.premises, self.conclusion):
            if atom.x not in declared or atom.y not in declared:
                raise ValueError(f"clause {self.name!r} uses an undeclared variable")

    def param_names(self) -> tuple[str, ...]:
        names: set[str] = set()
        for atom in (*self.premises, self.conclusion):
            if isinstance(atom, DistAtom):
                names |= atom.eps.params()
        return tuple(sorted(names))


def _atom_from_json(obj) -> Atom:
    if "eq" in obj:
        x, y = obj["eq"]
        return EqAtom(str(x), str(y))
    if "dist" in obj:
        x, y, e = obj["dist"]
        return DistAtom(str(x), str(y), eps_expr_from_json(e))
    raise ValueError(f"bad atom: {obj!r}")


def _atom_to_json(atom: Atom):
    if isinstance(atom, EqAtom):
        return {"eq": [atom.x, atom.y]}
    return {"dist": [atom.x, atom.y, eps_expr_to_json(atom.eps)]}


@dataclass(frozen=True)
class GMetSpec:
    """A Horn-definable class of fuzzy-relation spaces."""

    name: str
    clauses: tuple[HornClause, ...]

    @classmethod
    def from_json(cls, obj) -> "GMetSpec":
        if "preset" in obj:
            try:
                return PRESETS[obj["preset"]]
            except KeyError:
                raise ValueError(f"unknown preset {obj['preset']!r}") from None
        clauses = tuple(
            HornClause(
                name=str(c.get("name", f"clause{i}")),
                vars=tuple(str(v) for v in c["vars"]),
                premises=tuple(_atom_from_json(p) for p in c.get("premises", [])),
                conclusion=_atom_from_json(c["conclusion"]),
            )
            for i, c in enumerate(obj["clauses"])
        )
        return cls(str(obj.get("name", "user")), clauses)

    def to_json(self) -> dict:
        if self in PRESETS.values():
            return {"preset": self.name}
        return {
            "name": self.name,
            "clauses": [
                {
                    "name": c.name,
                    "vars": list(c.vars),
                    "premises": [_atom_to_json(p) for p in c.premises],
                    "conclusion": _atom_to_json(c.conclusion),
                }
                for c in self.clauses
            ],
        }


_REFL = HornClause("refl", ("x",), (), DistAtom("x", "x", EpsConst(Fraction(0))))
_SYMM = HornClause(
    "symm", ("x", "y"), (DistAtom("x", "y", EpsParam("e")),), DistAtom("y", "x", EpsParam("e"))
)
_TRIANGLE = HornClause(
    "triangle",
    ("x", "y", "z"),
    (DistAtom("x", "y", EpsParam("e1")), DistAtom("y", "z", EpsParam("e2"))),
    DistAtom("x", "z", EpsMin1(EpsPlus((EpsParam("e1"), EpsParam("e2"))))),
)
_ZERO_IMPLIES_EQ = HornClause(
    "zero_implies_eq", ("x", "y"), (DistAtom("x", "y", EpsConst(Fraction(0))),), EqAtom("x", "y")
)
_EQ_IMPLIES_ZERO = HornClause(
    "eq_implies_zero", ("x", "y"), (EqAtom("x", "y"),), DistAtom("x", "y", EpsConst(Fraction(0)))
)

FREL = GMetSpec("FREL", ())
PMET = GMetSpec("PMET", (_REFL, _SYMM, _TRIANGLE))
MET = GMetSpec("MET", (_REFL, _SYMM, _TRIANGLE, _ZERO_IMPLIES_EQ, _EQ_IMPLIES_ZERO))
PRESETS = {"FREL": FREL, "PMET": PMET, "MET": MET}


@dataclass(frozen=True)
class Violation:
    clause: str
    assignment: tuple[tuple[str, str], ...]
    params: tuple[tuple[str, int], ...]

    def describe(self, grid: EpsGrid) -> str:
        assign = ", ".join(f"{v}={a}" for v, a in self.assignment)
        params = ", ".join(f"{p}={grid.format(n)}" for p, n in self.params)
        extra = f" [{params}]" if params else ""
        return f"{self.clause}: {assign}{extra}"


def check_space(spec: GMetSpec, sp: FuzzySpace) -> list[Violation]:
    """Exhaustively instantiate every clause; list the instances that fail.

    Every variable assignment into the carrier and every grid value of every
    epsilon parameter is tried; this is the independent reference loop that the
    saturation engine is tested against.
    """
    q = sp.grid.q
    out: list[Violation] = []

    def holds(atom: Atom, env: dict[str, str], penv: dict[str, int]) -> bool:
        if isinstance(atom, EqAtom):
            return env[atom.x] == env[atom.y]
        return sp.d(env[atom.x], env[atom.y]) <= min(q, atom.eps.eval(penv, q))

    for clause in spec.clauses:
        params = clause.param_names()
        for values in itertools.product(sp.carrier, repeat=len(clause.vars)):
            env = dict(zip(clause.vars, values))
            for pvec in itertools.product(range(q + 1), repeat=len(params)):
                penv = dict(zip(params, pvec))
                if all(holds(p, env, penv) for p in clause.premises) and not holds(
                    clause.conclusion, env, penv
                ):
                    out.append(
                        Violation(clause.name, tuple(env.items()), tuple(penv.items()))
                    )
    return out


@lru_cache(maxsize=None)
def space_passes(spec: GMetSpec, sp: FuzzySpace) -> bool:
    return not check_space(spec, sp)


def require_space(spec: GMetSpec, sp: FuzzySpace, what: str = "space") -> None:
    if not space_passes(spec, sp):
        first = check_space(spec, sp)[0]
        raise SpecViolation(f"{what} violates {spec.name}: {first.describe(sp.grid)}")


def is_nonexpansive(f: Mapping[str, str], src: FuzzySpace, dst: FuzzySpace) -> bool:
    """True iff dst-distance of images never exceeds the src-distance."""
    return all(
        dst.d(f[a], f[b]) <= src.d(a, b)
        for a in src.carrier
        for b in src.carrier
    )


def enumerate_nonexpansive(
    src: FuzzySpace, dst: FuzzySpace, budget: int | None = None
) -> list[dict[str, str]]:
    """All total nonexpansive maps src -> dst, in carrier-product order."""
    total = len(dst.carrier) ** len(src.carrier)
    if budget is not None and total > budget:
        raise BudgetExceeded(f"{total} candidate interpretations exceed budget {budget}")
    out = []
    for images in itertools.product(dst.carrier, repeat=len(src.carrier)):
        f = dict(zip(src.carrier, images))
        if is_nonexpansive(f, src, dst):
            out.append(f)
    return out


def tuple_name(names: Iterable[str]) -> str:
    return "(" + ",".join(names) + ")"


def discrete_lift(spec: GMetSpec, sp: FuzzySpace, n: int) -> FuzzySpace:
    """The discrete lifting of the n-ary product for a preset class.

    FREL lifts to the constant-1 table; MET and PMET lift to 0 on the diagonal
    and 1 elsewhere. Any set-function out of the lifted power into a space of
    the class is then automatically nonexpansive.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    tuples = list(itertools.product(sp.carrier, repeat=n))
    carrier = tuple(tuple_name(t) for t in tuples)
    q = sp.grid.q
    if spec == FREL:
        rows = tuple(tuple(q for _ in tuples) for _ in tuples)
    elif spec in (PMET, MET):
        rows = tuple(
            tuple(0 if t1 == t2 else q for t2 in tuples) for t1 in tuples
        )
    else:
        raise UnsupportedPreset(
            f"no discrete lifting is defined for spec {spec.name!r}"
        )
    return FuzzySpace(sp.grid, carrier, rows)
