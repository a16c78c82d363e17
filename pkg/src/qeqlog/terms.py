"""Signatures, terms, substitution and the bounded term universe.

Terms use carrier-element names directly as variables; there is no separate
variable sort. The canonical order (depth first, then symbol, then arguments)
makes universe enumeration and quotient representatives deterministic.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import TrivialPair, UnknownVariable

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


@dataclass(frozen=True)
class Signature:
    """Finite set of operation symbols with arities. Arity-0 symbols are constants."""

    ops: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.ops]
        if len(set(names)) != len(names):
            raise ValueError("duplicate operation symbol")
        for name, arity in self.ops:
            if not _IDENT_RE.match(name):
                raise ValueError(f"operation symbol {name!r} is not an identifier")
            if arity < 0:
                raise ValueError(f"negative arity for {name!r}")

    @classmethod
    def of(cls, ops: Mapping[str, int]) -> "Signature":
        return cls(tuple(sorted(ops.items())))

    @classmethod
    def from_json(cls, obj) -> "Signature":
        return cls.of({str(k): int(v) for k, v in obj["ops"].items()})

    def to_json(self) -> dict:
        return {"ops": {name: arity for name, arity in self.ops}}

    def arity(self, op: str) -> int:
        for name, arity in self.ops:
            if name == op:
                return arity
        raise KeyError(op)

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.ops)

    def has_constant(self) -> bool:
        return any(arity == 0 for _, arity in self.ops)


class Term:
    """Either a variable (carrier element) or an operation applied to terms."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class App(Term):
    op: str
    args: tuple[Term, ...]


EMPTY_SIGNATURE = Signature(())


@lru_cache(maxsize=None)
def term_depth(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + max((term_depth(a) for a in t.args), default=0)


@lru_cache(maxsize=None)
def term_key(t: Term):
    """Sort key realizing the canonical order: depth, then symbol, then arguments.

    Variables sort before an identically-named constant at the same depth.
    """
    if isinstance(t, Var):
        return (1, t.name, 0, ())
    return (term_depth(t), t.op, 1, tuple(term_key(a) for a in t.args))


def canonical_cmp(t1: Term, t2: Term) -> int:
    """-1, 0 or 1 according to the canonical total order."""
    k1, k2 = term_key(t1), term_key(t2)
    return -1 if k1 < k2 else (0 if k1 == k2 else 1)


def term_to_str(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.op
    return f"{t.op}({','.join(term_to_str(a) for a in t.args)})"


def term_label(t: Term, symbols: frozenset[str]) -> str:
    """Injective rendering of a term, for use as a quotient-class name.

    Identical to term_to_str except that a variable is bracketed when its name
    is not a plain identifier or shadows an operation symbol. Iterated
    quotients (carrier names that are themselves labels) therefore stay
    collision-free: ``[u(a)]`` names the generator, ``u([a])`` an application.
    """
    if isinstance(t, Var):
        if _IDENT_RE.match(t.name) and t.name not in symbols:
            return t.name
        return f"[{t.name}]"
    if not t.args:
        return t.op
    return f"{t.op}({','.join(term_label(a, symbols) for a in t.args)})"


_TOKEN = re.compile(r"\s*([A-Za-z0-9_'.\-]+|\(|\)|,)")


def parse_term(text: str, sig: Signature, carrier: Iterable[str]) -> Term:
    """Parse prefix syntax like ``u(u(a))`` or ``c``.

    Names are resolved against the carrier first, then against the signature's
    constants; carrier names must therefore not collide with symbols.
    """
    carrier = set(carrier)
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot tokenize term at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()

    def parse(i: int) -> tuple[Term, int]:
        if i >= len(tokens):
            raise ValueError(f"unexpected end of term in {text!r}")
        name = tokens[i]
        if name in ("(", ")", ","):
            raise ValueError(f"unexpected {name!r} in {text!r}")
        if i + 1 < len(tokens) and tokens[i + 1] == "(":
            args = []
            i += 2
            if tokens[i] == ")":
                return App(name, ()), i + 1
            while True:
                arg, i = parse(i)
                args.append(arg)
                if tokens[i] == ")":
                    return App(name, tuple(args)), i + 1
                if tokens[i] != ",":
                    raise ValueError(f"expected ',' or ')' in {text!r}")
                i += 1
        if name in carrier:
            return Var(name), i + 1
        if name in sig.symbols and sig.arity(name) == 0:
            return App(name, ()), i + 1
        raise ValueError(f"unknown name {name!r} in {text!r}")

    term, end = parse(0)
    if end != len(tokens):
        raise ValueError(f"trailing tokens in {text!r}")
    _check_arities(term, sig)
    return term


def _check_arities(t: Term, sig: Signature) -> None:
    if isinstance(t, App):
        if t.op not in sig.symbols:
            raise ValueError(f"unknown operation {t.op!r}")
        if sig.arity(t.op) != len(t.args):
            raise ValueError(f"arity mismatch for {t.op!r}")
        for a in t.args:
            _check_arities(a, sig)


def term_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    out: frozenset[str] = frozenset()
    for a in t.args:
        out |= term_vars(a)
    return out


def check_nontrivial(sig: Signature, carrier: Iterable[str]) -> bool:
    """True iff terms exist: nonempty carrier or at least one constant."""
    return bool(tuple(carrier)) or sig.has_constant()


def apply_subst(subst: Mapping[str, Term], t: Term) -> Term:
    """Simultaneously replace every variable of ``t`` via ``subst``."""
    if isinstance(t, Var):
        try:
            return subst[t.name]
        except KeyError:
            raise UnknownVariable(t.name) from None
    return App(t.op, tuple(apply_subst(subst, a) for a in t.args))


def enumerate_universe(sig: Signature, carrier: Iterable[str], depth: int) -> list[Term]:
    """All terms of depth <= depth over the carrier, in canonical order."""
    carrier = tuple(carrier)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not check_nontrivial(sig, carrier):
        raise TrivialPair("empty carrier and no constants")
    universe: set[Term] = {Var(a) for a in carrier}
    universe |= {App(name, ()) for name, arity in sig.ops if arity == 0}
    for _ in range(depth - 1):
        layer = list(universe)
        for name, arity in sig.ops:
            if arity == 0:
                continue
            for args in itertools.product(layer, repeat=arity):
                universe.add(App(name, args))
    return sorted(universe, key=term_key)
