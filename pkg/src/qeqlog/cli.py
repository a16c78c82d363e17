"""Command-line entry point: load a JSON workspace, dispatch, print JSON.

Exit codes: 0 = the queried property holds (derivable / model / laws pass),
1 = it does not, 2 = error (unresolved names, grid mismatches, budget).
Output is deterministic byte-for-byte for identical inputs: keys are sorted
and every numeric is an exact fraction string.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .deduce import derives, distance, saturate, trace
from .errors import QeqlogError
from .free import OVERFLOW, build_free, check_free_is_model, check_ump
from .gmet import EpsGrid, FuzzySpace, GMetSpec
from .monad import (
    MonadInstance,
    check_em_laws,
    check_monad_laws,
    em_from_model,
    model_from_em,
)
from .qalg import Judgment, QuantAlgebra, Theory, entails_catalog, is_model, satisfies
from .terms import Signature, parse_term


@dataclass
class Workspace:
    grid: EpsGrid
    sig: Signature
    spec: GMetSpec
    spaces: dict[str, FuzzySpace]
    theories: dict[str, Theory]
    algebras: dict[str, QuantAlgebra]
    depth: int = 3
    budget_interps: int | None = None
    budget_instances: int | None = None

    @classmethod
    def from_json(cls, obj) -> "Workspace":
        grid = EpsGrid(int(obj.get("grid", 24)))
        sig = Signature.from_json(obj.get("signature", {"ops": {}}))
        for name in sig.symbols:
            for space_obj in obj.get("spaces", {}).values():
                if name in space_obj.get("carrier", []):
                    raise ValueError(
                        f"carrier element {name!r} collides with an operation symbol"
                    )
        spec = GMetSpec.from_json(obj.get("spec", {"preset": "MET"}))
        spaces = {
            str(k): FuzzySpace.from_json(v, grid)
            for k, v in obj.get("spaces", {}).items()
        }
        theories = {}
        for name, judgments in obj.get("theories", {}).items():
            theories[str(name)] = Theory(
                str(name),
                tuple(
                    Judgment.from_json(j, sig, grid, spaces) for j in judgments
                ),
            )
        algebras = {
            str(k): QuantAlgebra.from_json(v, sig, grid)
            for k, v in obj.get("algebras", {}).items()
        }
        budgets = obj.get("budgets", {})
        return cls(
            grid, sig, spec, spaces, theories, algebras,
            depth=int(budgets.get("depth", 3)),
            budget_interps=budgets.get("interpretations"),
            budget_instances=budgets.get("instances"),
        )


def load_workspace(path: str, overrides: argparse.Namespace) -> Workspace:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if overrides.grid is not None:
        obj["grid"] = overrides.grid
    ws = Workspace.from_json(obj)
    if overrides.depth is not None:
        ws.depth = overrides.depth
    if overrides.budget_interps is not None:
        ws.budget_interps = overrides.budget_interps
    if overrides.budget_instances is not None:
        ws.budget_instances = overrides.budget_instances
    return ws


class _Lookup:
    def __init__(self, ws: Workspace):
        self.ws = ws

    def space(self, name: str) -> FuzzySpace:
        if name not in self.ws.spaces:
            raise QeqlogError(f"unknown space {name!r}")
        return self.ws.spaces[name]

    def theory(self, name: str) -> Theory:
        if name not in self.ws.theories:
            raise QeqlogError(f"unknown theory {name!r}")
        return self.ws.theories[name]

    def algebra(self, name: str) -> QuantAlgebra:
        if name not in self.ws.algebras:
            raise QeqlogError(f"unknown algebra {name!r}")
        return self.ws.algebras[name]

    def judgment(self, raw: str) -> Judgment:
        if raw.lstrip().startswith("{"):
            obj = json.loads(raw)
        else:
            with open(raw, encoding="utf-8") as fh:
                obj = json.load(fh)
        return Judgment.from_json(obj, self.ws.sig, self.ws.grid, self.ws.spaces)


def _emit(report: dict, code: int) -> int:
    print(json.dumps(report, sort_keys=True, indent=2))
    return code


def _base_report(ws: Workspace, **extra) -> dict:
    out = {"grid": ws.grid.q, "depth": ws.depth, "skipped_overflow": 0}
    out.update(extra)
    return out


def cmd_check_model(ws: Workspace, args) -> int:
    lk = _Lookup(ws)
    alg = lk.algebra(args.algebra)
    theory = lk.theory(args.theory)
    for j in theory.judgments:
        res = satisfies(alg, ws.spec, j, ws.budget_interps)
        if not res.holds:
            report = _base_report(
                ws, model=False,
                counterexample={"judgment": j.describe(), "interpretation": res.counterexample},
            )
            return _emit(report, 1)
    return _emit(_base_report(ws, model=True), 0)


def cmd_derive(ws: Workspace, args) -> int:
    lk = _Lookup(ws)
    theory = lk.theory(args.theory)
    target = lk.space(args.target)
    j = lk.judgment(args.judgment)
    db = saturate(ws.sig, theory, ws.spec, target, ws.depth, ws.budget_instances)
    ok = derives(db, j)
    report = _base_report(
        ws,
        derivable=ok,
        distance=str(distance(db, j.lhs, j.rhs)),
    )
    if args.trace and ok:
        report["trace"] = [trace(db, j).to_json()]
    return _emit(report, 0 if ok else 1)


def cmd_distance(ws: Workspace, args) -> int:
    lk = _Lookup(ws)
    theory = lk.theory(args.theory)
    target = lk.space(args.target)
    lhs = parse_term(args.lhs, ws.sig, target.carrier)
    rhs = parse_term(args.rhs, ws.sig, target.carrier)
    db = saturate(ws.sig, theory, ws.spec, target, ws.depth, ws.budget_instances)
    report = _base_report(ws, distance=str(distance(db, lhs, rhs)))
    return _emit(report, 0)


def cmd_free(ws: Workspace, args) -> int:
    lk = _Lookup(ws)
    theory = lk.theory(args.theory)
    space = lk.space(args.space)
    fa = build_free(ws.sig, theory, ws.spec, space, ws.depth, ws.budget_instances)
    ops = {}
    overflow_count = 0
    for op, table in sorted(fa.optable.items()):
        entry = {}
        for argtuple, res in sorted(table.items()):
            key = ",".join(fa.class_name(a) for a in argtuple)
            if res is OVERFLOW:
                entry[key] = "overflow"
                overflow_count += 1
            else:
                entry[key] = fa.class_name(res)
        ops[op] = entry
    model_report = check_free_is_model(fa, theory, ws.spec, ws.budget_interps)
    report = _base_report(
        ws,
        classes=[fa.class_name(c) for c in range(len(fa.classes))],
        delta=[[ws.grid.format(v) for v in row] for row in fa.delta],
        ops=ops,
        unit={a: fa.class_name(c) for a, c in sorted(fa.unit.items())},
        model_check={
            "checked": model_report.checked,
            "skipped_overflow": model_report.skipped_overflow,
            "failed": model_report.failed,
        },
    )
    report["skipped_overflow"] = overflow_count
    return _emit(report, 0 if model_report.failed == 0 else 1)


def cmd_entail(ws: Workspace, args) -> int:
    lk = _Lookup(ws)
    theory = lk.theory(args.theory)
    j = lk.judgment(args.judgment)
    catalog = [lk.algebra(name) for name in args.catalog.split(",") if name]
    ok = entails_catalog(catalog, ws.spec, theory, j, ws.budget_interps)
    report = _base_report(ws, entailed=ok, catalog_size=len(catalog))
    return _emit(report, 0 if ok else 1)


def cmd_monad_laws(ws: Workspace, args) -> int:
    lk = _Lookup(ws)
    theory = lk.theory(args.theory)
    space = lk.space(args.space)
    mi = MonadInstance(ws.sig, theory, ws.spec, ws.depth, ws.budget_instances)
    reports = check_monad_laws(mi, space)
    payload = [
        {
            "law": r.law,
            "checked": r.checked,
            "skipped_overflow": r.skipped_overflow,
            "failed": r.failed,
            "first_failure": r.first_failure,
        }
        for r in reports
    ]
    report = _base_report(ws, laws=payload)
    report["skipped_overflow"] = sum(r.skipped_overflow for r in reports)
    return _emit(report, 0 if all(r.failed == 0 for r in reports) else 1)


def cmd_ump(ws: Workspace, args) -> int:
    lk = _Lookup(ws)
    theory = lk.theory(args.theory)
    space = lk.space(args.space)
    alg = lk.algebra(args.algebra)
    gen_map = json.loads(args.map)
    fa = build_free(ws.sig, theory, ws.spec, space, ws.depth, ws.budget_instances)
    res = check_ump(fa, alg, gen_map, ws.budget_interps)
    report = _base_report(
        ws, exists=res.exists, unique=res.unique, candidates=res.candidates
    )
    return _emit(report, 0 if res.exists and res.unique else 1)


def cmd_em_check(ws: Workspace, args) -> int:
    lk = _Lookup(ws)
    theory = lk.theory(args.theory)
    alg = lk.algebra(args.algebra)
    mi = MonadInstance(ws.sig, theory, ws.spec, ws.depth, ws.budget_instances)
    cand = em_from_model(mi, alg)
    law_reports = check_em_laws(mi, cand)
    rebuilt, _ = model_from_em(mi, cand)
    round_trip = rebuilt.ops == alg.ops
    payload = [
        {
            "law": r.law,
            "checked": r.checked,
            "skipped_overflow": r.skipped_overflow,
            "failed": r.failed,
            "first_failure": r.first_failure,
        }
        for r in law_reports
    ]
    ok = round_trip and all(r.failed == 0 for r in law_reports)
    report = _base_report(ws, laws=payload, round_trip=round_trip)
    report["skipped_overflow"] = sum(r.skipped_overflow for r in law_reports)
    return _emit(report, 0 if ok else 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qeqlog",
        description="Deduction, model checking and free algebras for "
        "quantitative equational theories over generalized metric spaces.",
    )
    parser.add_argument("--workspace", required=True, help="workspace JSON file")
    parser.add_argument("--depth", type=int, default=None)
    parser.add_argument("--grid", type=int, default=None)
    parser.add_argument("--budget-interps", type=int, default=None, dest="budget_interps")
    parser.add_argument("--budget-instances", type=int, default=None, dest="budget_instances")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-model", help="does an algebra model a theory")
    p.add_argument("--algebra", required=True)
    p.add_argument("--theory", required=True)
    p.set_defaults(func=cmd_check_model)

    p = sub.add_parser("derive", help="is a judgment derivable at this depth")
    p.add_argument("--theory", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--judgment", required=True, help="inline JSON or a file path")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("distance", help="minimal derived distance of two terms")
    p.add_argument("--theory", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--lhs", required=True)
    p.add_argument("--rhs", required=True)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("free", help="build the free algebra over a space")
    p.add_argument("--theory", required=True)
    p.add_argument("--space", required=True)
    p.set_defaults(func=cmd_free)

    p = sub.add_parser("entail", help="catalog-restricted entailment check")
    p.add_argument("--theory", required=True)
    p.add_argument("--judgment", required=True)
    p.add_argument("--catalog", required=True, help="comma-separated algebra names")
    p.set_defaults(func=cmd_entail)

    p = sub.add_parser("monad-laws", help="check unit and associativity laws")
    p.add_argument("--theory", required=True)
    p.add_argument("--space", required=True)
    p.set_defaults(func=cmd_monad_laws)

    p = sub.add_parser("ump", help="existence/uniqueness of the extension")
    p.add_argument("--theory", required=True)
    p.add_argument("--space", required=True)
    p.add_argument("--algebra", required=True)
    p.add_argument("--map", required=True, help="generator map as JSON")
    p.set_defaults(func=cmd_ump)

    p = sub.add_parser("em-check", help="structure-map laws and round trip")
    p.add_argument("--theory", required=True)
    p.add_argument("--algebra", required=True)
    p.set_defaults(func=cmd_em_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ws = load_workspace(args.workspace, args)
        return args.func(ws, args)
    except (QeqlogError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
