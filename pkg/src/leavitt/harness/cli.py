"""Command line interface: ``leavitt <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path as FilePath

from ..algebra import LeavittPathAlgebra, ParseError, format_monomial
from ..chenmod import ModuleSpace, format_basis_vector
from ..envelope import (
    InsufficientHorizon,
    Verdict,
    extend_from_corner_data,
    inverse_check,
    inverse_series_action,
    is_U_equal_Uhat,
    op_Pv,
    random_nonzero_series,
    random_series,
    restriction_check,
)
from ..graph import (
    GraphError,
    cycles,
    enumerate_Pc,
    find_cycle,
    format_graph,
    has_disjoint_cycles,
    is_Pc_finite,
    sinks,
    sources,
    vertex_equivalence_classes,
)
from ..reduce import reduce_graph
from ..scalar import parse_field, parse_polynomial
from . import suite
from .suite import (
    EXIT_FAIL,
    EXIT_INSUFFICIENT,
    EXIT_OK,
    EXIT_USAGE,
    INSUFFICIENT,
    ConfigError,
    SuiteConfig,
    Tally,
    load_graph,
    run_suite,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(args, data: dict, text: str) -> None:
    if args.json:
        print(json.dumps(data, sort_keys=True, indent=2))
    else:
        print(text)


def _cycle(g, name: str):
    try:
        return find_cycle(g, name)
    except GraphError as exc:
        raise UsageError(str(exc)) from exc


def _space(args, g):
    c = _cycle(g, args.cycle)
    f = parse_polynomial(args.poly)
    return ModuleSpace(g, c, f)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    g = load_graph(args.graph)
    disjoint = has_disjoint_cycles(g)
    poset = vertex_equivalence_classes(g)
    data = {
        "vertices": list(g.vertices),
        "edges": [e.id for e in g.edges],
        "disjoint_cycles": disjoint,
        "sinks": sinks(g),
        "sources": sources(g),
        "cycles": [str(c) for c in cycles(g)] if disjoint else None,
        "classes": [list(cl) for cl in poset.classes],
        "maximal_classes": [list(cl) for cl in poset.maximal],
    }
    if disjoint:
        data["finite_Pc"] = [str(c) for c in cycles(g) if is_Pc_finite(g, c)]
    lines = [
        f"vertices: {len(g.vertices)}",
        f"edges: {len(g.edges)}",
        f"disjoint-cycles: {str(disjoint).lower()}",
        f"sinks: {', '.join(data['sinks']) or '-'}",
        f"sources: {', '.join(data['sources']) or '-'}",
    ]
    if disjoint:
        lines.append(f"cycles: {', '.join(data['cycles'])}")
        lines.append(f"finite P_c: {', '.join(data['finite_Pc']) or '-'}")
    lines.append("classes: " + " ".join("[" + ",".join(cl) + "]" for cl in data["classes"]))
    lines.append("maximal: " + " ".join("[" + ",".join(cl) + "]" for cl in data["maximal_classes"]))
    _emit(args, data, "\n".join(lines))
    return EXIT_OK


def cmd_paths(args) -> int:
    g = load_graph(args.graph)
    if not has_disjoint_cycles(g):
        raise UsageError("graph does not have disjoint cycles")
    c = _cycle(g, args.cycle)
    paths = enumerate_Pc(g, c, args.maxlen)
    data = {"cycle": str(c), "maxlen": args.maxlen, "finite": is_Pc_finite(g, c),
            "paths": [str(p) for p in paths]}
    _emit(args, data, "\n".join(data["paths"]))
    return EXIT_OK


def cmd_eval(args) -> int:
    g = load_graph(args.graph)
    field_ = parse_field(args.field)
    A = LeavittPathAlgebra(g, field_)
    a = A.parse(args.expr)
    data = {"expr": args.expr, "result": str(a),
            "terms": [[format_monomial(m), str(k)] for m, k in a.sorted_terms()]}
    _emit(args, data, str(a))
    return EXIT_OK


def cmd_act(args) -> int:
    g = load_graph(args.graph)
    U = _space(args, g)
    a = U.algebra.parse(args.element)
    m = U.parse(args.vector)
    r = U.act(a, m)
    data = {"result": str(r),
            "basis": [[format_basis_vector(b), str(k)] for b, k in r.to_basis()]}
    _emit(args, data, str(r))
    return EXIT_OK


def cmd_envelope(args) -> int:
    g = load_graph(args.graph)
    U = _space(args, g)
    rng = random.Random(args.seed)
    L = args.horizon
    t = Tally()
    if args.check == "ck":
        for i in range(args.samples):
            z = random_series(U, rng, L, density=0.4, max_j=3)
            suite._ck_claims(t, g, z, dict(module=U, horizon=L, z=z))
    elif args.check == "essential":
        for _ in range(args.samples):
            z = random_nonzero_series(U, rng, L, density=0.2)
            t.trial(lambda: suite._check_witness(z), module=U, z=z)
    elif args.check == "extend":
        tau = args.tau
        entering = [e for e in g.out_edges(g.s(tau)) if e != tau]
        keys = [(k, j) for k in range(4) for j in range(1, len(entering) + 1)]
        for _ in range(args.samples):
            table = {key: op_Pv(g.r(entering[key[1] - 1]), random_series(U, rng, L, density=0.5))
                     for key in rng.sample(keys, min(3, len(keys)))}

            def trial(table=table):
                chi = extend_from_corner_data(U, tau, table)
                vs = set(restriction_check(U, tau, table, chi).values())
                if Verdict.UNEQUAL in vs:
                    return False
                return Verdict.INSUFFICIENT if Verdict.INSUFFICIENT in vs else Verdict.EQUAL

            t.trial(trial, module=U)
    elif args.check == "inverse":
        for ps in suite.MEMBERSHIP_POLYS:
            p = parse_polynomial(f"{ps} over {U.base}")
            for _ in range(args.samples):
                z = random_series(U, rng, L, density=0.4)
                t.trial(lambda: inverse_check(p, args.tau, z, inverse_series_action(p, args.tau, z)),
                        module=U, p=ps, z=z)
    status = t.status
    data = {"check": args.check, "module": str(U), "horizon": L, "seed": args.seed,
            "status": status, "U_equals_Uhat": is_U_equal_Uhat(g, U.cycle),
            "counts": {"passed": t.passed, "failed": t.failed, "insufficient": t.insufficient},
            "counterexample": t.counterexample}
    text = f"{status}: {t.passed} passed, {t.failed} failed, {t.insufficient} insufficient"
    if t.counterexample:
        text += "\n" + "\n".join(f"    {k}: {v}" for k, v in sorted(t.counterexample.items()))
    _emit(args, data, text)
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, INSUFFICIENT: EXIT_INSUFFICIENT}[status]


def cmd_reduce(args) -> int:
    g = load_graph(args.graph)
    steps = [s for s in args.steps.split(",") if s]
    try:
        red = reduce_graph(g, steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    data = {
        "components": len(red.components),
        "eliminated_sources": [se.source for se in red.eliminations],
        "collapsed_cycles": [str(cc.d) for cc in red.collapses],
        "graphs": [format_graph(h) for h in red.graphs],
    }
    if args.emit_theta:
        data["theta"] = [
            {f: str(p) for f, p in cc.theta_table.items() if len(p.edges) != 1 or p.edges[0] != f}
            for cc in red.collapses
        ]
    if args.emit_graph:
        text = "\n".join(format_graph(h) for h in red.graphs)
        FilePath(args.emit_graph).write_text(text)
    lines = [
        f"components: {data['components']}",
        f"eliminated sources: {', '.join(data['eliminated_sources']) or '-'}",
        f"collapsed cycles: {', '.join(data['collapsed_cycles']) or '-'}",
    ]
    for i, th in enumerate(data.get("theta", [])):
        for f, p in th.items():
            lines.append(f"theta[{i}]({f}) = {p}")
    if not args.emit_graph:
        for h in data["graphs"]:
            lines.append(h.rstrip())
    _emit(args, data, "\n".join(lines))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = SuiteConfig(
        graphs=tuple(args.graph) if args.graph else SuiteConfig.graphs,
        field=args.field,
        polys=tuple(args.poly) if args.poly else SuiteConfig.polys,
        cycles=tuple(args.cycle) if args.cycle else None,
        horizon=args.horizon,
        min_horizon=args.min_horizon,
        seed=args.seed,
        select=tuple(args.checks.split(",")) if args.checks else None,
        mutation=args.mutation,
        scale=args.scale,
    )
    report = run_suite(cfg)
    if args.json:
        print(json.dumps(report.to_json(args.timings), sort_keys=True, indent=2))
    else:
        print(report.to_text())
    return report.exit_code


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="leavitt", description="Exact computations in Leavitt path algebras.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, module=False):
        sp.add_argument("--graph", required=True, help="graph file or corpus name")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if module:
            sp.add_argument("--cycle", required=True, help="edge word of a cycle, or a sink")
            sp.add_argument("--poly", default="x-1 over Q", help='e.g. "x^2+x-1 over Q"')

    sp = sub.add_parser("check", help="graph facts")
    common(sp)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("paths", help="enumerate P_c")
    common(sp)
    sp.add_argument("--cycle", required=True)
    sp.add_argument("--maxlen", type=int, default=6)
    sp.set_defaults(fn=cmd_paths)

    sp = sub.add_parser("eval", help="normal form of an expression")
    common(sp)
    sp.add_argument("--field", default="Q")
    sp.add_argument("expr")
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("act", help="act with an algebra element on a module element")
    common(sp, module=True)
    sp.add_argument("element")
    sp.add_argument("vector", help='module literal such as "pd4 @a2"')
    sp.set_defaults(fn=cmd_act)

    sp = sub.add_parser("envelope", help="randomised checks on truncated series")
    common(sp, module=True)
    sp.add_argument("--horizon", type=int, default=8)
    sp.add_argument("--check", choices=["ck", "essential", "extend", "inverse"], required=True)
    sp.add_argument("--tau", default="tau", help="source loop for extend/inverse")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_envelope)

    sp = sub.add_parser("reduce", help="split, eliminate sources, collapse source cycles")
    common(sp)
    sp.add_argument("--steps", default="components,sources,cycles")
    sp.add_argument("--emit-graph", metavar="OUT")
    sp.add_argument("--emit-theta", action="store_true")
    sp.set_defaults(fn=cmd_reduce)

    sp = sub.add_parser("verify", help="run the verification suite")
    sp.add_argument("--graph", action="append", help="graph file or corpus name (repeatable)")
    sp.add_argument("--field", default="Q")
    sp.add_argument("--poly", action="append", help="basic irreducible polynomial (repeatable)")
    sp.add_argument("--cycle", action="append", help="restrict to these cycles (repeatable)")
    sp.add_argument("--horizon", type=int, default=8)
    sp.add_argument("--min-horizon", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--checks", help="comma-separated check names, prefixes or criterion numbers")
    sp.add_argument("--mutation", help="fault injection, e.g. drop_ck2_term")
    sp.add_argument("--scale", type=float, default=1.0, help="multiply sample counts")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--timings", action="store_true", help="include timings in the JSON report")
    sp.add_argument("--list", action="store_true", help="list registered checks and exit")
    sp.set_defaults(fn=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command == "verify" and args.list:
        for name, chk in sorted(suite.CHECKS.items(), key=lambda kv: (kv[1].criterion, kv[0])):
            print(f"{chk.criterion:>2}  {name:<34} {chk.description}")
        return EXIT_OK
    try:
        return args.fn(args)
    except (UsageError, ConfigError, GraphError, ParseError, FileNotFoundError) as exc:
        print(f"leavitt {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InsufficientHorizon as exc:
        print(f"leavitt {args.command}: insufficient horizon: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except ValueError as exc:
        print(f"leavitt {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
