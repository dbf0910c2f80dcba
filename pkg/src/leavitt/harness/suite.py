"""Registered verification checks and the suite runner.

Every check is a pure function of the config and its own seeded RNG, so a
report is reproducible byte for byte.  A check tallies individual trials as
passed, failed or insufficient-horizon and keeps the first failing trial as a
counterexample.
"""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path as FilePath
from typing import Callable, Iterable

from .. import corpus_names, load_corpus
from ..algebra import (
    LeavittPathAlgebra,
    Monomial,
    format_monomial,
    corner_idempotents,
    poly_at,
    principal_membership,
    random_element,
)
from ..chenmod import ModuleSpace
from ..envelope import (
    InsufficientHorizon,
    SeriesElement,
    Verdict,
    act_series,
    compare,
    essential_witness,
    extend_from_corner_data,
    geometric,
    inverse_check,
    inverse_series_action,
    is_U_equal_Uhat,
    op_Pv,
    op_Se,
    op_Sfstar,
    random_nonzero_series,
    random_series,
    restriction_check,
)
from ..graph import (
    Cycle,
    Edge,
    Graph,
    GraphError,
    Path,
    cycle_vertices,
    cycles,
    enumerate_Pc,
    filter_paths,
    find_cycle,
    has_disjoint_cycles,
    closed_paths_are_cycle_powers,
    is_hereditary,
    is_saturated,
    proper_cycles,
    restrict,
    sinks,
    sources,
    vertex_equivalence_classes,
)
from ..reduce import (
    collapse_cycle,
    eliminate_all_sources,
    is_reduced,
    reduce_graph,
    tagged_equal,
    transport_collapse,
    transport_collapse_inverse,
    transport_source,
    transport_source_inverse,
)
from ..scalar import QQ, Polynomial, parse_field, parse_polynomial

PASS, FAIL, INSUFFICIENT = "pass", "fail", "insufficient-horizon"
EXIT_OK, EXIT_FAIL, EXIT_INSUFFICIENT, EXIT_USAGE = 0, 1, 2, 64

DEFAULT_POLYS = ("x-1 over Q", "x^2+x-1 over Q", "x^2+x+1 over F2")
# the p(x) with p(0) = 1 used for the source-loop constructions
MEMBERSHIP_POLYS = ("1", "1+x", "1+x+x^2", "1-2x^3")


class ConfigError(ValueError):
    pass


def load_graph(spec: str) -> Graph:
    """A graph file path, or the name of a shipped corpus graph."""
    p = FilePath(spec)
    if p.is_file():
        from ..graph import parse_graph

        try:
            return parse_graph(p.read_text())
        except GraphError as exc:
            raise ConfigError(f"{spec}: {exc}") from exc
    if spec in corpus_names():
        return load_corpus(spec)
    raise ConfigError(f"no graph file or corpus graph named {spec!r}")


@dataclass
class SuiteConfig:
    graphs: tuple[str, ...] = ("fig1", "fig3")
    field: str = "Q"
    polys: tuple[str, ...] = DEFAULT_POLYS
    cycles: tuple[str, ...] | None = None
    horizon: int = 8
    min_horizon: int = 4
    seed: int = 0
    select: tuple[str, ...] | None = None
    mutation: str | None = None
    scale: float = 1.0

    def validate(self) -> None:
        if self.horizon < 0 or self.min_horizon < 0:
            raise ConfigError("horizons must be nonnegative")
        if self.scale <= 0:
            raise ConfigError("sample scale must be positive")
        if not self.graphs:
            raise ConfigError("at least one graph is needed")
        for spec in self.graphs:
            load_graph(spec)
        if self.select:
            for s in self.select:
                if not any(_selected(name, (s,)) for name in CHECKS):
                    raise ConfigError(f"no check matches selector {s!r}")
        try:
            parse_field(self.field)
            for p in self.polys:
                parse_polynomial(p)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.mutation is not None:
            try:
                LeavittPathAlgebra(load_corpus("single_vertex"), mutation=self.mutation)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

    def to_json(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


@dataclass
class CheckResult:
    name: str
    criterion: int
    description: str
    status: str
    passed: int
    failed: int
    insufficient: int
    counterexample: dict | None
    seconds: float = 0.0

    def to_json(self, timings: bool = False) -> dict:
        d = {
            "name": self.name,
            "criterion": self.criterion,
            "description": self.description,
            "status": self.status,
            "counts": {
                "passed": self.passed,
                "failed": self.failed,
                "insufficient": self.insufficient,
            },
            "counterexample": self.counterexample,
        }
        if timings:
            d["seconds"] = round(self.seconds, 3)
        return d


@dataclass
class Report:
    config: SuiteConfig
    results: list[CheckResult] = field(default_factory=list)

    @property
    def status(self) -> str:
        states = {r.status for r in self.results}
        if FAIL in states:
            return FAIL
        if INSUFFICIENT in states:
            return INSUFFICIENT
        return PASS

    @property
    def exit_code(self) -> int:
        return {PASS: EXIT_OK, FAIL: EXIT_FAIL, INSUFFICIENT: EXIT_INSUFFICIENT}[self.status]

    def result(self, name: str) -> CheckResult:
        return next(r for r in self.results if r.name == name)

    def to_json(self, timings: bool = False) -> dict:
        d = {
            "config": self.config.to_json(),
            "checks": [r.to_json(timings) for r in self.results],
            "summary": {
                "status": self.status,
                "exit_code": self.exit_code,
                "checks": len(self.results),
                "passed": sum(r.status == PASS for r in self.results),
                "failed": sum(r.status == FAIL for r in self.results),
                "insufficient": sum(r.status == INSUFFICIENT for r in self.results),
            },
        }
        if timings:
            d["summary"]["seconds"] = round(sum(r.seconds for r in self.results), 3)
        return d

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            lines.append(
                f"{r.status.upper():<22} {r.name:<34} "
                f"{r.passed} passed, {r.failed} failed, {r.insufficient} insufficient"
            )
            if r.counterexample:
                for k, v in sorted(r.counterexample.items()):
                    lines.append(f"    {k}: {v}")
        lines.append(f"overall: {self.status} (exit {self.exit_code})")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Trial bookkeeping
# ---------------------------------------------------------------------------


class Tally:
    def __init__(self):
        self.passed = 0
        self.failed = 0
        self.insufficient = 0
        self.counterexample: dict | None = None

    def record(self, outcome, **witness) -> bool:
        """Record a bool or Verdict; return True on pass."""
        if outcome is Verdict.INSUFFICIENT:
            self.insufficient += 1
            return False
        if outcome is True or outcome is Verdict.EQUAL:
            self.passed += 1
            return True
        self.failed += 1
        if self.counterexample is None:
            self.counterexample = {k: str(v) for k, v in witness.items()}
        return False

    def trial(self, fn: Callable[[], object], **witness) -> bool:
        """Run one trial; an exhausted horizon counts as insufficient."""
        try:
            outcome = fn()
        except InsufficientHorizon:
            self.insufficient += 1
            return False
        except (AssertionError, ArithmeticError, ValueError) as exc:
            witness["error"] = f"{type(exc).__name__}: {exc}"
            outcome = False
        return self.record(outcome, **witness)

    @property
    def status(self) -> str:
        if self.failed:
            return FAIL
        if self.insufficient:
            return INSUFFICIENT
        return PASS


class Context:
    """Per-check view of the config with shared caches and a private RNG."""

    def __init__(self, cfg: SuiteConfig, name: str, cache: dict):
        self.cfg = cfg
        self.rng = random.Random(f"{cfg.seed}:{name}")
        self._cache = cache

    def graph(self, spec: str) -> Graph:
        key = ("graph", spec)
        if key not in self._cache:
            self._cache[key] = load_graph(spec)
        return self._cache[key]

    def graphs(self) -> list[tuple[str, Graph]]:
        return [(s, self.graph(s)) for s in self.cfg.graphs]

    def algebra(self, g: Graph, field_=None) -> LeavittPathAlgebra:
        field_ = field_ if field_ is not None else parse_field(self.cfg.field)
        key = ("alg", g, str(field_))
        if key not in self._cache:
            self._cache[key] = LeavittPathAlgebra(g, field_, mutation=self.cfg.mutation)
        return self._cache[key]

    def polys(self) -> list[Polynomial]:
        return [parse_polynomial(p) for p in self.cfg.polys]

    def space(self, g: Graph, c: Cycle, f: Polynomial) -> ModuleSpace:
        key = ("space", g, c, str(f), str(f.field))
        if key not in self._cache:
            self._cache[key] = ModuleSpace(g, c, f, algebra=self.algebra(g, f.field))
        return self._cache[key]

    def spaces(self, g: Graph, cs: Iterable[Cycle]) -> list[ModuleSpace]:
        """One module per (cycle, f); sinks only once per base field."""
        out, seen = [], set()
        for c in cs:
            for f in self.polys():
                sp = self.space(g, c, f)
                key = (c, str(sp.f), str(sp.base))
                if key not in seen:
                    seen.add(key)
                    out.append(sp)
        return out

    def cycles(self, g: Graph) -> list[Cycle]:
        cs = cycles(g)
        if not self.cfg.cycles:
            return cs
        keep = []
        for name in self.cfg.cycles:
            try:
                c = find_cycle(g, name)
            except GraphError:
                continue
            if c not in keep:
                keep.append(c)
        return [c for c in cs if c in keep]

    def count(self, n: int) -> int:
        return max(1, round(n * self.cfg.scale))

    def horizons(self) -> list[int]:
        lo = min(self.cfg.min_horizon, self.cfg.horizon)
        return list(range(lo, self.cfg.horizon + 1))


@dataclass(frozen=True)
class Check:
    name: str
    criterion: int
    description: str
    fn: Callable[[Context, Tally], None]


CHECKS: dict[str, Check] = {}


def register(name: str, criterion: int, description: str):
    def deco(fn):
        CHECKS[name] = Check(name, criterion, description, fn)
        return fn

    return deco


def _selected(name: str, select: Iterable[str] | None) -> bool:
    if not select:
        return True
    return any(name == s or name.startswith(s.rstrip(".") + ".") or str(CHECKS[name].criterion) == s
               for s in select)


def run_check(name: str, cfg: SuiteConfig, cache: dict | None = None) -> CheckResult:
    chk = CHECKS[name]
    ctx = Context(cfg, name, cache if cache is not None else {})
    tally = Tally()
    t0 = time.perf_counter()
    chk.fn(ctx, tally)
    dt = time.perf_counter() - t0
    return CheckResult(chk.name, chk.criterion, chk.description, tally.status, tally.passed,
                       tally.failed, tally.insufficient, tally.counterexample, dt)


def run_suite(cfg: SuiteConfig) -> Report:
    cfg.validate()
    cache: dict = {}
    for spec in cfg.graphs:
        cache[("graph", spec)] = load_graph(spec)
    if cfg.cycles:
        for name in cfg.cycles:
            if not any(_has_cycle(cache[("graph", s)], name) for s in cfg.graphs):
                raise ConfigError(f"cycle {name!r} occurs in none of the graphs")
    report = Report(cfg)
    for name in sorted(CHECKS, key=lambda n: (CHECKS[n].criterion, n)):
        if _selected(name, cfg.select):
            report.results.append(run_check(name, cfg, cache))
    return report


def _has_cycle(g: Graph, name: str) -> bool:
    try:
        find_cycle(g, name)
        return True
    except GraphError:
        return False


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _names(paths: Iterable[Path]) -> set[str]:
    return {str(p) for p in paths}


def walk_counts(g: Graph, c: Cycle, n: int) -> list[int]:
    """|P_c| by length 0..n, counted by dynamic programming over vertices."""
    # W[k][v] = number of paths of length k from v to s(c)
    W = [{v: int(v == c.vertex) for v in g.vertices}]
    for _ in range(n):
        prev = W[-1]
        W.append({v: sum(prev[e.dst] for e in g.edges if e.src == v) for v in g.vertices})
    total = [sum(w.values()) for w in W]
    m = len(c.edges)
    if not m:
        return total
    # a path ending with a full traverse of c is any path to s(c) followed by c
    return [total[k] - (total[k - m] if k >= m else 0) for k in range(n + 1)]


def pc_stabilizes(g: Graph, c: Cycle) -> bool:
    N = len(g.vertices) * (len(g.edges) + 1)
    counts = walk_counts(g, c, N + len(g.edges) + 1)
    return sum(counts[: N + 1]) == sum(counts)


def proper_series_generators(space: ModuleSpace):
    """Geometric series prefix (d)^i suffix for every cycle d upstream of s(c)."""
    g, c = space.graph, space.cycle
    out = []
    for d in proper_cycles(g):
        if d == c:
            continue
        suffix = _shortest_path(g, d.vertex, c.vertex)
        if suffix is None:
            continue
        if c.edges and suffix.edges[-len(c.edges):] == c.edges:
            continue
        out.append(geometric(space, (), d.edges, suffix.edges))
    return out


def _shortest_path(g: Graph, a: str, b: str) -> Path | None:
    frontier = [Path(a, a)]
    seen = {a}
    while frontier:
        nxt = []
        for p in frontier:
            if p.end == b:
                return p
            for e in g.out_edges(p.end):
                w = g.r(e)
                if w not in seen:
                    seen.add(w)
                    nxt.append(Path(a, w, p.edges + (e,)))
        frontier = nxt
    return None


def _sample_series(ctx: Context, space: ModuleSpace, L: int) -> SeriesElement:
    return random_series(space, ctx.rng, L, density=0.4, max_j=3)


# ---------------------------------------------------------------------------
# 1-2: graphs
# ---------------------------------------------------------------------------


@register("graph.census", 1, "fig1: cycles, P_d, hereditary sets, vertex classes")
def _graph_census(ctx: Context, t: Tally) -> None:
    g = ctx.graph("fig1")
    t.record(has_disjoint_cycles(g), claim="fig1 has disjoint cycles")
    got = {str(c) for c in cycles(g)}
    t.record(got == {"d1d2d3d4", "g1g2g3", "l", "Sink(w)"}, claim="cycles", got=sorted(got))
    d = find_cycle(g, "d1d2d3d4")
    got = _names(enumerate_Pc(g, d, 10))
    t.record(got == {"s1", "d4", "pd4", "d3d4", "d2d3d4"}, claim="P_d", got=sorted(got))
    got = _names(enumerate_Pc(g, find_cycle(g, "g1g2g3"), 0))
    t.record(got == {"t1"}, claim="P_g at length 0", got=sorted(got))
    t.record(sinks(g) == ["w"], claim="sinks", got=sinks(g))
    t.record(sources(g) == ["ubar"], claim="sources", got=sources(g))
    H = {"t1", "t2", "t3", "w", "z"}
    t.record(is_hereditary(g, H) and not is_saturated(g, H), claim="{t1,t2,t3,w,z} hereditary, not saturated")
    H2 = H | {"v"}
    t.record(is_hereditary(g, H2) and is_saturated(g, H2), claim="{v,t1,t2,t3,w,z} hereditary and saturated")
    EH = restrict(g, H2)
    got = {e.id for e in EH.edges}
    t.record(got == {"g1", "g2", "g3", "h", "e", "l", "n"}, claim="E_H edges", got=sorted(got))
    poset = vertex_equivalence_classes(g)
    got = {frozenset(cl) for cl in poset.classes}
    want = {frozenset(x) for x in (["ubar"], ["s1", "s2", "s3", "s4"], ["v"], ["t1", "t2", "t3"], ["w"], ["z"])}
    t.record(got == want, claim="vertex classes", got=sorted(map(sorted, got)))
    t.record(poset.maximal == [("ubar",)], claim="maximal class", got=poset.maximal)
    paths = [g.parse_path(w) for w in ("g3h", "bg3", "bg3h", "bg3g1e")]
    got = _names(filter_paths(g, ["s2"], paths, ["w", "z"]))
    t.record(got == {"bg3h", "bg3g1e"}, claim="path filter", got=sorted(got))


@register("graph.closed-paths", 2, "disjoint cycles agrees with closed paths being cycle powers")
def _graph_closed_paths(ctx: Context, t: Tally) -> None:
    graphs = {name: load_corpus(name) for name in corpus_names()}
    for spec, g in ctx.graphs():
        graphs.setdefault(spec, g)
    f1 = load_corpus("fig1")
    graphs["fig1+t2t1"] = Graph(f1.vertices, f1.edges + (Edge("k", "t2", "t1"),))
    for name, g in sorted(graphs.items()):
        a = has_disjoint_cycles(g)
        b = closed_paths_are_cycle_powers(g, 12)
        t.record(a == b, graph=name, disjoint=a, cycle_powers=b)
    t.record(not has_disjoint_cycles(graphs["rose2"]), claim="rose2 fails the condition")
    t.record(not has_disjoint_cycles(graphs["fig1+t2t1"]), claim="fig1 plus t2->t1 fails the condition")


# ---------------------------------------------------------------------------
# 3-4: the algebra
# ---------------------------------------------------------------------------


@register("algebra.ring-axioms", 3, "ring axioms, involution and parser round trip on random triples")
def _algebra_ring(ctx: Context, t: Tally) -> None:
    for spec, g in ctx.graphs():
        A = ctx.algebra(g)
        for _ in range(ctx.count(200)):
            a, b, c = (random_element(A, ctx.rng) for _ in range(3))
            w = dict(graph=spec, a=a, b=b, c=c)
            t.record((a * b) * c == a * (b * c), law="associativity", **w)
            t.record(a * (b + c) == a * b + a * c, law="left distributivity", **w)
            t.record((a + b) * c == a * c + b * c, law="right distributivity", **w)
            t.record(A.one * a == a == a * A.one, law="unit", **w)
            t.record((a * b).star() == b.star() * a.star(), law="star reverses products", **w)
            t.record(a.star().star() == a, law="star is an involution", **w)
            t.record(A.element(dict(a.terms)) == a, law="normal form is idempotent", **w)
            t.record(A.parse(str(a)) == a, law="parse(format(a)) = a", **w)


@register("algebra.ck-relations", 3, "defining relations on all vertices and edges")
def _algebra_relations(ctx: Context, t: Tally) -> None:
    for spec, g in ctx.graphs():
        A = ctx.algebra(g)
        V = {v: A.vertex(v) for v in g.vertices}
        for v in g.vertices:
            for w in g.vertices:
                want = V[v] if v == w else A.zero
                t.record(V[v] * V[w] == want, graph=spec, relation=f"{v} {w}")
        for e in g.edge_ids:
            E, Es = A.edge(e), A.ghost(e)
            s, r = V[g.s(e)], V[g.r(e)]
            t.record(s * E == E == E * r, graph=spec, relation=f"s({e}) {e} = {e} = {e} r({e})")
            t.record(r * Es == Es == Es * s, graph=spec, relation=f"r({e}) {e}* = {e}* = {e}* s({e})")
            for f in g.edge_ids:
                want = r if e == f else A.zero
                lhs = Es * A.edge(f)
                t.record(lhs == want, graph=spec, relation=f"{e}* {f}", got=lhs)
        for v in g.vertices:
            out = g.out_edges(v)
            if not out:
                continue
            lhs = A.zero
            for e in out:
                lhs = lhs + A.edge(e) * A.ghost(e)
            t.record(lhs == V[v], graph=spec, relation=f"sum of e e* over s^-1({v}) = {v}", got=lhs)


@register("algebra.orthogonality", 3, "gamma1* gamma2 = delta s(c) on P_c up to length 6")
def _algebra_orthogonality(ctx: Context, t: Tally) -> None:
    for spec in ("fig1", "fig3"):
        g = ctx.graph(spec)
        A = ctx.algebra(g)
        for c in cycles(g):
            P = enumerate_Pc(g, c, 6)
            top = A.vertex(c.vertex)
            ghosts = [A.ghost_path(p) for p in P]
            reals = [A.path(p) for p in P]
            for i, gs in enumerate(ghosts):
                for k, r in enumerate(reals):
                    got = gs * r
                    want = top if i == k else A.zero
                    t.record(got == want, graph=spec, cycle=c, g1=P[i], g2=P[k], got=got)


@register("algebra.principal-membership", 4, "lambda p(tau) = eps_j* (tau*)^l on fig3")
def _algebra_membership(ctx: Context, t: Tally) -> None:
    g = ctx.graph("fig3")
    A = ctx.algebra(g, QQ)
    _, corner = corner_idempotents(A, "tau")
    tau = A.edge("tau")
    for ps in MEMBERSHIP_POLYS:
        p = parse_polynomial(ps + " over Q")
        ptau = poly_at(A, p, tau)
        for j, eps in enumerate(corner.entering, start=1):
            for ell in range(6):
                want = A.ghost(eps) * A.ghost("tau") ** ell
                lam = principal_membership(A, "tau", p, j, ell)
                t.record(lam * ptau == want, p=ps, j=j, ell=ell, lam=lam)


# ---------------------------------------------------------------------------
# 5: modules
# ---------------------------------------------------------------------------


@register("module.associativity", 5, "act(ab, m) = act(a, act(b, m)) and linearity")
def _module_assoc(ctx: Context, t: Tally) -> None:
    for spec, g in ctx.graphs():
        for U in ctx.spaces(g, ctx.cycles(g)):
            A = U.algebra
            for _ in range(ctx.count(500)):
                a, b = random_element(A, ctx.rng), random_element(A, ctx.rng)
                m = U.random_element(ctx.rng)
                w = dict(graph=spec, module=U, a=a, b=b, m=m)
                t.record(U.act(a * b, m) == U.act(a, U.act(b, m)), law="associativity", **w)
                t.record(U.act(a + b, m) == U.act(a, m) + U.act(b, m), law="additivity", **w)
            m = U.random_element(ctx.rng)
            t.record(U.act(A.one, m) == m, law="unit", graph=spec, module=U, m=m)


@register("module.generator-identities", 5, "recursion, vertex kill and e_1* formula for alpha_m, m <= 5")
def _module_generators(ctx: Context, t: Tally) -> None:
    for spec, g in ctx.graphs():
        for U in ctx.spaces(g, [c for c in ctx.cycles(g) if not c.is_sink]):
            A = U.algebra
            c = U.cycle
            cyc = A.path(g.path(c.edges))
            tail = U.tail
            for m in range(1, 6):
                am = U.alpha(m)
                prev = U.alpha(m - 1) if m > 1 else U.zero
                w = dict(graph=spec, module=U, m=m)
                got = U.act(cyc, am) * U.xbar_inv - am
                t.record(got == prev, identity="(xbar^-1 c - 1) alpha_m = alpha_(m-1)", got=got, **w)
                for u in g.vertices:
                    want = am if u == c.vertex else U.zero
                    t.record(U.act(A.vertex(u), am) == want, identity=f"{u} alpha_m", **w)
                want = U.zero
                for l in range(m):
                    want = want + U.vector(tail, 0, m - l, (-1) ** l)
                want = want * U.xbar_inv
                for e in g.edge_ids:
                    got = U.act(A.ghost(e), am)
                    t.record(got == (want if e == U.e1 else U.zero), identity=f"{e}* alpha_m", got=got, **w)
                # relations applied one generator at a time
                for e in g.edge_ids:
                    for f in g.edge_ids:
                        got = U.act(A.ghost(f), U.act(A.edge(e), am))
                        want_ef = U.act(A.vertex(g.r(e)), am) if e == f else U.zero
                        t.record(got == want_ef, identity=f"{f}*({e} alpha_m)", got=got, **w)
                for v in g.vertices:
                    if not g.out_edges(v):
                        continue
                    got = U.zero
                    for e in g.out_edges(v):
                        got = got + U.act(A.edge(e), U.act(A.ghost(e), am))
                    t.record(got == U.act(A.vertex(v), am), identity=f"sum e(e* alpha_m) at {v}", got=got, **w)


# ---------------------------------------------------------------------------
# 6-7: the formal-series module
# ---------------------------------------------------------------------------


def _ck_claims(t: Tally, g: Graph, z: SeriesElement, w: dict) -> None:
    V, E = g.vertices, g.edge_ids
    Pz = {v: op_Pv(v, z) for v in V}
    for v in V:
        for u in V:
            want = Pz[v] if v == u else SeriesElement.zero(z.space, z.horizon)
            t.trial(lambda: compare(op_Pv(v, Pz[u]), want), claim=f"P_{v} P_{u}", **w)
    total = SeriesElement.zero(z.space, z.horizon)
    for v in V:
        total = total + Pz[v]
    t.record(compare(total, z), claim="sum of P_v is the identity", **w)
    Se: dict = {}
    for e in E:
        try:
            Se[e] = op_Se(e, z)
        except InsufficientHorizon:
            t.insufficient += 1
            continue
        t.trial(lambda: compare(op_Pv(g.s(e), Se[e]), Se[e]), claim=f"P_s S_{e} = S_{e}", **w)
        t.trial(lambda: compare(op_Se(e, Pz[g.r(e)]), Se[e]), claim=f"S_{e} P_r = S_{e}", **w)
    for e in E:
        t.trial(lambda: compare(op_Pv(g.r(e), op_Sfstar(e, z)), op_Sfstar(e, z)),
                claim=f"P_r S_{e}* = S_{e}*", **w)
        t.trial(lambda: compare(op_Sfstar(e, Pz[g.s(e)]), op_Sfstar(e, z)),
                claim=f"S_{e}* P_s = S_{e}*", **w)
    for e, y in Se.items():
        for f in E:
            def claim4(e=e, f=f, y=y):
                got = op_Sfstar(f, y)
                want = Pz[g.r(e)] if e == f else SeriesElement.zero(z.space, got.horizon)
                return compare(got, want)

            t.trial(claim4, claim=f"S_{f}* S_{e} = delta P_r", **w)
    for v in V:
        out = g.out_edges(v)
        if not out:
            continue

        def claim5(v=v, out=out):
            acc = SeriesElement.zero(z.space)
            for e in out:
                acc = acc + op_Se(e, op_Sfstar(e, z))
            return compare(acc, Pz[v])

        t.trial(claim5, claim=f"sum S_e S_e* = P_{v}", **w)


@register("envelope.ck-family", 6, "operators P_v, S_e, S_f* satisfy the defining relations")
def _envelope_ck(ctx: Context, t: Tally) -> None:
    hs = ctx.horizons()
    for spec, g in ctx.graphs():
        for c in ctx.cycles(g):
            spaces = [sp for sp in ctx.spaces(g, [c])]
            for i in range(ctx.count(100)):
                U = spaces[i % len(spaces)]
                L = hs[i % len(hs)]
                z = _sample_series(ctx, U, L)
                _ck_claims(t, g, z, dict(graph=spec, module=U, horizon=L, z=z))


@register("envelope.embedding", 6, "the series action extends the module action and respects products")
def _envelope_embedding(ctx: Context, t: Tally) -> None:
    L = ctx.cfg.horizon
    for spec, g in ctx.graphs():
        spaces = ctx.spaces(g, ctx.cycles(g))
        for i in range(ctx.count(100)):
            U = spaces[i % len(spaces)]
            A = U.algebra
            a, b = random_element(A, ctx.rng), random_element(A, ctx.rng)
            m = U.random_element(ctx.rng)
            w = dict(graph=spec, module=U, a=a, m=m)
            t.trial(lambda: compare(act_series(a, SeriesElement.from_module(m)),
                                    SeriesElement.from_module(U.act(a, m))), law="embedding", **w)
            z = _sample_series(ctx, U, L)
            t.trial(lambda: compare(act_series(a * b, z), act_series(a, act_series(b, z))),
                    law="homomorphism", b=b, z=z, **w)
            t.trial(lambda: compare(act_series(a + b, z), act_series(a, z) + act_series(b, z)),
                    law="additivity", b=b, z=z, **w)
        # truncation commutes with the operators on proper series
        for U in spaces:
            for gen in proper_series_generators(U):
                ops = [ctx.rng.choice(g.edge_ids) for _ in range(3)]
                kinds = [ctx.rng.choice(["S", "S*"]) for _ in ops]

                def apply(z):
                    for e, kind in zip(ops, kinds):
                        z = op_Se(e, z) if kind == "S" else op_Sfstar(e, z)
                    return z

                t.trial(lambda: compare(apply(gen.materialize(L)), apply(gen.materialize(L + 3))),
                        law="horizon soundness", module=U, series=gen.name, ops=list(zip(kinds, ops)))


def _check_witness(z: SeriesElement) -> bool:
    gamma0, u = essential_witness(z)
    if gamma0 not in z.support() or u.is_zero():
        return False
    return all(b.path.start == z.space.top and not b.path.edges for b, _ in u.to_basis())


@register("envelope.essential", 7, "every nonzero truncated series has a witness gamma0")
def _envelope_essential(ctx: Context, t: Tally) -> None:
    hs = ctx.horizons()
    for spec, g in ctx.graphs():
        for c in ctx.cycles(g):
            spaces = ctx.spaces(g, [c])
            for i in range(ctx.count(100)):
                U = spaces[i % len(spaces)]
                z = random_nonzero_series(U, ctx.rng, hs[i % len(hs)], density=0.2)
                t.trial(lambda: _check_witness(z), graph=spec, module=U, z=z)
            for U in spaces:
                for gen in proper_series_generators(U):
                    z = gen.materialize(ctx.cfg.horizon)
                    if z.coeffs:
                        t.trial(lambda: _check_witness(z), graph=spec, module=U, series=gen.name)


# ---------------------------------------------------------------------------
# 8: constructions around a source loop
# ---------------------------------------------------------------------------


def _fig3_spaces(ctx: Context) -> list[ModuleSpace]:
    g = ctx.graph("fig3")
    cs = [c for c in ctx.cycles(g) if c.edges != ("tau",)]
    return [U for U in ctx.spaces(g, cs) if U.base == QQ]


@register("envelope.corner-extension", 8, "extend_from_corner_data restricts back to its table")
def _envelope_extend(ctx: Context, t: Tally) -> None:
    g = ctx.graph("fig3")
    entering = [e for e in g.out_edges("t") if e != "tau"]
    keys = [(k, j) for k in range(4) for j in range(1, len(entering) + 1)]
    L = ctx.cfg.horizon
    for U in _fig3_spaces(ctx):
        for _ in range(ctx.count(20)):
            table = {}
            for key in ctx.rng.sample(keys, 3):
                z = random_series(U, ctx.rng, L, density=0.5)
                table[key] = op_Pv(g.r(entering[key[1] - 1]), z)

            def trial(table=table):
                chi = extend_from_corner_data(U, "tau", table)
                verdicts = set(restriction_check(U, "tau", table, chi).values())
                if Verdict.UNEQUAL in verdicts:
                    return False
                return Verdict.INSUFFICIENT if Verdict.INSUFFICIENT in verdicts else Verdict.EQUAL

            t.trial(trial, module=U, table={k: str(v.to_module()) for k, v in sorted(table.items())})


@register("envelope.inverse-action", 8, "p(tau) applied to P(tau) z returns z")
def _envelope_inverse(ctx: Context, t: Tally) -> None:
    L = ctx.cfg.horizon
    for U in _fig3_spaces(ctx):
        for ps in MEMBERSHIP_POLYS:
            p = parse_polynomial(ps + " over Q")
            for _ in range(ctx.count(5)):
                z = random_series(U, ctx.rng, L, density=0.4)
                t.trial(lambda: inverse_check(p, "tau", z, inverse_series_action(p, "tau", z)),
                        module=U, p=ps, z=z)


@register("envelope.finiteness", 8, "U = U-hat exactly for maximal cycles")
def _envelope_finiteness(ctx: Context, t: Tally) -> None:
    graphs = {name: load_corpus(name) for name in corpus_names()}
    for spec, g in ctx.graphs():
        graphs.setdefault(spec, g)
    for name, g in sorted(graphs.items()):
        if not has_disjoint_cycles(g):
            continue
        for c in cycles(g):
            got = is_U_equal_Uhat(g, c)
            t.record(got == pc_stabilizes(g, c), graph=name, cycle=c, claimed=got)
            upstream = any(d != c and any(v in _reach(g, d) for v in [c.vertex]) for d in proper_cycles(g))
            t.record(got == (not upstream), graph=name, cycle=c, claimed=got, criterion="maximal cycle")
    fig1 = load_corpus("fig1")
    got = sorted(str(c) for c in cycles(fig1) if is_U_equal_Uhat(fig1, c))
    t.record(got == ["d1d2d3d4"], graph="fig1", finite=got)


def _reach(g: Graph, d: Cycle) -> set[str]:
    seen = set(cycle_vertices(g, d))
    stack = list(seen)
    while stack:
        v = stack.pop()
        for e in g.out_edges(v):
            w = g.r(e)
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


# ---------------------------------------------------------------------------
# 9: reductions
# ---------------------------------------------------------------------------


@register("reduce.theta", 9, "theta is multiplicative and unital on the example57 collapse")
def _reduce_theta(ctx: Context, t: Tally) -> None:
    E = ctx.graph("example57")
    cc = collapse_cycle(E, find_cycle(E, "d1d2d3d4"))
    FA, EA = cc.algebras(QQ)
    for bad in cc.check_theta_multiplicative(QQ, ctx.count(200), ctx.rng):
        t.record(False, x=bad[0], y=bad[1], theta_xy=bad[2], theta_x_theta_y=bad[3])
    t.passed += ctx.count(200) - t.failed
    t.record(cc.theta(FA.one, EA) == cc.omega(EA), claim="theta(1) = omega")
    F = cc.collapsed
    t.record(len(F.vertices) < len(E.vertices), claim="fewer vertices")
    want = {"dprime": "d1d2d3d4", cc.phi["b"]: "d1b", cc.phi["m"]: "d1d2m"}
    for f, w in want.items():
        t.record(str(cc.theta_table[f]) == w, claim=f"theta({f})", got=cc.theta_table[f])
    rest_E = sorted(str(c) for c in cycles(E) if c != cc.d)
    rest_F = sorted(str(c) for c in cycles(F) if c.edges != (cc.dprime,))
    t.record(rest_E == rest_F, claim="cycle census", E=rest_E, F=rest_F)
    t.record(sorted(str(cc.cycle_in_F(c)) for c in cycles(E) if c != cc.d) == rest_F, claim="cycle map")


@register("reduce.example-transport", 9, "the example57 transport identity at horizon 6")
def _reduce_example(ctx: Context, t: Tally) -> None:
    E = ctx.graph("example57")
    d = find_cycle(E, "d1d2d3d4")
    cc = collapse_cycle(E, d)
    F = cc.collapsed
    c = find_cycle(E, "g1g2g3")
    tag = Monomial(E.vertex_path("s4"), E.path(["d1", "d2", "d3"]))
    for f in ctx.polys():
        U = ctx.space(E, c, f)
        UF = ModuleSpace(F, c, U.f)
        H = 6
        # the constant family gamma_i = g3
        z = geometric(U, ("d4",), d.edges, ("d1", "b", "g3")).materialize(cc.r * H)
        want = geometric(UF, ("dprime",), ("dprime",), (cc.phi["b"], "g3")).materialize(H)
        x = transport_collapse(cc, z)
        t.record(list(x.parts) == [tag], module=U, tags=[format_monomial(k) for k in x.parts if k])
        t.record(x.horizon == H and compare(x.parts[tag], want) is Verdict.EQUAL,
                 module=U, got=x.parts[tag].to_module(), want=want.to_module())
        # a random family gamma_i in P_c starting at t3
        gammas = [p for p in enumerate_Pc(E, c, 4) if p.start == "t3"]
        zc, wc = {}, {}
        for i in range(H):
            gi = ctx.rng.choice(gammas)
            k = U.K(ctx.rng.choice([1, 2, -1, 3]))
            ep = ("d4",) + d.edges * i + ("d1", "b") + gi.edges
            zc[(Path("s4", c.vertex, ep), 1)] = k
            fp = ("dprime",) * (i + 1) + (cc.phi["b"],) + gi.edges
            wc[(Path(cc.vbar, c.vertex, fp), 1)] = UF.K.from_coefficients(k.coeffs)
        z = SeriesElement(U, zc, cc.r * H)
        want = SeriesElement(UF, {k: v for k, v in wc.items() if k[0].length <= H}, H)
        x = transport_collapse(cc, z)
        t.record(list(x.parts) == [tag] and compare(x.parts[tag], want) is Verdict.EQUAL,
                 module=U, z=z.to_module(), got=x.parts[tag].to_module() if tag in x.parts else None)


@register("reduce.sources", 9, "source elimination reaches a sourceless graph, order-independently")
def _reduce_sources(ctx: Context, t: Tally) -> None:
    g = ctx.graph("fig1")
    h, steps = eliminate_all_sources(g)
    t.record(len(steps) == 1 and not sources(h), claim="fig1 in one pass", steps=len(steps))
    E = ctx.graph("example57")
    t.record(set(h.vertices) == set(E.vertices) and set(h.edges) == set(E.edges),
             claim="fig1 without its source is example57")
    for name in corpus_names():
        g = load_corpus(name)
        base, _ = eliminate_all_sources(g)
        for _ in range(5):
            other, _ = eliminate_all_sources(g, order="random", rng=ctx.rng)
            t.record(set(other.vertices) == set(base.vertices) and set(other.edges) == set(base.edges),
                     claim="confluence", graph=name)
    for name in corpus_names():
        g = load_corpus(name)
        if not has_disjoint_cycles(g):
            continue
        red = reduce_graph(g)
        for h in red.graphs:
            t.record(is_reduced(h) and has_disjoint_cycles(h), claim="pipeline normal form", graph=name)


@register("reduce.round-trip", 9, "source and collapse transports invert on truncated bases")
def _reduce_round_trip(ctx: Context, t: Tally) -> None:
    L = ctx.cfg.horizon
    g = ctx.graph("fig1")
    _, steps = eliminate_all_sources(g)
    se = steps[0]
    for U in ctx.spaces(g, ctx.cycles(g)):
        for _ in range(ctx.count(10)):
            z = _sample_series(ctx, U, L)
            m = SeriesElement.from_module(U.random_element(ctx.rng, maxlen=6))
            for s in (z, m):
                def trial(s=s):
                    x = transport_source(se, s)
                    back = transport_source_inverse(se, U, x)
                    if compare(back, s) is not Verdict.EQUAL:
                        return False
                    return tagged_equal(transport_source(se, back), x)

                t.trial(trial, step="source", module=U, z=s.to_module())
    E = ctx.graph("example57")
    cc = collapse_cycle(E, find_cycle(E, "d1d2d3d4"))
    for U in ctx.spaces(E, ctx.cycles(E)):
        UE = U
        for _ in range(ctx.count(10)):
            z = _sample_series(ctx, U, L)
            m = SeriesElement.from_module(U.random_element(ctx.rng, maxlen=8))
            for s in (z, m):
                def trial(s=s):
                    x = transport_collapse(cc, s)
                    back = transport_collapse_inverse(cc, UE, x)
                    return compare(back, s)

                t.trial(trial, step="collapse", module=U, z=s.to_module())
            def exact(m=m):
                x = transport_collapse(cc, m)
                return tagged_equal(transport_collapse(cc, transport_collapse_inverse(cc, UE, x)), x)

            t.trial(exact, step="collapse, tagged side", module=U, z=m.to_module())
        # every basis vector up to length L maps to a distinct tagged basis vector
        basis = U.basis(L, max_j=2)
        images = set()
        ok = True
        for b in basis:
            x = transport_collapse(cc, SeriesElement.from_module(U.vector(b.path, b.h, b.j)))
            key = tuple(sorted((format_monomial(tag) if tag else "", str(y.to_module())) for tag, y in x.parts.items()))
            ok = ok and key not in images
            images.add(key)
        t.record(ok, step="collapse basis injectivity", module=U, basis=len(basis))
