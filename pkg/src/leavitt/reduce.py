"""Graph reductions that preserve the module categories involved.

* component splitting,
* elimination of a source vertex (corner by eps = sum of the other vertices),
* collapse of a source cycle d = d_1...d_r (r >= 2) to a loop d' (corner by
  omega = s(d_1) + vertices off d, identified with L(F) through theta).

Transport maps send a truncated series over E to a *tagged* element: a finite
sum ``tag (x) y`` where ``tag`` is a monomial of L(E) (None for the corner
idempotent itself) and ``y`` a truncated series over the reduced graph.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable

from .algebra import AlgebraElement, LeavittPathAlgebra, Monomial, format_monomial
from .chenmod import ModuleSpace, _add
from .envelope import InsufficientHorizon, SeriesElement, compare, Verdict
from .graph import (
    Cycle,
    Edge,
    Graph,
    GraphError,
    Path,
    cycle_vertices,
    cycles,
    has_disjoint_cycles,
    proper_cycles,
    restrict,
    sources,
)

# ---------------------------------------------------------------------------
# Components
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Component:
    graph: Graph
    vertices: tuple[str, ...]  # the idempotent rho_i is their sum

    def idempotent(self, alg: LeavittPathAlgebra) -> AlgebraElement:
        return alg.idempotent(self.vertices)


def split_components(g: Graph) -> list[Component]:
    parent = {v: v for v in g.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in g.edges:
        a, b = find(e.src), find(e.dst)
        if a != b:
            parent[b] = a
    groups: dict[str, list[str]] = {}
    for v in g.vertices:
        groups.setdefault(find(v), []).append(v)
    out = []
    for vs in groups.values():
        vset = set(vs)
        sub = Graph(tuple(vs), tuple(e for e in g.edges if e.src in vset))
        out.append(Component(sub, tuple(vs)))
    return out


def component_of(g: Graph, c: Cycle) -> Component:
    return next(comp for comp in split_components(g) if c.vertex in comp.vertices)


# ---------------------------------------------------------------------------
# Tagged elements
# ---------------------------------------------------------------------------


@dataclass
class TaggedElement:
    """sum over tags of ``tag (x) right``; a tag of None is the corner idempotent."""

    parts: dict  # Monomial | None -> SeriesElement over the reduced graph
    horizon: float
    corner: str = "eps"

    def tags(self) -> list:
        return sorted(self.parts, key=lambda t: (t is not None, t.sort_key() if t else ()))

    def __str__(self) -> str:
        lines = []
        for t in self.tags():
            label = self.corner if t is None else format_monomial(t)
            lines.append(f"{label} (x) {self.parts[t].to_module()}")
        return "\n".join(lines) if lines else "0"


def _space_like(space: ModuleSpace, graph: Graph, cycle: Cycle) -> ModuleSpace:
    return ModuleSpace(graph, cycle, space.f, simple=space.simple)


# ---------------------------------------------------------------------------
# Source elimination
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceElimination:
    original: Graph
    source: str
    reduced: Graph

    @property
    def H(self) -> tuple[str, ...]:
        return self.reduced.vertices

    def epsilon(self, alg: LeavittPathAlgebra) -> AlgebraElement:
        return alg.idempotent(self.H)


def eliminate_source(g: Graph, u: str) -> SourceElimination:
    if not g.has_vertex(u):
        raise GraphError(f"unknown vertex {u!r}")
    if g.in_edges(u):
        raise GraphError(f"{u} is not a source")
    if not g.out_edges(u):
        raise GraphError(f"{u} is isolated; split components first")
    H = [v for v in g.vertices if v != u]
    # E^0 minus a source is hereditary but in general not saturated
    return SourceElimination(g, u, restrict(g, H, saturated=False))


def eliminable_sources(g: Graph) -> list[str]:
    return sorted(v for v in sources(g) if g.out_edges(v))


def eliminate_all_sources(g: Graph, order: str = "lex", rng: random.Random | None = None
                          ) -> tuple[Graph, list[SourceElimination]]:
    """Remove sources until none is left (isolated vertices are kept)."""
    steps = []
    while True:
        cand = eliminable_sources(g)
        if not cand:
            return g, steps
        u = rng.choice(cand) if order == "random" and rng else cand[0]
        step = eliminate_source(g, u)
        steps.append(step)
        g = step.reduced


def transport_source(se: SourceElimination, z: SeriesElement) -> TaggedElement:
    """gamma alpha -> eps (x) gamma alpha off the source, e (x) gamma' alpha for gamma = e gamma'."""
    space = z.space
    c = space.cycle
    if c.vertex == se.source or any(se.original.s(e) == se.source for e in c.edges):
        raise AssertionError("a cycle cannot pass through a source")
    sub = _space_like(space, se.reduced, c)
    parts: dict = {}
    H = z.horizon if z.horizon == math.inf else z.horizon - 1
    if H < 0:
        raise InsufficientHorizon("source transport needs horizon >= 1")
    for (p, j), k in z.coeffs.items():
        if p.start != se.source:
            tag, rest = None, p
        else:
            e = p.edges[0]
            tag = Monomial(Path(se.source, se.original.r(e), (e,)), Path(se.original.r(e), se.original.r(e)))
            rest = Path(se.original.r(e), p.end, p.edges[1:])
        _add(parts.setdefault(tag, {}), (rest, j), k)
    return TaggedElement({t: SeriesElement(sub, d, H) for t, d in parts.items()}, H, "eps")


def transport_source_inverse(se: SourceElimination, space: ModuleSpace, x: TaggedElement) -> SeriesElement:
    out: dict = {}
    for tag, y in x.parts.items():
        d = dict(y.coeffs)
        if tag is not None:
            for e in reversed(tag.real.edges):
                d = space._edge(e, d)
        for key, k in d.items():
            _add(out, key, k)
    return SeriesElement(space, out, x.horizon)


# ---------------------------------------------------------------------------
# Source-cycle collapse
# ---------------------------------------------------------------------------


def is_source_cycle(g: Graph, c: Cycle) -> bool:
    if c.is_sink:
        return False
    vs = set(cycle_vertices(g, c))
    return all(set(g.in_edges(v)) <= set(c.edges) for v in vs)


def source_cycles(g: Graph) -> list[Cycle]:
    return [c for c in proper_cycles(g) if is_source_cycle(g, c)]


def _fresh(name: str, taken: set[str]) -> str:
    while name in taken:
        name += "_"
    taken.add(name)
    return name


@dataclass
class CycleCollapse:
    original: Graph
    d: Cycle
    collapsed: Graph
    vbar: str
    dprime: str
    phi: dict  # E-edge f -> F-edge phi(f)
    theta_table: dict = field(default_factory=dict)  # F-symbol -> E-path
    _algebras: dict = field(default_factory=dict, repr=False)

    @property
    def r(self) -> int:
        return len(self.d.edges)

    @property
    def omega_vertices(self) -> tuple[str, ...]:
        dv = set(cycle_vertices(self.original, self.d))
        return tuple(v for v in self.original.vertices if v == self.d.vertex or v not in dv)

    def algebras(self, field_) -> tuple[LeavittPathAlgebra, LeavittPathAlgebra]:
        key = field_
        if key not in self._algebras:
            self._algebras[key] = (
                LeavittPathAlgebra(self.collapsed, field_),
                LeavittPathAlgebra(self.original, field_),
            )
        return self._algebras[key]

    def omega(self, alg: LeavittPathAlgebra) -> AlgebraElement:
        return alg.idempotent(self.omega_vertices)

    # -- theta ---------------------------------------------------------------

    def theta_path(self, p: Path) -> Path:
        E = self.original
        if not p.edges:
            v = self.d.vertex if p.start == self.vbar else p.start
            return Path(v, v)
        edges: tuple[str, ...] = ()
        for e in p.edges:
            edges += self.theta_table[e].edges
        return E.path(edges)

    def theta(self, a: AlgebraElement, target: LeavittPathAlgebra) -> AlgebraElement:
        terms = {}
        for m, k in a.terms.items():
            terms[Monomial(self.theta_path(m.real), self.theta_path(m.ghost))] = k
        return target.element(terms)

    def theta_inverse_word(self, p: Path) -> list[str]:
        """F-edges whose theta-image is the E-path p, which must start in omega."""
        E = self.original
        if p.start not in self.omega_vertices:
            raise ValueError(f"{p} does not start in the omega corner")
        d = self.d.edges
        out: list[str] = []
        pos = 0
        edges = p.edges
        while pos < len(edges):
            if E.s(edges[pos]) == self.d.vertex:
                i = 0
                while i < len(d) and pos + i < len(edges) and edges[pos + i] == d[i]:
                    i += 1
                if i == len(d):
                    out.append(self.dprime)
                    pos += i
                    continue
                if pos + i == len(edges):
                    raise ValueError(f"{p} stops inside the cycle {self.d}")
                f = edges[pos + i]
                out.append(self.phi[f])
                pos += i + 1
            else:
                out.append(edges[pos])
                pos += 1
        return out

    def cycle_in_F(self, c: Cycle) -> Cycle:
        if c == self.d:
            return Cycle(self.vbar, (self.dprime,))
        if c.vertex in cycle_vertices(self.original, self.d):
            raise ValueError(f"{c} meets the collapsed cycle")
        return c

    def check_theta_multiplicative(self, field_, pairs: int, rng: random.Random,
                                   maxdeg: int = 4) -> list[tuple]:
        """Counterexamples to theta(xy) = theta(x) theta(y) on random monomials."""
        FA, EA = self.algebras(field_)
        bad = []
        for _ in range(pairs):
            x = _random_monomial(FA, rng, maxdeg)
            y = _random_monomial(FA, rng, maxdeg)
            lhs = self.theta(x * y, EA)
            rhs = self.theta(x, EA) * self.theta(y, EA)
            if lhs != rhs:
                bad.append((str(x), str(y), str(lhs), str(rhs)))
        return bad


def _random_monomial(alg: LeavittPathAlgebra, rng: random.Random, maxdeg: int) -> AlgebraElement:
    g = alg.graph
    v = rng.choice(g.vertices)
    total = rng.randint(0, maxdeg)
    a = rng.randint(0, total)
    paths = []
    for n in (a, total - a):
        p = g.vertex_path(v)
        for _ in range(n):
            ins = g.in_edges(p.start)
            if not ins:
                break
            e = rng.choice(ins)
            p = Path(g.s(e), p.end, (e,) + p.edges)
        paths.append(p)
    return alg.monomial(paths[0], paths[1])


def collapse_cycle(g: Graph, d: Cycle) -> CycleCollapse:
    if d.is_sink or d not in cycles(g):
        raise GraphError(f"{d} is not a proper cycle of the graph")
    if len(d.edges) < 2:
        raise GraphError(f"{d} is already a loop")
    if not is_source_cycle(g, d):
        raise GraphError(f"{d} is not a source cycle")
    if not has_disjoint_cycles(g):
        raise GraphError("graph does not have disjoint cycles")
    dv = cycle_vertices(g, d)
    dset = set(dv)
    taken = set(g.vertices) | set(g.edge_ids)
    vbar = _fresh("vbar", taken)
    dprime = _fresh("dprime", taken)
    vertices = [vbar] + [v for v in g.vertices if v not in dset]
    edges = [Edge(dprime, vbar, vbar)]
    phi: dict[str, str] = {}
    table: dict[str, Path] = {dprime: g.path(d.edges)}
    for i, v in enumerate(dv):
        for f in g.out_edges(v):
            if f == d.edges[i]:
                continue
            if g.r(f) in dset:
                raise GraphError(f"edge {f} returns to the cycle {d}")
            name = _fresh(f"phi_{f}", taken)
            phi[f] = name
            edges.append(Edge(name, vbar, g.r(f)))
            table[name] = g.path(d.edges[:i] + (f,))
    for e in g.edges:
        if e.src not in dset:
            edges.append(e)
            table[e.id] = g.path([e.id])
    F = Graph(tuple(vertices), tuple(edges))
    return CycleCollapse(g, d, F, vbar, dprime, phi, table)


def transport_collapse(cc: CycleCollapse, z: SeriesElement) -> TaggedElement:
    """The basis map onto L(E) omega (x) (omega-corner series), read back in F.

    omega-paths rho go to omega (x) theta^{-1}(rho); a path s(d_i) p off the
    corner goes to (d_1...d_{i-1})* (x) theta^{-1}(d_1...d_{i-1} p), the right
    factor being computed by the F-action so that the case c = d (where the
    prefixed path is a full turn of d) lands on the wrap formula.
    """
    space = z.space
    E = cc.original
    cF = cc.cycle_in_F(space.cycle)
    sub = _space_like(space, cc.collapsed, cF)
    r = cc.r
    H = z.horizon if z.horizon == math.inf else z.horizon // r
    if space.cycle == cc.d and z.horizon < r - 1:
        # the wrap terms at F-length 0 come from E-paths of length up to r-1
        raise InsufficientHorizon(f"collapse transport of {cc.d} needs horizon >= {r - 1}")
    dv = cycle_vertices(E, cc.d)
    omega = set(cc.omega_vertices)
    top = Path(cF.vertex, cF.vertex)
    parts: dict = {}
    for (p, j), k in z.coeffs.items():
        if p.start in omega:
            tag, full = None, p
        else:
            i = dv.index(p.start)  # p starts at s(d_{i+1})
            prefix = cc.d.edges[:i]
            tag = Monomial(Path(p.start, p.start), Path(cc.d.vertex, p.start, prefix))
            full = Path(cc.d.vertex, p.end, prefix + p.edges)
        d = {(top, j): k}
        for f in reversed(cc.theta_inverse_word(full)):
            d = sub._edge(f, d)
        target = parts.setdefault(tag, {})
        for key, v in d.items():
            _add(target, key, v)
    return TaggedElement({t: SeriesElement(sub, d, H) for t, d in parts.items()}, H, "omega")


def transport_collapse_inverse(cc: CycleCollapse, space: ModuleSpace, x: TaggedElement) -> SeriesElement:
    """tag (x) y  ->  tag . theta(y), computed in the module over E."""
    out: dict = {}
    for tag, y in x.parts.items():
        d: dict = {}
        for (w, j), k in y.coeffs.items():
            _add(d, (cc.theta_path(w), j), k)
        if tag is not None:
            for e in tag.ghost.edges:
                d = space._ghost(e, d)
        for key, k in d.items():
            _add(out, key, k)
    # an omega-path of E-length m has F-length <= m, so nothing below x.horizon is missing
    return SeriesElement(space, out, x.horizon)


def tagged_equal(a: TaggedElement, b: TaggedElement) -> bool:
    tags = set(a.parts) | set(b.parts)
    for t in tags:
        ya, yb = a.parts.get(t), b.parts.get(t)
        if ya is None or yb is None:
            # a missing tag is zero, but only as far as both sides are known
            y = ya or yb
            if compare(y, SeriesElement.zero(y.space, min(a.horizon, b.horizon))) is not Verdict.EQUAL:
                return False
            continue
        if compare(ya, yb) is not Verdict.EQUAL:
            return False
    return True


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------


@dataclass
class Reduction:
    components: list[Component]
    eliminations: list[SourceElimination]
    collapses: list[CycleCollapse]
    graphs: list[Graph]  # final reduced graph per component


def reduce_graph(g: Graph, steps: Iterable[str] = ("components", "sources", "cycles")) -> Reduction:
    steps = list(steps)
    unknown = set(steps) - {"components", "sources", "cycles"}
    if unknown:
        raise ValueError(f"unknown reduction steps {sorted(unknown)}")
    comps = split_components(g) if "components" in steps else [Component(g, g.vertices)]
    elims: list[SourceElimination] = []
    colls: list[CycleCollapse] = []
    finals = []
    for comp in comps:
        h = comp.graph
        if "sources" in steps:
            h, done = eliminate_all_sources(h)
            elims += done
        if "cycles" in steps:
            while True:
                todo = [c for c in source_cycles(h) if len(c.edges) >= 2]
                if not todo:
                    break
                cc = collapse_cycle(h, todo[0])
                colls.append(cc)
                h = cc.collapsed
        finals.append(h)
    return Reduction(comps, elims, colls, finals)


def is_reduced(g: Graph) -> bool:
    """Connected, no sources unless a lone vertex, and all source cycles are loops."""
    if len(split_components(g)) != 1:
        return False
    if len(g.vertices) > 1 and sources(g):
        return False
    return all(len(c.edges) == 1 for c in source_cycles(g))
