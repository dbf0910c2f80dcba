"""Finite directed graphs, paths and cycles.

Everything here is an immutable value.  Orderings are deterministic: vertices
and edges keep declaration order, and paths sort by (length, edge ids).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class GraphError(ValueError):
    pass


_IDENT = re.compile(r"[A-Za-z0-9_.\-]+")


@dataclass(frozen=True, slots=True)
class Edge:
    id: str
    src: str
    dst: str


@dataclass(frozen=True, slots=True, order=False)
class Path:
    """A vertex (``edges == ()``) or a composable edge sequence."""

    start: str
    end: str
    edges: tuple[str, ...] = ()

    @property
    def length(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def is_vertex(self) -> bool:
        return not self.edges

    def sort_key(self) -> tuple:
        return (len(self.edges), self.edges, self.start)

    def __lt__(self, other: "Path") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return self.start if not self.edges else "".join(self.edges)

    def label(self, sep: str = " ") -> str:
        return self.start if not self.edges else sep.join(self.edges)


@dataclass(frozen=True, slots=True)
class Cycle:
    """A proper cycle ``e_1...e_n`` in canonical rotation, or a sink (``edges == ()``)."""

    vertex: str
    edges: tuple[str, ...] = ()

    @property
    def is_sink(self) -> bool:
        return not self.edges

    @property
    def length(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def name(self) -> str:
        return self.vertex if self.is_sink else "".join(self.edges)

    def __str__(self) -> str:
        return f"Sink({self.vertex})" if self.is_sink else self.name


@dataclass(frozen=True)
class Graph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    _edge_map: dict = field(init=False, repr=False, compare=False, hash=False)
    _out: dict = field(init=False, repr=False, compare=False, hash=False)
    _in: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not self.vertices:
            raise GraphError("graph needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            dup = next(v for v in self.vertices if self.vertices.count(v) > 1)
            raise GraphError(f"duplicate vertex {dup!r}")
        vset = set(self.vertices)
        emap: dict[str, Edge] = {}
        out: dict[str, list[str]] = {v: [] for v in self.vertices}
        inc: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges:
            if e.id in emap:
                raise GraphError(f"duplicate edge {e.id!r}")
            if e.id in vset:
                raise GraphError(f"identifier {e.id!r} names both a vertex and an edge")
            for end in (e.src, e.dst):
                if end not in vset:
                    raise GraphError(f"edge {e.id!r} uses undeclared vertex {end!r}")
            emap[e.id] = e
            out[e.src].append(e.id)
            inc[e.dst].append(e.id)
        object.__setattr__(self, "_edge_map", emap)
        object.__setattr__(self, "_out", {v: tuple(es) for v, es in out.items()})
        object.__setattr__(self, "_in", {v: tuple(es) for v, es in inc.items()})

    # -- basic structure ---------------------------------------------------

    def edge(self, eid: str) -> Edge:
        try:
            return self._edge_map[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    def has_edge(self, eid: str) -> bool:
        return eid in self._edge_map

    def has_vertex(self, v: str) -> bool:
        return v in self._out

    def s(self, eid: str) -> str:
        return self.edge(eid).src

    def r(self, eid: str) -> str:
        return self.edge(eid).dst

    def out_edges(self, v: str) -> tuple[str, ...]:
        return self._out[v]

    def in_edges(self, v: str) -> tuple[str, ...]:
        return self._in[v]

    def special_edge(self, v: str) -> str | None:
        """The first-declared edge emitted by ``v`` (None for sinks)."""
        out = self._out[v]
        return out[0] if out else None

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    # -- paths -------------------------------------------------------------

    def vertex_path(self, v: str) -> Path:
        if v not in self._out:
            raise GraphError(f"unknown vertex {v!r}")
        return Path(v, v)

    def path(self, edges: Sequence[str]) -> Path:
        edges = tuple(edges)
        if not edges:
            raise GraphError("use vertex_path for trivial paths")
        for a, b in zip(edges, edges[1:]):
            if self.r(a) != self.s(b):
                raise GraphError(f"edges {a} and {b} are not composable")
        return Path(self.s(edges[0]), self.r(edges[-1]), edges)

    def concat(self, p: Path, q: Path) -> Path | None:
        if p.end != q.start:
            return None
        return Path(p.start, q.end, p.edges + q.edges)

    def split_word(self, word: str) -> list[str] | None:
        """Segment ``word`` (e.g. ``"pd4"``) into a composable edge sequence."""
        ids = sorted(self._edge_map, key=len, reverse=True)

        def go(pos: int, prev: str | None) -> list[str] | None:
            if pos == len(word):
                return []
            for eid in ids:
                if word.startswith(eid, pos) and (prev is None or self.r(prev) == self.s(eid)):
                    rest = go(pos + len(eid), eid)
                    if rest is not None:
                        return [eid] + rest
            return None

        return go(0, None)

    def parse_path(self, text: str) -> Path:
        text = text.strip()
        if text in self._out:
            return Path(text, text)
        tokens = text.split()
        if len(tokens) > 1:
            return self.path(tokens)
        edges = self.split_word(text)
        if not edges:
            raise GraphError(f"{text!r} is not a path")
        return self.path(edges)

    def __str__(self) -> str:
        return format_graph(self)


def make_graph(vertices: Iterable[str], edges: Iterable[tuple[str, str, str]]) -> Graph:
    return Graph(tuple(vertices), tuple(Edge(*e) for e in edges))


def parse_graph(text: str) -> Graph:
    vertices: list[str] = []
    edges: list[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if any(not _IDENT.fullmatch(p) for p in parts[1:]):
            raise GraphError(f"line {lineno}: bad identifier in {raw!r}")
        if kind == "v" and len(parts) == 2:
            vertices.append(parts[1])
        elif kind == "e" and len(parts) == 4:
            edges.append(Edge(parts[1], parts[2], parts[3]))
        else:
            raise GraphError(f"line {lineno}: cannot parse {raw!r}")
    return Graph(tuple(vertices), tuple(edges))


def format_graph(g: Graph) -> str:
    lines = [f"v {v}" for v in g.vertices]
    lines += [f"e {e.id} {e.src} {e.dst}" for e in g.edges]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------


def sinks(g: Graph) -> list[str]:
    return [v for v in g.vertices if not g.out_edges(v)]


def sources(g: Graph) -> list[str]:
    return [v for v in g.vertices if not g.in_edges(v)]


def reachable(g: Graph, start: str) -> set[str]:
    seen = {start}
    todo = [start]
    while todo:
        v = todo.pop()
        for e in g.out_edges(v):
            w = g.r(e)
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def cycles(g: Graph) -> list[Cycle]:
    """Proper cycles (canonical rotation) in order of base vertex, then sinks."""
    found: list[Cycle] = []
    for base in sorted(g.vertices):
        # a cycle is found once, from its least vertex; the DFS never revisits
        # a vertex and only walks through vertices greater than the base
        stack: list[tuple[str, tuple[str, ...], frozenset]] = [(base, (), frozenset([base]))]
        local: list[tuple[str, ...]] = []
        while stack:
            v, edges, seen = stack.pop()
            for e in g.out_edges(v):
                w = g.r(e)
                if w == base:
                    local.append(edges + (e,))
                elif w > base and w not in seen:
                    stack.append((w, edges + (e,), seen | {w}))
        for es in sorted(local, key=lambda es: (len(es), es)):
            found.append(Cycle(base, es))
    found += [Cycle(w) for w in sinks(g)]
    return found


def proper_cycles(g: Graph) -> list[Cycle]:
    return [c for c in cycles(g) if not c.is_sink]


def cycle_vertices(g: Graph, c: Cycle) -> list[str]:
    return [c.vertex] if c.is_sink else [g.s(e) for e in c.edges]


def find_cycle(g: Graph, name: str) -> Cycle:
    """Look up a cycle by edge word (any rotation) or sink name."""
    name = name.strip()
    for c in cycles(g):
        if c.name == name or (c.is_sink and c.vertex == name):
            return c
    if g.has_vertex(name):
        raise GraphError(f"{name!r} is not a sink")
    edges = g.split_word(name) if " " not in name else name.split()
    if edges:
        for c in proper_cycles(g):
            n = len(c.edges)
            if len(edges) == n and any(
                tuple(edges) == c.edges[k:] + c.edges[:k] for k in range(n)
            ):
                return c
    raise GraphError(f"no cycle {name!r} in graph")


def check_cycle(g: Graph, c: Cycle) -> None:
    if c not in cycles(g):
        raise GraphError(f"{c} is not a cycle of the graph")


def has_disjoint_cycles(g: Graph) -> bool:
    seen: set[str] = set()
    for c in proper_cycles(g):
        vs = cycle_vertices(g, c)
        if seen.intersection(vs):
            return False
        seen.update(vs)
    return True


def _minimal_period(edges: tuple[str, ...]) -> int:
    n = len(edges)
    for p in range(1, n + 1):
        if n % p == 0 and edges == edges[:p] * (n // p):
            return p
    return n


def closed_paths(g: Graph, maxlen: int) -> Iterator[Path]:
    for v in g.vertices:
        stack: list[tuple[str, tuple[str, ...]]] = [(v, ())]
        while stack:
            u, edges = stack.pop()
            if edges and u == v:
                yield Path(v, v, edges)
            if len(edges) < maxlen:
                for e in g.out_edges(u):
                    stack.append((g.r(e), edges + (e,)))


def closed_paths_are_cycle_powers(g: Graph, maxlen: int) -> bool:
    """Check by brute force that each closed path of length <= maxlen is c^m."""
    for p in closed_paths(g, maxlen):
        period = _minimal_period(p.edges)
        base = p.edges[:period]
        visited = [g.s(e) for e in base]
        if len(set(visited)) != len(visited):
            return False
    return True


def _check_vertices(g: Graph, H: Iterable[str]) -> set[str]:
    H = set(H)
    bad = [v for v in H if not g.has_vertex(v)]
    if bad:
        raise GraphError(f"unknown vertices {sorted(bad)}")
    return H


def is_hereditary(g: Graph, H: Iterable[str]) -> bool:
    H = _check_vertices(g, H)
    return all(g.r(e) in H for v in H for e in g.out_edges(v))


def is_saturated(g: Graph, H: Iterable[str]) -> bool:
    H = _check_vertices(g, H)
    for v in g.vertices:
        out = g.out_edges(v)
        if out and v not in H and all(g.r(e) in H for e in out):
            return False
    return True


def restrict(g: Graph, H: Iterable[str], saturated: bool = True) -> Graph:
    """The graph E_H; pass ``saturated=False`` to accept a merely hereditary H."""
    H = _check_vertices(g, H)
    if not H:
        raise GraphError("cannot restrict to an empty vertex set")
    if not is_hereditary(g, H):
        raise GraphError("vertex set is not hereditary")
    if saturated and not is_saturated(g, H):
        raise GraphError("vertex set is not saturated")
    return Graph(
        tuple(v for v in g.vertices if v in H),
        tuple(e for e in g.edges if e.src in H),
    )


@dataclass(frozen=True)
class VertexPoset:
    """Classes of the preorder "u connects to v" with the induced partial order."""

    classes: tuple[tuple[str, ...], ...]
    above: dict  # class index -> set of class indices strictly below it

    def leq(self, i: int, j: int) -> bool:
        """Class ``i`` lies below class ``j`` (``j`` connects to ``i``)."""
        return i == j or i in self.above[j]

    @property
    def maximal(self) -> list[tuple[str, ...]]:
        return [
            cl
            for i, cl in enumerate(self.classes)
            if not any(i in self.above[j] for j in range(len(self.classes)))
        ]

    def class_of(self, v: str) -> tuple[str, ...]:
        return next(cl for cl in self.classes if v in cl)


def vertex_equivalence_classes(g: Graph) -> VertexPoset:
    reach = {v: reachable(g, v) for v in g.vertices}
    classes: list[tuple[str, ...]] = []
    assigned: set[str] = set()
    for v in g.vertices:
        if v in assigned:
            continue
        cl = tuple(u for u in g.vertices if u in reach[v] and v in reach[u])
        assigned.update(cl)
        classes.append(cl)
    above: dict[int, set[int]] = {}
    for i, ci in enumerate(classes):
        rep = ci[0]
        above[i] = {j for j, cj in enumerate(classes) if j != i and cj[0] in reach[rep]}
    return VertexPoset(tuple(classes), above)


def connects_to(g: Graph, c: Cycle, v: str) -> bool:
    return any(v in reachable(g, u) for u in cycle_vertices(g, c))


# ---------------------------------------------------------------------------
# The path sets P_c
# ---------------------------------------------------------------------------


def enumerate_Pc(g: Graph, c: Cycle, maxlen: int) -> list[Path]:
    """Paths ending at s(c) that do not end with a full traverse of c."""
    check_cycle(g, c)
    if maxlen < 0:
        return []
    base = c.vertex
    out = [Path(base, base)]
    layer = out[:]
    for n in range(1, maxlen + 1):
        nxt: list[Path] = []
        for p in layer:
            for e in g.in_edges(p.start):
                edges = (e,) + p.edges
                if not c.is_sink and edges == c.edges:
                    continue
                nxt.append(Path(g.s(e), base, edges))
        if not nxt:
            break
        nxt.sort(key=Path.sort_key)
        out += nxt
        layer = nxt
    return out


def in_Pc(g: Graph, c: Cycle, p: Path) -> bool:
    if p.end != c.vertex:
        return False
    n = len(c.edges)
    return c.is_sink or len(p.edges) < n or p.edges[-n:] != c.edges


def is_Pc_finite(g: Graph, c: Cycle) -> bool:
    """P_c is finite iff no proper cycle other than c connects to s(c)."""
    check_cycle(g, c)
    return not any(
        other != c and connects_to(g, other, c.vertex) for other in proper_cycles(g)
    )


def max_Pc_length(g: Graph, c: Cycle) -> int | None:
    """Length of the longest member of a finite P_c, else None."""
    if not is_Pc_finite(g, c):
        return None
    # without other cycles upstream, no member is longer than the vertex count
    paths = enumerate_Pc(g, c, len(g.vertices) + len(c.edges))
    return max(p.length for p in paths)


def filter_paths(g: Graph, left: Iterable[str], paths: Iterable[Path], right: Iterable[str]) -> list[Path]:
    """The product ``(sum left) * paths * (sum right)`` with vanishing terms dropped."""
    L, R = set(left), set(right)
    return [p for p in paths if p.start in L and p.end in R]
