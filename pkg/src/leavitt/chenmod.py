"""Pruefer modules U_{f(c)} and their socles, the Chen simple modules.

U_{f(c)} is realised as the twisted module over K' = K[x]/(f) restricted to K.
Its K-basis is ``gamma xbar^h alpha_j`` with gamma in P_c, 0 <= h < deg_c f and
j >= 1.  Internally an element is a map ``(gamma, j) -> K'`` and the h index is
just the coordinate of the K' coefficient; ``to_basis`` exposes the K-basis.

Generator actions (c = e_1...e_n, alpha_0 = 0)::

    u . gamma alpha_j       = [s(gamma) = u] gamma alpha_j
    e . gamma alpha_j       = (e gamma) alpha_j, except
    e_1 . (e_2...e_n) alpha_j = xbar (alpha_j + alpha_{j-1})
    e* . (e gamma') alpha_j = gamma' alpha_j
    e_1* . alpha_j          = xbar^-1 sum_{l<j} (-1)^l e_2...e_n alpha_{j-l}

and e* kills everything else.
"""

from __future__ import annotations

import random
import re
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple

from .algebra import AlgebraElement, LeavittPathAlgebra, random_coefficient
from .graph import (
    Cycle,
    Graph,
    GraphError,
    Path,
    check_cycle,
    enumerate_Pc,
    has_disjoint_cycles,
    in_Pc,
)
from .scalar import ExtensionField, Polynomial, is_basic_irreducible


class BasisVector(NamedTuple):
    path: Path
    h: int
    j: int

    def sort_key(self):
        return (self.j, self.path.sort_key(), self.h)

    def __str__(self) -> str:
        return format_basis_vector(self)


def format_basis_vector(b: BasisVector) -> str:
    parts = [str(b.path)]
    if b.h:
        parts.append(f"@x^{b.h}")
    parts.append(f"@a{b.j}")
    return " ".join(parts)


class IncompatibleModule(ValueError):
    pass


class ModuleSpace:
    """U_{f(c)} for a cycle c of a graph with disjoint cycles.

    For a sink the polynomial is irrelevant and replaced by x - 1, so that
    deg_c f = 1 and only alpha_1 occurs.  ``simple=True`` gives the socle
    layer j = 1, i.e. the Chen simple module.
    """

    def __init__(self, graph: Graph, cycle: Cycle, f: Polynomial, *,
                 simple: bool = False, algebra: LeavittPathAlgebra | None = None,
                 check: bool = True):
        if check:
            if not has_disjoint_cycles(graph):
                raise GraphError("graph does not have disjoint cycles")
            check_cycle(graph, cycle)
        base = f.field
        if cycle.is_sink:
            f = Polynomial([-1, 1], base)
        elif check and not is_basic_irreducible(f):
            raise ValueError(f"{f} is not basic irreducible")
        self.graph = graph
        self.cycle = cycle
        self.f = f
        self.base = base
        self.K = ExtensionField(base, f, check=False)
        self.deg = f.degree
        self.simple = simple or cycle.is_sink
        self.max_j = 1 if self.simple else None
        if algebra is not None and (algebra.graph is not graph or algebra.field != base):
            raise IncompatibleModule("algebra does not match the module")
        self._algebra = algebra
        self.top = cycle.vertex
        if not cycle.is_sink:
            e = cycle.edges
            self.e1 = e[0]
            self.tail = Path(graph.r(e[0]), cycle.vertex, e[1:]) if len(e) > 1 else Path(cycle.vertex, cycle.vertex)
        else:
            self.e1 = None
            self.tail = None

    @cached_property
    def algebra(self) -> LeavittPathAlgebra:
        return self._algebra or LeavittPathAlgebra(self.graph, self.base)

    @cached_property
    def xbar(self):
        return self.K.xbar

    @cached_property
    def xbar_inv(self):
        return self.K.xbar.inverse()

    def __repr__(self) -> str:
        kind = "V" if self.simple else "U"
        return f"{kind}[{self.cycle}, f={self.f} over {self.base}]"

    def same_as(self, other: "ModuleSpace") -> bool:
        return (
            self.graph == other.graph
            and self.cycle == other.cycle
            and self.f == other.f
            and self.simple == other.simple
        )

    # -- elements ------------------------------------------------------------

    @property
    def zero(self) -> "ModuleElement":
        return ModuleElement(self, {})

    def _check_index(self, path: Path, j: int) -> None:
        if j < 1 or (self.max_j is not None and j > self.max_j):
            raise ValueError(f"index j={j} outside the module")
        if not in_Pc(self.graph, self.cycle, path):
            raise ValueError(f"{path} is not in P_c")

    def alpha(self, j: int = 1, coeff=1) -> "ModuleElement":
        top = Path(self.top, self.top)
        return self.vector(top, 0, j, coeff)

    def vector(self, path: Path, h: int = 0, j: int = 1, coeff=1) -> "ModuleElement":
        if self.cycle.is_sink and j > 1:
            # alpha_{w,j} = (-1)^{j+1} alpha_{w,1}
            coeff = self.base(coeff) * (-1) ** (j + 1)
            j = 1
        self._check_index(path, j)
        k = self.K(self.base(coeff)) * self.xbar**h
        return ModuleElement(self, {(path, j): k} if k else {})

    def from_basis(self, terms: Iterable[tuple[BasisVector, object]]) -> "ModuleElement":
        out = self.zero
        for b, k in terms:
            out = out + self.vector(b.path, b.h, b.j, k)
        return out

    def basis(self, maxlen: int, max_j: int = 1) -> list[BasisVector]:
        top_j = min(max_j, self.max_j or max_j)
        paths = enumerate_Pc(self.graph, self.cycle, maxlen)
        return [BasisVector(p, h, j) for j in range(1, top_j + 1) for p in paths for h in range(self.deg)]

    # -- generator actions on raw maps ---------------------------------------

    def _vertex(self, u: str, d: dict) -> dict:
        return {key: k for key, k in d.items() if key[0].start == u}

    def _edge(self, e: str, d: dict) -> dict:
        g = self.graph
        out: dict = {}
        re_, se = g.r(e), g.s(e)
        for (p, j), k in d.items():
            if p.start != re_:
                continue
            if e == self.e1 and p.edges == self.tail.edges:
                top = Path(self.top, self.top)
                kx = k * self.xbar
                _add(out, (top, j), kx)
                if j > 1:
                    _add(out, (top, j - 1), kx)
            else:
                _add(out, (Path(se, p.end, (e,) + p.edges), j), k)
        return out

    def _ghost(self, e: str, d: dict) -> dict:
        g = self.graph
        out: dict = {}
        re_ = g.r(e)
        for (p, j), k in d.items():
            if p.edges:
                if p.edges[0] == e:
                    _add(out, (Path(re_, p.end, p.edges[1:]), j), k)
            elif e == self.e1:
                kx = k * self.xbar_inv
                for l in range(j):
                    _add(out, (self.tail, j - l), kx if l % 2 == 0 else -kx)
        return out

    def _apply_monomial(self, m, d: dict) -> dict:
        for e in m.ghost.edges:
            d = self._ghost(e, d)
            if not d:
                return d
        d = self._vertex(m.real.end, d)
        for e in reversed(m.real.edges):
            if not d:
                return d
            d = self._edge(e, d)
        return d

    def act(self, a: AlgebraElement, m: "ModuleElement") -> "ModuleElement":
        if not m.space is self and not m.space.same_as(self):
            raise IncompatibleModule("module element belongs to another module")
        if a.algebra.graph != self.graph or a.algebra.field != self.base:
            raise IncompatibleModule("algebra element does not act on this module")
        out: dict = {}
        for mono, k in a.terms.items():
            part = self._apply_monomial(mono, m.coeffs)
            for key, v in part.items():
                _add(out, key, v * k)
        return ModuleElement(self, out)

    # -- literals ------------------------------------------------------------

    def parse(self, text: str) -> "ModuleElement":
        return _parse_module_literal(self, text)

    def random_element(self, rng: random.Random, terms: int = 3, maxlen: int = 4,
                       max_j: int = 3) -> "ModuleElement":
        paths = enumerate_Pc(self.graph, self.cycle, maxlen)
        top_j = 1 if self.max_j == 1 else max_j
        out: dict = {}
        for _ in range(rng.randint(1, terms)):
            p = rng.choice(paths)
            j = rng.randint(1, top_j)
            coeffs = [random_coefficient(self.base, rng) if rng.random() < 0.7 else 0
                      for _ in range(self.deg)]
            k = self.K.from_coefficients(coeffs)
            if k:
                _add(out, (p, j), k)
        return ModuleElement(self, out)


def _add(out: dict, key, k) -> None:
    v = out.get(key)
    v = k if v is None else v + k
    if v:
        out[key] = v
    else:
        out.pop(key, None)


class ModuleElement:
    """Element of U_{f(c)}; ``coeffs`` maps (path, j) to a nonzero K' scalar."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: ModuleSpace, coeffs: dict):
        self.space = space
        self.coeffs = coeffs

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        if other.space is not self.space and not other.space.same_as(self.space):
            raise IncompatibleModule("elements of different modules")
        out = dict(self.coeffs)
        for key, k in other.coeffs.items():
            _add(out, key, k)
        return ModuleElement(self.space, out)

    def __neg__(self) -> "ModuleElement":
        return ModuleElement(self.space, {key: -k for key, k in self.coeffs.items()})

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        return self + (-other)

    def __mul__(self, k) -> "ModuleElement":
        """Scalar multiple by an element of K or K'."""
        k = self.space.K(k)
        if not k:
            return self.space.zero
        return ModuleElement(self.space, {key: v * k for key, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, ModuleElement):
            return self.space.same_as(other.space) and self.coeffs == other.coeffs
        if other == 0:
            return not self.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def terms(self) -> dict[BasisVector, object]:
        out = {}
        for (p, j), k in self.coeffs.items():
            for h, c in enumerate(k.coeffs):
                if c != 0:
                    out[BasisVector(p, h, j)] = c
        return out

    def to_basis(self) -> list[tuple[BasisVector, object]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def support(self) -> set[Path]:
        return {p for p, _ in self.coeffs}

    def __str__(self) -> str:
        return format_module_element(self)

    def __repr__(self) -> str:
        return f"<{self}>"


def act(a: AlgebraElement, m: ModuleElement) -> ModuleElement:
    return m.space.act(a, m)


def to_basis(m: ModuleElement) -> list[tuple[BasisVector, object]]:
    return m.to_basis()


def socle_level(m: ModuleElement) -> int:
    return max((j for _, j in m.coeffs), default=0)


def chen_simple(space: ModuleSpace) -> ModuleSpace:
    return ModuleSpace(space.graph, space.cycle, space.f, simple=True,
                       algebra=space._algebra, check=False)


def format_module_element(m: ModuleElement) -> str:
    if m.is_zero():
        return "0"
    pieces = []
    for b, k in m.to_basis():
        neg = isinstance(k, Fraction) and k < 0
        mag = -k if neg else k
        body = format_basis_vector(b)
        if mag != 1:
            body = f"{mag} {body}"
        if not pieces:
            pieces.append(f"-{body}" if neg else body)
        else:
            pieces.append(f" - {body}" if neg else f" + {body}")
    return "".join(pieces)


_MOD_TERM = re.compile(
    r"\s*([+-])?\s*(\d+(?:/\d+)?)?\s*([A-Za-z_][A-Za-z0-9_ ]*?)?\s*((?:@\s*(?:x\^\d+|x|a\d+)\s*)*)\s*(?=[+-]|$)"
)


def _parse_module_literal(space: ModuleSpace, text: str) -> ModuleElement:
    """Parse e.g. ``"pd4 @a2"`` or ``"2 d4 @x^1 @a1 - s1 @a3"``."""
    text = text.strip()
    if not text or text == "0":
        return space.zero
    out = space.zero
    pos = 0
    first = True
    while pos < len(text):
        m = _MOD_TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse module element at {text[pos:]!r}")
        sign, num, word, markers = m.groups()
        if not first and not sign:
            raise ValueError(f"missing operator in {text!r}")
        if not (num or word or markers):
            raise ValueError(f"empty term in {text!r}")
        coeff = Fraction(num) if num else Fraction(1)
        if sign == "-":
            coeff = -coeff
        h, j = 0, 1
        for mk in re.findall(r"@\s*(x\^\d+|x|a\d+)", markers or ""):
            if mk.startswith("a"):
                j = int(mk[1:])
            else:
                h = 1 if mk == "x" else int(mk[2:])
        path = space.graph.parse_path(word.strip()) if word else Path(space.top, space.top)
        out = out + space.vector(path, h, j, coeff)
        pos = m.end()
        first = False
    return out
