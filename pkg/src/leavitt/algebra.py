"""Leavitt path algebras L_K(E) on the canonical basis of monomials lambda mu*.

A monomial ``lambda mu*`` is canonical unless ``lambda`` and ``mu`` both end
with the special (first-declared) edge ``e`` of ``s(e)``.  Such monomials are
rewritten with the vertex relation read backwards::

    lambda' e e* mu'*  ->  lambda' mu'*  -  sum_{f != e, s(f) = s(e)} lambda' f f* mu'*

Normal forms of monomials only ever carry coefficients +-1, so they are cached
per algebra as integer dictionaries and scaled into the field on demand.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

from .graph import Graph, GraphError, Path, Cycle
from .scalar import QQ, ExtensionField, Field, Polynomial, inverse


class Monomial(NamedTuple):
    real: Path
    ghost: Path

    @property
    def degree(self) -> int:
        return self.real.length - self.ghost.length

    def sort_key(self):
        return (self.real.sort_key(), self.ghost.sort_key())

    def __str__(self) -> str:
        return format_monomial(self)


def format_monomial(m: Monomial) -> str:
    parts = list(m.real.edges) + [f"{e}'" for e in reversed(m.ghost.edges)]
    return " ".join(parts) if parts else m.real.start


class AlgebraElement:
    """Finite combination of canonical monomials with nonzero coefficients."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: "LeavittPathAlgebra", terms: dict):
        self.algebra = algebra
        self.terms = terms

    def _same(self, other: "AlgebraElement") -> None:
        if other.algebra is not self.algebra:
            raise ValueError("elements belong to different algebras")

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            other = self.algebra.scalar(other)
        self._same(other)
        out = dict(self.terms)
        _accumulate(out, other.terms)
        return AlgebraElement(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.algebra, {m: -k for m, k in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, AlgebraElement):
            other = self.algebra.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return self.algebra.multiply(self, other)
        k = self.algebra.field(other)
        if k == 0:
            return self.algebra.zero
        return AlgebraElement(self.algebra, {m: c * k for m, c in self.terms.items()})

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n: int):
        acc = self.algebra.one
        for _ in range(n):
            acc = acc * self
        return acc

    def __eq__(self, other) -> bool:
        if isinstance(other, AlgebraElement):
            return self.algebra is other.algebra and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def star(self) -> "AlgebraElement":
        return self.algebra.star(self)

    def sorted_terms(self) -> list[tuple[Monomial, object]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def __str__(self) -> str:
        return self.algebra.format(self)

    def __repr__(self) -> str:
        return f"<{self}>"


def _accumulate(out: dict, terms: dict, scale=None) -> None:
    for m, k in terms.items():
        if scale is not None:
            k = k * scale
        v = out.get(m)
        v = k if v is None else v + k
        if v == 0:
            out.pop(m, None)
        else:
            out[m] = v


MUTATIONS = ("drop_ck2_term",)


class LeavittPathAlgebra:
    """L_K(E) for a finite graph E.

    ``mutation`` is a fault-injection hook for the verification suite:
    ``"drop_ck2_term"`` silently omits one summand of the vertex rewrite.
    """

    def __init__(self, graph: Graph, field: Field = QQ, mutation: str | None = None):
        if mutation is not None and mutation not in MUTATIONS:
            raise ValueError(f"unknown mutation {mutation!r}")
        self.graph = graph
        self.field = field
        self.mutation = mutation
        self._nf_cache: dict[Monomial, dict[Monomial, int]] = {}
        self._mul_cache: dict[tuple[Monomial, Monomial], dict[Monomial, int]] = {}

    def __repr__(self) -> str:
        return f"L_{self.field}(E) on {len(self.graph.vertices)} vertices"

    # -- constructors ------------------------------------------------------

    def element(self, terms: dict) -> AlgebraElement:
        out: dict = {}
        for m, k in terms.items():
            _accumulate(out, {mm: self.field(c) for mm, c in self._nf(m).items()}, self.field(k))
        return AlgebraElement(self, out)

    @property
    def zero(self) -> AlgebraElement:
        return AlgebraElement(self, {})

    @property
    def one(self) -> AlgebraElement:
        return self.idempotent(self.graph.vertices)

    def scalar(self, k) -> AlgebraElement:
        return self.one * k

    def vertex(self, v: str) -> AlgebraElement:
        p = self.graph.vertex_path(v)
        return AlgebraElement(self, {Monomial(p, p): self.field.one})

    def idempotent(self, vertices: Iterable[str]) -> AlgebraElement:
        out = {}
        for v in vertices:
            p = self.graph.vertex_path(v)
            out[Monomial(p, p)] = self.field.one
        return AlgebraElement(self, out)

    def path(self, p: Path) -> AlgebraElement:
        return self.monomial(p, self.graph.vertex_path(p.end))

    def ghost_path(self, p: Path) -> AlgebraElement:
        return self.monomial(self.graph.vertex_path(p.end), p)

    def edge(self, e: str) -> AlgebraElement:
        return self.path(self.graph.path([e]))

    def ghost(self, e: str) -> AlgebraElement:
        return self.ghost_path(self.graph.path([e]))

    def monomial(self, real: Path, ghost: Path) -> AlgebraElement:
        if real.end != ghost.end:
            return self.zero
        return self.element({Monomial(real, ghost): 1})

    def word(self, edges: Iterable[str]) -> AlgebraElement:
        edges = list(edges)
        return self.path(self.graph.path(edges)) if edges else self.one

    # -- normal form -------------------------------------------------------

    def is_canonical(self, m: Monomial) -> bool:
        lam, mu = m.real.edges, m.ghost.edges
        if not lam or not mu or lam[-1] != mu[-1]:
            return True
        e = lam[-1]
        return self.graph.special_edge(self.graph.s(e)) != e

    def _nf(self, m: Monomial) -> dict[Monomial, int]:
        cached = self._nf_cache.get(m)
        if cached is not None:
            return cached
        if m.real.end != m.ghost.end:
            raise GraphError(f"{m} is not a monomial: ranges differ")
        if self.is_canonical(m):
            out = {m: 1}
        else:
            g = self.graph
            e = m.real.edges[-1]
            v = g.s(e)
            lam = Path(m.real.start, v, m.real.edges[:-1])
            mu = Path(m.ghost.start, v, m.ghost.edges[:-1])
            out = dict(self._nf(Monomial(lam, mu)))
            others = [f for f in g.out_edges(v) if f != e]
            if self.mutation == "drop_ck2_term" and others:
                others = others[:-1]
            for f in others:
                mono = Monomial(
                    Path(lam.start, g.r(f), lam.edges + (f,)),
                    Path(mu.start, g.r(f), mu.edges + (f,)),
                )
                k = out.get(mono, 0) - 1
                if k:
                    out[mono] = k
                else:
                    out.pop(mono, None)
        self._nf_cache[m] = out
        return out

    def normal_form(self, a: AlgebraElement) -> AlgebraElement:
        return self.element(a.terms)

    def _mono_mul(self, m1: Monomial, m2: Monomial) -> dict[Monomial, int]:
        key = (m1, m2)
        cached = self._mul_cache.get(key)
        if cached is not None:
            return cached
        lam1, mu1 = m1
        lam2, mu2 = m2
        out: dict[Monomial, int] = {}
        if mu1.start == lam2.start:
            a, b = mu1.edges, lam2.edges
            if b[: len(a)] == a:
                kappa = b[len(a):]
                real = Path(lam1.start, lam2.end, lam1.edges + kappa)
                out = self._nf(Monomial(real, mu2))
            elif a[: len(b)] == b:
                kappa = a[len(b):]
                ghost = Path(mu2.start, mu1.end, mu2.edges + kappa)
                out = self._nf(Monomial(lam1, ghost))
        self._mul_cache[key] = out
        return out

    def multiply(self, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
        if a.algebra is not self or b.algebra is not self:
            raise ValueError("elements belong to different algebras")
        out: dict = {}
        F = self.field
        for m1, k1 in a.terms.items():
            for m2, k2 in b.terms.items():
                prod = self._mono_mul(m1, m2)
                if prod:
                    k = k1 * k2
                    for m, c in prod.items():
                        _accumulate(out, {m: F(c) * k})
        return AlgebraElement(self, out)

    def star(self, a: AlgebraElement) -> AlgebraElement:
        # the canonical condition is symmetric in (real, ghost)
        return AlgebraElement(self, {Monomial(m.ghost, m.real): k for m, k in a.terms.items()})

    def gauge(self, a: AlgebraElement, c: Cycle, s) -> AlgebraElement:
        """Apply sigma_{c,s}: e_1 -> s e_1, e_1* -> s^{-1} e_1*."""
        s = self.field(s)
        if s == 0:
            raise ZeroDivisionError("gauge parameter must be invertible")
        if c.is_sink:
            return a
        e1 = c.edges[0]
        sinv = inverse(s)
        out = {}
        for m, k in a.terms.items():
            d = m.real.edges.count(e1) - m.ghost.edges.count(e1)
            out[m] = k * (s**d if d >= 0 else sinv ** (-d))
        return AlgebraElement(self, out)

    # -- text --------------------------------------------------------------

    def format(self, a: AlgebraElement) -> str:
        if a.is_zero():
            return "0"
        pieces = []
        for m, k in a.sorted_terms():
            neg, mag = _split_sign(k)
            body = format_monomial(m)
            if mag != 1:
                ks = str(mag)
                if isinstance(self.field, ExtensionField):
                    ks = f"({str(mag).replace('xbar', 'x')})"
                body = f"{ks} {body}"
            if not pieces:
                pieces.append(f"-{body}" if neg else body)
            else:
                pieces.append(f" - {body}" if neg else f" + {body}")
        return "".join(pieces)

    def parse(self, text: str) -> AlgebraElement:
        return _Parser(self, text).parse()


def _split_sign(k):
    if isinstance(k, Fraction) and k < 0:
        return True, -k
    return False, k


# ---------------------------------------------------------------------------
# Expression parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|(\^\*)|(.))")


class ParseError(ValueError):
    pass


class _Parser:
    """expr := term (('+'|'-') term)*;  term := factor ('*'? factor)*;
    factor := ('-')? atom ("'" | '^*' | '^' int)*"""

    def __init__(self, algebra: LeavittPathAlgebra, text: str):
        self.alg = algebra
        self.text = text
        self.tokens: list[tuple[str, str]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m.end() == pos:
                break
            num, ident, star, other = m.groups()
            if num:
                self.tokens.append(("num", num))
            elif ident:
                self.tokens.append(("id", ident))
            elif star:
                self.tokens.append(("op", "'"))
            elif other and not other.isspace():
                self.tokens.append(("op", other))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self) -> AlgebraElement:
        if not self.tokens:
            raise ParseError("empty expression")
        out = self.expr()
        if self.i != len(self.tokens):
            raise ParseError(f"unexpected token {self.peek()[1]!r} in {self.text!r}")
        return out

    def expr(self) -> AlgebraElement:
        acc = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def _starts_factor(self) -> bool:
        kind, val = self.peek()
        return kind in ("num", "id") or (kind, val) == ("op", "(")

    def term(self) -> AlgebraElement:
        acc = self.factor()
        while True:
            if self.peek() == ("op", "*"):
                self.take()
                acc = acc * self.factor()
            elif self._starts_factor():
                acc = acc * self.factor()
            else:
                return acc

    def factor(self) -> AlgebraElement:
        if self.peek() == ("op", "-"):
            self.take()
            return -self.factor()
        val = self.atom()
        while True:
            if self.peek() == ("op", "'"):
                self.take()
                val = val.star()
            elif self.peek() == ("op", "^"):
                self.take()
                kind, n = self.take()
                if kind != "num" or "/" in n:
                    raise ParseError("exponent must be a nonnegative integer")
                val = val ** int(n)
            else:
                return val

    def atom(self) -> AlgebraElement:
        kind, val = self.take()
        alg, g = self.alg, self.alg.graph
        if kind == "num":
            return alg.scalar(Fraction(val))
        if kind == "id":
            if g.has_vertex(val):
                return alg.vertex(val)
            if g.has_edge(val):
                return alg.edge(val)
            if val == "x" and isinstance(alg.field, ExtensionField):
                return alg.scalar(alg.field.xbar)
            edges = g.split_word(val)
            if edges:
                return alg.word(edges)
            # a word that segments into edges but not composably is a zero product
            if _segments(g, val):
                return alg.zero
            raise ParseError(f"unknown symbol {val!r}")
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ParseError("missing ')'")
            return inner
        raise ParseError(f"unexpected token {val!r} in {self.text!r}")


def _segments(g: Graph, word: str) -> bool:
    ids = g.edge_ids

    def go(pos: int) -> bool:
        return pos == len(word) or any(word.startswith(e, pos) and go(pos + len(e)) for e in ids)

    return bool(word) and go(0)


# ---------------------------------------------------------------------------
# Corner constructions around a source loop
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CornerIdeal:
    """The ideal generated by H = E^0 minus {t} for a source loop tau at t."""

    tau: str
    t: str
    H: tuple[str, ...]
    entering: tuple[str, ...]  # s^{-1}(t) without tau, declaration order
    rho: AlgebraElement


def check_source_loop(g: Graph, tau: str) -> str:
    if not g.has_edge(tau):
        raise GraphError(f"unknown edge {tau!r}")
    t = g.s(tau)
    if g.r(tau) != t:
        raise GraphError(f"{tau} is not a loop")
    if g.in_edges(t) != (tau,):
        raise GraphError(f"{tau} is not a source loop")
    return t


def corner_idempotents(alg: LeavittPathAlgebra, tau: str) -> tuple[AlgebraElement, CornerIdeal]:
    g = alg.graph
    t = check_source_loop(g, tau)
    H = tuple(v for v in g.vertices if v != t)
    rho = alg.idempotent(H)
    entering = tuple(e for e in g.out_edges(t) if e != tau)
    return rho, CornerIdeal(tau, t, H, entering, rho)


def principal_membership(
    alg: LeavittPathAlgebra, tau: str, p: Polynomial, j: int, ell: int
) -> AlgebraElement:
    """Return lambda with lambda * p(tau) == eps_j* (tau*)^ell.

    Uses eps* (tau*)^l p(tau) = sum_{k<=min(l,m)} a_k eps* (tau*)^(l-k), which
    holds because eps* tau = 0, and solves for the leading term recursively.
    """
    _, corner = corner_idempotents(alg, tau)
    if p.is_zero() or p[0] != p.field(1):
        raise ValueError("p(0) must be 1")
    if not 1 <= j <= len(corner.entering):
        raise ValueError(f"entering edge index {j} out of range 1..{len(corner.entering)}")
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    eps = alg.ghost(corner.entering[j - 1])
    tau_star = alg.ghost(tau)
    lams: list[AlgebraElement] = []
    power = eps
    for l in range(ell + 1):
        if l:
            power = power * tau_star
        lam = power
        for k in range(1, min(l, p.degree) + 1):
            if p[k] != 0:
                lam = lam - lams[l - k] * alg.field(p[k])
        lams.append(lam)
    return lams[ell]


def poly_at(alg: LeavittPathAlgebra, p: Polynomial, x: AlgebraElement) -> AlgebraElement:
    """p(x) with constant term read as a multiple of the identity."""
    acc = alg.zero
    power = alg.one
    for k, a in enumerate(p.coeffs):
        if k:
            power = power * x
        if a != 0:
            acc = acc + power * alg.field(a)
    return acc


def embed_restriction(sub: LeavittPathAlgebra, alg: LeavittPathAlgebra, a: AlgebraElement) -> AlgebraElement:
    """Image of an element of L(E_H) in the corner rho L(E) rho, symbol for symbol."""
    return alg.element(dict(a.terms))


# ---------------------------------------------------------------------------
# Random elements for property tests
# ---------------------------------------------------------------------------


def random_path_to(g: Graph, v: str, rng: random.Random, maxlen: int) -> Path:
    p = g.vertex_path(v)
    for _ in range(rng.randint(0, maxlen)):
        ins = g.in_edges(p.start)
        if not ins:
            break
        e = rng.choice(ins)
        p = Path(g.s(e), p.end, (e,) + p.edges)
    return p


def random_coefficient(field: Field, rng: random.Random):
    while True:
        k = field(rng.choice([-2, -1, 1, 1, 2, 3]))
        if k != 0:
            return k


def random_element(
    alg: LeavittPathAlgebra, rng: random.Random, terms: int = 3, maxlen: int = 2
) -> AlgebraElement:
    g = alg.graph
    out = {}
    for _ in range(rng.randint(1, terms)):
        v = rng.choice(g.vertices)
        m = Monomial(random_path_to(g, v, rng, maxlen), random_path_to(g, v, rng, maxlen))
        out[m] = random_coefficient(alg.field, rng)
    return alg.element(out)
