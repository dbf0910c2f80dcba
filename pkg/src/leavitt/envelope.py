"""Formal-series modules via horizon-truncated series.

A :class:`SeriesElement` records the coefficients of a series in the completed
module for every basis triple whose path has length at most ``horizon``.
Operators keep the horizon honest: a real edge moves information one step out
(L -> L+1), a ghost edge pulls it one step in (L -> L-1).  A horizon of
``math.inf`` means the element is known exactly.
"""

from __future__ import annotations

import enum
import math
import os
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping

from .algebra import (
    AlgebraElement,
    check_source_loop,
    poly_at,
    random_coefficient,
)
from .chenmod import BasisVector, IncompatibleModule, ModuleElement, ModuleSpace, _add
from .graph import Cycle, Graph, Path, enumerate_Pc, is_Pc_finite, max_Pc_length
from .scalar import Polynomial

DEBUG = bool(os.environ.get("LEAVITT_DEBUG"))

Horizon = float  # an int, or math.inf


class InsufficientHorizon(ArithmeticError):
    pass


class Verdict(enum.Enum):
    EQUAL = "equal"
    UNEQUAL = "unequal"
    INSUFFICIENT = "insufficient-horizon"


@lru_cache(maxsize=None)
def _exact_bound(graph: Graph, cycle: Cycle) -> int | None:
    return max_Pc_length(graph, cycle)


class SeriesElement:
    """Truncated element of the formal-series module over ``space``."""

    __slots__ = ("space", "coeffs", "horizon", "degraded")

    def __init__(self, space: ModuleSpace, coeffs: Mapping, horizon: Horizon,
                 degraded: bool = False):
        if horizon < 0:
            raise InsufficientHorizon(f"horizon {horizon} is negative")
        bound = _exact_bound(space.graph, space.cycle)
        if bound is not None and horizon >= bound:
            horizon = math.inf
        if horizon != math.inf:
            coeffs = {key: k for key, k in coeffs.items() if key[0].length <= horizon}
        self.space = space
        self.coeffs = dict(coeffs)
        self.horizon = horizon
        self.degraded = degraded

    # -- construction ----------------------------------------------------------

    @classmethod
    def from_module(cls, m: ModuleElement) -> "SeriesElement":
        return cls(m.space, m.coeffs, math.inf)

    @classmethod
    def zero(cls, space: ModuleSpace, horizon: Horizon = math.inf) -> "SeriesElement":
        return cls(space, {}, horizon)

    def to_module(self) -> ModuleElement:
        """The finite part known so far, as an element of the Pruefer module."""
        return ModuleElement(self.space, dict(self.coeffs))

    def truncate(self, horizon: Horizon) -> "SeriesElement":
        return SeriesElement(self.space, self.coeffs, min(horizon, self.horizon), self.degraded)

    # -- linear structure ------------------------------------------------------

    def _check(self, other: "SeriesElement") -> None:
        if other.space is not self.space and not other.space.same_as(self.space):
            raise IncompatibleModule("series over different modules")

    def __add__(self, other: "SeriesElement") -> "SeriesElement":
        self._check(other)
        out = dict(self.coeffs)
        for key, k in other.coeffs.items():
            _add(out, key, k)
        return SeriesElement(self.space, out, min(self.horizon, other.horizon),
                             self.degraded or other.degraded)

    def __neg__(self) -> "SeriesElement":
        return SeriesElement(self.space, {key: -k for key, k in self.coeffs.items()},
                             self.horizon, self.degraded)

    def __sub__(self, other: "SeriesElement") -> "SeriesElement":
        return self + (-other)

    def __mul__(self, k) -> "SeriesElement":
        k = self.space.K(k)
        if not k:
            return SeriesElement(self.space, {}, self.horizon, self.degraded)
        return SeriesElement(self.space, {key: v * k for key, v in self.coeffs.items()},
                             self.horizon, self.degraded)

    __rmul__ = __mul__

    def is_zero_to_horizon(self) -> bool:
        return not self.coeffs

    def support(self) -> list[Path]:
        return sorted({p for p, _ in self.coeffs}, key=Path.sort_key)

    def terms(self) -> dict[BasisVector, object]:
        return ModuleElement(self.space, self.coeffs).terms

    def to_basis(self) -> list[tuple[BasisVector, object]]:
        return ModuleElement(self.space, self.coeffs).to_basis()

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeriesElement):
            return NotImplemented
        return compare(self, other) is Verdict.EQUAL

    __hash__ = None

    def __repr__(self) -> str:
        h = "exact" if self.horizon == math.inf else f"L={self.horizon}"
        return f"<series {ModuleElement(self.space, self.coeffs)} [{h}]>"


def compare(a: SeriesElement, b: SeriesElement, upto: int = 0) -> Verdict:
    """Equal up to the common horizon, unequal, or not decidable at ``upto``."""
    a._check(b)
    L = min(a.horizon, b.horizon)
    keys = set(a.coeffs) | set(b.coeffs)
    for key in keys:
        if key[0].length <= L and a.coeffs.get(key) != b.coeffs.get(key):
            return Verdict.UNEQUAL
    if L < upto:
        return Verdict.INSUFFICIENT
    return Verdict.EQUAL


# ---------------------------------------------------------------------------
# The operators P_v, S_e, S_{f*}
# ---------------------------------------------------------------------------


def op_Pv(v: str, z: SeriesElement) -> SeriesElement:
    return SeriesElement(z.space, z.space._vertex(v, z.coeffs), z.horizon, z.degraded)


def _concat(space: ModuleSpace, e: str, d: dict) -> dict:
    g = space.graph
    out = {}
    for (p, j), k in d.items():
        if p.start == g.r(e):
            out[(Path(g.s(e), p.end, (e,) + p.edges), j)] = k
    return out


def op_Se(e: str, z: SeriesElement) -> SeriesElement:
    space = z.space
    n = space.cycle.length
    if z.horizon < n - 1:
        raise InsufficientHorizon(
            f"S_{e} needs horizon >= |c|-1 = {n - 1}, have {z.horizon}"
        )
    band_a = {key: k for key, k in z.coeffs.items() if key[0].length <= n}
    band_bc = {key: k for key, k in z.coeffs.items() if key[0].length > n}
    out = space._edge(e, band_a)
    for key, k in _concat(space, e, band_bc).items():
        _add(out, key, k)
    if DEBUG:
        band_b = {key: k for key, k in band_bc.items() if key[0].length == n + 1}
        assert space._edge(e, band_b) == _concat(space, e, band_b), "band B mismatch"
    return SeriesElement(space, out, z.horizon + 1, z.degraded)


def op_Sfstar(f: str, z: SeriesElement) -> SeriesElement:
    space = z.space
    n = space.cycle.length
    L = z.horizon - 1
    if L < 0:
        raise InsufficientHorizon(f"S_{f}* needs horizon >= 1, have {z.horizon}")
    band_a = {key: k for key, k in z.coeffs.items() if key[0].length <= n}
    band_bc = {key: k for key, k in z.coeffs.items() if key[0].length > n}
    out = space._ghost(f, band_a)
    for (p, j), k in band_bc.items():
        if p.edges[0] == f:
            _add(out, (Path(space.graph.r(f), p.end, p.edges[1:]), j), k)
    if DEBUG:
        band_b = {key: k for key, k in band_bc.items() if key[0].length == n + 1}
        strip = {(Path(space.graph.r(f), p.end, p.edges[1:]), j): k
                 for (p, j), k in band_b.items() if p.edges[0] == f}
        assert space._ghost(f, band_b) == strip, "band B mismatch"
    return SeriesElement(space, out, L, z.degraded or L < n + 1)


def act_series(a: AlgebraElement, z: SeriesElement) -> SeriesElement:
    """The action Phi(a) on a truncated series."""
    space = z.space
    if a.algebra.graph != space.graph or a.algebra.field != space.base:
        raise IncompatibleModule("algebra element does not act on this module")
    out: dict = {}
    horizon = z.horizon
    degraded = z.degraded
    for mono, k in a.terms.items():
        part = z
        for e in mono.ghost.edges:
            part = op_Sfstar(e, part)
        part = op_Pv(mono.real.end, part)
        for e in reversed(mono.real.edges):
            part = op_Se(e, part)
        horizon = min(horizon, part.horizon)
        degraded = degraded or part.degraded
        for key, v in part.coeffs.items():
            _add(out, key, v * k)
    return SeriesElement(space, out, horizon, degraded)


# ---------------------------------------------------------------------------
# Generators and random samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesGenerator:
    """A coefficient rule ``path -> {j: K' scalar}``, materialised on demand."""

    space: ModuleSpace
    rule: Callable[[Path], Mapping[int, object]]
    name: str = "series"

    def coefficient(self, path: Path, j: int):
        return self.rule(path).get(j, self.space.K.zero)

    def materialize(self, horizon: int) -> SeriesElement:
        out: dict = {}
        for p in enumerate_Pc(self.space.graph, self.space.cycle, horizon):
            for j, k in self.rule(p).items():
                k = self.space.K(k)
                if k:
                    out[(p, j)] = k
        return SeriesElement(self.space, out, horizon)


def geometric(space: ModuleSpace, prefix: Iterable[str], loop: Iterable[str],
              suffix: Iterable[str], j: int = 1, ratio=1, name: str | None = None) -> SeriesGenerator:
    """sum_i ratio^i (prefix loop^i suffix) alpha_j, a proper series when loop is a cycle."""
    prefix, loop, suffix = tuple(prefix), tuple(loop), tuple(suffix)
    if not loop:
        raise ValueError("loop must be nonempty")
    ratio = space.K(ratio)

    def rule(p: Path) -> dict:
        edges = p.edges
        body = len(edges) - len(prefix) - len(suffix)
        if body < 0 or body % len(loop):
            return {}
        i = body // len(loop)
        if edges[: len(prefix)] != prefix or edges[len(edges) - len(suffix):] != suffix:
            return {}
        if edges[len(prefix): len(prefix) + body] != loop * i:
            return {}
        return {j: ratio**i}

    label = name or f"geometric({''.join(prefix)}[{''.join(loop)}]^i{''.join(suffix)})"
    return SeriesGenerator(space, rule, label)


def random_series(space: ModuleSpace, rng: random.Random, horizon: int,
                  density: float = 0.3, max_j: int = 2, max_terms: int = 24) -> SeriesElement:
    paths = enumerate_Pc(space.graph, space.cycle, horizon)
    top_j = 1 if space.max_j == 1 else max_j
    out: dict = {}
    chosen = [p for p in paths if rng.random() < density]
    if len(chosen) > max_terms:
        chosen = rng.sample(chosen, max_terms)
    for p in chosen:
        j = rng.randint(1, top_j)
        coeffs = [random_coefficient(space.base, rng) if rng.random() < 0.7 else 0
                  for _ in range(space.deg)]
        k = space.K.from_coefficients(coeffs)
        if k:
            _add(out, (p, j), k)
    return SeriesElement(space, out, horizon)


def random_nonzero_series(space: ModuleSpace, rng: random.Random, horizon: int, **kw) -> SeriesElement:
    while True:
        z = random_series(space, rng, horizon, **kw)
        if z.coeffs:
            return z


# ---------------------------------------------------------------------------
# Essentiality and the extension constructions
# ---------------------------------------------------------------------------


def essential_witness(z: SeriesElement) -> tuple[Path, ModuleElement]:
    """Find gamma_0 with gamma_0* . z a nonzero element of the Pruefer module."""
    support = z.support()
    if not support:
        raise ValueError("series is indistinguishable from zero at its horizon")
    gamma0 = support[0]
    alg = z.space.algebra
    u = act_series(alg.ghost_path(gamma0) if gamma0.edges else alg.vertex(gamma0.start), z)
    top = z.space.top
    if any(p.edges or p.start != top for p, _ in u.coeffs):
        raise AssertionError(f"witness {gamma0} left terms outside s(c)")
    m = u.to_module()
    if m.is_zero():
        raise AssertionError(f"witness {gamma0} produced zero")
    return gamma0, m


def _check_not_tau(space: ModuleSpace, tau: str) -> str:
    t = check_source_loop(space.graph, tau)
    if space.cycle.edges == (tau,):
        raise ValueError("the cycle must differ from the source loop")
    return t


def extend_from_corner_data(space: ModuleSpace, tau: str,
                            zdata: Mapping[tuple[int, int], SeriesElement]) -> SeriesElement:
    """chi(t) = sum tau^k eps_j z_{k,j} for a finite table keyed by (k, j).

    ``j`` indexes s^{-1}(t) minus tau (1-based, declaration order).  Each entry
    must satisfy z = P_{r(eps_j)} z, so that eps_j* (tau*)^k chi(t) = z_{k,j}.
    """
    g = space.graph
    t = _check_not_tau(space, tau)
    entering = [e for e in g.out_edges(t) if e != tau]
    chi = SeriesElement.zero(space)
    for (k, j), z in sorted(zdata.items()):
        if not 1 <= j <= len(entering):
            raise ValueError(f"entering edge index {j} out of range")
        if k < 0:
            raise ValueError("tau powers must be nonnegative")
        eps = entering[j - 1]
        if any(p.start == t for p, _ in z.coeffs):
            raise ValueError(f"z[{k},{j}] is not in the corner rho U")
        if any(p.start != g.r(eps) for p, _ in z.coeffs):
            raise ValueError(f"z[{k},{j}] is not supported at r({eps})")
        term = op_Se(eps, z)
        for _ in range(k):
            term = op_Se(tau, term)
        chi = chi + term
    return chi


def restriction_check(space: ModuleSpace, tau: str, zdata: Mapping, chi: SeriesElement) -> dict:
    """Verdict of eps_j* (tau*)^k chi == z_{k,j} for every table entry."""
    alg = space.algebra
    t = check_source_loop(space.graph, tau)
    entering = [e for e in space.graph.out_edges(t) if e != tau]
    out = {}
    for (k, j), z in sorted(zdata.items()):
        probe = alg.ghost(entering[j - 1]) * alg.ghost(tau) ** k
        out[(k, j)] = compare(act_series(probe, chi), z)
    return out


def reciprocal_coefficients(p: Polynomial, n: int) -> list:
    """h_0..h_n with p(x) * sum h_i x^i = 1 mod x^(n+1)."""
    F = p.field
    if p.is_zero() or p[0] != F(1):
        raise ValueError("p(0) must be 1")
    h = [F(1)]
    for i in range(1, n + 1):
        acc = F(0)
        for k in range(1, min(i, p.degree) + 1):
            acc = acc + p[k] * h[i - k]
        h.append(-acc)
    return h


def inverse_series_action(p: Polynomial, tau: str, z: SeriesElement,
                          horizon: int | None = None) -> SeriesElement:
    """P(tau) . z for the reciprocal series P of p."""
    space = z.space
    t = _check_not_tau(space, tau)
    L = z.horizon
    moving = [(key, k) for key, k in z.coeffs.items() if key[0].start == t]
    if L == math.inf:
        if moving and horizon is None:
            raise InsufficientHorizon("an exact input with terms at t needs an explicit horizon")
        if moving:
            L = horizon
    elif horizon is not None:
        L = min(L, horizon)
    if not moving:
        return z.truncate(L) if L != math.inf else z
    h = reciprocal_coefficients(p, int(L))
    out = dict(z.coeffs)
    for (path, j), k in moving:
        edges = path.edges
        for i in range(1, int(L) - path.length + 1):
            edges = (tau,) + edges
            if h[i] != 0:
                _add(out, (Path(t, path.end, edges), j), k * space.base(h[i]))
    return SeriesElement(space, out, L, z.degraded)


def inverse_check(p: Polynomial, tau: str, z: SeriesElement, result: SeriesElement) -> Verdict:
    alg = z.space.algebra
    ptau = poly_at(alg, Polynomial(p.coeffs, alg.field), alg.edge(tau))
    return compare(act_series(ptau, result), z)


def is_U_equal_Uhat(g: Graph, c: Cycle) -> bool:
    return is_Pc_finite(g, c)
