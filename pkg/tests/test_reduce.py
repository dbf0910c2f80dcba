import math
import random

import pytest
from hypothesis import given, strategies as st

from leavitt import corpus_names, load_corpus
from leavitt.algebra import LeavittPathAlgebra, Monomial, random_element
from leavitt.chenmod import ModuleSpace
from leavitt.envelope import InsufficientHorizon, SeriesElement, Verdict, compare, geometric, random_series
from leavitt.graph import GraphError, cycles, find_cycle, has_disjoint_cycles, make_graph, sources
from leavitt.reduce import (
    collapse_cycle,
    eliminate_all_sources,
    eliminate_source,
    is_reduced,
    is_source_cycle,
    reduce_graph,
    split_components,
    tagged_equal,
    transport_collapse,
    transport_collapse_inverse,
    transport_source,
    transport_source_inverse,
)
from leavitt.scalar import QQ, parse_polynomial

GOLD = parse_polynomial("x^2+x-1 over Q")
X1 = parse_polynomial("x-1 over Q")


@pytest.fixture(scope="module")
def cc(ex57):
    return collapse_cycle(ex57, find_cycle(ex57, "d1d2d3d4"))


# -- components and sources ---------------------------------------------------------


def test_split_components(fig1):
    g = make_graph(list(fig1.vertices) + ["q"], [(e.id, e.src, e.dst) for e in fig1.edges])
    comps = split_components(g)
    assert len(comps) == 2
    assert sorted(len(c.vertices) for c in comps) == [1, 11]
    A = LeavittPathAlgebra(g)
    total = A.zero
    for comp in comps:
        rho = comp.idempotent(A)
        assert rho * rho == rho
        total = total + rho
    assert total == A.one


def test_eliminate_source_errors(ex57, fig1):
    with pytest.raises(GraphError):
        eliminate_source(ex57, "s1")
    with pytest.raises(GraphError):
        eliminate_source(fig1, "nope")


def test_fig1_source_elimination(fig1, ex57):
    h, steps = eliminate_all_sources(fig1)
    assert len(steps) == 1 and steps[0].source == "ubar"
    assert set(h.vertices) == set(ex57.vertices) and set(h.edges) == set(ex57.edges)


def test_chain_needs_two_passes():
    g = make_graph(["u", "v", "w"], [("a", "u", "v"), ("b", "v", "w")])
    h, steps = eliminate_all_sources(g)
    assert [s.source for s in steps] == ["u", "v"]
    assert h.vertices == ("w",) and not h.edges


@pytest.mark.parametrize("name", sorted(corpus_names()))
def test_source_elimination_is_confluent(name):
    g = load_corpus(name)
    base, _ = eliminate_all_sources(g)
    rng = random.Random(name)
    for _ in range(5):
        other, _ = eliminate_all_sources(g, order="random", rng=rng)
        assert set(other.vertices) == set(base.vertices) and set(other.edges) == set(base.edges)


def test_transport_source_tags(fig1):
    se = eliminate_source(fig1, "ubar")
    U = ModuleSpace(fig1, find_cycle(fig1, "d1d2d3d4"), X1)
    z = SeriesElement(U, U.parse("pd4 @a1 + 2 d4 @a1").coeffs, 5)
    x = transport_source(se, z)
    assert x.horizon == math.inf  # P_d is finite, so z was already exact
    tag = Monomial(fig1.path(["p"]), fig1.vertex_path("s4"))
    assert set(x.parts) == {None, tag}
    assert str(x.parts[tag].to_module()) == "d4 @a1"
    assert str(x.parts[None].to_module()) == "2 d4 @a1"
    assert compare(transport_source_inverse(se, U, x), z) is Verdict.EQUAL


def test_transport_source_loses_one_level(fig1):
    se = eliminate_source(fig1, "ubar")
    U = ModuleSpace(fig1, find_cycle(fig1, "l"), X1)
    z = SeriesElement(U, U.parse("pd4d1d2mn @a1").coeffs, 6)
    x = transport_source(se, z)
    assert x.horizon == 5
    with pytest.raises(InsufficientHorizon):
        transport_source(se, SeriesElement.zero(U, 0))


@given(seed=st.integers(0, 2**32 - 1))
def test_source_round_trip(fig1, seed):
    rng = random.Random(seed)
    se = eliminate_source(fig1, "ubar")
    U = ModuleSpace(fig1, rng.choice(cycles(fig1)), GOLD)
    z = random_series(U, rng, 7, density=0.4)
    x = transport_source(se, z)
    back = transport_source_inverse(se, U, x)
    assert compare(back, z) is Verdict.EQUAL
    assert tagged_equal(transport_source(se, back), x)


# -- cycle collapse -------------------------------------------------------------------


def test_collapse_errors(ex57, fig1):
    with pytest.raises(GraphError):
        collapse_cycle(ex57, find_cycle(ex57, "g1g2g3"))  # has entrances
    with pytest.raises(GraphError):
        collapse_cycle(ex57, find_cycle(ex57, "l"))
    with pytest.raises(GraphError):
        collapse_cycle(ex57, find_cycle(ex57, "w"))
    assert not is_source_cycle(fig1, find_cycle(fig1, "d1d2d3d4"))


def test_collapse_shape(cc, ex57):
    F = cc.collapsed
    assert cc.r == 4 and len(F.vertices) == len(ex57.vertices) - 3
    assert list(F.out_edges(cc.vbar)) == [cc.dprime, cc.phi["b"], cc.phi["m"]]
    assert str(cc.theta_table[cc.dprime]) == "d1d2d3d4"
    assert str(cc.theta_table[cc.phi["b"]]) == "d1b"
    assert str(cc.theta_table[cc.phi["m"]]) == "d1d2m"
    assert str(cc.theta_table["g1"]) == "g1"
    assert has_disjoint_cycles(F)
    rest = sorted(str(c) for c in cycles(ex57) if c != cc.d)
    assert sorted(str(cc.cycle_in_F(c)) for c in cycles(ex57) if c != cc.d) == rest


def test_theta_unital_and_multiplicative(cc):
    FA, EA = cc.algebras(QQ)
    assert cc.theta(FA.one, EA) == cc.omega(EA)
    assert cc.check_theta_multiplicative(QQ, 150, random.Random(0)) == []


def test_theta_is_injective_on_samples(cc):
    FA, EA = cc.algebras(QQ)
    rng = random.Random(4)
    for _ in range(40):
        a = random_element(FA, rng)
        if a != FA.zero:
            assert cc.theta(a, EA) != EA.zero


@pytest.mark.parametrize("ptext", ["x-1 over Q", "x^2+x-1 over Q"])
def test_example_transport_constant_family(cc, ex57, ptext):
    f = parse_polynomial(ptext)
    c = find_cycle(ex57, "g1g2g3")
    d = cc.d
    U = ModuleSpace(ex57, c, f)
    UF = ModuleSpace(cc.collapsed, c, f)
    H = 6
    z = geometric(U, ("d4",), d.edges, ("d1", "b", "g3")).materialize(cc.r * H)
    want = geometric(UF, ("dprime",), ("dprime",), (cc.phi["b"], "g3")).materialize(H)
    x = transport_collapse(cc, z)
    tag = Monomial(ex57.vertex_path("s4"), ex57.path(["d1", "d2", "d3"]))
    assert list(x.parts) == [tag]
    assert x.horizon == H
    assert compare(x.parts[tag], want) is Verdict.EQUAL


def test_collapse_of_d_needs_horizon(cc, ex57):
    U = ModuleSpace(ex57, cc.d, X1)
    with pytest.raises(InsufficientHorizon):
        transport_collapse(cc, SeriesElement(U, U.alpha(1).coeffs, 2))
    x = transport_collapse(cc, SeriesElement.from_module(U.alpha(2)))
    assert x.horizon == math.inf


@pytest.mark.parametrize("name", ["d1d2d3d4", "g1g2g3", "l", "w"])
@given(seed=st.integers(0, 2**32 - 1))
def test_collapse_round_trip(cc, ex57, name, seed):
    rng = random.Random(seed)
    U = ModuleSpace(ex57, find_cycle(ex57, name), GOLD)
    m = SeriesElement.from_module(U.random_element(rng, maxlen=8))
    x = transport_collapse(cc, m)
    back = transport_collapse_inverse(cc, U, x)
    assert compare(back, m) is Verdict.EQUAL
    assert tagged_equal(transport_collapse(cc, back), x)
    z = random_series(U, rng, 8, density=0.4)
    assert compare(transport_collapse_inverse(cc, U, transport_collapse(cc, z)), z) is Verdict.EQUAL


# -- pipeline --------------------------------------------------------------------------


def test_reduce_pipeline(fig1):
    red = reduce_graph(fig1)
    assert len(red.eliminations) == 1 and len(red.collapses) == 1
    (h,) = red.graphs
    assert is_reduced(h) and not sources(h)
    assert sorted(len(c.edges) for c in cycles(h) if not c.is_sink) == [1, 1, 3]
    with pytest.raises(ValueError):
        reduce_graph(fig1, steps=["bogus"])


def test_is_reduced(fig1, ex57, cc):
    assert not is_reduced(fig1)
    assert not is_reduced(ex57)
    assert is_reduced(cc.collapsed)
    assert is_reduced(make_graph(["u"], []))


@pytest.mark.parametrize("name", sorted(corpus_names()))
def test_pipeline_normal_form(name):
    g = load_corpus(name)
    if not has_disjoint_cycles(g):
        return
    for h in reduce_graph(g).graphs:
        assert is_reduced(h) and has_disjoint_cycles(h)
