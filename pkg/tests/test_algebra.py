import random

import pytest
from hypothesis import given, strategies as st

from leavitt import load_corpus
from leavitt.algebra import (
    LeavittPathAlgebra,
    Monomial,
    ParseError,
    corner_idempotents,
    embed_restriction,
    poly_at,
    principal_membership,
    random_element,
)
from leavitt.graph import GraphError, cycles, enumerate_Pc, find_cycle, restrict
from leavitt.scalar import QQ, PrimeField, extend, parse_polynomial


@pytest.fixture(scope="module")
def A(fig1):
    return LeavittPathAlgebra(fig1)


@pytest.fixture(scope="module")
def A3(fig3):
    return LeavittPathAlgebra(fig3)


def test_parse_vertex(A):
    a = A.parse("s1")
    assert a == A.vertex("s1")
    p = A.graph.vertex_path("s1")
    assert a.terms == {Monomial(p, p): 1}


def test_ghost_then_edge(A):
    assert str(A.parse("d1' d1")) == "s2"
    assert A.parse("d1^* d1") == A.vertex("s2")
    assert A.parse("d1' d2") == A.zero


def test_one_is_sum_of_vertices(A):
    one = A.parse("1")
    assert one == A.idempotent(A.graph.vertices)
    assert len(one.terms) == len(A.graph.vertices)


def test_single_edge_ck2(A):
    assert A.parse("l l'") == A.vertex("z")


def test_noncomposable_is_zero(A):
    assert A.parse("d1 d3") == A.zero
    assert A.parse("d1d3") == A.zero


def test_parse_scalars_and_powers(A):
    a = A.parse("2/3 d1 - (d1 d2)^1 + 3")
    assert a == A.edge("d1") * QQ("2/3") - A.edge("d1") * A.edge("d2") + A.one * 3
    assert A.parse("(l)^3") == A.edge("l") ** 3
    assert A.parse("-2*l'") == A.ghost("l") * -2


def test_parse_errors(A):
    for text in ["d1 +", "(d1", "qq", "d1''x"]:
        with pytest.raises((ParseError, GraphError)):
            A.parse(text)


def test_canonical_form_excludes_special_pairs(A):
    # s2 emits d2 (special) and b
    a = A.edge("d2") * A.ghost("d2")
    assert a == A.vertex("s2") - A.edge("b") * A.ghost("b")
    for m in a.terms:
        assert A.is_canonical(m)


def test_relations(A):
    g = A.graph
    for e in g.edge_ids:
        assert A.vertex(g.s(e)) * A.edge(e) == A.edge(e) == A.edge(e) * A.vertex(g.r(e))
        for f in g.edge_ids:
            assert A.ghost(e) * A.edge(f) == (A.vertex(g.r(e)) if e == f else A.zero)
    for v in g.vertices:
        if g.out_edges(v):
            total = A.zero
            for e in g.out_edges(v):
                total = total + A.edge(e) * A.ghost(e)
            assert total == A.vertex(v)


@pytest.mark.parametrize("name", ["fig1", "fig3"])
def test_orthogonality_on_Pc(name):
    g = load_corpus(name)
    A = LeavittPathAlgebra(g)
    for c in cycles(g):
        P = enumerate_Pc(g, c, 6)
        for p in P:
            for q in P:
                want = A.vertex(c.vertex) if p == q else A.zero
                assert A.ghost_path(p) * A.path(q) == want


def test_star(A):
    assert A.vertex("v").star() == A.vertex("v")
    m = A.path(A.graph.parse_path("d1b")) * A.ghost("g2")
    assert m.star() == A.edge("g2") * A.ghost_path(A.graph.parse_path("d1b"))


def test_gauge(A, fig1):
    c = find_cycle(fig1, "d1d2d3d4")
    a = QQ(3)
    assert A.gauge(A.edge("d1"), c, a) == A.edge("d1") * a
    x = A.parse("d1 d2' + 2 d1'")
    assert A.gauge(x, c, 1) == x
    assert A.gauge(A.ghost("d1") * A.edge("d1"), c, a) == A.vertex("s2")
    assert A.gauge(A.ghost("d1"), c, a) * A.gauge(A.edge("d1"), c, a) == A.vertex("s2")
    w = find_cycle(fig1, "w")
    assert A.gauge(x, w, a) == x
    with pytest.raises(ZeroDivisionError):
        A.gauge(x, c, 0)


def test_gauge_is_multiplicative(A, fig1):
    c = find_cycle(fig1, "d1d2d3d4")
    rng = random.Random(5)
    for _ in range(100):
        a, b = random_element(A, rng), random_element(A, rng)
        assert A.gauge(a * b, c, 2) == A.gauge(a, c, 2) * A.gauge(b, c, 2)


def test_extension_scalar_x():
    K = extend(QQ, parse_polynomial("x^2+x-1 over Q"))
    A = LeavittPathAlgebra(load_corpus("single_loop"), K)
    a = A.parse("x^2 + x")
    assert a == A.one
    with pytest.raises(ParseError):
        LeavittPathAlgebra(load_corpus("single_loop")).parse("x")


def test_prime_field_coefficients():
    A = LeavittPathAlgebra(load_corpus("fig1"), PrimeField(2))
    assert A.parse("s1 + s1") == A.zero


# -- corner and membership -------------------------------------------------------


def test_corner_idempotents(A3):
    rho, corner = corner_idempotents(A3, "tau")
    assert rho == A3.parse("t1+t2+t3+v+w+z")
    assert rho * rho == rho
    assert A3.vertex("t") * rho == A3.zero
    assert rho == A3.one - A3.vertex("t")
    assert corner.entering == ("eps1", "eps2")
    with pytest.raises(GraphError):
        corner_idempotents(A3, "l")  # l has entrances


def test_membership_base_cases(A3):
    p = parse_polynomial("1+x over Q")
    assert principal_membership(A3, "tau", p, 1, 0) == A3.ghost("eps1")
    one = parse_polynomial("1 over Q")
    assert principal_membership(A3, "tau", one, 2, 3) == A3.ghost("eps2") * A3.ghost("tau") ** 3
    with pytest.raises(ValueError):
        principal_membership(A3, "tau", parse_polynomial("2+x over Q"), 1, 1)


@pytest.mark.parametrize("ptext", ["1", "1+x", "1+x+x^2", "1-2x^3"])
def test_membership_identity(A3, ptext):
    p = parse_polynomial(ptext + " over Q")
    ptau = poly_at(A3, p, A3.edge("tau"))
    for j, eps in enumerate(["eps1", "eps2"], start=1):
        for ell in range(6):
            lam = principal_membership(A3, "tau", p, j, ell)
            assert lam * ptau == A3.ghost(eps) * A3.ghost("tau") ** ell


def test_embed_restriction(fig1):
    H = ["v", "t1", "t2", "t3", "w", "z"]
    sub = LeavittPathAlgebra(restrict(fig1, H))
    A = LeavittPathAlgebra(fig1)
    rho = A.idempotent(H)
    rng = random.Random(1)
    for _ in range(50):
        a, b = random_element(sub, rng), random_element(sub, rng)
        ea, eb = embed_restriction(sub, A, a), embed_restriction(sub, A, b)
        assert embed_restriction(sub, A, a * b) == ea * eb
        assert rho * ea * rho == ea


def test_mutation_breaks_ck2(fig1):
    M = LeavittPathAlgebra(fig1, mutation="drop_ck2_term")
    total = M.edge("d2") * M.ghost("d2") + M.edge("b") * M.ghost("b")
    assert total != M.vertex("s2")
    with pytest.raises(ValueError):
        LeavittPathAlgebra(fig1, mutation="nonsense")


# -- random triples ---------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("name", ["fig1", "fig3", "eh", "toeplitz"])
@given(seed=seeds)
def test_ring_axioms(name, seed):
    A = _alg(name)
    rng = random.Random(seed)
    a, b, c = (random_element(A, rng, maxlen=3) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) * c == a * c + b * c
    assert A.one * a == a == a * A.one
    assert (a * b).star() == b.star() * a.star()
    assert a.star().star() == a
    assert A.normal_form(a) == a
    assert A.parse(str(a)) == a


_ALGS: dict = {}


def _alg(name):
    if name not in _ALGS:
        _ALGS[name] = LeavittPathAlgebra(load_corpus(name))
    return _ALGS[name]
