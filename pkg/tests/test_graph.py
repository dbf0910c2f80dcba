import pytest
from hypothesis import given, strategies as st

from leavitt import corpus_names, load_corpus
from leavitt.graph import (
    Edge,
    Graph,
    GraphError,
    Path,
    closed_paths_are_cycle_powers,
    cycles,
    enumerate_Pc,
    filter_paths,
    find_cycle,
    format_graph,
    has_disjoint_cycles,
    in_Pc,
    is_hereditary,
    is_Pc_finite,
    is_saturated,
    make_graph,
    max_Pc_length,
    parse_graph,
    proper_cycles,
    restrict,
    sinks,
    sources,
    vertex_equivalence_classes,
)
from leavitt.harness.suite import pc_stabilizes, walk_counts


def names(paths):
    return [str(p) for p in paths]


# -- parsing -----------------------------------------------------------------


def test_fig1_shape(fig1):
    assert fig1.vertices == ("ubar", "s1", "s2", "s3", "s4", "v", "t1", "t2", "t3", "w", "z")
    assert [e.id for e in fig1.edges] == [
        "p", "d1", "d2", "d3", "d4", "b", "m", "n", "g1", "g2", "g3", "h", "e", "l",
    ]


def test_single_vertex_graph():
    g = parse_graph("v u")
    assert g.vertices == ("u",) and g.edges == ()
    assert sinks(g) == ["u"] and sources(g) == ["u"]


@pytest.mark.parametrize(
    "text",
    [
        "v a\nv a",
        "v a\ne x a b",
        "# nothing\n",
        "v a\nv b\ne x a b\ne x b a",
        "v a\nfoo bar",
    ],
)
def test_parse_errors(text):
    with pytest.raises(GraphError):
        parse_graph(text)


def test_format_round_trip():
    for name in corpus_names():
        g = load_corpus(name)
        assert parse_graph(format_graph(g)) == g


# -- census --------------------------------------------------------------------


def test_fig1_sinks_sources(fig1):
    assert sinks(fig1) == ["w"]
    assert sources(fig1) == ["ubar"]


def test_fig1_cycles(fig1):
    assert [str(c) for c in cycles(fig1)] == ["d1d2d3d4", "g1g2g3", "l", "Sink(w)"]
    assert has_disjoint_cycles(fig1)


def test_cycle_lookup_any_rotation(fig1):
    assert find_cycle(fig1, "d3d4d1d2") == find_cycle(fig1, "d1d2d3d4")
    assert find_cycle(fig1, "w").is_sink
    with pytest.raises(GraphError):
        find_cycle(fig1, "z")
    with pytest.raises(GraphError):
        find_cycle(fig1, "d1d2")


def test_toeplitz(tmp_path):
    g = load_corpus("toeplitz")
    assert [str(c) for c in cycles(g)] == ["a", "Sink(w)"]
    assert has_disjoint_cycles(g)
    assert names(enumerate_Pc(g, find_cycle(g, "w"), 2)) == ["w", "b", "ab"]


def test_acyclic_pair():
    g = make_graph(["u", "w"], [("f", "u", "w")])
    assert [str(c) for c in cycles(g)] == ["Sink(w)"]


def test_rose_is_not_disjoint():
    g = load_corpus("rose2")
    assert not has_disjoint_cycles(g)
    assert not closed_paths_are_cycle_powers(g, 2)


def test_fig1_closed_paths(fig1):
    assert closed_paths_are_cycle_powers(fig1, 12)
    extra = Graph(fig1.vertices, fig1.edges + (Edge("k", "t2", "t1"),))
    assert not has_disjoint_cycles(extra)
    assert not closed_paths_are_cycle_powers(extra, 6)


def test_hereditary_and_saturated(fig1):
    H = {"t1", "t2", "t3", "w", "z"}
    assert is_hereditary(fig1, H)
    assert not is_saturated(fig1, H)
    assert is_hereditary(fig1, H | {"v"}) and is_saturated(fig1, H | {"v"})
    with pytest.raises(GraphError):
        is_hereditary(fig1, {"nope"})


def test_restrict(fig1, fig3):
    EH = restrict(fig1, ["v", "t1", "t2", "t3", "w", "z"])
    assert sorted(e.id for e in EH.edges) == sorted(["g1", "g2", "g3", "h", "e", "l", "n"])
    assert restrict(fig1, fig1.vertices) == fig1
    H3 = [v for v in fig3.vertices if v != "t"]
    R = restrict(fig3, H3)
    assert set(R.vertices) == {"t1", "t2", "t3", "v", "w", "z"}
    assert not {"tau", "eps1", "eps2"} & {e.id for e in R.edges}
    with pytest.raises(GraphError):
        restrict(fig1, ["t1", "t2", "t3", "w", "z"])  # not saturated


def test_vertex_classes(fig1):
    poset = vertex_equivalence_classes(fig1)
    assert sorted(map(sorted, poset.classes)) == sorted(
        [["ubar"], ["s1", "s2", "s3", "s4"], ["v"], ["t1", "t2", "t3"], ["w"], ["z"]]
    )
    assert poset.maximal == [("ubar",)]
    chain = make_graph(["u", "v", "w"], [("a", "u", "v"), ("b", "v", "w")])
    assert vertex_equivalence_classes(chain).maximal == [("u",)]


def test_maximal_classes_without_sources_hold_source_cycles(ex57, fig3):
    for g in (ex57, fig3):
        poset = vertex_equivalence_classes(g)
        for cl in poset.maximal:
            assert any(set(cl) == {g.s(e) for e in c.edges} for c in proper_cycles(g))


# -- P_c -----------------------------------------------------------------------


def test_P_d_is_the_five_paths(fig1):
    d = find_cycle(fig1, "d1d2d3d4")
    assert set(names(enumerate_Pc(fig1, d, 10))) == {"s1", "d4", "pd4", "d3d4", "d2d3d4"}
    assert is_Pc_finite(fig1, d)
    assert max_Pc_length(fig1, d) == 3


def test_P_g_at_length_zero(fig1):
    assert names(enumerate_Pc(fig1, find_cycle(fig1, "g1g2g3"), 0)) == ["t1"]


def test_finiteness(fig1):
    assert not is_Pc_finite(fig1, find_cycle(fig1, "l"))
    assert not is_Pc_finite(fig1, find_cycle(fig1, "w"))
    g = load_corpus("single_loop")
    c = proper_cycles(g)[0]
    assert is_Pc_finite(g, c)
    assert len(enumerate_Pc(g, c, 5)) == 1


def test_Pc_order_is_length_then_lex(fig1):
    ps = enumerate_Pc(fig1, find_cycle(fig1, "l"), 6)
    assert ps == sorted(ps, key=Path.sort_key)


def test_filter_example(fig1):
    paths = [fig1.parse_path(w) for w in ("g3h", "bg3", "bg3h", "bg3g1e")]
    assert names(filter_paths(fig1, ["s2"], paths, ["w", "z"])) == ["bg3h", "bg3g1e"]


def test_walk_counts_match_enumeration(fig1):
    for c in cycles(fig1):
        ps = enumerate_Pc(fig1, c, 8)
        counts = walk_counts(fig1, c, 8)
        assert [sum(p.length == n for p in ps) for n in range(9)] == counts


# -- random graphs ---------------------------------------------------------------


@st.composite
def graphs(draw, max_vertices=5, max_edges=7):
    n = draw(st.integers(1, max_vertices))
    vs = [f"v{i}" for i in range(n)]
    m = draw(st.integers(0, max_edges))
    edges = [(f"e{k}", draw(st.sampled_from(vs)), draw(st.sampled_from(vs))) for k in range(m)]
    return make_graph(vs, edges)


@given(graphs())
def test_disjoint_cycles_oracle(g):
    assert has_disjoint_cycles(g) == closed_paths_are_cycle_powers(g, max(2, 2 * len(g.edges)))


@given(graphs())
def test_cycles_are_vertex_disjoint(g):
    if not has_disjoint_cycles(g):
        return
    seen = set()
    for c in proper_cycles(g):
        vs = {g.s(e) for e in c.edges}
        assert len(vs) == len(c.edges)
        assert not vs & seen
        assert c.vertex == min(vs)
        seen |= vs


@given(graphs(), st.integers(0, 6))
def test_Pc_monotone_and_truncation_closed(g, n):
    if not has_disjoint_cycles(g):
        return
    for c in cycles(g):
        small = enumerate_Pc(g, c, n)
        big = enumerate_Pc(g, c, n + 1)
        assert big[: len(small)] == small
        members = set(big)
        for p in big:
            assert in_Pc(g, c, p)
            for k in range(1, p.length + 1):
                q = Path(g.r(p.edges[k - 1]), p.end, p.edges[k:])
                if in_Pc(g, c, q):
                    assert q in members


@given(graphs())
def test_Pc_finite_matches_stabilization(g):
    if not has_disjoint_cycles(g):
        return
    for c in cycles(g):
        assert is_Pc_finite(g, c) == pc_stabilizes(g, c)


@given(graphs(), st.data())
def test_restrict_hereditary(g, data):
    H = data.draw(st.sets(st.sampled_from(g.vertices), min_size=1))
    if not (is_hereditary(g, H) and is_saturated(g, H)):
        return
    R = restrict(g, H)
    assert all(e.dst in H and e.src in H for e in R.edges)
