import random
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgraphs.errors import BudgetExceeded, GraphError
from kgraphs.fuzz import random_graph
from kgraphs.skeleton import (ColoredGraph, Edge, bidirect, box_product, components, cycle_basis, is_connected,
                              is_polytree, match_box_skeleton)


def graph(rank, vertices, edges):
    return ColoredGraph(rank, vertices, [Edge(*e) for e in edges])


B3 = graph(1, ["v"], [("f1", "v", "v", 1), ("f2", "v", "v", 1), ("f3", "v", "v", 1)])
C12 = graph(2, ["x"], [("e", "x", "x", 1), ("g", "x", "x", 2)])
COUNTER = graph(1, ["t", "u", "v", "w"], [("vu", "u", "v", 1), ("wu", "u", "w", 1),
                                         ("vt", "t", "v", 1), ("wt", "t", "w", 1)])


def test_graph_rejects_dangling_vertex():
    with pytest.raises(GraphError):
        graph(1, ["a"], [("e", "a", "b", 1)])


def test_graph_rejects_bad_color():
    with pytest.raises(GraphError):
        graph(1, ["a"], [("e", "a", "a", 2)])


def test_paths_are_range_first():
    g = graph(1, ["a", "b", "c"], [("x", "a", "b", 1), ("y", "b", "c", 1)])
    assert g.is_path(("y", "x"))
    assert not g.is_path(("x", "y"))
    assert g.path_range(("y", "x")) == "c" and g.path_source(("y", "x")) == "a"


def test_box_product_single_vertex_is_a_recoloring():
    point = graph(1, ["p"], [])
    g = graph(2, ["a", "b"], [("e", "a", "b", 1), ("h", "b", "a", 2)])
    host, emb = box_product(point, g)
    assert host.rank == 3
    assert sorted(host.color(emb.gamma_edge("p", e)) for e in g.edges) == [2, 3]
    assert len(host.vertices) == 2


def test_box_product_bouquet_has_five_loops():
    host, _ = box_product(B3, C12)
    assert len(host.vertices) == 1
    assert sorted(e.color for e in host.edges.values()) == [1, 1, 1, 2, 3]


def test_box_product_counts_small_example():
    lhs = graph(1, ["a", "b"], [("p", "a", "b", 1), ("q", "b", "a", 1)])
    rhs = graph(1, ["x", "y", "z"], [("r", "x", "y", 1)])
    host, _ = box_product(lhs, rhs)
    # enumerate the definition directly
    expected_edges = [(e, w) for e in lhs.edges for w in rhs.vertices] + [(x, g) for x in lhs.vertices for g in rhs.edges]
    assert len(host.vertices) == 6
    assert len(host.edges) == len(expected_edges) == 8


graphs = st.builds(lambda seed, r, n, m: random_graph(random.Random(seed), r, n, m, "a"),
                   st.integers(0, 10**6), st.integers(1, 2), st.integers(1, 3), st.integers(0, 4))


@settings(max_examples=60, deadline=None)
@given(graphs, graphs)
def test_box_product_count_formula(a, b):
    b = ColoredGraph(b.rank, [f"z{v}" for v in b.vertices],
                     [Edge(f"z{e.id}", f"z{e.src}", f"z{e.dst}", e.color) for e in b.edges.values()])
    host, emb = box_product(a, b)
    assert len(host.vertices) == len(a.vertices) * len(b.vertices)
    assert len(host.edges) == len(a.edges) * len(b.vertices) + len(a.vertices) * len(b.edges)
    assert match_box_skeleton(host, a, b) is not None


def test_match_box_skeleton_identity():
    host, emb = box_product(B3, C12)
    found = match_box_skeleton(host, B3, C12)
    assert found.vertex_map == emb.vertex_map and found.edge_map == emb.edge_map


def test_match_box_skeleton_absent_by_edge_count():
    host = graph(2, ["a", "b"], [("e", "a", "b", 1)])
    one = graph(1, ["s", "t"], [("k", "s", "t", 1)])
    assert match_box_skeleton(host, one, one) is None


def _brute_box_exists(host, lhs, rhs):
    """Independent oracle: try every vertex bijection, compare colored edge multisets."""
    box, _ = box_product(lhs, rhs)
    if len(box.vertices) != len(host.vertices):
        return False
    sig = lambda g, m: sorted((m[e.src], m[e.dst], e.color) for e in g.edges.values())
    for perm in permutations(host.vertices):
        m = dict(zip(box.vertices, perm))
        if sig(box, m) == sig(host, {v: v for v in host.vertices}):
            return True
    return False


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_match_box_skeleton_against_enumeration(seed):
    rng = random.Random(seed)
    lhs = random_graph(rng, 1, rng.randint(1, 2), rng.randint(0, 2), "a")
    rhs = random_graph(rng, 1, rng.randint(1, 2), rng.randint(0, 2), "b")
    host = random_graph(rng, 2, len(lhs.vertices) * len(rhs.vertices),
                        len(lhs.edges) * len(rhs.vertices) + len(lhs.vertices) * len(rhs.edges), "h")
    if rng.random() < 0.5:
        host, _ = box_product(lhs, rhs)
    assert (match_box_skeleton(host, lhs, rhs) is not None) == _brute_box_exists(host, lhs, rhs)


def test_match_box_skeleton_budget():
    host, _ = box_product(B3, C12)
    with pytest.raises(BudgetExceeded):
        match_box_skeleton(host, B3, C12, budget=2)


def test_match_box_skeleton_rank_mismatch():
    with pytest.raises(GraphError):
        match_box_skeleton(C12, B3, C12)


def test_polytree_single_edge():
    assert is_polytree(graph(1, ["u", "v"], [("e", "u", "v", 1)]))


def test_polytree_two_cycle_witness():
    res = is_polytree(graph(1, ["u", "v"], [("e", "u", "v", 1), ("f", "v", "u", 1)]))
    assert not res
    assert {se.edge for se in res.witness.path} == {"e", "f"}
    # a directed 2-cycle is walked forward on both edges
    signs = {se.edge: se.sign for se in res.witness.path}
    assert signs["e"] == signs["f"]


def test_polytree_antiparallel_pair_witness():
    res = is_polytree(graph(1, ["u", "v"], [("e", "u", "v", 1), ("f", "u", "v", 1)]))
    assert not res
    signs = {se.edge: se.sign for se in res.witness.path}
    assert signs["e"] != signs["f"]


def test_polytree_counter_skeleton_is_not():
    res = is_polytree(COUNTER)
    assert not res and len(res.witness.path) == 4


def test_polytree_needs_rank_one():
    with pytest.raises(GraphError):
        is_polytree(C12)


def test_cycle_basis_tree_is_empty():
    g = graph(1, ["a", "b", "c"], [("x", "a", "b", 1), ("y", "c", "b", 1)])
    _, cycles = cycle_basis(bidirect(g), "a")
    assert cycles == []


def test_cycle_basis_single_loop():
    g = graph(1, ["v"], [("e", "v", "v", 1)])
    _, cycles = cycle_basis(bidirect(g), "v")
    assert len(cycles) == 1 and [str(se) for se in cycles[0].path] == ["e+"]


def test_cycle_basis_counter_euler_count():
    _, cycles = cycle_basis(bidirect(COUNTER), "u")
    assert len(cycles) == len(COUNTER.edges) - len(COUNTER.vertices) + 1 == 1


def test_cycle_basis_unknown_root():
    with pytest.raises(GraphError):
        cycle_basis(bidirect(COUNTER), "nowhere")


@settings(max_examples=60, deadline=None)
@given(graphs)
def test_fundamental_cycles_are_closed_walks(g):
    bg = bidirect(g)
    for comp in components(g):
        tree, cycles = cycle_basis(bg, comp[0])
        assert len(tree.order) == len(comp)
        assert len(cycles) == sum(1 for e in g.edges.values() if e.src in comp) - len(comp) + 1
        for cyc in cycles:
            walk = cyc.walk
            assert bg.src(walk[0]) == cyc.anchor == bg.dst(walk[-1])
            for a, b in zip(walk, walk[1:]):
                assert bg.dst(a) == bg.src(b)


@settings(max_examples=60, deadline=None)
@given(graphs)
def test_polytree_iff_no_cycles(g):
    if g.rank != 1:
        return
    expected = all(not cycle_basis(bidirect(g), c[0])[1] for c in components(g))
    assert bool(is_polytree(g)) == expected


@settings(max_examples=40, deadline=None)
@given(graphs)
def test_bidirect_reversal_is_isomorphic(g):
    bg = bidirect(g)
    rev = bg.reversed()
    # e+ <-> e- is an isomorphism between the double and its reversal
    for se in bg.edges:
        assert (rev.src(se.flipped()), rev.dst(se.flipped())) == (bg.src(se), bg.dst(se))
    assert len(bg.edges) == 2 * len(g.edges)


def test_connectivity():
    assert is_connected(graph(1, ["a"], []))
    assert not is_connected(graph(1, ["a", "b"], []))
    line = graph(1, ["a", "b"], [("e", "a", "b", 1)])
    host, _ = box_product(line, graph(1, ["x", "y"], [("f", "y", "x", 1)]))
    assert is_connected(host)
