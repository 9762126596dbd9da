import random
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgraphs.errors import GraphError, InvalidRuleError, MalformedRuleError
from kgraphs.fuzz import random_box_rule, short_paths
from kgraphs.rules import (KGraph, RuleSet, all_color_orders, normalize, normalize_to_order, product_kgraph,
                           rewrite_closure, unique_rule, validate_rule)
from kgraphs.skeleton import ColoredGraph, Edge


def graph(rank, vertices, edges):
    return ColoredGraph(rank, vertices, [Edge(*e) for e in edges])


SQUARE2 = graph(2, ["a", "b", "c", "d"], [("e", "b", "a", 1), ("f", "c", "b", 2),
                                          ("g", "d", "a", 2), ("h", "c", "d", 1)])


def test_single_square_is_valid():
    rule = RuleSet(SQUARE2, [(("e", "f"), ("g", "h"))])
    assert validate_rule(rule)
    assert rule.partner("g", "h") == ("e", "f")


def test_square_orientation_is_normalized():
    a = RuleSet(SQUARE2, [(("e", "f"), ("g", "h"))])
    b = RuleSet(SQUARE2, [(("g", "h"), ("e", "f"))])
    assert a == b and a.squares == [(("e", "f"), ("g", "h"))]


def test_missing_square():
    res = validate_rule(RuleSet(SQUARE2, []))
    assert not res and res.kind == "missing-square"


def test_conflicting_squares_are_non_bijective():
    g = graph(2, ["a", "b"], [("e", "b", "a", 1), ("e2", "b", "a", 1), ("f", "b", "b", 2), ("k", "a", "a", 2)])
    rule = RuleSet(g, [(("e", "f"), ("k", "e")), (("e2", "f"), ("k", "e"))])
    res = validate_rule(rule)
    assert not res and res.kind == "non-bijective"


@pytest.mark.parametrize("square, fragment", [
    ((("e", "zz"), ("g", "h")), "unknown edge"),
    ((("f", "e"), ("g", "h")), "not composable"),
    ((("e", "h"), ("e", "h")), "not composable"),
])
def test_malformed_squares(square, fragment):
    with pytest.raises(MalformedRuleError) as info:
        RuleSet(SQUARE2, [square])
    assert fragment in str(info.value)
    assert info.value.location == "square[0]"


def test_single_colored_square_rejected():
    g = graph(1, ["a"], [("x", "a", "a", 1), ("y", "a", "a", 1)])
    with pytest.raises(MalformedRuleError, match="single-colored"):
        RuleSet(g, [(("x", "y"), ("y", "x"))])


def test_invalid_rule_refused_by_kgraph():
    with pytest.raises(InvalidRuleError):
        KGraph(RuleSet(SQUARE2, []))


def test_unique_rule_absent_with_parallel_edges():
    g = graph(2, ["v"], [("a", "v", "v", 1), ("b", "v", "v", 1), ("c", "v", "v", 2)])
    assert unique_rule(g) is None


@pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 5) for k in range(1, 4)])
def test_unique_rule_on_cycles(n, k):
    vs = [f"w{i}" for i in range(n)]
    g = ColoredGraph(k, vs, [Edge(f"f{i}{j}", vs[i], vs[(i + 1) % n], j) for i in range(n) for j in range(1, k + 1)])
    rule = unique_rule(g)
    assert validate_rule(rule)
    assert len(rule.squares) == n * k * (k - 1) // 2


def brute_classes(rule: RuleSet, bound: int) -> set[frozenset]:
    """Classes of all paths up to ``bound`` computed by closure alone."""
    out = set()
    for p in short_paths(rule.graph, bound):
        out.add(frozenset(rewrite_closure(rule, p)))
    return out


def test_bouquet_product_morphism_count():
    # three loops of color 1 times two commuting loops: degree (a,b,c) has 3**a morphisms
    b3 = KGraph(RuleSet(graph(1, ["v"], [(f"f{i}", "v", "v", 1) for i in (1, 2, 3)]), []))
    c12 = KGraph(unique_rule(graph(2, ["x"], [("e", "x", "x", 1), ("g", "x", "x", 2)])))
    host, _ = product_kgraph(b3, c12)
    expected = sum(3 ** a for a in range(3) for b in range(3) for c in range(3) if a + b + c <= 2)
    assert expected == 24
    assert len(host.enumerate_morphisms(bound=2)) == 24
    assert len(brute_classes(host.rule, 2)) == 23  # every non-identity class


def test_normalize_square():
    rule = RuleSet(SQUARE2, [(("e", "f"), ("g", "h"))])
    assert normalize(rule, ("g", "h")) == ("e", "f")
    assert normalize_to_order(rule, ("e", "f"), (2, 1)) == ("g", "h")
    with pytest.raises(GraphError):
        normalize_to_order(rule, ("e", "f"), (1, 1))


def test_factorize_and_compose():
    rule = RuleSet(SQUARE2, [(("e", "f"), ("g", "h"))])
    k = KGraph(rule)
    m = k.morphism(("g", "h"))
    mu, nu = k.factorize(m, (0, 1))
    assert mu.path == ("g",) and nu.path == ("h",)
    assert k.compose(mu, nu) == m
    with pytest.raises(GraphError):
        k.factorize(m, (2, 0))
    with pytest.raises(GraphError):
        k.compose(nu, mu)


def instances():
    return st.integers(0, 10**6).map(lambda s: random_box_rule(random.Random(s), max_edges=7))


@settings(max_examples=30, deadline=None)
@given(instances())
def test_normal_form_is_a_class_invariant(inst):
    rule = inst.host.rule
    for p in short_paths(rule.graph, 3):
        cls = rewrite_closure(rule, p)
        n = normalize(rule, p)
        assert n in cls
        colors = rule.graph.color_order(n)
        assert list(colors) == sorted(colors)
        assert {normalize(rule, q) for q in cls} == {n}
        assert len(cls) == len(all_color_orders(colors))


@settings(max_examples=30, deadline=None)
@given(instances(), st.integers(0, 10**6))
def test_factorization_is_unique(inst, seed):
    host = inst.host
    rng = random.Random(seed)
    paths = [p for p in short_paths(host.skeleton, 3) if len(p) >= 2]
    if not paths:
        return
    m = host.morphism(rng.choice(paths))
    front = tuple(rng.randint(0, d) for d in m.degree)
    mu, nu = host.factorize(m, front)
    assert mu.degree == front
    assert tuple(a - b for a, b in zip(m.degree, front)) == nu.degree
    assert host.compose(mu, nu) == m
    # oracle: exactly one split of the class has this front degree
    cls = rewrite_closure(host.rule, m.path)
    n = sum(front)
    splits = {(host.morphism(p[:n]) if n else None, host.morphism(p[n:]) if n < len(p) else None)
              for p in cls if host.skeleton.degree(p[:n]) == front}
    assert len(splits) == 1


@settings(max_examples=30, deadline=None)
@given(instances())
def test_products_of_valid_rules_are_valid(inst):
    host, emb = product_kgraph(inst.lam, inst.gam)
    assert validate_rule(host.rule)
    assert len(host.skeleton.edges) == len(inst.host.skeleton.edges)


@settings(max_examples=30, deadline=None)
@given(instances())
def test_enumeration_matches_closure_classes(inst):
    host = inst.host
    ms = [m for m in host.enumerate_morphisms(bound=3) if not m.is_identity]
    assert len(ms) == len(set(ms)) == len(brute_classes(host.rule, 3))


def test_all_color_orders():
    assert all_color_orders((1, 1, 2)) == {(1, 1, 2), (1, 2, 1), (2, 1, 1)}
    assert len(all_color_orders((1, 2, 3))) == len(list(permutations((1, 2, 3))))
