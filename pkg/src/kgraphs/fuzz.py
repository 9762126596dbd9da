"""Seeded random instances: valid rules on small box skeletons and quasi-products over polytrees."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .analysis import QuasiProduct, layer_rules, verify_quasi_product
from .actions import verify_mp_axioms
from .rules import KGraph, RuleSet, all_color_orders, rewrite_closure, validate_rule
from .skeleton import BoxEmbedding, ColoredGraph, Edge, box_product, is_connected


@dataclass
class FuzzInstance:
    host: KGraph
    lam: KGraph
    gam: KGraph
    emb: BoxEmbedding
    attempts: int

    def quasi_product(self, budget: int = 10**6) -> QuasiProduct:
        return verify_quasi_product(self.host, self.lam, self.gam, self.emb, budget=budget)


def random_graph(rng: random.Random, rank: int, n_vertices: int, n_edges: int, prefix: str) -> ColoredGraph:
    vs = [f"{prefix}{i}" for i in range(n_vertices)]
    edges = [Edge(f"{prefix}e{i}", rng.choice(vs), rng.choice(vs), rng.randint(1, rank)) for i in range(n_edges)]
    return ColoredGraph(rank, vs, edges)


def random_squares(rng: random.Random, g: ColoredGraph) -> list | None:
    """One uniformly random bijection per (color pair, endpoints); None if counts differ."""
    buckets: dict[tuple, tuple[list, list]] = {}
    for a in g.edges:
        for b in g.into(g.src(a)):
            ca, cb = g.color(a), g.color(b)
            if ca == cb:
                continue
            key = (min(ca, cb), max(ca, cb), g.dst(a), g.src(b))
            lo, hi = buckets.setdefault(key, ([], []))
            (lo if ca < cb else hi).append((a, b))
    squares = []
    for lo, hi in buckets.values():
        if len(lo) != len(hi):
            return None
        hi = sorted(hi)
        rng.shuffle(hi)
        squares += list(zip(sorted(lo), hi))
    return squares


def random_box_rule(rng: random.Random, max_edges: int = 8, max_colors: int = 3,
                    tries: int = 200) -> FuzzInstance:
    """A valid rule on a random box skeleton; factors are the host's own first layers."""
    attempts = 0
    while True:
        rank = rng.randint(2, max_colors)
        k1 = rng.randint(1, rank - 1)
        k2 = rank - k1
        nl, ng = rng.randint(1, 2), rng.randint(1, 2)
        el, eg = rng.randint(1, 3), rng.randint(1, 3)
        if el * ng + eg * nl > max_edges:
            continue
        lam_g = random_graph(rng, k1, nl, el, "a")
        gam_g = random_graph(rng, k2, ng, eg, "b")
        host_g, emb = box_product(lam_g, gam_g)
        for _ in range(tries):
            attempts += 1
            squares = random_squares(rng, host_g)
            if squares is None:
                break
            rule = RuleSet(host_g, squares)
            result = validate_rule(rule)
            if not result:
                continue
            host = KGraph(rule, result)
            lam_layers, gam_layers = layer_rules(rule, emb)
            lam = KGraph(lam_layers[gam_g.vertices[0]])
            gam = KGraph(gam_layers[lam_g.vertices[0]])
            return FuzzInstance(host, lam, gam, emb, attempts)


def random_tree(rng: random.Random, n: int, prefix: str = "t") -> ColoredGraph:
    vs = [f"{prefix}{i}" for i in range(n)]
    edges = []
    for i in range(1, n):
        j = rng.randrange(i)
        a, b = (vs[i], vs[j]) if rng.random() < 0.5 else (vs[j], vs[i])
        edges.append(Edge(f"{prefix}e{i}", a, b, 1))
    return ColoredGraph(1, vs, edges)


def random_connected(rng: random.Random, n: int, m: int, prefix: str = "a") -> ColoredGraph:
    while True:
        g = random_graph(rng, 1, n, m, prefix)
        if is_connected(g):
            return g


def random_polytree_quasi_product(rng: random.Random, max_tree: int = 6) -> FuzzInstance:
    """Rank-1 connected Λ over a random oriented tree Γ, with random mixed squares.

    With both factors rank 1 there is no cube condition, so every draw is valid.
    """
    n = rng.randint(1, 3)
    lam_g = random_connected(rng, n, rng.randint(max(1, n - 1), n + 2))
    gam_g = random_tree(rng, rng.randint(2, max_tree))
    host_g, emb = box_product(lam_g, gam_g)
    classes: dict[tuple, list[str]] = {}
    for e, ed in lam_g.edges.items():
        classes.setdefault((ed.src, ed.dst), []).append(e)
    squares = []
    for g, gd in gam_g.edges.items():
        for cls in classes.values():
            image = list(cls)
            rng.shuffle(image)
            for e, e2 in zip(cls, image):
                ed = lam_g.edges[e]
                squares.append(((emb.lambda_edge(e, gd.dst), emb.gamma_edge(ed.src, g)),
                                (emb.gamma_edge(ed.dst, g), emb.lambda_edge(e2, gd.src))))
    rule = RuleSet(host_g, squares)
    return FuzzInstance(KGraph(rule), KGraph(RuleSet(lam_g, [])), KGraph(RuleSet(gam_g, [])), emb, 1)


def corpus(seed: int, count: int, **kw) -> list[FuzzInstance]:
    rng = random.Random(seed)
    return [random_box_rule(rng, **kw) for _ in range(count)]


def short_paths(g: ColoredGraph, bound: int):
    for n in range(1, bound + 1):
        yield from g.paths(n)


def closure_mismatches(host: KGraph, bound: int = 4) -> list[str]:
    """Paths whose rewrite class disagrees with normal forms (one path per color order, one canonical form)."""
    g = host.skeleton
    bad = []
    for path in short_paths(g, bound):
        cls = rewrite_closure(host.rule, path)
        orders = [g.color_order(p) for p in cls]
        expected = all_color_orders(g.color_order(path))
        if len(cls) != len(expected) or set(orders) != expected:
            bad.append(f"{'·'.join(path)}: class of size {len(cls)}, expected {len(expected)}")
            continue
        canon = {host.normalize(p) for p in cls}
        if len(canon) != 1 or not canon <= cls:
            bad.append(f"{'·'.join(path)}: normal forms {sorted(canon)}")
    return bad


def check_instance(inst: FuzzInstance, bound: int = 4) -> dict:
    """Invariant suite for one generated instance."""
    report = verify_mp_axioms(inst.quasi_product().mp, bound)
    closure = closure_mismatches(inst.host, bound)
    return {"edges": len(inst.host.skeleton.edges), "rank": inst.host.rank,
            "closure_mismatches": closure, "mp_violations": [f"{k}: {w}" for k, w in report.violations],
            "ok": not closure and report.ok}


__all__ = ["FuzzInstance", "random_box_rule", "random_polytree_quasi_product", "random_squares", "random_tree",
           "random_graph", "corpus", "short_paths", "closure_mismatches",
           "check_instance"]
