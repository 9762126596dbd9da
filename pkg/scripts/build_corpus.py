"""Regenerate the bundled fixture corpus in src/kgraphs/corpus/.

Run from the repository root:  python3 scripts/build_corpus.py
"""

from __future__ import annotations

from pathlib import Path

from kgraphs.document import FactorData, InstanceDocument, serialize_document
from kgraphs.rules import unique_rule
from kgraphs.skeleton import ColoredGraph, Edge

OUT = Path(__file__).resolve().parent.parent / "src" / "kgraphs" / "corpus"


def graph(rank, vertices, edges):
    return ColoredGraph(rank, vertices, [Edge(*e) for e in edges])


def factor(rank, vertices, edges, squares=None):
    g = graph(rank, vertices, edges)
    if squares is None:
        rule = unique_rule(g)
        squares = rule.squares if rule is not None else []
    return FactorData(g, list(squares))


def sq(a, b, c, d):
    return ((a, b), (c, d))


def cycle_factor(n, k, prefix="w"):
    vs = [f"{prefix}{i}" for i in range(n)]
    edges = [(f"f{i}{j}", vs[i], vs[(i + 1) % n], j) for i in range(n) for j in range(1, k + 1)]
    return factor(k, vs, edges)


def bouquet(n, names=None):
    names = names or [f"f{i}" for i in range(1, n + 1)]
    return factor(1, ["v"], [(e, "v", "v", 1) for e in names])


C12 = factor(2, ["x"], [("e", "x", "x", 1), ("g", "x", "x", 2)])


def bouq(name, twists, description):
    mixed = []
    for gam_edge, perm in twists.items():
        for a, b in perm.items():
            mixed.append(sq(f"({a},x)", f"(v,{gam_edge})", f"(v,{gam_edge})", f"({b},x)"))
    return InstanceDocument(name, 1, 2, bouquet(3), C12, mixed, description=description)


def fixtures():
    yield bouq("bouq_sim1", {}, "three loops times two commuting loops, product rule")
    swap = {"f1": "f2", "f2": "f1", "f3": "f3"}
    yield bouq("bouq_sim2", {"e": swap, "g": swap}, "both loops of the cycle factor swap f1 and f2")
    yield bouq("bouq_sim3", {"e": {"f1": "f1", "f2": "f3", "f3": "f2"}, "g": swap},
               "incompatible twists; fails the cube condition")

    lam = factor(1, ["u", "v"], [("h", "u", "u", 1), ("e", "u", "u", 1), ("f", "u", "v", 1), ("g", "u", "v", 1)])
    gam = factor(1, ["x", "y"], [("d", "x", "x", 1), ("b", "x", "y", 1), ("c", "x", "y", 1)])
    mixed = [sq("(f,y)", "(u,b)", "(v,c)", "(g,x)"), sq("(f,y)", "(u,c)", "(v,b)", "(f,x)"),
             sq("(h,y)", "(u,b)", "(u,c)", "(e,x)"), sq("(e,y)", "(u,b)", "(u,c)", "(h,x)"),
             sq("(h,y)", "(u,c)", "(u,b)", "(h,x)"), sq("(e,y)", "(u,c)", "(u,b)", "(e,x)"),
             sq("(g,y)", "(u,c)", "(v,c)", "(f,x)")]
    yield InstanceDocument("rho_non_comp", 1, 1, lam, gam, mixed,
                           description="right action of b does not respect composition")

    lam = factor(1, ["u", "v"], [("h", "u", "u", 1), ("e", "v", "v", 1), ("f", "u", "v", 1), ("g", "u", "v", 1)])
    gam = factor(1, ["x", "y"], [("d", "x", "x", 1), ("a", "y", "y", 1), ("b", "x", "y", 1), ("c", "x", "y", 1)])
    mixed = [sq("(g,y)", "(u,b)", "(v,b)", "(g,x)"), sq("(f,y)", "(u,b)", "(v,c)", "(g,x)"),
             sq("(g,y)", "(u,c)", "(v,c)", "(f,x)"), sq("(f,y)", "(u,c)", "(v,b)", "(f,x)")]
    yield InstanceDocument("rho_non_isom", 1, 1, lam, gam, mixed,
                           description="right action of b is not injective; left actions are bijective")

    n = 8
    lam = factor(1, [f"w{i}" for i in range(n)], [(f"e{i}", f"w{i + 1}", f"w{i}", 1) for i in range(n - 1)])
    gam = factor(1, ["v"], [("f", "v", "v", 1), ("g", "v", "v", 1)])
    mixed = []
    for i in range(1, n - 1, 2):
        mixed.append(sq(f"(e{i},v)", f"(w{i + 1},f)", f"(w{i},g)", f"(e{i},v)"))
        mixed.append(sq(f"(e{i},v)", f"(w{i + 1},g)", f"(w{i},f)", f"(e{i},v)"))
    yield InstanceDocument("path_loops_trunc8", 1, 1, lam, gam, mixed, root="w2",
                           description="directed path of eight vertices; odd edges swap the two loops")

    lam = factor(1, ["t", "u", "v", "w"], [("vu", "u", "v", 1), ("wu", "u", "w", 1),
                                           ("vt", "t", "v", 1), ("wt", "t", "w", 1)])
    gam = factor(1, ["x"], [("f", "x", "x", 1), ("g", "x", "x", 1)])

    def twist(edge, src, dst):
        return [sq(f"({edge},x)", f"({src},f)", f"({dst},g)", f"({edge},x)"),
                sq(f"({edge},x)", f"({src},g)", f"({dst},f)", f"({edge},x)")]

    yield InstanceDocument("counter_omega1", 1, 1, lam, gam, twist("wt", "t", "w"),
                           description="undirected four-cycle with one twisted edge; not a product")
    yield InstanceDocument("counter_omega2", 1, 1, lam, gam, twist("wt", "t", "w") + twist("wu", "u", "w"),
                           root="w", description="undirected four-cycle with two twisted edges; a product")

    b2 = bouquet(2, ["a1", "a2"])
    c43 = cycle_factor(4, 3)
    mixed = []
    for i in range(4):
        f = f"f{i}1"
        src, dst = f"w{i}", f"w{(i + 1) % 4}"
        for a, b in (("a1", "a2"), ("a2", "a1")):
            mixed.append(sq(f"({a},{dst})", f"(v,{f})", f"(v,{f})", f"({b},{src})"))
    yield InstanceDocument("c43", 1, 3, b2, c43, mixed,
                           description="two loops over three parallel 4-cycles; color-1 cycle edges swap the loops")

    m = 4
    verts = [f"p{i}{j}" for i in range(m) for j in range(m)]
    edges = [(f"h{i}{j}", f"p{i}{j}", f"p{i + 1}{j}", 1) for i in range(m - 1) for j in range(m)]
    edges += [(f"u{i}{j}", f"p{i}{j}", f"p{i}{j + 1}", 2) for i in range(m) for j in range(m - 1)]
    grid = factor(2, verts, edges)
    mixed = []
    for j in range(m):
        h = f"h0{j}"
        for a, b in (("a1", "a2"), ("a2", "a1")):
            mixed.append(sq(f"({a},p1{j})", f"(v,{h})", f"(v,{h})", f"({b},p0{j})"))
    line = graph(1, [str(i) for i in range(m)], [(f"s{i}", str(i), str(i + 1), 1) for i in range(m - 1)])
    yield InstanceDocument("lattice_grid4", 1, 2, b2, grid, mixed, candidates=[line, line],
                           description="two loops over a 4x4 grid; the first column of horizontal edges swaps them")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for doc in fixtures():
        (OUT / f"{doc.name}.json").write_text(serialize_document(doc), encoding="utf-8")
        print("wrote", doc.name)


if __name__ == "__main__":
    main()
