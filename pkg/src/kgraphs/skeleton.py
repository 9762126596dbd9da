"""Edge-colored directed multigraphs and graph-level constructions.

Paths follow the composition convention used throughout the package: a path
``(e1, e2, ..., en)`` is written range-first, so ``s(e_i) == r(e_{i+1})``.
Its range is ``r(e1)`` and its source is ``s(en)``.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import BudgetExceeded, GraphError

Path = tuple  # tuple[str, ...] of edge ids, range-first


@dataclass(frozen=True, order=True)
class Edge:
    id: str
    src: str
    dst: str
    color: int


class ColoredGraph:
    """Finite edge-colored directed multigraph with colors ``1..rank``.

    Vertex and edge ids are strings; every iteration order in the package is
    the ascending order of these ids.
    """

    def __init__(self, rank: int, vertices: Iterable[str], edges: Iterable[Edge | tuple]):
        if rank < 1:
            raise GraphError(f"rank must be positive, got {rank}")
        self.rank = rank
        verts = list(vertices)
        if len(set(verts)) != len(verts):
            dup = sorted(v for v, n in Counter(verts).items() if n > 1)
            raise GraphError(f"duplicate vertex ids {dup}")
        self.vertices: tuple[str, ...] = tuple(sorted(verts))
        vset = set(self.vertices)
        table: dict[str, Edge] = {}
        for raw in edges:
            e = raw if isinstance(raw, Edge) else Edge(*raw)
            if e.id in table:
                raise GraphError(f"duplicate edge id {e.id!r}")
            if e.src not in vset or e.dst not in vset:
                raise GraphError(f"edge {e.id!r} references undeclared vertex")
            if not 1 <= e.color <= rank:
                raise GraphError(f"edge {e.id!r} has color {e.color} outside 1..{rank}")
            table[e.id] = e
        self.edges: dict[str, Edge] = {k: table[k] for k in sorted(table)}
        self._in: dict[str, list[str]] = {v: [] for v in self.vertices}
        self._out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges.values():
            self._in[e.dst].append(e.id)
            self._out[e.src].append(e.id)

    # -- basic accessors -------------------------------------------------

    def src(self, e: str) -> str:
        return self.edges[e].src

    def dst(self, e: str) -> str:
        return self.edges[e].dst

    def color(self, e: str) -> int:
        return self.edges[e].color

    def into(self, v: str) -> list[str]:
        """Edges with range ``v``."""
        return self._in[v]

    def out_of(self, v: str) -> list[str]:
        """Edges with source ``v``."""
        return self._out[v]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ColoredGraph):
            return NotImplemented
        return (self.rank, self.vertices, self.edges) == (other.rank, other.vertices, other.edges)

    def __hash__(self) -> int:
        return hash((self.rank, self.vertices, tuple(self.edges.values())))

    def __repr__(self) -> str:
        return f"ColoredGraph(rank={self.rank}, |V|={len(self.vertices)}, |E|={len(self.edges)})"

    # -- paths -----------------------------------------------------------

    def is_path(self, path: Sequence[str]) -> bool:
        return all(self.src(a) == self.dst(b) for a, b in zip(path, path[1:]))

    def check_path(self, path: Sequence[str]) -> None:
        for e in path:
            if e not in self.edges:
                raise GraphError(f"unknown edge {e!r}")
        for a, b in zip(path, path[1:]):
            if self.src(a) != self.dst(b):
                raise GraphError(f"edges {a!r}, {b!r} are not composable")

    def path_range(self, path: Sequence[str]) -> str:
        return self.dst(path[0])

    def path_source(self, path: Sequence[str]) -> str:
        return self.src(path[-1])

    def color_order(self, path: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.edges[e].color for e in path)

    def degree(self, path: Sequence[str]) -> tuple[int, ...]:
        deg = [0] * self.rank
        for e in path:
            deg[self.edges[e].color - 1] += 1
        return tuple(deg)

    def paths(self, length: int) -> Iterator[Path]:
        """All paths with exactly ``length`` edges (length >= 1)."""
        if length < 1:
            return
        stack = [(e,) for e in reversed(list(self.edges))]
        while stack:
            p = stack.pop()
            if len(p) == length:
                yield p
                continue
            for e in reversed(self._in[self.src(p[-1])]):
                stack.append(p + (e,))

    # -- derived graphs --------------------------------------------------

    def subgraph(self, edge_ids: Iterable[str], vertices: Iterable[str] | None = None) -> "ColoredGraph":
        keep = [self.edges[e] for e in edge_ids]
        verts = self.vertices if vertices is None else vertices
        return ColoredGraph(self.rank, verts, keep)

    def recolored(self, mapping: dict[int, int], rank: int) -> "ColoredGraph":
        return ColoredGraph(rank, self.vertices,
                            [Edge(e.id, e.src, e.dst, mapping[e.color]) for e in self.edges.values()])

    def profile(self, v: str) -> tuple:
        """Per-color (in, out, loop) counts; invariant under isomorphism."""
        prof = Counter()
        for e in self._in[v]:
            prof[(self.color(e), "in")] += 1
        for e in self._out[v]:
            prof[(self.color(e), "out")] += 1
            if self.dst(e) == v:
                prof[(self.color(e), "loop")] += 1
        return tuple(sorted(prof.items()))

    def adjacency(self) -> dict[str, dict[str, Counter]]:
        adj: dict[str, dict[str, Counter]] = {v: {} for v in self.vertices}
        for e in self.edges.values():
            adj[e.src].setdefault(e.dst, Counter())[e.color] += 1
        return adj


# ---------------------------------------------------------------------------
# connectivity


def components(g: ColoredGraph) -> list[list[str]]:
    """Connected components of the underlying undirected graph, each sorted."""
    seen: set[str] = set()
    comps = []
    for root in g.vertices:
        if root in seen:
            continue
        seen.add(root)
        comp, queue = [], deque([root])
        while queue:
            v = queue.popleft()
            comp.append(v)
            for e in g.out_of(v) + g.into(v):
                for w in (g.src(e), g.dst(e)):
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
        comps.append(sorted(comp))
    return comps


def is_connected(g: ColoredGraph) -> bool:
    return len(components(g)) <= 1


# ---------------------------------------------------------------------------
# box products


@dataclass
class BoxEmbedding:
    """Bookkeeping bijection between ``lhs □ rhs`` and a host graph.

    ``vertex_map`` sends ``(x, w)`` (x in lhs, w in rhs) to a host vertex.
    ``edge_map`` sends ``("L", e, w)`` and ``("R", x, g)`` to host edges.
    """

    lhs: ColoredGraph
    rhs: ColoredGraph
    host: ColoredGraph
    vertex_map: dict[tuple[str, str], str]
    edge_map: dict[tuple[str, str, str], str]
    _vinv: dict[str, tuple[str, str]] = field(init=False, repr=False)
    _einv: dict[str, tuple[str, str, str]] = field(init=False, repr=False)

    def __post_init__(self):
        self._vinv = {h: k for k, h in self.vertex_map.items()}
        self._einv = {h: k for k, h in self.edge_map.items()}

    @property
    def k1(self) -> int:
        return self.lhs.rank

    def vertex(self, x: str, w: str) -> str:
        return self.vertex_map[(x, w)]

    def lambda_edge(self, e: str, w: str) -> str:
        return self.edge_map[("L", e, w)]

    def gamma_edge(self, x: str, g: str) -> str:
        return self.edge_map[("R", x, g)]

    def split_vertex(self, h: str) -> tuple[str, str]:
        return self._vinv[h]

    def split_edge(self, h: str) -> tuple[str, str, str]:
        return self._einv[h]

    def factor_edge(self, h: str) -> str:
        """The lhs or rhs edge id underlying host edge ``h``."""
        side, a, b = self._einv[h]
        return a if side == "L" else b

    def lift_lambda(self, p: Sequence[str], w: str) -> Path:
        return tuple(self.edge_map[("L", e, w)] for e in p)

    def lift_gamma(self, x: str, q: Sequence[str]) -> Path:
        return tuple(self.edge_map[("R", x, g)] for g in q)

    def project(self, path: Sequence[str]) -> Path:
        return tuple(self.factor_edge(h) for h in path)

    def swapped(self, host: ColoredGraph) -> "BoxEmbedding":
        """The same bijection read as ``rhs □ lhs`` into a recolored ``host``."""
        vmap = {(w, x): h for (x, w), h in self.vertex_map.items()}
        emap = {}
        for (side, a, b), h in self.edge_map.items():
            emap[("R" if side == "L" else "L", b, a)] = h
        return BoxEmbedding(self.rhs, self.lhs, host, vmap, emap)


def pair_id(a: str, b: str) -> str:
    return f"({a},{b})"


def box_product(lhs: ColoredGraph, rhs: ColoredGraph) -> tuple[ColoredGraph, BoxEmbedding]:
    """Cartesian product; lhs colors keep 1..k1, rhs colors shift to k1+1..k1+k2.

    Host ids are ``"(a,b)"``: ``(x,w)`` for vertices, ``(e,w)`` and ``(x,g)`` for edges.
    """
    k1 = lhs.rank
    vmap = {(x, w): pair_id(x, w) for x in lhs.vertices for w in rhs.vertices}
    emap = {}
    edges = []
    for e in lhs.edges.values():
        for w in rhs.vertices:
            h = pair_id(e.id, w)
            emap[("L", e.id, w)] = h
            edges.append(Edge(h, vmap[(e.src, w)], vmap[(e.dst, w)], e.color))
    for x in lhs.vertices:
        for g in rhs.edges.values():
            h = pair_id(x, g.id)
            emap[("R", x, g.id)] = h
            edges.append(Edge(h, vmap[(x, g.src)], vmap[(x, g.dst)], g.color + k1))
    if len(set(vmap.values())) != len(vmap) or len({e.id for e in edges}) != len(edges):
        raise GraphError("factor ids collide after pairing; rename vertices or edges")
    host = ColoredGraph(k1 + rhs.rank, vmap.values(), edges)
    return host, BoxEmbedding(lhs, rhs, host, vmap, emap)


class _Counter:
    def __init__(self, budget: int):
        self.budget = budget
        self.nodes = 0

    def tick(self, what: str) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded(f"{what} exceeded {self.budget} nodes")


def iter_vertex_isos(a: ColoredGraph, b: ColoredGraph, budget: int = 10**6,
                     counter: _Counter | None = None) -> Iterator[dict[str, str]]:
    """Vertex bijections ``a -> b`` that extend to skeleton isomorphisms.

    Backtracks over vertices in BFS order; per-color degree profiles prune
    candidates and adjacency counts are checked against every earlier
    assignment.  Candidates with an identical id are tried first, so the
    identity comes out first when it qualifies.
    """
    counter = counter or _Counter(budget)
    if a.rank != b.rank or len(a.vertices) != len(b.vertices) or len(a.edges) != len(b.edges):
        return
    if Counter(e.color for e in a.edges.values()) != Counter(e.color for e in b.edges.values()):
        return
    prof_a = {v: a.profile(v) for v in a.vertices}
    prof_b = {v: b.profile(v) for v in b.vertices}
    if Counter(prof_a.values()) != Counter(prof_b.values()):
        return
    adj_a, adj_b = a.adjacency(), b.adjacency()
    empty = Counter()

    order: list[str] = []
    for comp in components(a):
        seen = {comp[0]}
        queue = deque([comp[0]])
        while queue:
            v = queue.popleft()
            order.append(v)
            nbrs = sorted({a.dst(e) for e in a.out_of(v)} | {a.src(e) for e in a.into(v)})
            for w in nbrs:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)

    vmap: dict[str, str] = {}
    used: set[str] = set()

    def fits(av: str, bv: str) -> bool:
        if adj_a[av].get(av, empty) != adj_b[bv].get(bv, empty):
            return False
        for au, bu in vmap.items():
            if adj_a[av].get(au, empty) != adj_b[bv].get(bu, empty):
                return False
            if adj_a[au].get(av, empty) != adj_b[bu].get(bv, empty):
                return False
        return True

    def search(i: int) -> Iterator[dict[str, str]]:
        if i == len(order):
            yield dict(vmap)
            return
        av = order[i]
        cands = [bv for bv in b.vertices if bv not in used and prof_b[bv] == prof_a[av]]
        if av in cands:
            cands.remove(av)
            cands.insert(0, av)
        for bv in cands:
            counter.tick("skeleton isomorphism search")
            if fits(av, bv):
                vmap[av] = bv
                used.add(bv)
                yield from search(i + 1)
                del vmap[av]
                used.discard(bv)

    yield from search(0)


def edge_classes(g: ColoredGraph) -> dict[tuple, list[str]]:
    """Edges grouped by (src, dst, color), each group in id order."""
    classes: dict[tuple, list[str]] = {}
    for e in g.edges.values():
        classes.setdefault((e.src, e.dst, e.color), []).append(e.id)
    return classes


def find_skeleton_iso(a: ColoredGraph, b: ColoredGraph, budget: int = 10**6):
    """Color-, source- and range-preserving isomorphism ``a -> b``.

    Returns ``(vertex_map, edge_map)`` or ``None``.  Parallel edges inside a
    (src, dst, color) class are matched in id order, same id first.
    """
    vmap = next(iter_vertex_isos(a, b, budget), None)
    if vmap is None:
        return None
    classes = {k: list(v) for k, v in edge_classes(b).items()}
    emap = {}
    for e in a.edges.values():
        pool = classes[(vmap[e.src], vmap[e.dst], e.color)]
        pick = e.id if e.id in pool else pool[0]
        pool.remove(pick)
        emap[e.id] = pick
    return vmap, emap


def match_box_skeleton(host: ColoredGraph, lhs: ColoredGraph, rhs: ColoredGraph,
                       budget: int = 10**6) -> BoxEmbedding | None:
    """Exhibit ``host ≅ lhs □ rhs`` as a BoxEmbedding, or return None."""
    if host.rank != lhs.rank + rhs.rank:
        raise GraphError(f"host rank {host.rank} != {lhs.rank} + {rhs.rank}")
    if len(host.edges) > budget:
        raise BudgetExceeded(f"host has {len(host.edges)} edges, budget is {budget}")
    box, emb = box_product(lhs, rhs)
    iso = find_skeleton_iso(box, host, budget)
    if iso is None:
        return None
    vmap, emap = iso
    return BoxEmbedding(lhs, rhs, host,
                        {k: vmap[v] for k, v in emb.vertex_map.items()},
                        {k: emap[h] for k, h in emb.edge_map.items()})


# ---------------------------------------------------------------------------
# bidirected double, spanning trees, cycles


class SignedEdge(NamedTuple):
    """``(id, +1)`` is e₊ (same direction as e), ``(id, -1)`` is e₋."""

    edge: str
    sign: int

    def __str__(self) -> str:
        return f"{self.edge}{'+' if self.sign > 0 else '-'}"

    def flipped(self) -> "SignedEdge":
        return SignedEdge(self.edge, -self.sign)


@dataclass(frozen=True)
class BiDirectedGraph:
    base: ColoredGraph

    @property
    def edges(self) -> list[SignedEdge]:
        return [SignedEdge(e, s) for e in self.base.edges for s in (1, -1)]

    def src(self, se: SignedEdge) -> str:
        e = self.base.edges[se.edge]
        return e.src if se.sign > 0 else e.dst

    def dst(self, se: SignedEdge) -> str:
        e = self.base.edges[se.edge]
        return e.dst if se.sign > 0 else e.src

    def reversed(self) -> "BiDirectedGraph":
        """Double of the graph with every edge reversed (isomorphic via e₊ <-> e₋)."""
        g = self.base
        rev = ColoredGraph(g.rank, g.vertices, [Edge(e.id, e.dst, e.src, e.color) for e in g.edges.values()])
        return BiDirectedGraph(rev)

    def leaving(self, v: str) -> list[SignedEdge]:
        """Signed edges with source ``v``, ascending id, e₊ before e₋."""
        g = self.base
        out = [SignedEdge(e, 1) for e in g.out_of(v)] + [SignedEdge(e, -1) for e in g.into(v)]
        return sorted(out, key=lambda se: (se.edge, -se.sign))


def bidirect(g: ColoredGraph) -> BiDirectedGraph:
    return BiDirectedGraph(g)


@dataclass(frozen=True)
class FundamentalCycle:
    """Closed bidirected path at ``anchor`` closing the non-tree ``edge``.

    ``path`` is range-first like every other path; ``walk`` is the same cycle
    listed in traversal order (source end first).
    """

    edge: str
    anchor: str
    path: tuple[SignedEdge, ...]

    @property
    def walk(self) -> tuple[SignedEdge, ...]:
        return tuple(reversed(self.path))

    def __str__(self) -> str:
        return "·".join(str(se) for se in self.path)


@dataclass(frozen=True)
class SpanningTree:
    root: str
    parent: dict[str, SignedEdge]  # signed edge traversed to reach the vertex
    order: tuple[str, ...]  # BFS discovery order

    def walk_from_root(self, v: str, bg: BiDirectedGraph) -> list[SignedEdge]:
        steps = []
        while v != self.root:
            se = self.parent[v]
            steps.append(se)
            v = bg.src(se)
        return steps[::-1]


def cycle_basis(bg: BiDirectedGraph, root: str) -> tuple[SpanningTree, list[FundamentalCycle]]:
    """BFS spanning tree of root's component plus one fundamental cycle per non-tree edge."""
    g = bg.base
    if root not in g._in:
        raise GraphError(f"root {root!r} is not a vertex")
    parent: dict[str, SignedEdge] = {}
    seen = {root}
    order = []
    tree_edges: set[str] = set()
    queue = deque([root])
    while queue:
        v = queue.popleft()
        order.append(v)
        for se in bg.leaving(v):
            w = bg.dst(se)
            if w not in seen and se.edge not in tree_edges:
                seen.add(w)
                parent[w] = se
                tree_edges.add(se.edge)
                queue.append(w)
    tree = SpanningTree(root, parent, tuple(order))
    cycles = []
    comp_edges = sorted({e for v in order for e in g.out_of(v)})
    for e in comp_edges:
        if e in tree_edges:
            continue
        a, b = g.src(e), g.dst(e)
        wa, wb = tree.walk_from_root(a, bg), tree.walk_from_root(b, bg)
        n = 0
        while n < min(len(wa), len(wb)) and wa[n] == wb[n]:
            n += 1
        # traverse e₊ from a to b, then back to a through the tree
        walk = [SignedEdge(e, 1)] + [se.flipped() for se in reversed(wb[n:])] + wa[n:]
        cycles.append(FundamentalCycle(e, a, tuple(reversed(walk))))
    return tree, cycles


def all_cycles(g: ColoredGraph) -> list[FundamentalCycle]:
    bg = bidirect(g)
    cycles = []
    for comp in components(g):
        cycles.extend(cycle_basis(bg, comp[0])[1])
    return cycles


class PolytreeResult(NamedTuple):
    is_polytree: bool
    witness: FundamentalCycle | None

    def __bool__(self) -> bool:
        return self.is_polytree


def is_polytree(g: ColoredGraph) -> PolytreeResult:
    """True iff the underlying undirected multigraph is a forest.

    Loops, parallel and antiparallel pairs all show up as fundamental cycles,
    so the witness is the first fundamental cycle found.
    """
    if g.rank != 1:
        raise GraphError(f"polytree check needs a rank-1 graph, got rank {g.rank}")
    cycles = all_cycles(g)
    return PolytreeResult(not cycles, cycles[0] if cycles else None)
