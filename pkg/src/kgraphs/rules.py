"""Factorization rules given by commuting squares, and the k-graphs they define."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import BudgetExceeded, GraphError, InvalidRuleError, MalformedRuleError
from .skeleton import BoxEmbedding, ColoredGraph, Path, box_product

Pair = tuple  # (edge id, edge id), range-first
Square = tuple  # (Pair, Pair)


def _fmt(path: Sequence[str]) -> str:
    return "·".join(path)


class RuleSet:
    """A square table on a colored graph.

    Every square ``a·b ~ c·d`` is stored once, keyed by the side whose first
    edge has the smaller color.  ``partner`` looks either side up.
    Construction only checks that squares are interpretable; completeness,
    bijectivity and the cube condition are left to ``validate_rule``.
    """

    def __init__(self, graph: ColoredGraph, squares: Iterable[Square]):
        self.graph = graph
        fwd: dict[Pair, Pair] = {}
        duplicates: list[tuple[Pair, Pair, Pair]] = []
        for n, sq in enumerate(squares):
            try:
                (a, b), (c, d) = sq
            except (TypeError, ValueError):
                raise MalformedRuleError("square must be a pair of edge pairs", f"square[{n}]") from None
            key, val = self._orient(graph, (a, b), (c, d), f"square[{n}]")
            if key in fwd and fwd[key] != val:
                duplicates.append((key, fwd[key], val))
                continue
            fwd[key] = val
        self._fwd = {k: fwd[k] for k in sorted(fwd)}
        self._bwd: dict[Pair, Pair] = {}
        self._collisions: list[tuple[Pair, Pair, Pair]] = []
        for k, v in self._fwd.items():
            if v in self._bwd:
                self._collisions.append((v, self._bwd[v], k))
            else:
                self._bwd[v] = k
        self._duplicates = duplicates

    @staticmethod
    def _orient(g: ColoredGraph, lhs: Pair, rhs: Pair, loc: str) -> tuple[Pair, Pair]:
        for e in (*lhs, *rhs):
            if e not in g.edges:
                raise MalformedRuleError(f"unknown edge id {e!r}", loc)
        a, b = lhs
        c, d = rhs
        for x, y in (lhs, rhs):
            if g.src(x) != g.dst(y):
                raise MalformedRuleError(f"{x}·{y} is not composable", loc)
        if g.dst(a) != g.dst(c) or g.src(b) != g.src(d):
            raise MalformedRuleError(f"{a}·{b} and {c}·{d} have different endpoints", loc)
        ca, cb, cc, cd = (g.color(e) for e in (a, b, c, d))
        if ca == cb:
            raise MalformedRuleError(f"{a}·{b} is single-colored", loc)
        if (ca, cb) != (cd, cc):
            raise MalformedRuleError(f"{a}·{b} and {c}·{d} do not have swapped color orders", loc)
        return (lhs, rhs) if ca < cb else (rhs, lhs)

    # -- lookup ------------------------------------------------------------

    def partner(self, a: str, b: str) -> Pair | None:
        """The other side of the square containing ``a·b``, if listed."""
        if self.graph.color(a) < self.graph.color(b):
            return self._fwd.get((a, b))
        return self._bwd.get((a, b))

    def swap(self, a: str, b: str) -> Pair:
        p = self.partner(a, b)
        if p is None:
            raise MalformedRuleError(f"no square contains {a}·{b}")
        return p

    @property
    def squares(self) -> list[Square]:
        """Listed squares, smaller-color-first side as key, sorted."""
        return list(self._fwd.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RuleSet):
            return NotImplemented
        return self.graph == other.graph and self._fwd == other._fwd and not (self._duplicates or other._duplicates)

    def __hash__(self) -> int:
        return hash((self.graph, tuple(self._fwd.items())))

    def restricted(self, edges: Iterable[str], vertices: Iterable[str] | None = None) -> "RuleSet":
        keep = set(edges)
        sub = self.graph.subgraph(sorted(keep), vertices)
        sq = [(k, v) for k, v in self._fwd.items() if set(k) <= keep and set(v) <= keep]
        return RuleSet(sub, sq)

    def relabeled(self, graph: ColoredGraph, edge_map: dict[str, str]) -> "RuleSet":
        """Transport squares along an edge bijection onto ``graph``."""
        sq = []
        for (a, b), (c, d) in self._fwd.items():
            sq.append(((edge_map[a], edge_map[b]), (edge_map[c], edge_map[d])))
        return RuleSet(graph, sq)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class RuleValidation:
    """Outcome of ``validate_rule``; truthy iff valid.

    ``kind`` is one of ``missing-square``, ``non-bijective`` or ``cube``.
    For cube failures ``triple`` is the offending path and ``results`` the two
    chain outcomes.
    """

    valid: bool
    kind: str | None = None
    message: str = ""
    triple: tuple[str, ...] | None = None
    results: tuple[tuple[str, ...], tuple[str, ...]] | None = None

    def __bool__(self) -> bool:
        return self.valid

    def __str__(self) -> str:
        return "valid" if self.valid else f"invalid ({self.kind}): {self.message}"

    def to_dict(self) -> dict:
        out: dict = {"valid": self.valid}
        if not self.valid:
            out["kind"] = self.kind
            out["message"] = self.message
            if self.triple is not None:
                out["triple"] = list(self.triple)
                out["results"] = [list(r) for r in self.results]
        return out


def _apply(rule: RuleSet, path: tuple, i: int) -> tuple:
    """Swap positions i, i+1 (0-based) through the square table."""
    c, d = rule.swap(path[i], path[i + 1])
    return path[:i] + (c, d) + path[i + 2:]


CHAIN_A = (0, 1, 0)
CHAIN_B = (1, 0, 1)


def cube_chains(rule: RuleSet, triple: tuple) -> tuple[tuple, tuple]:
    results = []
    for chain in (CHAIN_A, CHAIN_B):
        p = tuple(triple)
        for i in chain:
            p = _apply(rule, p, i)
        results.append(p)
    return results[0], results[1]


def validate_rule(rule: RuleSet) -> RuleValidation:
    g = rule.graph
    if rule._duplicates:
        key, v1, v2 = rule._duplicates[0]
        return RuleValidation(False, "non-bijective",
                              f"{_fmt(key)} is paired with both {_fmt(v1)} and {_fmt(v2)}")
    if rule._collisions:
        val, k1, k2 = rule._collisions[0]
        return RuleValidation(False, "non-bijective",
                              f"{_fmt(val)} is paired with both {_fmt(k1)} and {_fmt(k2)}")
    for a in g.edges:
        for b in g.into(g.src(a)):
            if g.color(a) != g.color(b) and rule.partner(a, b) is None:
                return RuleValidation(False, "missing-square", f"no square contains {a}·{b}")
    for a in g.edges:
        for b in g.into(g.src(a)):
            if g.color(b) == g.color(a):
                continue
            for c in g.into(g.src(b)):
                if g.color(c) in (g.color(a), g.color(b)):
                    continue
                ra, rb = cube_chains(rule, (a, b, c))
                if ra != rb:
                    return RuleValidation(False, "cube",
                                          f"{_fmt((a, b, c))} rewrites to {_fmt(ra)} and {_fmt(rb)}",
                                          (a, b, c), (ra, rb))
    return RuleValidation(True)


# ---------------------------------------------------------------------------
# normal forms


def target_ranks(colors: Sequence[int], target: Sequence[int]) -> list[int]:
    """Slot in ``target`` for each position; k-th occurrence of a color takes its k-th slot."""
    if sorted(colors) != sorted(target):
        raise GraphError(f"target order {tuple(target)} is not a permutation of {tuple(colors)}")
    slots: dict[int, list[int]] = {}
    for i, c in enumerate(target):
        slots.setdefault(c, []).append(i)
    seen: dict[int, int] = {}
    ranks = []
    for c in colors:
        k = seen.get(c, 0)
        ranks.append(slots[c][k])
        seen[c] = k + 1
    return ranks


def normalize_to_order(rule: RuleSet, path: Sequence[str], target: Sequence[int]) -> Path:
    """Bubble ``path`` into color order ``target`` one square at a time."""
    p = tuple(path)
    g = rule.graph
    ranks = target_ranks(g.color_order(p), target)
    swapped = True
    while swapped:
        swapped = False
        for i in range(len(p) - 1):
            if ranks[i] > ranks[i + 1]:
                p = _apply(rule, p, i)
                ranks[i], ranks[i + 1] = ranks[i + 1], ranks[i]
                swapped = True
    return p


def normalize(rule: RuleSet, path: Sequence[str]) -> Path:
    return normalize_to_order(rule, path, sorted(rule.graph.color_order(path)))


def rewrite_closure(rule: RuleSet, path: Sequence[str], cap: int = 100_000) -> set[Path]:
    """Every path reachable from ``path`` by single square applications."""
    start = tuple(path)
    g = rule.graph
    seen = {start}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        for i in range(len(p) - 1):
            if g.color(p[i]) == g.color(p[i + 1]):
                continue
            pr = rule.partner(p[i], p[i + 1])
            if pr is None:
                continue
            q = p[:i] + pr + p[i + 2:]
            if q not in seen:
                if len(seen) >= cap:
                    raise BudgetExceeded(f"rewrite closure exceeded {cap} paths")
                seen.add(q)
                queue.append(q)
    return seen


# ---------------------------------------------------------------------------
# k-graphs and morphisms


@dataclass(frozen=True, order=True)
class Morphism:
    """A morphism stored as its canonical (ascending-color) path."""

    range: str
    path: tuple[str, ...]
    source: str
    degree: tuple[int, ...]

    @property
    def is_identity(self) -> bool:
        return not self.path

    def __str__(self) -> str:
        return _fmt(self.path) if self.path else f"id[{self.range}]"


class KGraph:
    """A colored graph with a validated square table."""

    def __init__(self, rule: RuleSet, validation: RuleValidation | None = None):
        result = validation if validation is not None else validate_rule(rule)
        if not result:
            raise InvalidRuleError(result)
        self.rule = rule
        self.skeleton = rule.graph
        self._classes: dict[Path, Morphism] = {}

    @classmethod
    def from_squares(cls, graph: ColoredGraph, squares: Iterable[Square]) -> "KGraph":
        return cls(RuleSet(graph, squares))

    @property
    def rank(self) -> int:
        return self.skeleton.rank

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KGraph):
            return NotImplemented
        return self.rule == other.rule

    def __hash__(self) -> int:
        return hash(self.rule)

    def __repr__(self) -> str:
        return f"KGraph({self.skeleton!r}, squares={len(self.rule.squares)})"

    # -- morphisms ---------------------------------------------------------

    def identity(self, v: str) -> Morphism:
        if v not in self.skeleton._in:
            raise GraphError(f"unknown vertex {v!r}")
        return Morphism(v, (), v, (0,) * self.rank)

    def morphism(self, path: Sequence[str]) -> Morphism:
        """The class of a nonempty path."""
        path = tuple(path)
        hit = self._classes.get(path)
        if hit is not None:
            return hit
        g = self.skeleton
        if not path:
            raise GraphError("empty path needs a vertex; use identity()")
        g.check_path(path)
        canon = normalize(self.rule, path)
        m = Morphism(g.path_range(canon), canon, g.path_source(canon), g.degree(canon))
        self._classes[path] = m
        return m

    def normalize(self, path: Sequence[str]) -> Path:
        return normalize(self.rule, path)

    def to_order(self, m: Morphism | Sequence[str], target: Sequence[int]) -> Path:
        path = m.path if isinstance(m, Morphism) else tuple(m)
        return normalize_to_order(self.rule, path, target)

    def compose(self, m1: Morphism, m2: Morphism) -> Morphism:
        if m1.source != m2.range:
            raise GraphError(f"cannot compose: s={m1.source!r} but r={m2.range!r}")
        if m1.is_identity:
            return m2
        if m2.is_identity:
            return m1
        return self.morphism(m1.path + m2.path)

    def factorize(self, m: Morphism, front: Sequence[int]) -> tuple[Morphism, Morphism]:
        """The unique ``(mu, nu)`` with ``d(mu) = front`` and ``m = mu nu``."""
        front = tuple(front)
        if len(front) != self.rank or any(f < 0 or f > d for f, d in zip(front, m.degree)):
            raise GraphError(f"front {front} is not between 0 and {m.degree}")
        head = [c for c in range(1, self.rank + 1) for _ in range(front[c - 1])]
        tail = [c for c in range(1, self.rank + 1) for _ in range(m.degree[c - 1] - front[c - 1])]
        p = self.to_order(m, head + tail)
        n = len(head)
        return self._from_canonical(p[:n], m.range), self._from_canonical(p[n:], self.skeleton.path_source(p[:n]) if n else m.range)

    def _from_canonical(self, path: Sequence[str], at: str) -> Morphism:
        if not path:
            return self.identity(at)
        g = self.skeleton
        return Morphism(g.path_range(path), tuple(path), g.path_source(path), g.degree(path))

    def enumerate_morphisms(self, bound: int = 4, colors: Iterable[int] | None = None,
                            include_identities: bool = True, cap: int | None = None) -> list[Morphism]:
        """Morphisms of total degree at most ``bound`` using only ``colors``."""
        return list(self.iter_morphisms(bound, colors, include_identities, cap))

    def iter_morphisms(self, bound: int = 4, colors: Iterable[int] | None = None,
                       include_identities: bool = True, cap: int | None = None) -> Iterator[Morphism]:
        g = self.skeleton
        allowed = set(range(1, self.rank + 1) if colors is None else colors)
        count = 0

        def bump():
            nonlocal count
            count += 1
            if cap is not None and count > cap:
                raise BudgetExceeded(f"morphism enumeration exceeded {cap} items")

        if include_identities:
            for v in g.vertices:
                bump()
                yield self.identity(v)
        stack = [(e,) for e in reversed(g.edges) if g.color(e) in allowed]
        while stack:
            p = stack.pop()
            bump()
            yield self._from_canonical(p, "")
            if len(p) >= bound:
                continue
            last = g.color(p[-1])
            for e in reversed(g.into(g.src(p[-1]))):
                if g.color(e) >= last and g.color(e) in allowed:
                    stack.append(p + (e,))

    def morphisms_between(self, bound: int, colors=None) -> dict[tuple[str, str], list[Morphism]]:
        out: dict[tuple[str, str], list[Morphism]] = {}
        for m in self.iter_morphisms(bound, colors):
            out.setdefault((m.range, m.source), []).append(m)
        return out

    # -- sub-k-graphs --------------------------------------------------------

    def restrict(self, edges: Iterable[str], vertices: Iterable[str] | None = None) -> "KGraph":
        """Sub-k-graph on ``edges``; squares among them carry over."""
        return KGraph(self.rule.restricted(edges, vertices))

    def restrict_colors(self, colors: Iterable[int]) -> "KGraph":
        keep = set(colors)
        return self.restrict([e for e, ed in self.skeleton.edges.items() if ed.color in keep])


def product_rule_squares(emb: BoxEmbedding, lam: RuleSet, gam: RuleSet) -> list[Square]:
    """Squares of the product rule on the host carried by ``emb``."""
    lhs, rhs = emb.lhs, emb.rhs
    sq = []
    for w in rhs.vertices:
        for (a, b), (c, d) in lam.squares:
            sq.append(((emb.lambda_edge(a, w), emb.lambda_edge(b, w)),
                       (emb.lambda_edge(c, w), emb.lambda_edge(d, w))))
    for x in lhs.vertices:
        for (a, b), (c, d) in gam.squares:
            sq.append(((emb.gamma_edge(x, a), emb.gamma_edge(x, b)),
                       (emb.gamma_edge(x, c), emb.gamma_edge(x, d))))
    for e, ed in lhs.edges.items():
        for g, gd in rhs.edges.items():
            sq.append(((emb.lambda_edge(e, gd.dst), emb.gamma_edge(ed.src, g)),
                       (emb.gamma_edge(ed.dst, g), emb.lambda_edge(e, gd.src))))
    return sq


def product_kgraph(lam: KGraph, gam: KGraph) -> tuple[KGraph, BoxEmbedding]:
    """``lam × gam`` on the box product of the skeletons."""
    host, emb = box_product(lam.skeleton, gam.skeleton)
    return KGraph(RuleSet(host, product_rule_squares(emb, lam.rule, gam.rule))), emb


def unique_rule(graph: ColoredGraph) -> RuleSet | None:
    """The only possible square table when each (vertex, color) pair has at most one incoming edge."""
    sq = []
    for a in graph.edges:
        for b in graph.into(graph.src(a)):
            ca, cb = graph.color(a), graph.color(b)
            if ca >= cb:
                continue
            tops = [c for c in graph.into(graph.dst(a)) if graph.color(c) == cb]
            if len(tops) != 1:
                return None
            c = tops[0]
            bots = [d for d in graph.into(graph.src(c)) if graph.color(d) == ca and graph.src(d) == graph.src(b)]
            if len(bots) != 1:
                return None
            sq.append(((a, b), (c, bots[0])))
    return RuleSet(graph, sq)


def all_color_orders(colors: Sequence[int]) -> set[tuple[int, ...]]:
    from itertools import permutations
    return set(permutations(colors))


__all__ = [
    "KGraph", "Morphism", "RuleSet", "RuleValidation", "validate_rule", "normalize",
    "normalize_to_order", "rewrite_closure", "product_kgraph", "product_rule_squares",
    "unique_rule", "cube_chains", "all_color_orders",
]
