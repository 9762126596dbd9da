"""Matched-pair decomposition of a (k1+k2)-graph and the induced actions.

For composable ``w1`` (colors 1..k1) and ``w2`` (colors k1+1..k1+k2) the host
satisfies ``w1 w2 = (w1 ▷ w2)(w1 ◁ w2)``.  Both sides are computed by normalizing
``w1 w2`` to the color order "all of w2's colors, then all of w1's" and
splitting.  When the host carries a box embedding, the same machinery gives
the factor-level actions ``p▷(q)`` and ``q◁(p)`` of paths on paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterable, Sequence

from .errors import BudgetExceeded, GraphError, PreconditionError
from .rules import KGraph, Morphism
from .skeleton import BoxEmbedding, ColoredGraph

LEFT = "▷"
RIGHT = "◁"


@dataclass(frozen=True)
class ColorSplit:
    k1: int
    k2: int

    def __post_init__(self):
        if self.k1 < 1 or self.k2 < 1:
            raise ValueError(f"split sizes must be positive, got ({self.k1}, {self.k2})")

    @property
    def rank(self) -> int:
        return self.k1 + self.k2

    @property
    def first(self) -> range:
        return range(1, self.k1 + 1)

    @property
    def second(self) -> range:
        return range(self.k1 + 1, self.rank + 1)

    def side(self, color: int) -> int:
        return 1 if color <= self.k1 else 2


def _fmt(path: Sequence[str]) -> str:
    return "·".join(path) if path else "∅"


@dataclass
class MatchedPair:
    host: KGraph
    split: ColorSplit
    omega1: KGraph
    omega2: KGraph
    left: dict[tuple[str, str], str]
    right: dict[tuple[str, str], str]
    embedding: BoxEmbedding | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    # -- host level ----------------------------------------------------------

    def act(self, c: Morphism, d: Morphism) -> tuple[Morphism, Morphism]:
        """``(c ▷ d, c ◁ d)`` for c in Ω1, d in Ω2 with s(c) = r(d)."""
        key = (c, d)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if c.source != d.range:
            raise GraphError(f"not composable: s({c}) = {c.source!r}, r({d}) = {d.range!r}")
        host = self.host
        if c.is_identity:
            out = (d, host.identity(d.source))
        elif d.is_identity:
            out = (host.identity(c.range), c)
        else:
            g = host.skeleton
            target = sorted(g.color_order(d.path)) + sorted(g.color_order(c.path))
            p = host.to_order(c.path + d.path, target)
            n = len(d.path)
            head, tail = p[:n], p[n:]
            out = (host._from_canonical(head, c.range), host._from_canonical(tail, d.source))
        self._cache[key] = out
        return out

    def left_of(self, c: Morphism, d: Morphism) -> Morphism:
        return self.act(c, d)[0]

    def right_of(self, c: Morphism, d: Morphism) -> Morphism:
        return self.act(c, d)[1]

    # -- factor level --------------------------------------------------------

    def _need_embedding(self) -> BoxEmbedding:
        if self.embedding is None:
            raise PreconditionError("factor-level actions need a box embedding")
        return self.embedding

    def lift_pair(self, p: Sequence[str], q: Sequence[str], p_at: str | None = None,
                  q_at: str | None = None) -> tuple[Morphism, Morphism]:
        """Host morphisms ``([p], r(q))`` and ``(s(p), [q])``."""
        emb = self._need_embedding()
        lam, gam = emb.lhs, emb.rhs
        p, q = tuple(p), tuple(q)
        if p:
            lam.check_path(p)
            sp = lam.path_source(p)
        elif p_at is None:
            raise GraphError("empty Λ-path needs p_at")
        else:
            sp = p_at
        if q:
            gam.check_path(q)
            rq = gam.path_range(q)
        elif q_at is None:
            raise GraphError("empty Γ-path needs q_at")
        else:
            rq = q_at
        host = self.host
        hp = host.morphism(emb.lift_lambda(p, rq)) if p else host.identity(emb.vertex(sp, rq))
        hq = host.morphism(emb.lift_gamma(sp, q)) if q else host.identity(emb.vertex(sp, rq))
        return hp, hq

    def project_gamma(self, m: Morphism) -> Morphism:
        emb = self._need_embedding()
        k1 = self.split.k1
        return Morphism(emb.split_vertex(m.range)[1], emb.project(m.path),
                        emb.split_vertex(m.source)[1], m.degree[k1:])

    def project_lambda(self, m: Morphism) -> Morphism:
        emb = self._need_embedding()
        k1 = self.split.k1
        return Morphism(emb.split_vertex(m.range)[0], emb.project(m.path),
                        emb.split_vertex(m.source)[0], m.degree[:k1])


def extract_matched_pair(host: KGraph, split: ColorSplit, embedding: BoxEmbedding | None = None) -> MatchedPair:
    if host.rank != split.rank:
        raise GraphError(f"split {split.k1}+{split.k2} does not match rank {host.rank}")
    g = host.skeleton
    left, right = {}, {}
    for e in g.edges:
        if g.color(e) > split.k1:
            continue
        for h in g.into(g.src(e)):
            if g.color(h) <= split.k1:
                continue
            c, d = host.rule.swap(e, h)
            left[(e, h)] = c
            right[(e, h)] = d
    return MatchedPair(host, split, host.restrict_colors(split.first), host.restrict_colors(split.second),
                       left, right, embedding)


def act_path_left(mp: MatchedPair, p: Sequence[str], q: Sequence[str], *,
                  p_at: str | None = None, q_at: str | None = None) -> Morphism:
    """``p▷(q)`` as a Γ-level morphism (Γ colors numbered 1..k2)."""
    hp, hq = mp.lift_pair(p, q, p_at, q_at)
    return mp.project_gamma(mp.left_of(hp, hq))


def act_path_right(mp: MatchedPair, p: Sequence[str], q: Sequence[str], *,
                   p_at: str | None = None, q_at: str | None = None) -> Morphism:
    """``q◁(p)`` as a Λ-level morphism."""
    hp, hq = mp.lift_pair(p, q, p_at, q_at)
    return mp.project_lambda(mp.right_of(hp, hq))


# ---------------------------------------------------------------------------
# axiom verification


@dataclass
class LawCheck:
    checked: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.violations:
            return "violated"
        return "checked" if self.checked else "vacuous"


@dataclass
class MPReport:
    bound: int
    laws: dict[str, LawCheck]

    @property
    def ok(self) -> bool:
        return not any(law.violations for law in self.laws.values())

    @property
    def violations(self) -> list[tuple[str, str]]:
        return [(name, v) for name, law in self.laws.items() for v in law.violations]

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "ok": self.ok,
            "laws": {n: {"status": c.status, "checked": c.checked, "violations": c.violations[:5]}
                     for n, c in self.laws.items()},
        }


class _Laws:
    def __init__(self, names: Iterable[str], keep: int = 20):
        self.laws = {n: LawCheck() for n in names}
        self.keep = keep

    def check(self, name: str, ok: bool, witness) -> None:
        law = self.laws[name]
        law.checked += 1
        if not ok and len(law.violations) < self.keep:
            law.violations.append(witness() if callable(witness) else str(witness))


HOST_LAWS = ("edge-square", "MP1", "factorization", "degree", "endpoints", "MP2", "MP3", "left-action", "right-action")
FACTOR_LAWS = ("factor-endpoints", "factor-left-composition", "factor-right-composition")


def verify_mp_axioms(mp: MatchedPair, bound: int = 4, budget: int = 10**6) -> MPReport:
    """Exhaustively check the matched-pair laws on morphisms of total degree <= bound.

    Composite arguments (c1 c2, d1 d2) are only formed when they stay within
    the bound.  Factor-level identities are added when an embedding is present.
    """
    host, split = mp.host, mp.split
    g = host.skeleton
    names = HOST_LAWS + (FACTOR_LAWS if mp.embedding is not None else ())
    laws = _Laws(names)

    for (e, h), c in mp.left.items():
        d = mp.right[(e, h)]
        laws.check("edge-square", host.rule.partner(e, h) == (c, d), f"{e}·{h}")
        laws.check("MP1", g.src(c) == g.dst(d), f"edges {e},{h}: s({c}) != r({d})")

    m1 = host.enumerate_morphisms(bound, split.first, cap=budget)
    m2 = host.enumerate_morphisms(bound, split.second, cap=budget)
    by_range2: dict[str, list[Morphism]] = {}
    for d in m2:
        by_range2.setdefault(d.range, []).append(d)
    by_source1: dict[str, list[Morphism]] = {}
    for c in m1:
        by_source1.setdefault(c.source, []).append(c)
    size = lambda m: len(m.path)

    ops = 0

    def tick():
        nonlocal ops
        ops += 1
        if ops > budget:
            raise BudgetExceeded(f"matched-pair verification exceeded {budget} checks")

    for c in m1:
        for d in by_range2.get(c.source, ()):
            tick()
            cd, cl = mp.act(c, d)
            laws.check("MP1", cd.source == cl.range, lambda: f"c={c}, d={d}")
            laws.check("factorization", host.compose(c, d) == host.compose(cd, cl), lambda: f"c={c}, d={d}")
            laws.check("degree", cd.degree == d.degree and cl.degree == c.degree, lambda: f"c={c}, d={d}")
            laws.check("endpoints", cd.range == c.range and cl.source == d.source, lambda: f"c={c}, d={d}")

    # compositions in the Ω2 argument: MP2 and the right-action law
    for c in m1:
        for d1 in by_range2.get(c.source, ()):
            for d2 in by_range2.get(d1.source, ()):
                if size(d1) + size(d2) > bound or d1.is_identity or d2.is_identity:
                    continue
                tick()
                d12 = host.compose(d1, d2)
                c_d1, c_l_d1 = mp.act(c, d1)
                lhs = mp.left_of(c, d12)
                rhs = host.compose(c_d1, mp.left_of(c_l_d1, d2))
                laws.check("MP2", lhs == rhs, lambda: f"c={c}, d1={d1}, d2={d2}: {lhs} vs {rhs}")
                lhs_r = mp.right_of(c, d12)
                rhs_r = mp.right_of(c_l_d1, d2)
                laws.check("right-action", lhs_r == rhs_r, lambda: f"c={c}, d1={d1}, d2={d2}: {lhs_r} vs {rhs_r}")

    # compositions in the Ω1 argument: MP3 and the left-action law
    for c2 in m1:
        if c2.is_identity:
            continue
        for c1 in m1:
            if c1.is_identity or c1.source != c2.range or size(c1) + size(c2) > bound:
                continue
            c12 = host.compose(c1, c2)
            for d in by_range2.get(c2.source, ()):
                tick()
                c2_d, c2_l_d = mp.act(c2, d)
                lhs = mp.right_of(c12, d)
                rhs = host.compose(mp.right_of(c1, c2_d), c2_l_d)
                laws.check("MP3", lhs == rhs, lambda: f"c1={c1}, c2={c2}, d={d}: {lhs} vs {rhs}")
                lhs_l = mp.left_of(c12, d)
                rhs_l = mp.left_of(c1, c2_d)
                laws.check("left-action", lhs_l == rhs_l, lambda: f"c1={c1}, c2={c2}, d={d}: {lhs_l} vs {rhs_l}")

    if mp.embedding is not None:
        _verify_factor_laws(mp, bound, laws, tick)
    return MPReport(bound, laws.laws)


def factor_paths(g: ColoredGraph, bound: int) -> list[tuple[str, ...]]:
    out = []
    for n in range(1, bound + 1):
        out.extend(sorted(g.paths(n)))
    return out


def _same_class(mp: MatchedPair, lam_side: bool, a: Morphism, b: Morphism, at: str) -> bool:
    """Compare two factor morphisms as classes in the layer at ``at``."""
    if a.path == b.path:
        return (a.range, a.source) == (b.range, b.source)
    emb = mp.embedding
    if lam_side:
        la, lb = emb.lift_lambda(a.path, at), emb.lift_lambda(b.path, at)
    else:
        la, lb = emb.lift_gamma(at, a.path), emb.lift_gamma(at, b.path)
    if not (la and lb):
        return False
    return mp.host.morphism(la) == mp.host.morphism(lb)


def _concat(a: Morphism, b: Morphism) -> Morphism:
    return Morphism(a.range, a.path + b.path, b.source, tuple(x + y for x, y in zip(a.degree, b.degree)))


def _verify_factor_laws(mp: MatchedPair, bound: int, laws: _Laws, tick) -> None:
    emb = mp.embedding
    lam, gam = emb.lhs, emb.rhs
    half = max(1, bound // 2)
    ps = factor_paths(lam, half)
    qs = factor_paths(gam, half)
    for p in ps:
        for q in qs:
            tick()
            pq = act_path_left(mp, p, q)
            qp = act_path_right(mp, p, q)
            ok = (qp.range == lam.path_range(p) and qp.source == lam.path_source(p)
                  and pq.range == gam.path_range(q) and pq.source == gam.path_source(q))
            laws.check("factor-endpoints", ok, lambda: f"p={_fmt(p)}, q={_fmt(q)}")
    for p in ps:
        for q1 in qs:
            for q2 in qs:
                if gam.path_source(q1) != gam.path_range(q2):
                    continue
                tick()
                whole = act_path_left(mp, p, q1 + q2)
                head = act_path_left(mp, p, q1)
                inner = act_path_right(mp, p, q1).path
                tail = act_path_left(mp, inner, q2, p_at=lam.path_source(p))
                ok = _same_class(mp, False, whole, _concat(head, tail), lam.path_range(p))
                laws.check("factor-left-composition", ok,
                           lambda: f"p={_fmt(p)}, q={_fmt(q1)}|{_fmt(q2)}")
    for q in qs:
        for p1 in ps:
            for p2 in ps:
                if lam.path_source(p1) != lam.path_range(p2):
                    continue
                tick()
                whole = act_path_right(mp, p1 + p2, q)
                inner = act_path_left(mp, p2, q).path
                head = act_path_right(mp, p1, inner, q_at=gam.path_range(q))
                tail = act_path_right(mp, p2, q)
                ok = _same_class(mp, True, whole, _concat(head, tail), gam.path_source(q))
                laws.check("factor-right-composition", ok,
                           lambda: f"q={_fmt(q)}, p={_fmt(p1)}|{_fmt(p2)}")


# ---------------------------------------------------------------------------
# composition behavior of the factor-level actions


@dataclass(frozen=True)
class CompositionFailure:
    """``actor`` applied to ``first·second`` differs from the piecewise product."""

    direction: str  # "right" for q◁, "left" for p▷
    actor: tuple[str, ...]
    first: tuple[str, ...]
    second: tuple[str, ...]
    whole: tuple[str, ...]
    piecewise: tuple[str, ...]

    def __str__(self) -> str:
        a, f, s = _fmt(self.actor), _fmt(self.first), _fmt(self.second)
        op = RIGHT if self.direction == "right" else LEFT
        return (f"{a}{op}({f}·{s}) = {_fmt(self.whole)} but "
                f"{a}{op}({f})·{a}{op}({s}) = {_fmt(self.piecewise)}")

    def to_dict(self) -> dict:
        return {"direction": self.direction, "actor": list(self.actor), "first": list(self.first),
                "second": list(self.second), "whole": list(self.whole), "piecewise": list(self.piecewise),
                "text": str(self)}


@dataclass
class CompositionReport:
    bound: int
    checked: int
    failures: list[CompositionFailure]

    @property
    def multiplicative(self) -> bool:
        return not self.failures

    def of_direction(self, direction: str) -> list[CompositionFailure]:
        return [f for f in self.failures if f.direction == direction]


def check_action_composition(mp: MatchedPair, bound: int = 4) -> CompositionReport:
    """Compare ``q◁(p1 p2)`` with ``q◁(p1)·q◁(p2)`` and dually for ▷.

    The actor is a single edge and ``|p1| + |p2| <= bound``; failures are sorted
    by total length, then ids.
    """
    emb = mp._need_embedding()
    lam, gam = emb.lhs, emb.rhs
    failures = []
    checked = 0
    lam_paths = factor_paths(lam, bound - 1) if bound > 1 else []
    gam_paths = factor_paths(gam, bound - 1) if bound > 1 else []
    for q in gam.edges:
        for p1 in lam_paths:
            for p2 in lam_paths:
                if len(p1) + len(p2) > bound or lam.path_source(p1) != lam.path_range(p2):
                    continue
                checked += 1
                whole = act_path_right(mp, p1 + p2, (q,))
                piece = _concat(act_path_right(mp, p1, (q,)), act_path_right(mp, p2, (q,)))
                if not _same_class(mp, True, whole, piece, gam.src(q)):
                    failures.append(CompositionFailure("right", (q,), p1, p2, whole.path, piece.path))
    for p in lam.edges:
        for q1 in gam_paths:
            for q2 in gam_paths:
                if len(q1) + len(q2) > bound or gam.path_source(q1) != gam.path_range(q2):
                    continue
                checked += 1
                whole = act_path_left(mp, (p,), q1 + q2)
                piece = _concat(act_path_left(mp, (p,), q1), act_path_left(mp, (p,), q2))
                if not _same_class(mp, False, whole, piece, lam.dst(p)):
                    failures.append(CompositionFailure("left", (p,), q1, q2, whole.path, piece.path))
    failures.sort(key=lambda f: (len(f.actor) + len(f.first) + len(f.second), f.direction != "right",
                                 f.actor, f.first, f.second))
    return CompositionReport(bound, checked, failures)


# ---------------------------------------------------------------------------
# automorphisms


@dataclass
class AutomorphismGroup:
    elements: list[dict[str, str]]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def trivial(self) -> bool:
        return len(self.elements) == 1


def parallel_classes(g: ColoredGraph) -> list[list[str]]:
    classes: dict[tuple, list[str]] = {}
    for e in g.edges.values():
        classes.setdefault((e.src, e.dst, e.color), []).append(e.id)
    return [classes[k] for k in sorted(classes)]


def vertex_fixing_automorphisms(g: ColoredGraph, budget: int = 10**6) -> AutomorphismGroup:
    """All edge permutations fixing vertices and preserving color, source, range."""
    classes = parallel_classes(g)
    order = math.prod(math.factorial(len(c)) for c in classes)
    if order > budget:
        raise BudgetExceeded(f"vertex-fixing group has order {order}, budget is {budget}")
    elements = []
    for choice in product(*(list(permutations(c)) for c in classes)):
        m = {}
        for cls, img in zip(classes, choice):
            m.update(zip(cls, img))
        elements.append(m)
    return AutomorphismGroup(elements)
