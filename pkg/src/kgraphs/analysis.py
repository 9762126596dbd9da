"""Quasi-product structure: layers, stability, stabilization and product decisions.

Orientation used throughout: ``lam`` is the first factor (host colors
1..k1), ``gam`` the second (k1+1..k1+k2).  "Side gamma" analyses ask whether
the Γ factor is (relaxed) stable, i.e. whether Λ-paths act trivially (up to
coherent isomorphism) on Γ-paths.  Side lambda is handled by swapping the
roles of the two factors and recoloring the host.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from .actions import (ColorSplit, MatchedPair, act_path_left, check_action_composition,
                      extract_matched_pair, factor_paths)
from .errors import GraphError, NotAQuasiProduct, PreconditionError
from .rules import KGraph, RuleSet, product_kgraph, validate_rule
from .skeleton import (BoxEmbedding, ColoredGraph, _Counter, bidirect, cycle_basis,
                       edge_classes, is_connected, is_polytree, iter_vertex_isos, match_box_skeleton)

GAMMA = "gamma"
LAMBDA = "lambda"


# ---------------------------------------------------------------------------
# brute-force isomorphism of k-graphs


@dataclass
class IsoResult:
    found: bool
    vertex_map: dict[str, str] | None = None
    edge_map: dict[str, str] | None = None
    nodes: int = 0

    def __bool__(self) -> bool:
        return self.found


def brute_force_iso(a: KGraph, b: KGraph, budget: int = 10**6) -> IsoResult:
    """Square-preserving skeleton isomorphism ``a -> b`` by exhaustive backtracking.

    A negative result is an exhaustion proof; BudgetExceeded is raised when
    the node cap is hit first.
    """
    counter = _Counter(budget)
    ga, gb = a.skeleton, b.skeleton
    if a.rank != b.rank or len(a.rule.squares) != len(b.rule.squares):
        return IsoResult(False)
    touching: dict[str, list] = {}
    for sq in a.rule.squares:
        (p, q), (r, s) = sq
        for x in {p, q, r, s}:
            touching.setdefault(x, []).append(sq)
    classes_b = edge_classes(gb)
    order = list(ga.edges)
    emap: dict[str, str] = {}
    used: set[str] = set()

    def square_ok(sq) -> bool:
        (p, q), (r, s) = sq
        if not all(x in emap for x in (p, q, r, s)):
            return True
        return b.rule.partner(emap[p], emap[q]) == (emap[r], emap[s])

    for vmap in iter_vertex_isos(ga, gb, counter=counter):

        def assign(i: int) -> bool:
            if i == len(order):
                return True
            e = order[i]
            ed = ga.edges[e]
            pool = classes_b[(vmap[ed.src], vmap[ed.dst], ed.color)]
            for c in sorted(pool, key=lambda x: x != e):
                if c in used:
                    continue
                counter.tick("k-graph isomorphism search")
                emap[e] = c
                used.add(c)
                if all(square_ok(sq) for sq in touching.get(e, ())) and assign(i + 1):
                    return True
                del emap[e]
                used.discard(c)
            return False

        if assign(0):
            return IsoResult(True, vmap, dict(emap), counter.nodes)
    return IsoResult(False, nodes=counter.nodes)


# ---------------------------------------------------------------------------
# quasi-products


@dataclass
class QuasiProduct:
    host: KGraph
    lam: KGraph
    gam: KGraph
    emb: BoxEmbedding
    lam_layers: dict[str, RuleSet]  # Γ-vertex w -> rule of the Λ-layer at w (Λ ids)
    gam_layers: dict[str, RuleSet]  # Λ-vertex x -> rule of the Γ-layer at x (Γ ids)
    lam_isos: dict[str, IsoResult]
    gam_isos: dict[str, IsoResult]
    root: str  # Λ-vertex whose Γ-layer is isomorphic to Γ
    lam_root: str  # Γ-vertex whose Λ-layer is isomorphic to Λ
    root_declared: bool = False
    _mp: MatchedPair | None = field(default=None, repr=False)

    @property
    def k1(self) -> int:
        return self.lam.rank

    @property
    def k2(self) -> int:
        return self.gam.rank

    @property
    def split(self) -> ColorSplit:
        return ColorSplit(self.k1, self.k2)

    @property
    def mp(self) -> MatchedPair:
        if self._mp is None:
            self._mp = extract_matched_pair(self.host, self.split, self.emb)
        return self._mp

    def swapped(self) -> "QuasiProduct":
        """Same data with Γ as first factor; host colors are rotated to match."""
        k1, k2 = self.k1, self.k2
        g = self.host.skeleton
        mapping = {c: (c + k2 if c <= k1 else c - k1) for c in range(1, k1 + k2 + 1)}
        recolored = g.recolored(mapping, k1 + k2)
        host = KGraph(RuleSet(recolored, self.host.rule.squares))
        emb = self.emb.swapped(recolored)
        return QuasiProduct(host, self.gam, self.lam, emb, self.gam_layers, self.lam_layers,
                            self.gam_isos, self.lam_isos, self.lam_root, self.root)


def layer_rules(rule: RuleSet, emb: BoxEmbedding) -> tuple[dict[str, RuleSet], dict[str, RuleSet]]:
    lam, gam = emb.lhs, emb.rhs
    lam_sq: dict[str, list] = {w: [] for w in gam.vertices}
    gam_sq: dict[str, list] = {x: [] for x in lam.vertices}
    for (a, b), (c, d) in rule.squares:
        parts = [emb.split_edge(h) for h in (a, b, c, d)]
        sides = {p[0] for p in parts}
        if len(sides) != 1:
            continue
        proj = ((parts[0][1 if sides == {"L"} else 2], parts[1][1 if sides == {"L"} else 2]),
                (parts[2][1 if sides == {"L"} else 2], parts[3][1 if sides == {"L"} else 2]))
        if sides == {"L"}:
            lam_sq[parts[0][2]].append(proj)
        else:
            gam_sq[parts[0][1]].append(proj)
    return ({w: RuleSet(lam, sq) for w, sq in lam_sq.items()},
            {x: RuleSet(gam, sq) for x, sq in gam_sq.items()})


def verify_quasi_product(host: KGraph, lam: KGraph, gam: KGraph, embedding: BoxEmbedding | None = None,
                         root: str | None = None, budget: int = 10**6) -> QuasiProduct:
    """Check the quasi-product conditions and collect the layer data.

    Raises NotAQuasiProduct naming the failed condition: ``i`` when no
    skeleton bijection onto the box product exists, ``ii`` when no layer
    carries a rule isomorphic to the corresponding factor.
    """
    if host.rank != lam.rank + gam.rank:
        raise PreconditionError(f"host rank {host.rank} != {lam.rank} + {gam.rank}")
    emb = embedding
    if emb is None:
        emb = match_box_skeleton(host.skeleton, lam.skeleton, gam.skeleton, budget)
        if emb is None:
            raise NotAQuasiProduct("i", "host skeleton is not isomorphic to the box product of the factor skeletons")
    _check_embedding(emb, host.skeleton)
    lam_layers, gam_layers = layer_rules(host.rule, emb)
    lam_isos = {w: brute_force_iso(KGraph(r), lam, budget) for w, r in lam_layers.items()}
    gam_isos = {x: brute_force_iso(KGraph(r), gam, budget) for x, r in gam_layers.items()}
    lam_ok = [w for w in gam.skeleton.vertices if lam_isos[w]]
    gam_ok = [x for x in lam.skeleton.vertices if gam_isos[x]]
    if not lam_ok:
        raise NotAQuasiProduct("ii", "no Λ-layer of the host is isomorphic to Λ")
    if not gam_ok:
        raise NotAQuasiProduct("ii", "no Γ-layer of the host is isomorphic to Γ")
    if root is not None:
        if root not in gam_isos:
            raise PreconditionError(f"declared root {root!r} is not a vertex of Λ")
        if not gam_isos[root]:
            raise PreconditionError(f"the Γ-layer at declared root {root!r} is not isomorphic to Γ")
    return QuasiProduct(host, lam, gam, emb, lam_layers, gam_layers, lam_isos, gam_isos,
                        root if root is not None else gam_ok[0], lam_ok[0], root is not None)


def _check_embedding(emb: BoxEmbedding, host: ColoredGraph) -> None:
    lam, gam = emb.lhs, emb.rhs
    k1 = lam.rank
    if set(emb.edge_map.values()) != set(host.edges) or len(emb.edge_map) != len(host.edges):
        raise NotAQuasiProduct("i", "embedding is not a bijection onto the host edges")
    for (side, a, b), h in emb.edge_map.items():
        he = host.edges[h]
        if side == "L":
            e = lam.edges[a]
            want = (emb.vertex(e.src, b), emb.vertex(e.dst, b), e.color)
        else:
            g = gam.edges[b]
            want = (emb.vertex(a, g.src), emb.vertex(a, g.dst), g.color + k1)
        if (he.src, he.dst, he.color) != want:
            raise NotAQuasiProduct("i", f"host edge {h!r} does not match its factor data")


# ---------------------------------------------------------------------------
# edge-level actions


def left_edge_actions(qp: QuasiProduct) -> dict[str, dict[str, str]]:
    """``e▷`` for each Λ-edge e, as a map on Γ-edges."""
    lam, gam, emb, mp = qp.emb.lhs, qp.emb.rhs, qp.emb, qp.mp
    out = {}
    for e in lam.edges:
        row = {}
        for g in gam.edges:
            key = (emb.lambda_edge(e, gam.dst(g)), emb.gamma_edge(lam.src(e), g))
            row[g] = emb.factor_edge(mp.left[key])
        out[e] = row
    return out


def right_edge_actions(qp: QuasiProduct) -> dict[str, dict[str, str]]:
    """``q◁`` for each Γ-edge q, as a map on Λ-edges."""
    lam, gam, emb, mp = qp.emb.lhs, qp.emb.rhs, qp.emb, qp.mp
    out = {}
    for q in gam.edges:
        row = {}
        for e in lam.edges:
            key = (emb.lambda_edge(e, gam.dst(q)), emb.gamma_edge(lam.src(e), q))
            row[e] = emb.factor_edge(mp.right[key])
        out[q] = row
    return out


def _square_text(emb: BoxEmbedding, mp: MatchedPair, e: str, g: str) -> str:
    lam, gam = emb.lhs, emb.rhs
    a, b = emb.lambda_edge(e, gam.dst(g)), emb.gamma_edge(lam.src(e), g)
    return f"{a}·{b} = {mp.left[(a, b)]}·{mp.right[(a, b)]}"


def _collisions(m: dict[str, str]) -> dict[str, list[str]]:
    pre: dict[str, list[str]] = {}
    for k, v in m.items():
        pre.setdefault(v, []).append(k)
    return {v: ks for v, ks in sorted(pre.items()) if len(ks) > 1}


# ---------------------------------------------------------------------------
# stability


@dataclass
class RightActionIso:
    edge: str
    mapping: dict[str, str]
    bijective: bool
    collisions: dict[str, list[str]]
    composition_preserving: bool | None = None

    def to_dict(self) -> dict:
        return {"edge": self.edge, "map": self.mapping, "bijective": self.bijective,
                "collisions": self.collisions, "composition_preserving": self.composition_preserving}


@dataclass
class StabilityReport:
    side: str
    edge_level_stable: bool
    violation: dict | None
    rule_coherence: bool | None
    right_actions: dict[str, RightActionIso]

    def to_dict(self) -> dict:
        return {"side": self.side, "edge_level_stable": self.edge_level_stable, "violation": self.violation,
                "rule_coherence": self.rule_coherence,
                "right_actions": {k: v.to_dict() for k, v in self.right_actions.items()}}


def check_stable(qp: QuasiProduct, side: str = GAMMA, bound: int = 4) -> StabilityReport:
    """Edge-level stability of one factor plus the induced right-action maps.

    For side gamma the right actions are ``q◁`` for Γ-edges q; they are built
    regardless of the stability verdict, but composition is only checked
    when the factor is stable.
    """
    if side == LAMBDA:
        return replace(check_stable(qp.swapped(), GAMMA, bound), side=LAMBDA)
    if side != GAMMA:
        raise ValueError(f"unknown side {side!r}")
    emb, mp = qp.emb, qp.mp
    lefts = left_edge_actions(qp)
    violation = None
    for e, row in lefts.items():
        for g, img in row.items():
            if img != g:
                violation = {"lambda_edge": e, "gamma_edge": g, "image": img,
                             "square": _square_text(emb, mp, e, g)}
                break
        if violation:
            break
    stable = violation is None
    coherence = None
    if stable and is_connected(emb.lhs):
        layers = list(qp.gam_layers.values())
        coherence = all(r == layers[0] for r in layers)
    rights = right_edge_actions(qp)
    comp_fail: dict[str, bool] = {}
    if stable:
        report = check_action_composition(mp, bound)
        for f in report.of_direction("right"):
            comp_fail[f.actor[0]] = True
    isos = {}
    for q, m in rights.items():
        col = _collisions(m)
        isos[q] = RightActionIso(q, m, not col, col, (not comp_fail.get(q, False)) if stable else None)
    return StabilityReport(side, stable, violation, coherence, isos)


# ---------------------------------------------------------------------------
# relaxed stability


@dataclass
class CycleHolonomy:
    cycle: str
    anchor: str
    trivial: bool | None  # None when an edge action on the cycle is not invertible
    moved: dict[str, str]

    def to_dict(self) -> dict:
        return {"cycle": self.cycle, "anchor": self.anchor, "trivial": self.trivial, "moved": self.moved}


@dataclass
class RelaxedStabilityReport:
    side: str
    root: str
    edge_bijective: dict[str, bool]
    holonomy: list[CycleHolonomy]
    bounded_path_level: bool | None
    path_level_witness: str | None
    verdict: str  # certified-yes | bounded-yes | certified-no | unknown
    certificate: dict | None = None

    def to_dict(self) -> dict:
        return {"side": self.side, "root": self.root, "verdict": self.verdict, "certificate": self.certificate,
                "edge_bijective": self.edge_bijective, "holonomy": [h.to_dict() for h in self.holonomy],
                "bounded_path_level": self.bounded_path_level, "path_level_witness": self.path_level_witness}


def _inverse(m: dict[str, str]) -> dict[str, str]:
    return {v: k for k, v in m.items()}


def check_relaxed_stable(qp: QuasiProduct, side: str = GAMMA, bound: int = 4) -> RelaxedStabilityReport:
    """Edge bijectivity, cycle holonomy, then a bounded path-level check."""
    if side == LAMBDA:
        return replace(check_relaxed_stable(qp.swapped(), GAMMA, bound), side=LAMBDA)
    lam = qp.emb.lhs
    if not is_connected(lam):
        raise PreconditionError("acting factor skeleton is disconnected")
    acts = left_edge_actions(qp)
    bij = {e: len(set(m.values())) == len(m) for e, m in acts.items()}
    certificate = None
    bad = [e for e, ok in bij.items() if not ok]
    if bad:
        e = bad[0]
        certificate = {"kind": "non-bijective", "edge": e, "collisions": _collisions(acts[e])}

    bg = bidirect(lam)
    _, cycles = cycle_basis(bg, qp.root)
    holonomy = []
    for cyc in cycles:
        if any(not bij[se.edge] for se in cyc.path):
            holonomy.append(CycleHolonomy(str(cyc), cyc.anchor, None, {}))
            continue
        perm = {g: g for g in qp.emb.rhs.edges}
        for se in cyc.walk:
            step = acts[se.edge] if se.sign > 0 else _inverse(acts[se.edge])
            perm = {g: step[img] for g, img in perm.items()}
        moved = {g: img for g, img in perm.items() if img != g}
        holonomy.append(CycleHolonomy(str(cyc), cyc.anchor, not moved, moved))
        if moved and certificate is None:
            certificate = {"kind": "holonomy", "cycle": str(cyc), "anchor": cyc.anchor, "moved": moved}

    if certificate is not None:
        return RelaxedStabilityReport(side, qp.root, bij, holonomy, None, None, "certified-no", certificate)
    ok, witness = _bounded_path_check(qp, bound)
    verdict = "bounded-yes" if ok else "unknown"
    return RelaxedStabilityReport(side, qp.root, bij, holonomy, ok, witness, verdict)


def _bounded_path_check(qp: QuasiProduct, bound: int) -> tuple[bool, str | None]:
    """Endpoint independence, injectivity and multiplicativity of p▷ on short paths."""
    mp, emb = qp.mp, qp.emb
    lam, gam = emb.lhs, emb.rhs
    half = max(1, bound // 2)
    ps = factor_paths(lam, half)
    qs = factor_paths(gam, half)
    fmt = "·".join
    seen: dict[tuple[str, str], tuple] = {}
    for p in ps:
        ends = (lam.path_range(p), lam.path_source(p))
        images = tuple(act_path_left(mp, p, q).path for q in qs)
        if ends in seen and seen[ends][1] != images:
            other = seen[ends][0]
            return False, f"{fmt(p)} and {fmt(other)} act differently"
        seen.setdefault(ends, (p, images))
        classes: dict = {}
        for q, img in zip(qs, images):
            cls = qp.host.morphism(emb.lift_gamma(ends[1], q))
            out = (gam.path_range(q), img)
            if out in classes and classes[out] != cls:
                return False, f"{fmt(p)}▷ is not injective"
            classes[out] = cls
        for q1 in qs:
            for q2 in qs:
                if len(q1) + len(q2) > half or gam.path_source(q1) != gam.path_range(q2):
                    continue
                whole = qp.host.morphism(emb.lift_gamma(ends[0], act_path_left(mp, p, q1 + q2).path))
                piece = qp.host.morphism(emb.lift_gamma(
                    ends[0], act_path_left(mp, p, q1).path + act_path_left(mp, p, q2).path))
                if whole != piece:
                    return False, f"{fmt(p)}▷ does not respect {fmt(q1)}|{fmt(q2)}"
    return True, None


# ---------------------------------------------------------------------------
# stabilization


@dataclass
class StabilizationResult:
    stabilized: KGraph | None
    rule: RuleSet
    theta: dict[str, str]
    transports: dict[str, dict[str, str]]
    root: str
    verification: dict[str, bool]
    relaxed: RelaxedStabilityReport
    already_stable: bool = False

    @property
    def ok(self) -> bool:
        return all(self.verification.values())

    def to_dict(self) -> dict:
        return {"root": self.root, "already_stable": self.already_stable, "ok": self.ok,
                "verification": self.verification, "theta": self.theta,
                "relaxed_verdict": self.relaxed.verdict}


def stabilize(qp: QuasiProduct, relaxed: RelaxedStabilityReport | None = None, bound: int = 4) -> StabilizationResult:
    """Build the stable quasi-product Ω̃ and the edge map Θ: Ω → Ω̃, then verify both exactly."""
    if relaxed is None:
        relaxed = check_relaxed_stable(qp, GAMMA, bound)
    if relaxed.verdict == "certified-no":
        raise PreconditionError("relaxed stability is refuted; stabilization does not apply")
    host, emb, mp = qp.host, qp.emb, qp.mp
    lam, gam = emb.lhs, emb.rhs
    acts = left_edge_actions(qp)
    identity = {g: g for g in gam.edges}

    if all(img == g for row in acts.values() for g, img in row.items()):
        theta = {h: h for h in host.skeleton.edges}
        verification = {"rule_valid": True, "edge_stable": True, "theta_bijective": True, "theta_squares": True}
        return StabilizationResult(host, host.rule, theta, {v: dict(identity) for v in lam.vertices}, qp.root,
                                   verification, replace(relaxed, verdict="certified-yes"), already_stable=True)

    tree, _ = cycle_basis(bidirect(lam), qp.root)
    bg = bidirect(lam)
    transports = {qp.root: dict(identity)}
    for v in tree.order[1:]:
        se = tree.parent[v]
        step = acts[se.edge] if se.sign > 0 else _inverse(acts[se.edge])
        prev = transports[bg.src(se)]
        transports[v] = {g: step[prev[g]] for g in gam.edges}
    inverse = {v: _inverse(t) for v, t in transports.items()}

    theta = {}
    for h in host.skeleton.edges:
        side, a, b = emb.split_edge(h)
        theta[h] = h if side == "L" else emb.gamma_edge(a, inverse[a][b])

    k1 = qp.k1
    hg = host.skeleton
    squares = [sq for sq in host.rule.squares
               if all(hg.color(x) <= k1 for x in (*sq[0], *sq[1]))]
    for x in lam.vertices:
        for (a, b), (c, d) in qp.gam_layers[qp.root].squares:
            squares.append(((emb.gamma_edge(x, a), emb.gamma_edge(x, b)),
                            (emb.gamma_edge(x, c), emb.gamma_edge(x, d))))
    mixed_keys = []
    for e in lam.edges:
        for g in gam.edges:
            key = (emb.lambda_edge(e, gam.dst(g)), emb.gamma_edge(lam.src(e), g))
            moved = transports[lam.src(e)][g]
            d = mp.right[(emb.lambda_edge(e, gam.dst(g)), emb.gamma_edge(lam.src(e), moved))]
            val = (emb.gamma_edge(lam.dst(e), g), emb.lambda_edge(emb.factor_edge(d), gam.src(g)))
            squares.append((key, val))
            mixed_keys.append(key)
    rule = RuleSet(hg, squares)
    result = validate_rule(rule)
    verification = {"rule_valid": bool(result)}
    verification["edge_stable"] = all(
        emb.factor_edge(rule.partner(*k)[0]) == emb.factor_edge(k[1]) for k in mixed_keys
        if rule.partner(*k) is not None)
    verification["theta_bijective"] = _is_graph_iso(hg, hg, theta)
    verification["theta_squares"] = all(
        rule.partner(theta[a], theta[b]) == (theta[c], theta[d]) for (a, b), (c, d) in host.rule.squares)
    ok = all(verification.values())
    stabilized = KGraph(rule, result) if result else None
    upgraded = replace(relaxed, verdict="certified-yes" if ok else "unknown")
    return StabilizationResult(stabilized, rule, theta, transports, qp.root, verification, upgraded)


def _is_graph_iso(a: ColoredGraph, b: ColoredGraph, emap: dict[str, str],
                  vmap: dict[str, str] | None = None) -> bool:
    """Edge bijection preserving color, and src/dst through ``vmap`` (identity if omitted)."""
    if set(emap) != set(a.edges) or len(set(emap.values())) != len(emap) or set(emap.values()) != set(b.edges):
        return False
    vm = vmap if vmap is not None else {v: v for v in a.vertices}
    for e, img in emap.items():
        x, y = a.edges[e], b.edges[img]
        if (vm[x.src], vm[x.dst], x.color) != (y.src, y.dst, y.color):
            return False
    return True


# ---------------------------------------------------------------------------
# product decision


@dataclass
class ProductDecision:
    verdict: str  # yes | no | unknown
    iso: dict[str, str] | None = None
    vertex_map: dict[str, str] | None = None
    certificate: dict | None = None
    notes: list[str] = field(default_factory=list)
    reports: dict = field(default_factory=dict)
    shortcut: str | None = None

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict}
        if self.shortcut:
            out["shortcut"] = self.shortcut
        if self.iso is not None:
            out["iso"] = self.iso
            out["vertex_map"] = self.vertex_map
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.notes:
            out["notes"] = self.notes
        out["reports"] = self.reports
        return out


def product_iso_check(host: KGraph, target: KGraph, emap: dict[str, str], vmap: dict[str, str]) -> bool:
    if not _is_graph_iso(host.skeleton, target.skeleton, emap, vmap):
        return False
    return all(target.rule.partner(emap[a], emap[b]) == (emap[c], emap[d])
               for (a, b), (c, d) in host.rule.squares)


def decide_product(qp: QuasiProduct, bound: int = 4, budget: int = 10**6,
                   oracle_budget: int = 0) -> ProductDecision:
    """Decide whether the host is isomorphic to the product of its quasi-factors.

    ``no`` needs an edge-level obstruction; ``yes`` needs an explicit,
    exhaustively checked isomorphism.  Everything else is ``unknown``; with a
    positive ``oracle_budget`` an unknown is settled by brute_force_iso.
    """
    lam, gam = qp.emb.lhs, qp.emb.rhs
    if not (is_connected(lam) and is_connected(gam)):
        raise PreconditionError("decide_product needs connected factor skeletons")
    reports: dict = {}
    rg = check_relaxed_stable(qp, GAMMA, bound)
    rl = check_relaxed_stable(qp, LAMBDA, bound)
    reports["relaxed_gamma"] = rg.to_dict()
    reports["relaxed_lambda"] = rl.to_dict()
    for rep in (rg, rl):
        if rep.verdict == "certified-no":
            return ProductDecision("no", certificate={"side": rep.side, **rep.certificate}, reports=reports)

    decision = _construct_product_iso(qp, rg, bound, budget, reports)
    if decision.verdict == "unknown" and oracle_budget > 0:
        target, temb = product_kgraph(qp.lam, qp.gam)
        found = brute_force_iso(qp.host, target, oracle_budget)
        if found:
            return ProductDecision("yes", found.edge_map, found.vertex_map,
                                   notes=decision.notes + ["iso found by exhaustive search"], reports=reports)
        return ProductDecision("no", certificate={"side": None, "kind": "exhaustive-search", "nodes": found.nodes},
                               notes=decision.notes + ["exhaustive search found no isomorphism"], reports=reports)
    return decision


def _construct_product_iso(qp: QuasiProduct, rg: RelaxedStabilityReport, bound: int, budget: int,
                           reports: dict) -> ProductDecision:
    s1 = stabilize(qp, rg, bound)
    reports["stabilize_gamma"] = {"ok": s1.ok, "verification": s1.verification, "already_stable": s1.already_stable}
    if not s1.ok:
        return ProductDecision("unknown", notes=["exact verification of the first stabilization failed"],
                               reports=reports)
    qp1 = verify_quasi_product(s1.stabilized, qp.lam, qp.gam, qp.emb, root=qp.root, budget=budget)
    sw = qp1.swapped()
    rl1 = check_relaxed_stable(sw, GAMMA, bound)
    if rl1.verdict == "certified-no":
        return ProductDecision("unknown", notes=["second factor lost relaxed stability after stabilization"],
                               reports=reports)
    s2 = stabilize(sw, rl1, bound)
    reports["stabilize_lambda"] = {"ok": s2.ok, "verification": s2.verification, "already_stable": s2.already_stable}
    if not s2.ok:
        return ProductDecision("unknown", notes=["exact verification of the second stabilization failed"],
                               reports=reports)

    alpha = qp1.lam_isos[qp1.lam_root]
    beta = qp.gam_isos[qp.root]
    target, temb = product_kgraph(qp.lam, qp.gam)
    emb = qp.emb
    iso = {}
    for h in qp.host.skeleton.edges:
        h2 = s2.theta[s1.theta[h]]
        side, a, b = emb.split_edge(h2)
        if side == "L":
            iso[h] = temb.lambda_edge(alpha.edge_map[a], beta.vertex_map[b])
        else:
            iso[h] = temb.gamma_edge(alpha.vertex_map[a], beta.edge_map[b])
    vmap = {}
    for (x, w), hv in emb.vertex_map.items():
        vmap[hv] = temb.vertex(alpha.vertex_map[x], beta.vertex_map[w])
    if product_iso_check(qp.host, target, iso, vmap):
        return ProductDecision("yes", iso, vmap, reports=reports)
    return ProductDecision("unknown", notes=["composed isomorphism failed exact verification"], reports=reports)


# ---------------------------------------------------------------------------
# polytrees and k-trees


@dataclass
class KTreeReport:
    verified: bool
    reason: str
    iso: IsoResult | None = None

    def __bool__(self) -> bool:
        return self.verified


def verify_ktree(gamma: KGraph, factors: Sequence[ColoredGraph], budget: int = 10**6) -> KTreeReport:
    """Check ``gamma`` against the product of candidate rank-1 polytree factors."""
    if not factors:
        raise GraphError("k-tree check needs at least one candidate factor")
    if sum(f.rank for f in factors) != gamma.rank:
        raise GraphError(f"candidate ranks sum to {sum(f.rank for f in factors)}, graph has rank {gamma.rank}")
    for i, f in enumerate(factors):
        if f.rank != 1:
            return KTreeReport(False, f"factor {i} has rank {f.rank}")
        res = is_polytree(f)
        if not res:
            return KTreeReport(False, f"factor {i} is not a polytree (cycle {res.witness})")
    prod = KGraph(RuleSet(factors[0], []))
    for f in factors[1:]:
        prod, _ = product_kgraph(prod, KGraph(RuleSet(f, [])))
    found = brute_force_iso(prod, gamma, budget)
    if not found:
        return KTreeReport(False, "graph is not isomorphic to the product of the candidates")
    return KTreeReport(True, "isomorphic to the product of polytree candidates", found)


def apply_polytree_shortcuts(qp: QuasiProduct, ktree_factors: Sequence[ColoredGraph] | None = None,
                             bound: int = 4, budget: int = 10**6) -> ProductDecision | None:
    """Product decision for instances where one factor is a polytree or k-tree.

    Returns None when no shortcut applies.  The isomorphism is still built and
    checked; a non-yes outcome is reported as a contradiction in the notes.
    """
    tag = None
    if qp.gam.rank == 1 and is_polytree(qp.gam.skeleton):
        tag = "polytree-gamma"
    elif qp.lam.rank == 1 and is_polytree(qp.lam.skeleton):
        tag = "polytree-lambda"
    elif ktree_factors is not None and verify_ktree(qp.gam, ktree_factors, budget):
        tag = "k-tree"
    if tag is None:
        return None
    decision = decide_product(qp, bound, budget)
    decision.shortcut = tag
    if decision.verdict != "yes":
        decision.notes.append(f"{tag} instance did not yield a verified isomorphism")
    return decision


__all__ = [
    "IsoResult", "QuasiProduct", "StabilityReport", "RelaxedStabilityReport", "StabilizationResult",
    "ProductDecision", "KTreeReport", "brute_force_iso", "verify_quasi_product", "check_stable",
    "check_relaxed_stable", "stabilize", "decide_product", "apply_polytree_shortcuts", "verify_ktree",
    "left_edge_actions", "right_edge_actions", "layer_rules", "product_iso_check", "GAMMA", "LAMBDA",
]
