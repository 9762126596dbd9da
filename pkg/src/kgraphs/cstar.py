"""Symbolic C*-structure reports: cycle-factor crossed products, tensor products, CK presentations.

Nothing here computes operators.  Payloads are plain dicts of strings and
edge maps meant for serialization.
"""

from __future__ import annotations

from dataclasses import dataclass

from .actions import check_action_composition, vertex_fixing_automorphisms
from .analysis import GAMMA, ProductDecision, QuasiProduct, check_stable, right_edge_actions
from .errors import PreconditionError
from .rules import KGraph, unique_rule
from .skeleton import ColoredGraph


@dataclass(frozen=True)
class CycleFactor:
    n: int
    k: int
    labels: tuple[str, ...]  # w_0 .. w_{n-1}
    edges: dict  # (i, j) -> edge id with source w_i, range w_{i+1}, color j

    def as_tuple(self) -> tuple[int, int]:
        return (self.n, self.k)

    def edge(self, i: int, j: int) -> str:
        return self.edges[(i % self.n, j)]


@dataclass
class CstarReport:
    kind: str  # tensor | crossed-product | ck-presentation
    payload: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": self.payload}


def detect_cycle_factor(gamma: KGraph | ColoredGraph) -> CycleFactor | None:
    """Recognise k parallel n-cycles (one per color) carrying their unique rule."""
    g = gamma.skeleton if isinstance(gamma, KGraph) else gamma
    if not g.vertices:
        return None
    succ = None
    for color in range(1, g.rank + 1):
        step = {}
        for v in g.vertices:
            outs = [e for e in g.out_of(v) if g.color(e) == color]
            ins = [e for e in g.into(v) if g.color(e) == color]
            if len(outs) != 1 or len(ins) != 1:
                return None
            step[v] = g.dst(outs[0])
        if succ is None:
            succ = step
        elif step != succ:
            return None
    if len(g.edges) != g.rank * len(g.vertices):
        return None
    labels = [g.vertices[0]]
    while len(labels) < len(g.vertices):
        nxt = succ[labels[-1]]
        if nxt in labels:
            return None
        labels.append(nxt)
    if succ[labels[-1]] != labels[0]:
        return None
    edges = {}
    for i, v in enumerate(labels):
        for e in g.out_of(v):
            edges[(i, g.color(e))] = e
    if isinstance(gamma, KGraph):
        expected = unique_rule(g)
        if expected is None or expected != gamma.rule:
            return None
    return CycleFactor(len(labels), g.rank, tuple(labels), edges)


def algebra_name(k: KGraph, fallback: str = "C*(Λ)") -> str:
    g = k.skeleton
    if k.rank == 1 and len(g.vertices) == 1 and len(g.edges) >= 2:
        return f"O_{len(g.edges)}"
    cf = detect_cycle_factor(k)
    if cf is not None and cf.n == 1:
        return "C(T)" if cf.k == 1 else f"C(T^{cf.k})"
    return fallback


def _generator(j: int, k: int) -> str:
    return "(" + ",".join("1" if i == j else "0" for i in range(1, k + 1)) + ")"


def crossed_product_report(qp: QuasiProduct, bound: int = 4) -> CstarReport:
    """Crossed-product description for a quasi-product whose Γ is a cycle factor."""
    cf = detect_cycle_factor(qp.gam)
    if cf is None:
        raise PreconditionError("Γ is not a cycle factor C_{n,k}")
    stab = check_stable(qp, GAMMA, bound)
    if not stab.edge_level_stable:
        raise PreconditionError(f"cycle factor is not stable (input corruption?): {stab.violation['square']}")
    lam = qp.lam.skeleton
    rights = right_edge_actions(qp)
    comp = check_action_composition(qp.mp, bound)
    bad_actors = {f.actor[0] for f in comp.of_direction("right")}
    lam_name = algebra_name(qp.lam)
    rho = []
    for j in range(1, cf.k + 1):
        comps = []
        for i in range(cf.n):
            f = cf.edge(i, j)
            m = rights[f]
            comps.append({"i": i, "edge": f, "from_layer": cf.labels[(i + 1) % cf.n], "to_layer": cf.labels[i],
                          "map": m, "bijective": len(set(m.values())) == len(m),
                          "composition_preserving": f not in bad_actors})
        around = {e: e for e in lam.edges}
        for i in reversed(range(cf.n)):
            m = comps[i]["map"]
            around = {e: m[img] for e, img in around.items()}
        vertex_fixing = all(lam.src(e) == lam.src(img) and lam.dst(e) == lam.dst(img) for e, img in around.items())
        rho.append({"j": j, "generator": _generator(j, cf.k), "components": comps,
                    "identity": all(c["map"][e] == e for c in comps for e in c["map"]),
                    "cycle_composite": {"map": around, "vertex_fixing": vertex_fixing,
                                        "trivial": all(e == img for e, img in around.items())}})
    gk = f"Z^{cf.k}" if cf.k > 1 else "Z"
    summand = lam_name if cf.n == 1 else f"(⊕_{{i=0}}^{{{cf.n - 1}}} {lam_name})"
    unitaries = []
    for j in range(1, cf.k + 1):
        terms = [f"S*_{{({v},{cf.edge(i, j)})}}" for v in lam.vertices for i in range(cf.n)]
        unitaries.append(f"U_{j} = " + " + ".join(terms))
    auts = vertex_fixing_automorphisms(qp.gam.skeleton)
    payload = {
        "headline": f"C*(Ω) ≅ {summand} ⋊_ρ {gk}",
        "cycle": {"n": cf.n, "k": cf.k, "labels": list(cf.labels)},
        "group_rank": cf.k,
        "lambda": lam_name,
        "rho": rho,
        "unitaries": unitaries,
        "gamma_vertex_fixing_automorphisms": auts.order,
    }
    return CstarReport("crossed-product", payload)


def tensor_report(qp: QuasiProduct, decision: ProductDecision) -> CstarReport:
    if decision.verdict != "yes":
        raise PreconditionError("tensor description needs a verified product isomorphism")
    a, b = algebra_name(qp.lam), algebra_name(qp.gam, "C*(Γ)")
    return CstarReport("tensor", {"headline": "C*(Ω) ≅ C*(Λ) ⊗ C*(Γ)", "algebra": f"{a} ⊗ {b}",
                                  "lambda": a, "gamma": b, "iso": decision.iso})


def emit_ck_presentation(g: KGraph) -> CstarReport:
    sk = g.skeleton
    gens = [f"S_{v}" for v in sk.vertices] + [f"S_{e}" for e in sk.edges]
    ck1 = [f"S_{v} = S_{v}* = S_{v}^2" for v in sk.vertices]
    if len(sk.vertices) > 1:
        ck1.append("S_v S_w = 0 for distinct vertices v, w")
    ck2 = [f"S_{a} S_{b} = S_{c} S_{d}" for (a, b), (c, d) in g.rule.squares]
    ck3 = [f"S_{e}* S_{e} = S_{sk.src(e)}" for e in sk.edges]
    ck4, warnings = [], []
    for v in sk.vertices:
        for color in range(1, g.rank + 1):
            es = [e for e in sk.into(v) if sk.color(e) == color]
            if not es:
                warnings.append(f"not source-free; CK4 omitted at vertex {v} color {color}")
                continue
            ck4.append(f"S_{v} = " + " + ".join(f"S_{e} S_{e}*" for e in es))
    return CstarReport("ck-presentation", {"generators": gens, "relations": {"CK1": ck1, "CK2": ck2, "CK3": ck3,
                                                                              "CK4": ck4},
                                           "source_free": not warnings, "warnings": warnings})


__all__ = ["CycleFactor", "CstarReport", "detect_cycle_factor", "crossed_product_report", "tensor_report",
           "emit_ck_presentation", "algebra_name"]
