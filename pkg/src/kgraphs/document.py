"""Instance documents: JSON parsing with addressed diagnostics, canonical serialization, host assembly."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .analysis import layer_rules
from .errors import DocumentError, GraphError, MalformedRuleError
from .rules import KGraph, RuleSet, product_rule_squares
from .skeleton import BoxEmbedding, ColoredGraph, Edge, box_product

VERSION = 1
DEFAULT_BOUND = 4
DEFAULT_BUDGET = 10**6

Square = tuple[tuple[str, str], tuple[str, str]]

_TOP = ("version", "name", "description", "split", "lambda", "gamma", "host", "root", "candidates", "options")
_REQUIRED = ("version", "name", "split", "lambda", "gamma")


@dataclass
class FactorData:
    graph: ColoredGraph
    squares: list[Square]

    def rule(self) -> RuleSet:
        return RuleSet(self.graph, self.squares)

    def kgraph(self) -> KGraph:
        return KGraph(self.rule())


@dataclass
class LayerOverride:
    side: str  # "lambda" (layer at a Γ-vertex) or "gamma" (layer at a Λ-vertex)
    at: str
    squares: list[Square]


@dataclass
class InstanceDocument:
    name: str
    k1: int
    k2: int
    lam: FactorData
    gam: FactorData
    mixed_squares: list[Square] = field(default_factory=list)
    layer_overrides: list[LayerOverride] = field(default_factory=list)
    root: str | None = None
    description: str | None = None
    candidates: list[ColoredGraph] | None = None
    degree_bound: int = DEFAULT_BOUND
    budget: int = DEFAULT_BUDGET

    def box(self) -> tuple[ColoredGraph, BoxEmbedding]:
        return box_product(self.lam.graph, self.gam.graph)

    def host_rule(self) -> tuple[RuleSet, BoxEmbedding]:
        """Product squares, then layer overrides, then mixed squares replacing by key."""
        host, emb = self.box()
        lam_layers = {w: self.lam.squares for w in self.gam.graph.vertices}
        gam_layers = {x: self.gam.squares for x in self.lam.graph.vertices}
        for ov in self.layer_overrides:
            (lam_layers if ov.side == "lambda" else gam_layers)[ov.at] = ov.squares
        squares: list[Square] = []
        for w, sq in lam_layers.items():
            squares += [((emb.lambda_edge(a, w), emb.lambda_edge(b, w)), (emb.lambda_edge(c, w), emb.lambda_edge(d, w)))
                        for (a, b), (c, d) in sq]
        for x, sq in gam_layers.items():
            squares += [((emb.gamma_edge(x, a), emb.gamma_edge(x, b)), (emb.gamma_edge(x, c), emb.gamma_edge(x, d)))
                        for (a, b), (c, d) in sq]
        mixed = dict(RuleSet(host, product_rule_squares(emb, RuleSet(self.lam.graph, []),
                                                        RuleSet(self.gam.graph, []))).squares)
        for key, val in RuleSet(host, self.mixed_squares).squares:
            mixed[key] = val
        squares += list(mixed.items())
        return RuleSet(host, squares), emb

    def host(self) -> tuple[KGraph, BoxEmbedding]:
        rule, emb = self.host_rule()
        return KGraph(rule), emb


# ---------------------------------------------------------------------------
# parsing


def _fail(msg: str, loc: str) -> DocumentError:
    return DocumentError(msg, loc)


def _obj(value: Any, loc: str, allowed: tuple[str, ...], required: tuple[str, ...] = ()) -> dict:
    if not isinstance(value, dict):
        raise _fail("expected an object", loc)
    for k in value:
        if k not in allowed:
            raise _fail(f"unknown field {k!r}", loc)
    for k in required:
        if k not in value:
            raise _fail(f"missing field {k!r}", loc)
    return value


def _str(value: Any, loc: str) -> str:
    if not isinstance(value, str) or not value:
        raise _fail("expected a non-empty string", loc)
    return value


def _int(value: Any, loc: str, lo: int = 0) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < lo:
        raise _fail(f"expected an integer >= {lo}", loc)
    return value


def _list(value: Any, loc: str) -> list:
    if not isinstance(value, list):
        raise _fail("expected a list", loc)
    return value


def _graph(value: Any, loc: str, rank: int) -> ColoredGraph:
    data = _obj(value, loc, ("vertices", "edges", "squares"), ("vertices", "edges"))
    vertices = [_str(v, f"{loc}.vertices[{i}]") for i, v in enumerate(_list(data["vertices"], f"{loc}.vertices"))]
    if len(set(vertices)) != len(vertices):
        raise _fail("duplicate vertex id", f"{loc}.vertices")
    known = set(vertices)
    edges, seen = [], set()
    for i, e in enumerate(_list(data["edges"], f"{loc}.edges")):
        eloc = f"{loc}.edges[{i}]"
        rec = _obj(e, eloc, ("id", "src", "dst", "color"), ("id", "src", "dst", "color"))
        eid = _str(rec["id"], f"{eloc}.id")
        if eid in seen:
            raise _fail(f"duplicate edge id {eid!r}", eloc)
        seen.add(eid)
        for end in ("src", "dst"):
            if _str(rec[end], f"{eloc}.{end}") not in known:
                raise _fail(f"undeclared vertex {rec[end]!r}", f"{eloc}.{end}")
        color = _int(rec["color"], f"{eloc}.color", 1)
        if color > rank:
            raise _fail(f"color {color} out of range 1..{rank}", f"{eloc}.color")
        edges.append(Edge(eid, rec["src"], rec["dst"], color))
    return ColoredGraph(rank, vertices, edges)


def _squares(value: Any, loc: str, graph: ColoredGraph) -> list[Square]:
    out = []
    for i, sq in enumerate(_list(value, loc)):
        sloc = f"{loc}[{i}]"
        try:
            (a, b), (c, d) = sq
        except (TypeError, ValueError):
            raise _fail("square must be [[a, b], [c, d]]", sloc) from None
        for x in (a, b, c, d):
            if not isinstance(x, str):
                raise _fail("edge ids must be strings", sloc)
            if x not in graph.edges:
                raise _fail(f"unknown edge id {x!r}", sloc)
        try:
            RuleSet(graph, [((a, b), (c, d))])
        except MalformedRuleError as exc:
            raise _fail(str(exc).split(": ", 1)[-1], sloc) from None
        out.append(((a, b), (c, d)))
    return out


def _line_of(text: str, needle: str) -> int | None:
    for n, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return n
    return None


def parse_document(text: str) -> InstanceDocument:
    """Parse and fully validate an instance document.

    Errors carry a field path (``lambda.edges[2].src``) and, where the
    offending token can be found, the line number.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    try:
        return _parse(raw)
    except DocumentError as exc:
        loc = exc.location or ""
        field_name = loc.rsplit(".", 1)[-1].split("[", 1)[0]
        line = _line_of(text, f'"{field_name}"') if field_name else None
        if line is not None and "line" not in loc:
            raise DocumentError(str(exc).split(": ", 1)[-1], f"{loc} (near line {line})") from None
        raise


def _parse(raw: Any) -> InstanceDocument:
    doc = _obj(raw, "document", _TOP, _REQUIRED)
    if doc["version"] != VERSION:
        raise _fail(f"unsupported version {doc['version']!r}", "version")
    name = _str(doc["name"], "name")
    split = _list(doc["split"], "split")
    if len(split) != 2:
        raise _fail("split must be [k1, k2]", "split")
    k1, k2 = _int(split[0], "split[0]", 1), _int(split[1], "split[1]", 1)
    lam_g = _graph(doc["lambda"], "lambda", k1)
    gam_g = _graph(doc["gamma"], "gamma", k2)
    lam = FactorData(lam_g, _squares(doc["lambda"].get("squares", []), "lambda.squares", lam_g))
    gam = FactorData(gam_g, _squares(doc["gamma"].get("squares", []), "gamma.squares", gam_g))
    try:
        host_g, _ = box_product(lam_g, gam_g)
    except GraphError as exc:
        raise _fail(str(exc), "lambda/gamma") from None
    mixed, overrides = [], []
    if "host" in doc:
        host = _obj(doc["host"], "host", ("mixed_squares", "layer_overrides"))
        mixed = _squares(host.get("mixed_squares", []), "host.mixed_squares", host_g)
        for i, sq in enumerate(mixed):
            colors = {host_g.color(x) <= k1 for x in (*sq[0], *sq[1])}
            if colors != {True, False}:
                raise _fail("mixed square must use one color from each factor", f"host.mixed_squares[{i}]")
        for i, ov in enumerate(_list(host.get("layer_overrides", []), "host.layer_overrides")):
            oloc = f"host.layer_overrides[{i}]"
            rec = _obj(ov, oloc, ("side", "at", "squares"), ("side", "at", "squares"))
            side = rec["side"]
            if side not in ("lambda", "gamma"):
                raise _fail("side must be 'lambda' or 'gamma'", f"{oloc}.side")
            at = _str(rec["at"], f"{oloc}.at")
            base, anchors = (lam_g, gam_g.vertices) if side == "lambda" else (gam_g, lam_g.vertices)
            if at not in anchors:
                raise _fail(f"undeclared vertex {at!r}", f"{oloc}.at")
            overrides.append(LayerOverride(side, at, _squares(rec["squares"], f"{oloc}.squares", base)))
    root = doc.get("root")
    if root is not None and _str(root, "root") not in lam_g.vertices:
        raise _fail(f"root {root!r} is not a vertex of lambda", "root")
    description = doc.get("description")
    if description is not None and not isinstance(description, str):
        raise _fail("expected a string", "description")
    candidates = None
    if "candidates" in doc:
        candidates = [_graph(c, f"candidates[{i}]", 1) for i, c in enumerate(_list(doc["candidates"], "candidates"))]
    opts = _obj(doc.get("options", {}), "options", ("degree_bound", "budget"))
    bound = _int(opts.get("degree_bound", DEFAULT_BOUND), "options.degree_bound", 1)
    budget = _int(opts.get("budget", DEFAULT_BUDGET), "options.budget", 1)
    return InstanceDocument(name, k1, k2, lam, gam, mixed, overrides, root, description, candidates, bound, budget)


# ---------------------------------------------------------------------------
# serialization


def _canon_squares(graph: ColoredGraph, squares: list[Square]) -> list[Square]:
    return sorted(RuleSet(graph, squares).squares)


def _dump_squares(squares: list[Square], indent: str) -> list[str]:
    if not squares:
        return ["[]"]
    rows = [indent + "  " + json.dumps([list(a), list(b)], ensure_ascii=False) for a, b in squares]
    return ["[", ",\n".join(rows), indent + "]"]


def _dump_graph(g: ColoredGraph, squares: list[Square] | None, indent: str) -> str:
    pad = indent + "  "
    lines = ["{", f'{pad}"vertices": {json.dumps(list(g.vertices), ensure_ascii=False)},']
    edges = [pad + "  " + json.dumps({"id": e.id, "src": e.src, "dst": e.dst, "color": e.color}, ensure_ascii=False)
             for e in g.edges.values()]
    if edges:
        lines += [f'{pad}"edges": [', ",\n".join(edges), f"{pad}]" + ("," if squares is not None else "")]
    else:
        lines.append(f'{pad}"edges": []' + ("," if squares is not None else ""))
    if squares is not None:
        lines.append(f'{pad}"squares": ' + "\n".join(_dump_squares(squares, pad)))
    lines.append(indent + "}")
    return "\n".join(lines)


def serialize_document(doc: InstanceDocument) -> str:
    """Canonical text: fixed key order, ids sorted, one edge or square per line."""
    host_g, _ = doc.box()
    parts = [f'  "version": {VERSION}', f'  "name": {json.dumps(doc.name, ensure_ascii=False)}']
    if doc.description is not None:
        parts.append(f'  "description": {json.dumps(doc.description, ensure_ascii=False)}')
    parts.append(f'  "split": [{doc.k1}, {doc.k2}]')
    parts.append('  "lambda": ' + _dump_graph(doc.lam.graph, _canon_squares(doc.lam.graph, doc.lam.squares), "  "))
    parts.append('  "gamma": ' + _dump_graph(doc.gam.graph, _canon_squares(doc.gam.graph, doc.gam.squares), "  "))
    if doc.mixed_squares or doc.layer_overrides:
        host = ['{', '    "mixed_squares": ' + "\n".join(
            _dump_squares(_canon_squares(host_g, doc.mixed_squares), "    "))]
        if doc.layer_overrides:
            rows = []
            for ov in sorted(doc.layer_overrides, key=lambda o: (o.side, o.at)):
                base = doc.lam.graph if ov.side == "lambda" else doc.gam.graph
                rows.append('      {"side": ' + json.dumps(ov.side) + ', "at": ' + json.dumps(ov.at, ensure_ascii=False)
                            + ', "squares": ' + json.dumps([[list(a), list(b)] for a, b in
                                                             _canon_squares(base, ov.squares)], ensure_ascii=False)
                            + "}")
            host[-1] += ","
            host += ['    "layer_overrides": [', ",\n".join(rows), "    ]"]
        host.append("  }")
        parts.append('  "host": ' + "\n".join(host))
    if doc.root is not None:
        parts.append(f'  "root": {json.dumps(doc.root, ensure_ascii=False)}')
    if doc.candidates:
        cands = ["    " + _dump_graph(c, None, "    ") for c in doc.candidates]
        parts.append('  "candidates": [\n' + ",\n".join(cands) + "\n  ]")
    parts.append(f'  "options": {{"degree_bound": {doc.degree_bound}, "budget": {doc.budget}}}')
    return "{\n" + ",\n".join(parts) + "\n}\n"


# ---------------------------------------------------------------------------
# bundled corpus


def corpus_names() -> list[str]:
    root = resources.files("kgraphs") / "corpus"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def corpus_text(name: str) -> str:
    path = resources.files("kgraphs") / "corpus" / f"{name}.json"
    if not path.is_file():
        raise DocumentError(f"no bundled fixture named {name!r}", "fixture")
    return path.read_text(encoding="utf-8")


def load_fixture(name: str) -> InstanceDocument:
    return parse_document(corpus_text(name))


def document_from_rule(template: InstanceDocument, rule: RuleSet, emb: BoxEmbedding,
                       name: str | None = None) -> InstanceDocument:
    """Re-express a host rule on the template's box skeleton as factor data plus overrides."""
    lam_g, gam_g = emb.lhs, emb.rhs
    lam_layers, gam_layers = layer_rules(rule, emb)
    base_lam, base_gam = template.lam.rule(), template.gam.rule()
    overrides = [LayerOverride("lambda", w, r.squares) for w, r in lam_layers.items() if r != base_lam]
    overrides += [LayerOverride("gamma", x, r.squares) for x, r in gam_layers.items() if r != base_gam]
    product = dict(RuleSet(emb.host, product_rule_squares(emb, RuleSet(lam_g, []), RuleSet(gam_g, []))).squares)
    k1 = template.k1
    mixed = []
    for key, val in rule.squares:
        colors = {emb.host.color(x) <= k1 for x in (*key, *val)}
        if colors == {True, False} and product.get(key) != val:
            mixed.append((key, val))
    return InstanceDocument(name or template.name, template.k1, template.k2, template.lam, template.gam, mixed,
                            overrides, template.root, template.description, template.candidates,
                            template.degree_bound, template.budget)


__all__ = ["InstanceDocument", "FactorData", "LayerOverride", "parse_document", "serialize_document",
           "load_fixture", "corpus_names", "corpus_text", "document_from_rule"]
