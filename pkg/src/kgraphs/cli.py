"""Command-line front end.

Exit codes: 0 completed, 1 negative verdict (validate, decide-product,
fuzz failures), 2 input or precondition error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import tempfile
import time
from pathlib import Path
from typing import Callable

from . import __version__
from .analysis import (GAMMA, LAMBDA, apply_polytree_shortcuts, check_relaxed_stable, check_stable,
                       decide_product, stabilize, verify_quasi_product)
from .cstar import crossed_product_report, detect_cycle_factor, emit_ck_presentation, tensor_report
from .document import (InstanceDocument, corpus_names, document_from_rule, load_fixture, parse_document,
                       serialize_document)
from .errors import BudgetExceeded, KGraphError, NotAQuasiProduct, PreconditionError
from .fuzz import check_instance, random_box_rule, random_polytree_quasi_product
from .rules import RuleSet, validate_rule

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

PALETTE = ["black", "blue", "red", "darkgreen", "orange", "purple", "brown", "magenta"]


class CommandResult:
    def __init__(self, payload: dict, code: int = EXIT_OK):
        self.payload = payload
        self.code = code


# ---------------------------------------------------------------------------
# helpers


def _load(args) -> InstanceDocument:
    if args.fixture:
        doc = load_fixture(args.fixture)
    elif args.input:
        doc = parse_document(Path(args.input).read_text(encoding="utf-8"))
    else:
        raise PreconditionError("one of --input or --fixture is required")
    if args.degree_bound is not None:
        doc.degree_bound = args.degree_bound
    if args.budget is not None:
        doc.budget = args.budget
    return doc


def _quasi_product(doc: InstanceDocument):
    host, emb = doc.host()
    return verify_quasi_product(host, doc.lam.kgraph(), doc.gam.kgraph(), emb, root=doc.root, budget=doc.budget)


def _relaxed(qp, side, bound) -> dict:
    try:
        return check_relaxed_stable(qp, side, bound).to_dict()
    except PreconditionError as exc:
        return {"side": side, "error": str(exc)}


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> CommandResult:
    doc = _load(args)
    rule, _ = doc.host_rule()
    out = {"name": doc.name}
    ok = True
    for label, r in (("lambda", doc.lam.rule()), ("gamma", doc.gam.rule()), ("host", rule)):
        res = validate_rule(r)
        out[label] = res.to_dict()
        ok = ok and bool(res)
    out["valid"] = ok
    return CommandResult(out, EXIT_OK if ok else EXIT_NEGATIVE)


def cmd_analyze(args) -> CommandResult:
    doc = _load(args)
    rule, _ = doc.host_rule()
    res = validate_rule(rule)
    out: dict = {"name": doc.name, "validation": res.to_dict()}
    if not res:
        return CommandResult(out, EXIT_NEGATIVE)
    try:
        qp = _quasi_product(doc)
    except NotAQuasiProduct as exc:
        out["quasi_product"] = {"ok": False, "condition": exc.condition, "message": str(exc)}
        return CommandResult(out)
    out["quasi_product"] = {"ok": True, "root": qp.root, "root_declared": qp.root_declared,
                            "lambda_root": qp.lam_root,
                            "lambda_layers_isomorphic": {w: bool(r) for w, r in qp.lam_isos.items()},
                            "gamma_layers_isomorphic": {x: bool(r) for x, r in qp.gam_isos.items()}}
    bound = doc.degree_bound
    out["stable"] = {side: check_stable(qp, side, bound).to_dict() for side in (GAMMA, LAMBDA)}
    out["relaxed_stable"] = {side: _relaxed(qp, side, bound) for side in (GAMMA, LAMBDA)}
    return CommandResult(out)


def cmd_stabilize(args) -> CommandResult:
    doc = _load(args)
    qp = _quasi_product(doc)
    side = args.side
    target = qp if side == GAMMA else qp.swapped()
    relaxed = check_relaxed_stable(target, GAMMA, doc.degree_bound)
    if relaxed.verdict == "certified-no":
        return CommandResult({"name": doc.name, "side": side, "relaxed": replace_side(relaxed.to_dict(), side),
                              "stabilized": None}, EXIT_NEGATIVE)
    res = stabilize(target, relaxed, doc.degree_bound)
    out = {"name": doc.name, "side": side, **res.to_dict()}
    out["transports"] = res.transports
    if res.stabilized is not None:
        rule = RuleSet(qp.host.skeleton, res.rule.squares)
        new_doc = document_from_rule(doc, rule, qp.emb, name=f"{doc.name}_stabilized")
        new_doc.root = doc.root
        out["document"] = serialize_document(new_doc)
    return CommandResult(out)


def replace_side(d: dict, side: str) -> dict:
    return {**d, "side": side}


def cmd_decide(args) -> CommandResult:
    doc = _load(args)
    qp = _quasi_product(doc)
    decision = None
    if doc.candidates or args.shortcuts:
        decision = apply_polytree_shortcuts(qp, doc.candidates, doc.degree_bound, doc.budget)
    if decision is None:
        decision = decide_product(qp, doc.degree_bound, doc.budget, oracle_budget=args.oracle_budget)
    out = {"name": doc.name, **decision.to_dict()}
    return CommandResult(out, EXIT_NEGATIVE if decision.verdict == "no" else EXIT_OK)


def cmd_report_cstar(args) -> CommandResult:
    doc = _load(args)
    qp = _quasi_product(doc)
    reports = []
    notes = []
    if detect_cycle_factor(qp.gam) is not None:
        try:
            reports.append(crossed_product_report(qp, doc.degree_bound).to_dict())
        except PreconditionError as exc:
            notes.append(str(exc))
    try:
        decision = decide_product(qp, doc.degree_bound, doc.budget)
        if decision.verdict == "yes":
            reports.append(tensor_report(qp, decision).to_dict())
        else:
            notes.append(f"product decision: {decision.verdict}")
    except PreconditionError as exc:
        notes.append(str(exc))
    reports.append(emit_ck_presentation(qp.host).to_dict())
    return CommandResult({"name": doc.name, "reports": reports, "notes": notes})


def to_dot(name: str, g) -> str:
    lines = [f"digraph {json.dumps(name)} {{"]
    for v in g.vertices:
        lines.append(f"  {json.dumps(v)};")
    for e in g.edges.values():
        color = PALETTE[(e.color - 1) % len(PALETTE)]
        lines.append(f"  {json.dumps(e.src)} -> {json.dumps(e.dst)} [label={json.dumps(e.id)}, color={color}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export_dot(args) -> CommandResult:
    doc = _load(args)
    host, _ = doc.box()
    graphs = {"host": host, "lambda": doc.lam.graph, "gamma": doc.gam.graph}
    which = args.which.split(",") if args.which else list(graphs)
    outdir = Path(args.dot_out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for key in which:
        if key not in graphs:
            raise PreconditionError(f"unknown skeleton {key!r}; choose from host, lambda, gamma")
        path = outdir / f"{doc.name}_{key}.dot"
        _atomic_write(path, to_dot(f"{doc.name}_{key}", graphs[key]))
        written.append(str(path))
    return CommandResult({"name": doc.name, "written": written})


def cmd_fuzz(args) -> CommandResult:
    seed = args.seed if args.seed is not None else 0
    rng = random.Random(seed)
    bound = args.degree_bound or 4
    failures, rows = [], []
    for n in range(args.count):
        if args.polytree:
            inst = random_polytree_quasi_product(rng)
            verdict = decide_product(inst.quasi_product(), bound).verdict
            row = {"index": n, "verdict": verdict, "ok": verdict == "yes"}
        else:
            inst = random_box_rule(rng)
            row = {"index": n, **check_instance(inst, bound)}
        rows.append(row)
        if not row["ok"]:
            failures.append(row)
    out = {"seed": seed, "count": args.count, "mode": "polytree" if args.polytree else "rules",
           "passed": args.count - len(failures), "failures": failures}
    return CommandResult(out, EXIT_OK if not failures else EXIT_NEGATIVE)


def cmd_list(args) -> CommandResult:
    return CommandResult({"fixtures": corpus_names()})


# ---------------------------------------------------------------------------
# output


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=".tmp-")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def render_text(value, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 1))
            elif isinstance(v, str) and "\n" in v:
                lines.append(f"{pad}{k}: |")
                lines.extend(pad + "  " + line for line in v.splitlines())
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
        return "\n".join(lines)
    if isinstance(value, list):
        lines = []
        for v in value:
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}-")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
        return "\n".join(lines)
    return pad + _scalar(value)


def _scalar(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (dict, list)):
        return json.dumps(v)
    return str(v)


COMMANDS: dict[str, tuple[Callable, str]] = {
    "validate": (cmd_validate, "check the factor and host rules"),
    "analyze": (cmd_analyze, "quasi-product, stability and relaxed-stability reports"),
    "stabilize": (cmd_stabilize, "build the stabilized rule and the edge map between hosts"),
    "decide-product": (cmd_decide, "decide whether the host is a product of its factors"),
    "report-cstar": (cmd_report_cstar, "symbolic C*-algebra structure reports"),
    "export-dot": (cmd_export_dot, "write DOT files for the skeletons"),
    "fuzz": (cmd_fuzz, "random instances through the invariant suite"),
    "list-fixtures": (cmd_list, "names of the bundled fixtures"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--input", "-i", help="instance document (JSON)")
    src.add_argument("--fixture", help="bundled fixture name")
    common.add_argument("--degree-bound", type=int, default=None, help="bound for morphism-level checks (default 4)")
    common.add_argument("--budget", type=int, default=None, help="backtracking node cap (default 1000000)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", "-o", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--timing", action="store_true", help="include wall-clock seconds in the report")

    parser = argparse.ArgumentParser(prog="kgraphs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kgraphs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {name: sub.add_parser(name, parents=[common], help=help_) for name, (_, help_) in COMMANDS.items()}
    subs["stabilize"].add_argument("--side", choices=(GAMMA, LAMBDA), default=GAMMA,
                                   help="factor to stabilize (default gamma)")
    subs["stabilize"].add_argument("--document-out", help="also write the stabilized instance document here")
    subs["decide-product"].add_argument("--oracle-budget", type=int, default=0,
                                        help="hand unknown verdicts to exhaustive search with this node cap")
    subs["decide-product"].add_argument("--shortcuts", action="store_true",
                                        help="report polytree or k-tree shortcuts when they apply")
    subs["export-dot"].add_argument("--dot-out", help="output directory (default .)")
    subs["export-dot"].add_argument("--which", help="comma list of host, lambda, gamma (default all)")
    subs["fuzz"].add_argument("--count", type=int, default=100)
    subs["fuzz"].add_argument("--polytree", action="store_true", help="polytree quasi-products instead of rules")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    start = time.perf_counter()
    try:
        result = func(args)
    except BudgetExceeded as exc:
        result = CommandResult({"error": "budget exceeded", "message": str(exc)}, EXIT_BUDGET)
    except (KGraphError, OSError, ValueError) as exc:
        result = CommandResult({"error": type(exc).__name__, "message": str(exc)}, EXIT_INPUT)
    payload = result.payload
    if args.timing:
        payload = {**payload, "timing_seconds": round(time.perf_counter() - start, 4)}
    if args.command == "stabilize" and getattr(args, "document_out", None) and payload.get("document"):
        _atomic_write(Path(args.document_out), payload["document"])
    text = json.dumps(payload, indent=2, ensure_ascii=False) if args.format == "json" else render_text(payload)
    if args.out:
        _atomic_write(Path(args.out), text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return result.code


if __name__ == "__main__":
    sys.exit(main())
