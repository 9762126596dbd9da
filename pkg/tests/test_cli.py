import json
import re
import subprocess
import sys

import pytest

from kgraphs.cli import main
from kgraphs.document import load_fixture, parse_document
from kgraphs.rules import validate_rule


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_validate_rejects_cube_failure(capsys):
    code, out = run_json(capsys, "validate", "--fixture", "bouq_sim3")
    assert code == 1 and not out["valid"]
    assert out["host"]["triple"] == ["(f1,x)", "(v,e)", "(v,g)"]


def test_validate_accepts(capsys):
    code, out = run_json(capsys, "validate", "--fixture", "bouq_sim2")
    assert code == 0 and out["valid"]


def test_decide_counter_two(capsys):
    code, out = run_json(capsys, "decide-product", "--fixture", "counter_omega2")
    assert code == 0 and out["verdict"] == "yes"
    assert out["iso"]["(u,f)"] == "(u,g)" and out["iso"]["(w,f)"] == "(w,f)"


def test_decide_counter_one_is_negative(capsys):
    code, out = run_json(capsys, "decide-product", "--fixture", "counter_omega1")
    assert code == 1 and out["certificate"]["kind"] == "holonomy"


def test_decide_with_candidates_uses_shortcut(capsys):
    code, out = run_json(capsys, "decide-product", "--fixture", "lattice_grid4")
    assert code == 0 and out["shortcut"] == "k-tree"


def test_report_cstar_bouquet(capsys):
    code, out = run_json(capsys, "report-cstar", "--fixture", "bouq_sim2")
    assert code == 0
    kinds = [r["kind"] for r in out["reports"]]
    assert kinds == ["crossed-product", "ck-presentation"]
    cp = out["reports"][0]["payload"]
    assert "Z^2" in cp["headline"]
    assert all(r["cycle_composite"]["map"] == {"f1": "f2", "f2": "f1", "f3": "f3"} for r in cp["rho"])


def test_analyze_reports_both_sides(capsys):
    code, out = run_json(capsys, "analyze", "--fixture", "rho_non_isom")
    assert code == 0 and out["quasi_product"]["ok"]
    assert set(out["stable"]) == {"gamma", "lambda"}
    assert out["relaxed_stable"]["gamma"]["verdict"] == "certified-no"


def test_stabilize_emits_document(capsys, tmp_path):
    target = tmp_path / "stable.json"
    code, out = run_json(capsys, "stabilize", "--fixture", "path_loops_trunc8", "--document-out", str(target))
    assert code == 0 and out["ok"]
    doc = parse_document(target.read_text(encoding="utf-8"))
    rule, _ = doc.host_rule()
    assert validate_rule(rule)
    # flips at w0, w1, w4, w5
    flips = sorted(k for k, v in out["theta"].items() if k != v)
    assert flips == sorted(f"(w{j},{c})" for j in (0, 1, 4, 5) for c in "fg")
    assert target.read_text(encoding="utf-8") == out["document"]


def test_stabilize_lambda_side(capsys):
    code, out = run_json(capsys, "stabilize", "--fixture", "counter_omega2", "--side", "lambda")
    assert code == 0 and out["side"] == "lambda" and out["already_stable"]


def test_stabilize_refuted(capsys):
    code, out = run_json(capsys, "stabilize", "--fixture", "counter_omega1")
    assert code == 1 and out["stabilized"] is None


def test_export_dot(capsys, tmp_path):
    code, out = run_json(capsys, "export-dot", "--fixture", "rho_non_comp", "--dot-out", str(tmp_path))
    assert code == 0 and len(out["written"]) == 3
    doc = load_fixture("rho_non_comp")
    host, _ = doc.box()
    sizes = {"host": host, "lambda": doc.lam.graph, "gamma": doc.gam.graph}
    for key, g in sizes.items():
        text = (tmp_path / f"rho_non_comp_{key}.dot").read_text()
        lines = text.strip().splitlines()
        assert re.fullmatch(r'digraph "[^"]+" \{', lines[0]) and lines[-1] == "}"
        nodes = [ln for ln in lines[1:-1] if "->" not in ln]
        edges = [ln for ln in lines[1:-1] if "->" in ln]
        assert len(nodes) == len(g.vertices) and len(edges) == len(g.edges)
        for ln in edges:
            assert re.fullmatch(r'  "[^"]+" -> "[^"]+" \[label="[^"]+", color=\w+\];', ln)


def test_export_dot_unknown_skeleton(capsys, tmp_path):
    code, _ = run(capsys, "export-dot", "--fixture", "c43", "--dot-out", str(tmp_path), "--which", "moon")
    assert code == 2


def test_fuzz_is_deterministic(capsys):
    a = run_json(capsys, "fuzz", "--count", "5", "--seed", "11")
    b = run_json(capsys, "fuzz", "--count", "5", "--seed", "11")
    assert a == b and a[0] == 0 and a[1]["passed"] == 5


def test_fuzz_polytree(capsys):
    code, out = run_json(capsys, "fuzz", "--count", "5", "--seed", "2", "--polytree")
    assert code == 0 and out["mode"] == "polytree" and out["passed"] == 5


@pytest.mark.parametrize("argv", [
    ["validate", "--input", "/nonexistent/doc.json"],
    ["validate"],
    ["decide-product", "--fixture", "bouq_sim3"],
    ["validate", "--fixture", "missing"],
])
def test_input_errors(capsys, argv):
    code, out = run_json(capsys, *argv)
    assert code == 2 and "error" in out


def test_malformed_input_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    code, out = run_json(capsys, "validate", "--input", str(bad))
    assert code == 2 and "line 1" in out["message"]


def test_budget_exit_code(capsys):
    code, out = run_json(capsys, "decide-product", "--fixture", "counter_omega1", "--budget", "2")
    assert code == 3 and out["error"] == "budget exceeded"


def test_text_format_and_out_file(capsys, tmp_path):
    target = tmp_path / "report.txt"
    code, printed = run(capsys, "validate", "--fixture", "bouq_sim1", "--format", "text", "--out", str(target))
    assert code == 0 and printed == ""
    text = target.read_text()
    assert text.endswith("valid: yes\n") and "host:\n  valid: yes" in text


def test_timing_flag(capsys):
    _, out = run_json(capsys, "list-fixtures", "--timing")
    assert "bouq_sim2" in out["fixtures"] and out["timing_seconds"] >= 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kgraphs.cli", "validate", "--fixture", "bouq_sim3"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["host"]["kind"] == "cube"
