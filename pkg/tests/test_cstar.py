import pytest

from kgraphs.analysis import decide_product
from kgraphs.cstar import algebra_name, crossed_product_report, detect_cycle_factor, emit_ck_presentation, tensor_report
from kgraphs.errors import PreconditionError
from kgraphs.rules import KGraph, RuleSet, unique_rule
from kgraphs.skeleton import ColoredGraph, Edge


def bouquet(n):
    return KGraph(RuleSet(ColoredGraph(1, ["v"], [Edge(f"f{i}", "v", "v", 1) for i in range(n)]), []))


def test_algebra_names():
    assert algebra_name(bouquet(3)) == "O_3"
    torus = ColoredGraph(2, ["x"], [Edge("e", "x", "x", 1), Edge("g", "x", "x", 2)])
    assert algebra_name(KGraph(unique_rule(torus))) == "C(T^2)"
    circle = ColoredGraph(1, ["x"], [Edge("e", "x", "x", 1)])
    assert algebra_name(KGraph(RuleSet(circle, []))) == "C(T)"
    assert algebra_name(bouquet(1)) == "C(T)"
    line = ColoredGraph(1, ["a", "b"], [Edge("e", "a", "b", 1)])
    assert algebra_name(KGraph(RuleSet(line, [])), "C*(Γ)") == "C*(Γ)"


def test_cycle_factor_requires_the_unique_rule():
    g = ColoredGraph(2, ["a", "b"], [Edge("p", "a", "b", 1), Edge("q", "b", "a", 1),
                                      Edge("r", "a", "b", 2), Edge("s", "b", "a", 2)])
    assert detect_cycle_factor(KGraph(unique_rule(g))).as_tuple() == (2, 2)


def test_c43_fixture_detection(qp_cache):
    cf = detect_cycle_factor(qp_cache("c43").gam)
    assert cf.as_tuple() == (4, 3)
    assert cf.labels == ("w0", "w1", "w2", "w3")
    assert cf.edge(3, 2) == "f32"


def test_crossed_product_on_c43(qp_cache):
    payload = crossed_product_report(qp_cache("c43")).payload
    assert payload["group_rank"] == 3
    assert payload["headline"].endswith("⋊_ρ Z^3")
    first = payload["rho"][0]
    assert len(first["components"]) == 4
    assert all(c["map"] == {"a1": "a2", "a2": "a1"} for c in first["components"])
    # four swaps around the cycle compose to the identity
    assert first["cycle_composite"]["trivial"]
    assert all(r["identity"] for r in payload["rho"][1:])


def test_crossed_product_needs_cycle_factor(qp_cache):
    with pytest.raises(PreconditionError):
        crossed_product_report(qp_cache("counter_omega1"))


def test_tensor_needs_yes(qp_cache):
    qp = qp_cache("counter_omega1")
    with pytest.raises(PreconditionError):
        tensor_report(qp, decide_product(qp))


def test_ck_presentation_bouquet(qp_cache):
    host = qp_cache("bouq_sim2").host
    payload = emit_ck_presentation(host).payload
    assert payload["source_free"] and not payload["warnings"]
    rel = payload["relations"]
    assert len(payload["generators"]) == 1 + 5
    assert len(rel["CK2"]) == len(host.rule.squares) == 3 + 3 + 1
    assert "S_(f1,x) S_(v,e) = S_(v,e) S_(f2,x)" in rel["CK2"]
    assert len(rel["CK3"]) == 5 and len(rel["CK4"]) == 3
    assert rel["CK4"][0] == "S_(v,x) = S_(f1,x) S_(f1,x)* + S_(f2,x) S_(f2,x)* + S_(f3,x) S_(f3,x)*"


def test_ck_presentation_flags_sources():
    line = KGraph(RuleSet(ColoredGraph(1, ["a", "b"], [Edge("e", "a", "b", 1)]), []))
    payload = emit_ck_presentation(line).payload
    assert not payload["source_free"]
    assert payload["warnings"] == ["not source-free; CK4 omitted at vertex a color 1"]
    assert payload["relations"]["CK4"] == ["S_b = S_e S_e*"]
