import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgraphs.document import (FactorData, InstanceDocument, corpus_names, corpus_text, document_from_rule,
                              load_fixture, parse_document, serialize_document)
from kgraphs.errors import DocumentError
from kgraphs.fuzz import random_box_rule

FIXTURES = ["bouq_sim1", "bouq_sim2", "bouq_sim3", "c43", "counter_omega1", "counter_omega2",
            "lattice_grid4", "path_loops_trunc8", "rho_non_comp", "rho_non_isom"]


def test_corpus_is_complete():
    assert corpus_names() == FIXTURES


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_round_trip(name):
    text = corpus_text(name)
    once = serialize_document(parse_document(text))
    assert once == text
    assert serialize_document(parse_document(once)) == once


def test_unknown_fixture():
    with pytest.raises(DocumentError, match="no bundled fixture"):
        load_fixture("nope")


def base() -> dict:
    return json.loads(corpus_text("counter_omega1"))


def located(raw) -> DocumentError:
    text = raw if isinstance(raw, str) else json.dumps(raw, indent=2)
    with pytest.raises(DocumentError) as info:
        parse_document(text)
    return info.value


def test_syntax_error_has_line():
    err = located('{\n  "version": 1,\n  "name": \n}')
    assert err.location.startswith("line 4")


def test_missing_edge_id_in_square():
    raw = base()
    raw["host"]["mixed_squares"][0][0][0] = "(zz,x)"
    err = located(raw)
    assert "'(zz,x)'" in str(err)
    assert err.location.startswith("host.mixed_squares[0]")


def test_square_with_different_endpoints():
    raw = base()
    raw["host"]["mixed_squares"][0] = [["(wt,x)", "(t,f)"], ["(v,g)", "(vt,x)"]]
    err = located(raw)
    assert "different endpoints" in str(err)


def test_non_composable_square():
    raw = base()
    raw["host"]["mixed_squares"][0] = [["(t,f)", "(wt,x)"], ["(wt,x)", "(w,g)"]]
    err = located(raw)
    assert "not composable" in str(err)


def test_dangling_vertex():
    raw = base()
    raw["lambda"]["edges"][0]["src"] = "q"
    err = located(raw)
    assert err.location.startswith("lambda.edges[0].src") and "undeclared vertex 'q'" in str(err)


def test_color_out_of_range():
    raw = base()
    raw["gamma"]["edges"][1]["color"] = 2
    err = located(raw)
    assert err.location.startswith("gamma.edges[1].color") and "out of range" in str(err)
    assert "near line" in err.location


@pytest.mark.parametrize("mutate, where", [
    (lambda r: r.update(version=2), "version"),
    (lambda r: r.update(extra=1), "document"),
    (lambda r: r.pop("split"), "document"),
    (lambda r: r.update(split=[1]), "split"),
    (lambda r: r.update(root="zz"), "root"),
    (lambda r: r["options"].update(budget=0), "options.budget"),
    (lambda r: r["gamma"]["edges"].append(dict(r["gamma"]["edges"][0])), "gamma.edges[2]"),
])
def test_structural_errors(mutate, where):
    raw = base()
    mutate(raw)
    assert located(raw).location.startswith(where)


def test_mixed_square_must_mix_factors():
    raw = json.loads(corpus_text("bouq_sim1"))
    raw["host"] = {"mixed_squares": [[["(v,e)", "(v,g)"], ["(v,g)", "(v,e)"]]]}
    assert "one color from each factor" in str(located(raw))


def test_layer_override_round_trip():
    doc = load_fixture("bouq_sim1")
    rule, emb = doc.host_rule()
    doc2 = document_from_rule(doc, rule, emb, name="same")
    assert doc2.mixed_squares == [] and doc2.layer_overrides == []
    assert doc2.host_rule()[0] == rule


def instances():
    return st.integers(0, 10**6).map(lambda s: random_box_rule(random.Random(s), max_edges=8))


@settings(max_examples=40, deadline=None)
@given(instances())
def test_generated_documents_round_trip(inst):
    emb = inst.emb
    template = InstanceDocument("gen", inst.lam.rank, inst.gam.rank,
                                FactorData(emb.lhs, inst.lam.rule.squares), FactorData(emb.rhs, inst.gam.rule.squares))
    doc = document_from_rule(template, inst.host.rule, emb)
    text = serialize_document(doc)
    again = parse_document(text)
    assert serialize_document(again) == text
    assert again.host_rule()[0] == inst.host.rule
