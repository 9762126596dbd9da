import pytest

from kgraphs.analysis import verify_quasi_product
from kgraphs.document import load_fixture
from kgraphs.rules import KGraph

ACCEPTANCE: dict[int, tuple[str, str]] = {}


def is_kgraph_iso(src: KGraph, dst: KGraph, emap, vmap):
    """Direct check: bijective on vertices and edges, colors and endpoints kept, squares sent to squares."""
    a, b = src.skeleton, dst.skeleton
    if sorted(vmap) != sorted(a.vertices) or sorted(vmap.values()) != sorted(b.vertices):
        return False
    if sorted(emap) != sorted(a.edges) or sorted(emap.values()) != sorted(b.edges):
        return False
    for e, ed in a.edges.items():
        f = b.edges[emap[e]]
        if (f.color, f.src, f.dst) != (ed.color, vmap[ed.src], vmap[ed.dst]):
            return False
    for (x, y), (z, w) in src.rule.squares:
        if dst.rule.partner(emap[x], emap[y]) != (emap[z], emap[w]):
            return False
    return True


def quasi_product(name):
    doc = load_fixture(name)
    host, emb = doc.host()
    return verify_quasi_product(host, doc.lam.kgraph(), doc.gam.kgraph(), emb, root=doc.root)


@pytest.fixture(scope="session")
def qp_cache():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = quasi_product(name)
        return cache[name]

    return get


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {title}")
