import numpy as np
import pytest

from persona_embed.graph import Graph

_ACCEPTANCE = []


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="run slow dataset tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip = pytest.mark.skip(reason="slow; pass --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion for the summary."""

    class _Recorder:
        def __init__(self):
            self.label = request.node.name
            self.details = ""

        def __call__(self, label, details=""):
            self.label = label
            self.details = details

    rec = _Recorder()
    yield rec
    call = getattr(request.node, "rep_call", None)
    passed = call is not None and call.passed
    _ACCEPTANCE.append((passed, rec.label, rec.details))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for passed, label, details in _ACCEPTANCE:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {label}"
        if details:
            line += f" -- {details}"
        terminalreporter.write_line(line)


def make_graph(edges, n=None, directed=False, labels=None):
    edges = list(edges)
    src = [e[0] for e in edges]
    dst = [e[1] for e in edges]
    w = [e[2] if len(e) > 2 else 1.0 for e in edges]
    return Graph.from_edges(src, dst, w, n_nodes=n, directed=directed, labels=labels)


def path_graph(n):
    return make_graph([(i, i + 1) for i in range(n - 1)], n)


def random_graph(rng, n, p, directed=False):
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    if not directed:
        mask = np.triu(mask, 1)
    u, v = np.nonzero(mask)
    return Graph.from_edges(u, v, n_nodes=n, directed=directed)


def ba_graph(rng, n, m):
    """Preferential attachment, ``m`` edges per new node."""
    targets = list(range(m))
    repeated = []
    src, dst = [], []
    for v in range(m, n):
        for t in set(targets):
            src.append(v)
            dst.append(t)
        repeated.extend(targets)
        repeated.extend([v] * m)
        targets = list(rng.choice(repeated, size=m))
    return Graph.from_edges(src, dst, n_nodes=n)
