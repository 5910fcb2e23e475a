import hypothesis
import pytest

from iiasim.heuristics import WeightProvider
from iiasim.model import DependencyGraph, PropagationGraph, SubjectSystem

hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    key = mark.args[0]
    title = mark.args[1] if len(mark.args) > 1 else ""
    ok = _CRITERIA.get(key, (title, True))[1]
    # An expected failure still means the criterion is not met.
    if rep.failed or hasattr(rep, "wasxfail"):
        _CRITERIA[key] = (title, False)
    elif rep.when == "call":
        _CRITERIA[key] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        title, ok = _CRITERIA[key]
        terminalreporter.write_line(f"AC{key} {'PASS' if ok else 'FAIL'}  {title}")


def make_graph(edges, classes=None, name="toy"):
    """``edges`` maps (src, dst) -> calls, or is an iterable of pairs (calls 1)."""
    if not isinstance(edges, dict):
        edges = {e: 1 for e in edges}
    names = set(classes or ())
    for x, y in edges:
        names.update((x, y))
    return DependencyGraph(SubjectSystem(name, frozenset(names)), dict(edges))


def table_provider(table, default=0.0, hid="table"):
    """Provider backed by an explicit directed weight table."""
    return WeightProvider(hid, lambda x, y: table.get((x, y), default))


@pytest.fixture
def star_pg():
    g = make_graph({("hub", "l1"): 1, ("hub", "l2"): 1, ("l3", "hub"): 1}, classes={"iso"})
    return PropagationGraph.from_graph(g)
