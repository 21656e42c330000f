import hypothesis
import numpy as np
import pytest

from neighborhood_attack.graph import build_family, build_neighborhood_index

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

# small instances covering every family; all have constant r*
SMALL_FAMILIES = [
    ("circle", {"n": 4}),
    ("circle", {"n": 5}),
    ("circle", {"n": 8}),
    ("circulant", {"n": 9, "offsets": [1, 3]}),
    ("circulant", {"n": 10, "offsets": [2, 5]}),
    ("hypercube", {"dim": 3}),
    ("hypercube", {"dim": 4}),
    ("complete", {"n": 5}),
    ("complete_bipartite", {"side": 3}),
]


def family_id(case):
    kind, params = case
    return kind + "-" + "-".join(f"{k}{v}" for k, v in params.items())


@pytest.fixture(params=SMALL_FAMILIES, ids=family_id)
def small_graph(request):
    kind, params = request.param
    g = build_family(kind, **params)
    return g, build_neighborhood_index(g)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_states(rng, n, count):
    return (rng.integers(0, 2, size=(count, n)) * 2 - 1).astype(np.int8)


# one line per acceptance criterion, printed after the run whatever the capture mode
ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        def order(line):
            label = line.split("criterion ")[1].split(":")[0]
            digits = "".join(c for c in label if c.isdigit())
            return int(digits), label

        for line in sorted(ACCEPTANCE_LINES, key=order):
            terminalreporter.write_line(line)
