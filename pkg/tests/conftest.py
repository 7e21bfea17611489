import pytest

from pipeplan.model import Edge, Image, Operator, Pipeline


def op(op_id, *tags):
    return Operator(op_id, frozenset(tags or ("golang",)))


def chain(*ids, tags=("golang",)):
    ops = tuple(Operator(i, frozenset(tags)) for i in ids)
    edges = tuple(Edge(a, b) for a, b in zip(ids, ids[1:]))
    return Pipeline(ops, edges)


def naive_fib_calls(n):
    """Count calls of the textbook recursive Fibonacci by running it."""
    calls = 0

    def fib(k):
        nonlocal calls
        calls += 1
        return k if k < 2 else fib(k - 1) + fib(k - 2)

    fib(n)
    return calls


DEFAULT_IMAGE = Image("img-default", frozenset({"golang"}))


@pytest.fixture
def default_image():
    return DEFAULT_IMAGE


@pytest.fixture
def line3():
    return chain("A", "B", "C")


@pytest.fixture
def two_req():
    """Two-requirement pipeline whose best split crosses a single edge.

    img-1 supports {t1, t2, t3, t5}, img-2 supports {t1, t3, t4}; A/B need img-1,
    D/E need img-2, C fits either.
    """
    ops = (op("A", "t1", "t2"), op("B", "t3", "t5"), op("C", "t1", "t3"),
           op("D", "t3", "t4"), op("E", "t1", "t4"))
    edges = (Edge("A", "B"), Edge("A", "C"), Edge("B", "C"), Edge("C", "D"), Edge("D", "E"))
    images = (Image("img-1", frozenset({"t1", "t2", "t3", "t5"})),
              Image("img-2", frozenset({"t1", "t3", "t4"})))
    return Pipeline(ops, edges), images


# one line per acceptance criterion, printed after the run
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
