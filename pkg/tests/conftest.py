"""Independent pure-Python oracles shared by the test modules."""

import itertools
import math

import pytest


def py_dist(a, b, kind, p=None):
    """Distance with plain Python loops, no numpy."""
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    assert len(a) == len(b)
    if kind == "l0":
        return sum(1 for x, y in zip(a, b) if x != y)
    if kind == "linf":
        return max((abs(x - y) for x, y in zip(a, b)), default=0.0)
    return sum(abs(x - y) ** p for x, y in zip(a, b)) ** (1.0 / p)


def py_pow(a, b, p):
    return sum(abs(float(x) - float(y)) ** p for x, y in zip(a, b))


def py_pairs(P):
    return list(itertools.combinations(range(len(P)), 2))


def py_closest(P, kind, p=None):
    """Quadratic re-scan returning (distance, i, j) with lexicographic tie-break."""
    best = None
    for i, j in py_pairs(P):
        v = py_dist(P[i], P[j], kind, p)
        if best is None or v < best[0]:
            best = (v, i, j)
    return best


def py_bcp(R, B, kind, p=None):
    best = None
    for i in range(len(R)):
        for j in range(len(B)):
            v = py_dist(R[i], B[j], kind, p)
            if best is None or v < best[0]:
                best = (v, i, j)
    return best


def py_ov(U, W):
    for i, u in enumerate(U):
        for j, w in enumerate(W):
            if all(not (x and y) for x, y in zip(u, w)):
                return i, j
    return None


@pytest.fixture
def oracle():
    class O:
        dist = staticmethod(py_dist)
        pow = staticmethod(py_pow)
        closest = staticmethod(py_closest)
        bcp = staticmethod(py_bcp)
        ov = staticmethod(py_ov)
        pairs = staticmethod(py_pairs)

    return O


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
