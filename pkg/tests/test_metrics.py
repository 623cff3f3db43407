import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarpairs.exceptions import InvalidInputError
from polarpairs.metrics import (
    Metric,
    certify_values,
    PointSet,
    distance,
    distance_pow_p,
    exact_comparison,
    pairwise_values,
    ternary_pairwise_values,
)

from conftest import py_dist, py_pow


def test_l0_counts_differing_coordinates():
    assert distance((1, 1, 1), (1, 2, 3), Metric.l0()) == 2


@pytest.mark.parametrize("metric", [Metric.l0(), Metric.l1(), Metric.l2(), Metric.lp(3.7), Metric.linf()])
def test_identity(metric):
    x = (0.3, -2.0, 7.5)
    assert distance(x, x, metric) == 0.0


def test_linf_example():
    assert distance((0, 2), (-1, 1), Metric.linf()) == 1.0


def test_pow_integer_example():
    assert distance_pow_p((1, 1), (-1, -1), 3) == 16.0


def test_pow_zero():
    assert distance_pow_p((4, 5), (4, 5), 2) == 0.0


def test_pow_fractional_example():
    a = 0.5
    got = distance_pow_p((0, 0, 0, a, a, a), (a, a, a, 0, 0, 0), 1.5)
    assert got == pytest.approx(6 * 0.5**1.5, rel=1e-15)
    assert got == pytest.approx(2.1213, abs=1e-4)


def test_dimension_mismatch_rejected():
    with pytest.raises(InvalidInputError):
        distance((1, 2), (1, 2, 3), Metric.l2())
    with pytest.raises(InvalidInputError):
        distance_pow_p((1,), (1, 2), 2)


def test_l1_is_lp1():
    assert Metric.l1() == Metric.lp(1) == Metric.parse("l1") == Metric.parse("lp:1")
    assert Metric.parse("l2") == Metric.lp(2.0)
    assert Metric.parse("linf") == Metric.linf()


@pytest.mark.parametrize("p", [0.5, math.inf, float("nan")])
def test_bad_p_rejected(p):
    with pytest.raises(InvalidInputError):
        Metric.lp(p)


def test_pointset_validation():
    with pytest.raises(InvalidInputError):
        PointSet([[1, 2], [3, 4]], Metric.l2(), sides=["A"])
    ps = PointSet([[1, 2], [3, 4]], Metric.l2(), sides=["A", "B"])
    assert ps.dim == 2 and len(ps) == 2
    with pytest.raises(ValueError):
        ps.points[0, 0] = 5.0


def test_pairwise_matches_scalar_oracle():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(7, 5))
    Y = rng.normal(size=(4, 5))
    for metric, kind, p in [(Metric.lp(1.5), "lp", 1.5), (Metric.l2(), "lp", 2.0), (Metric.linf(), "linf", None)]:
        D = pairwise_values(X, Y, metric)
        for i in range(7):
            for j in range(4):
                assert D[i, j] == pytest.approx(py_dist(X[i], Y[j], kind, p), rel=1e-12)


def test_exact_comparison_rules():
    ints = np.array([[1.0, 2.0], [3.0, -1.0]])
    assert exact_comparison(Metric.l0(), ints + 0.5)
    assert exact_comparison(Metric.lp(3), ints)
    assert not exact_comparison(Metric.lp(2.5), ints)
    assert not exact_comparison(Metric.lp(3), ints + 0.5)
    assert exact_comparison(Metric.linf(), ints)


coords = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=6)
metrics = st.sampled_from([Metric.l0(), Metric.l1(), Metric.l2(), Metric.lp(3), Metric.lp(1.3), Metric.linf()])


@settings(max_examples=200, deadline=None)
@given(data=st.data(), metric=metrics)
def test_symmetry(data, metric):
    a = data.draw(coords)
    b = data.draw(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=len(a), max_size=len(a)))
    assert distance(a, b, metric) == distance(b, a, metric)


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 8), p=st.sampled_from([1.0, 1.5, 2.0, 3.0, 7.25]))
def test_triangle_inequality(seed, dim, p):
    rng = np.random.default_rng(seed)
    a, b, c = rng.normal(scale=10, size=(3, dim))
    for metric in (Metric.lp(p), Metric.linf()):
        ab, bc, ac = distance(a, b, metric), distance(b, c, metric), distance(a, c, metric)
        assert ac <= (ab + bc) * (1 + 1e-9)


@settings(max_examples=200, deadline=None)
@given(
    data=st.data(),
    p=st.integers(1, 6),
    dim=st.integers(1, 10),
)
def test_integer_power_is_exact_integer(data, p, dim):
    a = data.draw(st.lists(st.integers(-50, 50), min_size=dim, max_size=dim))
    b = data.draw(st.lists(st.integers(-50, 50), min_size=dim, max_size=dim))
    got = distance_pow_p(a, b, p)
    assert got == sum(abs(x - y) ** p for x, y in zip(a, b))
    assert got.is_integer()
    assert got == py_pow(a, b, p)


@pytest.mark.parametrize("kind", ["l0", "l1", "l2", "lp:3", "lp:4", "lp:2.5", "linf"])
def test_ternary_shortcut_matches_direct(kind):
    rng = np.random.default_rng(17)
    X = rng.integers(-1, 2, size=(30, 41)).astype(float)
    Y = rng.integers(-1, 2, size=(25, 41)).astype(float)
    metric = Metric.parse(kind)
    for power in (False, True):
        fast = ternary_pairwise_values(X, Y, metric, power=power)
        direct = pairwise_values(X, Y, metric, power=power)
        if metric.kind != "lp" or metric.integer_p:
            assert np.array_equal(fast, direct)
        else:
            np.testing.assert_allclose(fast, direct, rtol=1e-13)


def test_ternary_shortcut_declines_other_data():
    assert ternary_pairwise_values([[0.5, 1]], None, Metric.l1()) is None
    assert certify_values([[0.5], [2.0]], None, Metric.l1())[0, 1] == 1.5
