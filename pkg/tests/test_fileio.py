import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from polarpairs import fileio
from polarpairs.codes import rs_hadamard_code
from polarpairs.constructions import lp_mid
from polarpairs.exceptions import InvalidInputError
from polarpairs.metrics import Metric, PointSet
from polarpairs.reductions import OVInstance


@settings(max_examples=80, deadline=None)
@given(
    arrays(
        np.float64,
        st.tuples(st.integers(1, 6), st.integers(1, 5)),
        elements=st.floats(allow_nan=False, allow_infinity=False, width=64),
    )
)
def test_round_trip_bit_exact(P):
    buf = io.StringIO()
    fileio.write_pointset(buf, PointSet(P, Metric.lp(2.5)))
    ps, _ = fileio.parse_pointset(buf.getvalue())
    assert ps.points.tobytes() == np.ascontiguousarray(P).tobytes()


def test_polar_pair_round_trip():
    pp = lp_mid(5, 1.4)
    buf = io.StringIO()
    fileio.write_polar_pair(buf, pp)
    back = fileio.read_polar_pair(io.StringIO(buf.getvalue()))
    assert back.A.points.tobytes() == pp.A.points.tobytes()
    assert back.crossing_distance == pp.crossing_distance
    assert back.metric == pp.metric


def test_code_round_trip():
    c = rs_hadamard_code(30, 0.1)
    buf = io.StringIO()
    fileio.write_code(buf, c)
    back = fileio.read_code(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.words, c.words) and back.min_distance == c.min_distance


def test_ov_round_trip():
    inst = OVInstance([[0, 1, 1], [1, 0, 0]], [[1, 1, 1]])
    back = fileio.parse_ov(fileio.format_ov(inst))
    assert np.array_equal(back.U, inst.U) and np.array_equal(back.W, inst.W)


def test_strip_timestamp_only_drops_created():
    buf = io.StringIO()
    fileio.write_pointset(buf, PointSet([[1.0]], Metric.l1()))
    text = buf.getvalue()
    assert "# created:" in text
    stripped = fileio.strip_timestamp(text)
    assert "# created:" not in stripped
    assert len(stripped.splitlines()) == len(text.splitlines()) - 1


@pytest.mark.parametrize(
    "text",
    [
        "",
        "A 1 2\n",
        fileio.MAGIC + "\n# metric: l1\n# dim: 2\n# count: 2\nA 1 2\n",
        fileio.MAGIC + "\n# metric: l1\n# dim: 2\n# count: 1\nQ 1 2\n",
        fileio.MAGIC + "\n# metric: l1\n# dim: 2\n# count: 1\nA 1 x\n",
        fileio.MAGIC + "\n# metric: l1\n# count: 1\nA 1 2\n",
    ],
)
def test_parse_errors(text):
    with pytest.raises(InvalidInputError):
        fileio.parse_pointset(text)


@pytest.mark.parametrize("text", ["0101\n", "01\n\n012\n", "01\n\n011\n", "01\n10\n\n11\n\n00\n"])
def test_ov_parse_errors(text):
    with pytest.raises(InvalidInputError):
        fileio.parse_ov(text)
