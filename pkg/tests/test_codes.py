import itertools

import numpy as np
import pytest

from polarpairs.codes import (
    BinaryCode,
    certify_min_distance,
    exhaustive_min_distance,
    hadamard_code,
    hadamard_code_for,
    hamming_distance_matrix,
    make_code,
    message_digits,
    rs_encode,
    rs_feasible,
    rs_hadamard_code,
    sampled_min_distance,
    smallest_feasible_m,
    sylvester,
)
from polarpairs.exceptions import ConstructionError, InvalidInputError
from polarpairs.gf2m import PRIMITIVE_POLYNOMIALS, GF2m, clmul_mod, field


def naive_min_distance(words):
    return min(int(np.sum(a != b)) for a, b in itertools.combinations(words, 2))


def test_hadamard_k1():
    c = hadamard_code(1)
    assert c.words.tolist() == [[1, 1], [1, -1]]
    assert c.min_distance == 1


def test_hadamard_k3_all_pairs_equal():
    c = hadamard_code(3)
    assert c.words.shape == (8, 8)
    dists = [int(np.sum(a != b)) for a, b in itertools.combinations(c.words, 2)]
    assert len(dists) == 28 and set(dists) == {4}
    assert certify_min_distance(c) == 4


@pytest.mark.parametrize("k", range(1, 9))
def test_hadamard_relative_distance_half(k):
    c = hadamard_code(k)
    assert c.relative_distance == 0.5
    D = hamming_distance_matrix(c.words)
    off = D[~np.eye(c.n, dtype=bool)]
    assert set(off.tolist()) == {1 << (k - 1)}


def test_hadamard_rejects_k0():
    with pytest.raises(InvalidInputError):
        hadamard_code(0)


def test_hadamard_code_for_truncates():
    c = hadamard_code_for(5)
    assert c.words.shape == (5, 8) and c.min_distance == 4


def test_sylvester_recursion():
    H = sylvester(3)
    H2 = sylvester(2)
    assert np.array_equal(H, np.block([[H2, H2], [H2, -H2]]))


def test_duplicate_words_flagged():
    words = np.array([[1, -1, 1], [1, 1, 1], [1, -1, 1]], dtype=np.int8)
    c = BinaryCode(words, min_distance=3)
    assert certify_min_distance(c) == 0
    assert c.min_distance == 0 and not c.distinct
    assert any("distinctness" in note for note in c.notes)


def test_exhaustive_matches_naive():
    rng = np.random.default_rng(4)
    words = rng.choice([-1, 1], size=(40, 17)).astype(np.int8)
    assert exhaustive_min_distance(words) == naive_min_distance(words)


def test_sampled_never_below_exhaustive():
    rng = np.random.default_rng(5)
    words = rng.choice([-1, 1], size=(60, 30)).astype(np.int8)
    assert sampled_min_distance(words, pairs=5000) >= exhaustive_min_distance(words)


def test_rs_256_005():
    c = rs_hadamard_code(256, 0.05)
    assert c.n == 256 and c.certified == "exhaustive"
    assert c.min_distance / c.length >= 0.45
    assert c.min_distance >= c.design_distance
    assert len(np.unique(c.words, axis=0)) == 256


def test_rs_64_01():
    c = rs_hadamard_code(64, 0.1)
    assert certify_min_distance(c) >= 0.4 * c.length


def test_rs_relative_distance_vs_rate():
    for n, delta in [(20, 0.1), (100, 0.15), (300, 0.2)]:
        c = rs_hadamard_code(n, delta)
        rate = c.params["rate"]
        assert rate <= 2 * delta
        assert c.relative_distance >= (1 - rate) / 2 - 1e-12
        assert c.relative_distance >= 0.5 - delta


def test_rs_infeasible_m_names_smallest():
    m0 = smallest_feasible_m(5000, 0.05)
    with pytest.raises(ConstructionError, match=f"smallest feasible m is {m0}"):
        rs_hadamard_code(5000, 0.05, m=4)


@pytest.mark.parametrize("delta", [0.0, 0.25, -0.1])
def test_rs_rejects_delta(delta):
    with pytest.raises(InvalidInputError):
        rs_hadamard_code(16, delta)


def test_concatenation_monotonicity():
    """Raising the outer rate never raises the certified relative distance."""
    for n, m in [(40, 4), (60, 5)]:
        deltas = [d for d in np.linspace(0.02, 0.24, 23) if rs_feasible(n, d, m)]
        assert len(deltas) > 3
        rel = []
        for d in deltas:
            c = rs_hadamard_code(n, float(d), m=m)
            rel.append((c.params["rate"], c.design_distance / c.length, c.relative_distance))
        rel.sort()
        for (r0, des0, meas0), (r1, des1, meas1) in zip(rel, rel[1:]):
            if r1 > r0:
                assert des1 <= des0 and meas1 <= meas0


def test_outer_reed_solomon_distance():
    m, k = 4, 3
    msgs = message_digits(200, m, k)
    outer = rs_encode(msgs, m, k)
    q = 1 << m
    for a, b in itertools.combinations(range(0, 200, 7), 2):
        assert np.sum(outer[a] != outer[b]) >= q - k + 1


def test_make_code_dispatch():
    assert make_code(8).params["backend"] == "hadamard"
    assert make_code(8, "rs-hadamard", delta=0.2).params["backend"] == "rs-hadamard"
    with pytest.raises(InvalidInputError):
        make_code(8, "bch")


def test_rs_deterministic():
    assert rs_hadamard_code(50, 0.1).words.tobytes() == rs_hadamard_code(50, 0.1).words.tobytes()


# --- GF(2^m) -----------------------------------------------------------------


@pytest.mark.parametrize("m", sorted(PRIMITIVE_POLYNOMIALS))
def test_field_polynomials_are_primitive(m):
    gf = GF2m(m)
    assert len(set(gf.exp[: gf.order - 1].tolist())) == gf.order - 1


@pytest.mark.parametrize("m", [4, 5, 8])
def test_table_mul_matches_carryless(m):
    gf = field(m)
    rng = np.random.default_rng(m)
    a = rng.integers(0, gf.order, 300)
    b = rng.integers(0, gf.order, 300)
    got = gf.mul(a, b)
    want = [clmul_mod(int(x), int(y), m, gf.poly) for x, y in zip(a, b)]
    assert got.tolist() == want


def test_field_inverse():
    gf = field(6)
    a = np.arange(1, gf.order)
    assert np.all(gf.mul(a, gf.inv(a)) == 1)
    with pytest.raises(ZeroDivisionError):
        gf.inv([0])


def test_field_rejects_m():
    with pytest.raises(InvalidInputError):
        GF2m(3)
