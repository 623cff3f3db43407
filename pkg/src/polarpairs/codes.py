"""Binary {-1, +1} codes with certified minimum Hamming distance.

Two families are provided: Sylvester-Hadamard codes (relative distance
exactly 1/2, length linear in the number of words) and Reed-Solomon codes
over GF(2^m) concatenated with the Hadamard inner code (relative distance at
least ``1/2 - delta``, length logarithmic in the number of words for fixed
``delta``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConstructionError, InvalidInputError
from .gf2m import PRIMITIVE_POLYNOMIALS, field as gf_field

EXHAUSTIVE_LIMIT = 4096
SAMPLED_PAIRS = 10**6


@dataclass
class BinaryCode:
    """``words`` is an ``(n, length)`` int8 matrix with entries in {-1, +1}."""

    words: np.ndarray
    min_distance: int
    design_distance: int | None = None
    distinct: bool = True
    certified: str | None = None
    params: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.words.shape[0]

    @property
    def length(self) -> int:
        return self.words.shape[1]

    @property
    def relative_distance(self) -> float:
        return self.min_distance / self.length

    def certificate(self) -> dict:
        return {
            "n": self.n,
            "length": self.length,
            "min_distance": int(self.min_distance),
            "relative_distance": self.relative_distance,
            "design_distance": self.design_distance,
            "distinct": self.distinct,
            "certified": self.certified,
            "params": dict(self.params),
        }


def sylvester(k: int) -> np.ndarray:
    """Sylvester-Hadamard matrix of order ``2**k`` with entries ``(-1)**popcount(r & c)``."""
    if k < 0:
        raise InvalidInputError("k must be non-negative")
    idx = np.arange(1 << k, dtype=np.int64)
    parity = np.bitwise_count(idx[:, None] & idx[None, :]) & 1
    return (1 - 2 * parity).astype(np.int8)


def _pair_distances_block(W: np.ndarray, start: int, stop: int) -> np.ndarray:
    Wf = W.astype(np.float64)
    inner = Wf[start:stop] @ Wf.T
    return np.rint((W.shape[1] - inner) / 2.0).astype(np.int64)


def hamming_distance_matrix(words) -> np.ndarray:
    W = np.asarray(words)
    return _pair_distances_block(W, 0, len(W))


def exhaustive_min_distance(words) -> int:
    """Minimum Hamming distance over all unordered pairs of ``words`` (+-1 rows)."""
    W = np.asarray(words)
    n = len(W)
    if n < 2:
        return W.shape[1] if W.ndim == 2 else 0
    best = W.shape[1]
    step = 512
    for start in range(0, n, step):
        stop = min(n, start + step)
        D = _pair_distances_block(W, start, stop)
        rows = np.arange(start, stop)[:, None]
        cols = np.arange(n)[None, :]
        D = np.where(cols > rows, D, np.iinfo(np.int64).max)
        best = min(best, int(D.min()))
    return best


def sampled_min_distance(words, pairs: int = SAMPLED_PAIRS, seed: int = 0) -> int:
    W = np.asarray(words)
    n = len(W)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=pairs)
    j = rng.integers(0, n - 1, size=pairs)
    j = np.where(j >= i, j + 1, j)
    best = W.shape[1]
    step = max(1, (1 << 22) // max(1, W.shape[1]))
    for s in range(0, pairs, step):
        diff = W[i[s : s + step]] != W[j[s : s + step]]
        best = min(best, int(diff.sum(axis=1).min()))
    return best


def certify_min_distance(c: BinaryCode) -> int:
    """Exhaustively measure the minimum pairwise distance and update ``c``'s certificate."""
    measured = exhaustive_min_distance(c.words)
    c.min_distance = measured
    c.distinct = measured > 0 or c.n < 2
    c.certified = "exhaustive"
    if not c.distinct:
        c.notes.append("distinctness violated: two identical codewords")
    if c.design_distance is not None and measured < c.design_distance:
        c.notes.append(f"measured distance {measured} below design distance {c.design_distance}")
    return measured


def _finish(code: BinaryCode, seed: int = 0) -> BinaryCode:
    if code.n <= EXHAUSTIVE_LIMIT:
        certify_min_distance(code)
    else:
        sampled = sampled_min_distance(code.words, seed=seed)
        code.params["sampled_min_distance"] = sampled
        code.certified = "design+sampled"
        code.min_distance = int(code.design_distance)
        if sampled < code.design_distance:
            code.notes.append(f"sampled distance {sampled} below design distance {code.design_distance}")
    if code.design_distance is not None and code.min_distance < code.design_distance:
        raise ConstructionError(
            f"code certificate failed: distance {code.min_distance} < design {code.design_distance}",
            report=code.certificate(),
        )
    return code


def hadamard_code(k: int) -> BinaryCode:
    """All ``2**k`` rows of the Sylvester matrix; pairwise distance exactly ``2**(k-1)``."""
    if k < 1:
        raise InvalidInputError(f"hadamard_code needs k >= 1, got {k}")
    words = sylvester(k)
    code = BinaryCode(words, min_distance=0, design_distance=1 << (k - 1), params={"backend": "hadamard", "k": k})
    return _finish(code)


def hadamard_code_for(n: int) -> BinaryCode:
    """First ``n`` rows of the smallest Sylvester matrix with at least ``n`` rows."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    k = max(1, math.ceil(math.log2(n)))
    words = sylvester(k)[:n]
    code = BinaryCode(
        words, min_distance=0, design_distance=1 << (k - 1), params={"backend": "hadamard", "k": k, "n": n}
    )
    return _finish(code)


def _rs_dimension(m: int, delta: float) -> int:
    return int(math.floor(2.0 * delta * (1 << m) + 1e-12))


def rs_feasible(n: int, delta: float, m: int) -> bool:
    k = _rs_dimension(m, delta)
    return k >= 1 and k <= (1 << m) and (1 << m) ** k >= n


def smallest_feasible_m(n: int, delta: float) -> int | None:
    for m in sorted(PRIMITIVE_POLYNOMIALS):
        if rs_feasible(n, delta, m):
            return m
    return None


def rs_encode(messages, m: int, k: int) -> np.ndarray:
    """Reed-Solomon codewords: message polynomials evaluated at every field element."""
    gf = gf_field(m)
    msgs = np.atleast_2d(np.asarray(messages, dtype=np.int64))
    if msgs.shape[1] != k:
        raise InvalidInputError(f"messages must have {k} symbols")
    return gf.poly_eval(msgs, np.arange(gf.order))


def message_digits(count: int, m: int, k: int) -> np.ndarray:
    """Messages ``0..count-1`` written as ``k`` base-``2**m`` digits, least significant first."""
    q = 1 << m
    idx = np.arange(count, dtype=np.int64)
    digits = np.empty((count, k), dtype=np.int64)
    for j in range(k):
        digits[:, j] = idx % q
        idx //= q
    return digits


def rs_hadamard_code(n: int, delta: float, m: int | None = None) -> BinaryCode:
    """Reed-Solomon over GF(2^m) (rate at most ``2*delta``) concatenated with Hadamard.

    The outer code has length ``2**m`` and dimension ``floor(2*delta*2**m)``;
    each outer symbol expands into a Sylvester row of length ``2**m``, giving
    codewords of length ``4**m`` and relative distance at least
    ``(1 - rate)/2 >= 1/2 - delta``.  ``m`` defaults to the smallest feasible
    value.
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if not 0 < delta < 0.25:
        raise InvalidInputError(f"delta must lie in (0, 1/4), got {delta!r}")
    smallest = smallest_feasible_m(n, delta)
    if m is None:
        m = smallest
        if m is None:
            raise ConstructionError(f"no m in 4..16 gives {n} codewords at rate <= {2 * delta:g}")
    elif m not in PRIMITIVE_POLYNOMIALS:
        raise InvalidInputError(f"m must lie in 4..16, got {m}")
    elif not rs_feasible(n, delta, m):
        raise ConstructionError(
            f"m={m} cannot give {n} codewords at rate <= {2 * delta:g}; smallest feasible m is {smallest}"
        )
    q = 1 << m
    k = _rs_dimension(m, delta)
    outer = rs_encode(message_digits(n, m, k), m, k)
    inner = sylvester(m)
    words = inner[outer].reshape(n, q * q)
    design = (q - k + 1) * (q // 2)
    code = BinaryCode(
        words,
        min_distance=0,
        design_distance=design,
        params={"backend": "rs-hadamard", "m": m, "k": k, "outer_length": q, "rate": k / q, "delta": delta, "n": n},
    )
    return _finish(code)


def make_code(n: int, backend: str = "hadamard", delta: float = 0.05, m: int | None = None) -> BinaryCode:
    if backend == "hadamard":
        return hadamard_code_for(n)
    if backend in ("rs-hadamard", "rs_hadamard"):
        return rs_hadamard_code(n, delta, m)
    raise InvalidInputError(f"unknown code backend {backend!r} (expected 'hadamard' or 'rs-hadamard')")
