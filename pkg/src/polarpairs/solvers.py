"""Brute-force closest pair, BCP and OV oracles, plus a popcount fast path for Hamming data.

Ties are always broken towards the lexicographically smallest index pair.
Exact comparisons (see :func:`polarpairs.metrics.exact_comparison`) use no
tolerance; otherwise two values are tied when they agree to a relative
``tol``.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError
from .metrics import (
    SIDE_A,
    SIDE_B,
    Metric,
    PointSet,
    as_points,
    block_rows,
    comparison_space,
    default_tolerance,
    exact_comparison,
    pairwise_values,
    to_distance,
)


@dataclass(frozen=True)
class PairResult:
    index_i: int
    index_j: int
    distance: float
    color_class: str = "untyped"


def _block_candidates(start: int, vals: np.ndarray, mask: np.ndarray | None, tol: float, col0: int = 0):
    """Block minimum and the pairs within ``tol`` of it, as ``(min, [(v, i, j), ...])``."""
    if mask is not None:
        vals = np.where(mask, vals, np.inf)
    m = float(vals.min())
    if not np.isfinite(m):
        return None
    limit = m + tol * abs(m)
    ii, jj = np.nonzero(vals <= limit)
    return m, [(float(vals[i, j]), start + int(i), col0 + int(j)) for i, j in zip(ii, jj)]


def _reduce(cands, tol: float):
    """Deterministic merge: global minimum, then smallest (i, j) within tolerance."""
    cands = [c for c in cands if c is not None]
    if not cands:
        return None
    m = min(c[0] for c in cands)
    limit = m + tol * abs(m)
    best = None
    for _, items in cands:
        for v, i, j in items:
            if v <= limit and (best is None or (i, j) < best[1:]):
                best = (v, i, j)
    return best


def _scan(X, Y, metric: Metric, *, triangular: bool, tol: float, power: bool, n_jobs: int):
    X = as_points(X)
    Y = as_points(Y)
    step = block_rows(len(Y), X.shape[1])
    starts = list(range(0, len(X), step))

    def work(start):
        Xb = X[start : start + step]
        if not triangular:
            return _block_candidates(start, pairwise_values(Xb, Y, metric, power=power), None, tol)
        if start + 1 >= len(Y):
            return None
        vals = pairwise_values(Xb, Y[start + 1 :], metric, power=power)
        rows = np.arange(start, start + len(Xb))[:, None]
        mask = np.arange(start + 1, len(Y))[None, :] > rows
        return _block_candidates(start, vals, mask, tol, col0=start + 1)

    if n_jobs and n_jobs > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            cands = list(pool.map(work, starts))
    else:
        cands = [work(s) for s in starts]
    return _reduce(cands, tol)


def _settings(metric: Metric, tol, *arrays):
    exact = exact_comparison(metric, *arrays)
    tol = 0.0 if exact else (default_tolerance() if tol is None else float(tol))
    return tol, comparison_space(metric, exact)


def closest_pair_bruteforce(ps: PointSet, *, tol: float | None = None, n_jobs: int = 1) -> PairResult:
    """Exact argmin over all unordered pairs of ``ps``."""
    P = ps.points
    if len(P) < 2:
        raise InvalidInputError("closest pair needs at least two points")
    tol, power = _settings(ps.metric, tol, P)
    v, i, j = _scan(P, P, ps.metric, triangular=True, tol=tol, power=power, n_jobs=n_jobs)
    color = "untyped"
    si, sj = ps.sides[i], ps.sides[j]
    if {si, sj} <= {SIDE_A, SIDE_B}:
        color = "mono" if si == sj else "bi"
    return PairResult(i, j, float(to_distance(v, ps.metric, power)), color)


@dataclass(frozen=True, eq=False)
class BCPInstance:
    """Red and blue point-sets under one metric."""

    R: PointSet
    B: PointSet
    metric: Metric

    def __post_init__(self):
        if self.R.dim != self.B.dim:
            raise InvalidInputError("red and blue points differ in dimension")
        if self.R.metric != self.metric or self.B.metric != self.metric:
            raise InvalidInputError("red, blue and instance metric must agree")

    @classmethod
    def from_arrays(cls, R, B, metric: Metric) -> "BCPInstance":
        R = as_points(R, name="R")
        B = as_points(B, name="B")
        return cls(PointSet(R, metric, [SIDE_A] * len(R)), PointSet(B, metric, [SIDE_B] * len(B)), metric)

    @classmethod
    def from_pointset(cls, ps: PointSet) -> "BCPInstance":
        return cls.from_arrays(ps.side(SIDE_A), ps.side(SIDE_B), ps.metric)

    def as_pointset(self) -> PointSet:
        pts = np.vstack([self.R.points, self.B.points])
        return PointSet(pts, self.metric, [SIDE_A] * len(self.R) + [SIDE_B] * len(self.B))


def bcp_bruteforce(inst: BCPInstance, *, tol: float | None = None, n_jobs: int = 1) -> PairResult:
    """Exact argmin over red x blue; ``index_i`` is red, ``index_j`` blue."""
    R, B = inst.R.points, inst.B.points
    if len(R) == 0 or len(B) == 0:
        raise InvalidInputError("both colour classes must be non-empty")
    tol, power = _settings(inst.metric, tol, R, B)
    v, i, j = _scan(R, B, inst.metric, triangular=False, tol=tol, power=power, n_jobs=n_jobs)
    return PairResult(i, j, float(to_distance(v, inst.metric, power)), "bi")


def ov_bruteforce(U, W) -> tuple[int, int] | None:
    """First orthogonal pair ``(i, j)`` in lexicographic order, or ``None``."""
    U = np.asarray(U, dtype=np.int64)
    W = np.asarray(W, dtype=np.int64)
    if U.size == 0 or W.size == 0:
        return None
    dots = U @ W.T
    hits = np.argwhere(dots == 0)
    if hits.size == 0:
        return None
    return int(hits[0, 0]), int(hits[0, 1])


# --- Hamming fast path -------------------------------------------------------


def pack_binary(X) -> np.ndarray:
    """Pack a {0,1} or {-1,1} matrix into rows of uint64 words (bit set where value is 1)."""
    X = as_points(X)
    vals = np.unique(X)
    seen = set(vals.tolist())
    if not (seen <= {0.0, 1.0} or seen <= {-1.0, 1.0}):
        raise InvalidInputError(f"non-binary coordinates: values {sorted(seen)[:6]}")
    bits = np.packbits(X == 1.0, axis=1)
    pad = (-bits.shape[1]) % 8
    if pad:
        bits = np.hstack([bits, np.zeros((len(bits), pad), dtype=np.uint8)])
    return np.ascontiguousarray(bits).view(np.uint64)


def hamming_closest_pair_fast(ps: PointSet) -> PairResult:
    """Closest pair under L0 for binary data via XOR and population count."""
    n = len(ps)
    if n < 2:
        raise InvalidInputError("closest pair needs at least two points")
    words = pack_binary(ps.points)
    best = None
    for i in range(n - 1):
        counts = np.bitwise_count(words[i + 1 :] ^ words[i]).sum(axis=1, dtype=np.int64)
        k = int(np.argmin(counts))
        c = int(counts[k])
        if best is None or c < best[0]:
            best = (c, i, i + 1 + k)
            if c == 0:
                break
    c, i, j = best
    color = "untyped"
    si, sj = ps.sides[i], ps.sides[j]
    if {si, sj} <= {SIDE_A, SIDE_B}:
        color = "mono" if si == sj else "bi"
    return PairResult(i, j, float(c), color)


# --- benchmarking ------------------------------------------------------------

BENCH_FIELDS = ("solver", "n", "d", "metric", "wall_time", "pairs_per_sec")

SOLVERS = {
    "bruteforce": lambda ps, n_jobs: closest_pair_bruteforce(ps, n_jobs=n_jobs),
    "hamming-fast": lambda ps, n_jobs: hamming_closest_pair_fast(ps),
}


def bench_row(solver: str, ps: PointSet, *, n_jobs: int = 1, repeats: int = 1) -> dict:
    fn = SOLVERS[solver]
    n = len(ps)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(ps, n_jobs)
        best = min(best, time.perf_counter() - t0)
    pairs = n * (n - 1) / 2
    return {
        "solver": solver,
        "n": n,
        "d": ps.dim,
        "metric": str(ps.metric),
        "wall_time": best,
        "pairs_per_sec": pairs / best if best > 0 else float("inf"),
    }


def random_binary_pointset(n: int, d: int, seed: int = 0) -> PointSet:
    rng = np.random.default_rng(seed)
    return PointSet(rng.integers(0, 2, size=(n, d)).astype(np.float64), Metric.l0())


def bench_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
