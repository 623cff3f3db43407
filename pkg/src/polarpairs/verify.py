"""Certificates for polar pairs, distribution falsification and the spectral rank check."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

import networkx as nx
import numpy as np

from .exceptions import InternalInvariantError, InvalidInputError
from .metrics import (
    SIDE_A,
    SIDE_B,
    Metric,
    PointSet,
    certify_values,
    comparison_space,
    default_tolerance,
    exact_comparison,
    pairwise_values,
    to_distance,
)

if TYPE_CHECKING:
    from .constructions import PolarPair

# Relative eigenvalue cut-off separating the positive block of M^T M from
# numerical zeros.
EIGEN_THRESHOLD = 1e-8

# Safety factor applied to the smallest admissible appended coordinate K.
K_SAFETY = 1.1


@dataclass
class VerificationReport:
    min_inner: float
    max_inner: float
    min_cross: float
    max_cross: float
    margin: float
    equal_cross: bool
    passed: bool
    exact: bool = False
    tol: float = 0.0
    worst_inner_pair: tuple | None = None
    worst_cross_pair: tuple | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if key == "notes":
                continue
            lines.append(f"{key}: {_fmt(value)}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return " ".join(str(v) for v in value)
    return str(value)


def _triu_values(M: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(M.shape[0], k=1)
    return M[iu]


def check_polar(pp: "PolarPair", tol: float | None = None, *, require_equal_cross: bool = True) -> VerificationReport:
    """Exhaustively measure within-set and crossing distances of ``pp``.

    Integer data under L0, Linf or integer-p Lp is compared exactly (Lp via
    p-th powers); everything else uses relative tolerance ``tol``.
    """
    tol = default_tolerance() if tol is None else float(tol)
    metric = pp.metric
    A = pp.A.points
    B = pp.B.points
    exact = exact_comparison(metric, A, B)
    power = comparison_space(metric, exact)

    inner_blocks = []
    worst_inner = None
    best = math.inf
    for label, P in ((SIDE_A, A), (SIDE_B, B)):
        if len(P) < 2:
            continue
        M = certify_values(P, P, metric, power=power)
        vals = _triu_values(M)
        inner_blocks.append(vals)
        iu = np.triu_indices(len(P), k=1)
        k = int(np.argmin(vals))
        if vals[k] < best:
            best = vals[k]
            worst_inner = (label, int(iu[0][k]), int(iu[1][k]))
    inner = np.concatenate(inner_blocks) if inner_blocks else np.empty(0)
    cross = certify_values(A, B, metric, power=power)

    notes = []
    if inner.size:
        min_inner_v, max_inner_v = float(inner.min()), float(inner.max())
    else:
        min_inner_v, max_inner_v = math.inf, math.inf
        notes.append("no within-set pairs (n < 2)")
    min_cross_v, max_cross_v = float(cross.min()), float(cross.max())
    ci, cj = np.unravel_index(int(np.argmax(cross)), cross.shape)
    worst_cross = (int(ci), int(cj))

    min_inner = float(to_distance(min_inner_v, metric, power))
    max_inner = float(to_distance(max_inner_v, metric, power))
    min_cross = float(to_distance(min_cross_v, metric, power))
    max_cross = float(to_distance(max_cross_v, metric, power))
    C = float(pp.crossing_distance)
    scale = max(abs(C), max_cross, 1e-300)

    if exact:
        equal_cross = min_cross_v == max_cross_v and max_cross == C
        gap_ok = min_inner_v > max_cross_v
        floor_ok = min_inner >= float(pp.inner_floor) * (1.0 - (4e-16 if power else 0.0))
    else:
        dev = np.abs(to_distance(cross, metric, power) - C)
        equal_cross = bool(dev.max() <= tol * scale)
        if not equal_cross:
            di, dj = np.unravel_index(int(np.argmax(dev)), dev.shape)
            worst_cross = (int(di), int(dj))
        gap_ok = min_inner > max_cross + tol * scale
        floor_ok = min_inner >= float(pp.inner_floor) - tol * scale

    margin = min_inner - max_cross
    if not equal_cross:
        notes.append(f"crossing distances not all equal to {C!r}; worst pair A[{worst_cross[0]}] B[{worst_cross[1]}]")
    if not gap_ok:
        notes.append(
            f"inner/crossing gap violated: inner pair {worst_inner} at {min_inner!r}, "
            f"crossing pair A[{worst_cross[0]}] B[{worst_cross[1]}] at {max_cross!r}"
        )
    if not floor_ok:
        notes.append(f"inner distance {min_inner!r} below declared floor {pp.inner_floor!r}")
    passed = bool(gap_ok and floor_ok and (equal_cross or not require_equal_cross))
    return VerificationReport(
        min_inner=min_inner,
        max_inner=max_inner,
        min_cross=min_cross,
        max_cross=max_cross,
        margin=margin,
        equal_cross=bool(equal_cross),
        passed=passed,
        exact=exact,
        tol=tol,
        worst_inner_pair=worst_inner,
        worst_cross_pair=worst_cross,
        notes=notes,
    )


# --- distributions -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DistributionPair:
    """Two finitely supported random points ``X`` and ``Y`` in the same dimension."""

    X: np.ndarray
    px: np.ndarray
    Y: np.ndarray
    py: np.ndarray

    def __post_init__(self):
        for pts_name, pr_name in (("X", "px"), ("Y", "py")):
            pts = np.atleast_2d(np.asarray(getattr(self, pts_name), dtype=np.float64))
            pr = np.asarray(getattr(self, pr_name), dtype=np.float64).ravel()
            if pts.shape[0] != pr.size:
                raise InvalidInputError(f"{pts_name} has {pts.shape[0]} points but {pr.size} probabilities")
            if np.any(pr < 0) or abs(pr.sum() - 1.0) > 1e-12:
                raise InvalidInputError(f"{pr_name} must be non-negative and sum to 1")
            object.__setattr__(self, pts_name, pts)
            object.__setattr__(self, pr_name, pr)
        if self.X.shape[1] != self.Y.shape[1]:
            raise InvalidInputError("X and Y supports differ in dimension")

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @classmethod
    def uniform(cls, X, Y) -> "DistributionPair":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        return cls(X, np.full(len(X), 1.0 / len(X)), Y, np.full(len(Y), 1.0 / len(Y)))


def expected_distances(dp: DistributionPair, metric: Metric) -> tuple[float, float, float]:
    """``(E|X-X'|, E|Y-Y'|, E|X-Y|)`` over independent copies, diagonal included."""
    Dxx = pairwise_values(dp.X, dp.X, metric)
    Dyy = pairwise_values(dp.Y, dp.Y, metric)
    Dxy = pairwise_values(dp.X, dp.Y, metric)
    return (
        float(dp.px @ Dxx @ dp.px),
        float(dp.py @ Dyy @ dp.py),
        float(dp.px @ Dxy @ dp.py),
    )


def coordinate_contribution(rho_a0, rho_b0) -> np.ndarray:
    """Per-coordinate share of ``E|X-X'|_0 + E|Y-Y'|_0 - 2 E|X-Y|_0`` from the zero-marginals."""
    rho_a0 = np.asarray(rho_a0, dtype=np.float64)
    rho_b0 = np.asarray(rho_b0, dtype=np.float64)
    rho_a1 = 1.0 - rho_a0
    rho_b1 = 1.0 - rho_b0
    contrib = 2.0 * (rho_a0 - rho_b0) * (rho_a1 - rho_b1)
    closed = -2.0 * (rho_a0 - rho_b0) ** 2
    if not np.allclose(contrib, closed, rtol=0.0, atol=1e-12):
        raise InternalInvariantError("coordinate contribution disagrees with its closed form")
    return contrib


def l0_coordinate_contribution(dp: DistributionPair) -> np.ndarray:
    for name in ("X", "Y"):
        pts = getattr(dp, name)
        if not np.all((pts == 0) | (pts == 1)):
            raise InvalidInputError(f"{name} support has non-binary coordinates")
    rho_a0 = dp.px @ (dp.X == 0)
    rho_b0 = dp.py @ (dp.Y == 0)
    return coordinate_contribution(rho_a0, rho_b0)


@dataclass
class FalsifierReport:
    metric: str
    dim: int
    support_size: int
    trials: int
    seed: int
    max_objective: float
    best_trial: int
    positive_trials: int
    exact_checks: list[dict]
    passed: bool
    tol: float = 1e-12

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def to_text(self) -> str:
        lines = [f"{k}: {_fmt(v)}" for k, v in self.to_dict().items() if k != "exact_checks"]
        for chk in self.exact_checks:
            lines.append(f"exact_check: trial={chk['trial']} objective={chk['objective']} nonpositive={chk['nonpositive']}")
        return "\n".join(lines)


def _batched_objective(X, px, Y, py, binary: bool) -> np.ndarray:
    def dist(P, Q):
        diff = P[:, :, None, :] - Q[:, None, :, :]
        if binary:
            return np.count_nonzero(diff, axis=3).astype(np.float64)
        return np.abs(diff).sum(axis=3)

    exx = np.einsum("ti,tij,tj->t", px, dist(X, X), px)
    eyy = np.einsum("ti,tij,tj->t", py, dist(Y, Y), py)
    exy = np.einsum("ti,tij,tj->t", px, dist(X, Y), py)
    return np.minimum(exx, eyy) - exy


def _exact_objective(X, px, Y, py, binary: bool) -> Fraction:
    def frac_probs(pr):
        fr = [Fraction(float(v)) for v in pr]
        total = sum(fr)
        return [v / total for v in fr]

    def d(u, v):
        if binary:
            return Fraction(sum(1 for a, b in zip(u, v) if a != b))
        return sum(abs(Fraction(float(a)) - Fraction(float(b))) for a, b in zip(u, v))

    def expect(P, pp_, Q, pq):
        return sum(pp_[i] * pq[j] * d(P[i], Q[j]) for i in range(len(P)) for j in range(len(Q)))

    fx, fy = frac_probs(px), frac_probs(py)
    exx = expect(X, fx, X, fx)
    eyy = expect(Y, fy, Y, fy)
    exy = expect(X, fx, Y, fy)
    return min(exx, eyy) - exy


def distribution_falsifier(
    metric,
    dim: int = 5,
    support_size: int = 8,
    trials: int = 10_000,
    seed: int = 0,
    *,
    steps: int = 100,
    top: int = 10,
    tol: float = 1e-12,
) -> FalsifierReport:
    """Search for distributions with ``min(E|X-X'|, E|Y-Y'|) > E|X-Y|``.

    Each trial starts from uniform random supports (``[-1, 1]^dim`` for L1,
    ``{0, 1}^dim`` for L0) with Dirichlet weights and then hill-climbs one
    coordinate or weight per step, keeping non-worsening moves.  A maximum
    objective above ``tol`` would contradict the impossibility theorems.
    The ``top`` highest-objective trials are re-evaluated in exact rationals.
    """
    m = Metric.parse(metric) if isinstance(metric, str) else metric
    if m.kind == "l0":
        binary = True
    elif m.kind == "lp" and m.p == 1.0:
        binary = False
    else:
        raise InvalidInputError(f"falsifier supports L0 and L1 only, got {m}")
    if trials < 1 or dim < 1 or support_size < 1:
        raise InvalidInputError("trials, dim and support_size must be positive")

    rng = np.random.default_rng(seed)
    T, s = trials, support_size
    if binary:
        X = rng.integers(0, 2, size=(T, s, dim)).astype(np.float64)
        Y = rng.integers(0, 2, size=(T, s, dim)).astype(np.float64)
    else:
        X = rng.uniform(-1.0, 1.0, size=(T, s, dim))
        Y = rng.uniform(-1.0, 1.0, size=(T, s, dim))
    px = rng.dirichlet(np.ones(s), size=T)
    py = rng.dirichlet(np.ones(s), size=T)
    obj = _batched_objective(X, px, Y, py, binary)

    rows = np.arange(T)
    for step in range(steps):
        sigma = 0.3 * (1.0 - step / max(steps, 1)) + 0.01
        which = rng.integers(0, 4, size=T)
        idx = rng.integers(0, s, size=T)
        coord = rng.integers(0, dim, size=T)
        nX, nY, npx, npy = X.copy(), Y.copy(), px.copy(), py.copy()
        for target, sel in ((nX, which == 0), (nY, which == 1)):
            r, i, c = rows[sel], idx[sel], coord[sel]
            if binary:
                target[r, i, c] = 1.0 - target[r, i, c]
            else:
                target[r, i, c] += rng.normal(0.0, sigma, size=r.size)
        for target, sel in ((npx, which == 2), (npy, which == 3)):
            r, i = rows[sel], idx[sel]
            target[r, i] *= np.exp(rng.normal(0.0, 0.5, size=r.size))
            target[r] /= target[r].sum(axis=1, keepdims=True)
        cand = _batched_objective(nX, npx, nY, npy, binary)
        keep = cand >= obj
        X[keep], Y[keep], px[keep], py[keep] = nX[keep], nY[keep], npx[keep], npy[keep]
        obj = np.where(keep, cand, obj)

    order = np.argsort(-obj, kind="stable")
    checks = []
    for t in order[: min(top, T)]:
        val = _exact_objective(X[t], px[t], Y[t], py[t], binary)
        checks.append({"trial": int(t), "objective": float(val), "nonpositive": val <= 0})
    best = int(order[0])
    max_obj = float(obj[best])
    positive = int(np.count_nonzero(obj > tol))
    passed = max_obj <= tol and all(c["nonpositive"] for c in checks)
    return FalsifierReport(
        metric=str(m),
        dim=dim,
        support_size=s,
        trials=T,
        seed=seed,
        max_objective=max_obj,
        best_trial=best,
        positive_trials=positive,
        exact_checks=checks,
        passed=bool(passed),
        tol=tol,
    )


# --- spectral rank argument --------------------------------------------------


@dataclass
class SpectralReport:
    K: float
    c_adjustments: np.ndarray
    eigenvalues: np.ndarray
    positive_count: int
    rank_lower_bound: int
    dimension_bound: float
    passed: bool
    n: int = 0
    dim: int = 0
    alpha: float = math.nan
    beta: float = math.nan
    block_negative: bool = False
    block_max_entry: float = math.nan
    smallest_block_eigen_simple: bool = False
    rank_M: int = 0
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["c_adjustments"] = [float(v) for v in self.c_adjustments]
        d["eigenvalues"] = [float(v) for v in self.eigenvalues]
        d["pass"] = d.pop("passed")
        return d

    def to_text(self) -> str:
        skip = {"c_adjustments", "eigenvalues", "notes"}
        lines = [f"{k}: {_fmt(v)}" for k, v in self.to_dict().items() if k not in skip]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines)


def _failed_spectral(note: str, n: int = 0, dim: int = 0) -> SpectralReport:
    return SpectralReport(
        K=math.nan,
        c_adjustments=np.empty(0),
        eigenvalues=np.empty(0),
        positive_count=0,
        rank_lower_bound=0,
        dimension_bound=(n - 3) / 2,
        passed=False,
        n=n,
        dim=dim,
        notes=[note],
    )


def spectral_check(pp: "PolarPair") -> SpectralReport:
    """Run the symmetric-swap rank argument on a concrete L2 polar pair.

    Steps: scale to unit maximum norm, append a coordinate ``K`` with
    ``1/K**2 <= (alpha**2 - beta**2)/2`` (times :data:`K_SAFETY`), adjust it
    per point so all norms equal ``sqrt(K**2 + 1)``, assemble
    ``M = [[A, B], [B, A]]`` and count the positive eigenvalues of ``M.T @ M``.
    Precondition failures are reported, never raised.
    """
    A = np.asarray(pp.A.points, dtype=np.float64)
    B = np.asarray(pp.B.points, dtype=np.float64)
    n, d = A.shape
    if pp.metric != Metric.l2():
        return _failed_spectral(f"metric must be L2, got {pp.metric}", n, d)
    if len(B) != n:
        return _failed_spectral("sides differ in size", n, d)
    if n < 2:
        return _failed_spectral("need at least two points per side", n, d)

    P = np.vstack([A, B])
    norms = np.linalg.norm(P, axis=1)
    top = norms.max()
    if top == 0:
        return _failed_spectral("all points are the origin", n, d)
    P = P / top
    A1, B1 = P[:n], P[n:]
    DA = pairwise_values(A1, A1, Metric.l2())
    DB = pairwise_values(B1, B1, Metric.l2())
    alpha = float(min(_triu_values(DA).min(), _triu_values(DB).min()))
    beta = float(pairwise_values(A1, B1, Metric.l2()).max())
    if not alpha > beta:
        rep = _failed_spectral(f"no strict gap after scaling: alpha={alpha!r} beta={beta!r}", n, d)
        rep.alpha, rep.beta = alpha, beta
        return rep

    K = K_SAFETY * math.sqrt(2.0 / (alpha**2 - beta**2))
    sq = np.sum(P * P, axis=1)
    c = np.sqrt(K * K + 1.0 - sq) - K
    lifted = np.hstack([P, (K + c)[:, None]])
    A2, B2 = lifted[:n], lifted[n:]
    M = np.block([[A2.T, B2.T], [B2.T, A2.T]])
    G = M.T @ M
    diag = np.diag(G)
    cshift = float(diag.mean())
    H = G - cshift * np.eye(2 * n)
    M11, M12 = H[:n, :n], H[:n, n:]
    M21, M22 = H[n:, :n], H[n:, n:]
    notes = []
    if not (np.allclose(M11, M22, atol=1e-9) and np.allclose(M12, M21, atol=1e-9)):
        notes.append("block symmetry M11=M22, M12=M21 violated")
    D = M11 - M12
    block_max = float(D.max())
    block_negative = block_max < 0
    if not block_negative:
        notes.append(f"M11 - M12 has a non-negative entry ({block_max!r})")

    eig_D = np.linalg.eigvalsh(D)
    spread = max(1.0, float(np.abs(eig_D).max()))
    simple = bool(n < 2 or eig_D[1] - eig_D[0] > EIGEN_THRESHOLD * spread)

    eig = np.linalg.eigvalsh(G)
    thresh = EIGEN_THRESHOLD * float(np.abs(eig).max())
    positive = int(np.count_nonzero(eig > thresh))
    rank_M = int(np.linalg.matrix_rank(M))
    if not positive <= rank_M <= 2 * (d + 1):
        notes.append(f"rank chain violated: positive={positive} rank(M)={rank_M} 2(d+1)={2 * (d + 1)}")
    dim_ok = 2 * (d + 1) >= n - 1
    passed = bool(block_negative and positive >= n - 1 and dim_ok)
    return SpectralReport(
        K=K,
        c_adjustments=c,
        eigenvalues=np.sort(eig),
        positive_count=positive,
        rank_lower_bound=positive,
        dimension_bound=(n - 3) / 2,
        passed=passed,
        n=n,
        dim=d,
        alpha=alpha,
        beta=beta,
        block_negative=bool(block_negative),
        block_max_entry=block_max,
        smallest_block_eigen_simple=simple,
        rank_M=rank_M,
        notes=notes,
    )


# --- distance graph ----------------------------------------------------------


@dataclass
class DistanceGraph:
    graph: nx.Graph
    is_complete_bipartite: bool
    parts: tuple[frozenset, frozenset] | None


def distance_graph(ps: PointSet, threshold: float, tol: float = 0.0) -> DistanceGraph:
    """Graph joining points at distance ``<= threshold`` and a balanced ``K_{n,n}`` test."""
    P = ps.points
    N = len(P)
    exact = exact_comparison(ps.metric, P)
    D = pairwise_values(P, P, ps.metric)
    limit = threshold if exact else threshold + tol * max(abs(threshold), 1.0)
    G = nx.Graph()
    for i in range(N):
        G.add_node(i, side=str(ps.sides[i]))
    iu, ju = np.nonzero(np.triu(D <= limit, k=1))
    G.add_edges_from(zip(iu.tolist(), ju.tolist()))

    parts = None
    complete = False
    if N >= 2 and N % 2 == 0 and G.number_of_edges() and nx.is_connected(G) and nx.is_bipartite(G):
        left, right = nx.bipartite.sets(G)
        if len(left) == len(right) and G.number_of_edges() == len(left) * len(right):
            complete = True
            parts = tuple(sorted((frozenset(left), frozenset(right)), key=min))
    return DistanceGraph(G, complete, parts)


def report_json(report) -> str:
    return json.dumps(report.to_dict(), sort_keys=True)
