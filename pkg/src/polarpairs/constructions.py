"""Polar pairs of point-sets: every crossing distance is one value, every
within-set distance is strictly larger.

Each constructor measures its own output with
:func:`polarpairs.verify.check_polar` and only returns pairs that pass.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .codes import BinaryCode, make_code
from .exceptions import ConstructionError, InternalInvariantError, InvalidInputError
from .metrics import (
    SIDE_A,
    SIDE_B,
    Metric,
    PointSet,
    certify_values,
    default_tolerance,
    distance,
)
from .verify import VerificationReport, check_polar

# Random construction constants: d >= RANDOM_DIM_FACTOR * ln n, retry budget.
RANDOM_DIM_FACTOR = 64
RANDOM_RETRIES = 16


@dataclass(eq=False)
class PolarPair:
    A: PointSet
    B: PointSet
    metric: Metric
    crossing_distance: float
    inner_floor: float
    provenance: dict = field(default_factory=dict)
    report: VerificationReport | None = None
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.A) != len(self.B):
            raise InvalidInputError(f"|A|={len(self.A)} differs from |B|={len(self.B)}")
        if self.A.dim != self.B.dim:
            raise InvalidInputError("A and B differ in dimension")
        if self.A.metric != self.metric or self.B.metric != self.metric:
            raise InvalidInputError("A, B and the pair must share one metric")

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def dim(self) -> int:
        return self.A.dim

    def as_pointset(self) -> PointSet:
        pts = np.vstack([self.A.points, self.B.points])
        sides = [SIDE_A] * self.n + [SIDE_B] * self.n
        return PointSet(pts, self.metric, sides)

    @classmethod
    def from_pointset(cls, ps: PointSet, crossing_distance: float, inner_floor: float, **kw) -> "PolarPair":
        A = PointSet(ps.side(SIDE_A), ps.metric, [SIDE_A] * int(np.sum(ps.sides == SIDE_A)))
        B = PointSet(ps.side(SIDE_B), ps.metric, [SIDE_B] * int(np.sum(ps.sides == SIDE_B)))
        return cls(A, B, ps.metric, crossing_distance, inner_floor, **kw)


def _pair(A, B, metric: Metric, crossing: float, floor: float, provenance: dict, notes=None) -> PolarPair:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    return PolarPair(
        PointSet(A, metric, [SIDE_A] * len(A)),
        PointSet(B, metric, [SIDE_B] * len(B)),
        metric,
        float(crossing),
        float(floor),
        provenance=provenance,
        notes=list(notes or []),
    )


def _release(pp: PolarPair, tol: float | None = None, error=ConstructionError) -> PolarPair:
    report = check_polar(pp, tol)
    report.notes.extend(pp.notes)
    pp.report = report
    if not report.passed:
        raise error(f"{pp.provenance.get('construction')} failed verification: {report.notes}", report=report)
    return pp


def _min_inner(P: np.ndarray, metric: Metric) -> float:
    if len(P) < 2:
        return math.inf
    D = certify_values(P, P, metric)
    return float(D[np.triu_indices(len(P), k=1)].min())


# --- L0 ----------------------------------------------------------------------


def l0_arbitrary_points(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All-``i`` vectors and the left rotations of ``(1, ..., n)``."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    vals = np.arange(1, n + 1, dtype=np.float64)
    A = np.repeat(vals[:, None], n, axis=1)
    B = np.stack([np.roll(vals, -i) for i in range(n)])
    return A, B


def l0_arbitrary(n: int) -> PolarPair:
    """Dimension ``n``; within-set L0 distance ``n``, crossing distance ``n - 1``."""
    A, B = l0_arbitrary_points(n)
    return _release(
        _pair(A, B, Metric.l0(), n - 1, n, {"construction": "l0-arbitrary", "n": n}),
        error=InternalInvariantError,
    )


def real_to_binary(ps: PointSet, alphabet) -> PointSet:
    """One-hot encode every coordinate over ``alphabet``; L0 distances double."""
    alpha = [float(a) for a in alphabet]
    if len(set(alpha)) != len(alpha):
        raise InvalidInputError("alphabet has repeated symbols")
    lookup = {a: i for i, a in enumerate(alpha)}
    P = ps.points
    try:
        codes = np.vectorize(lambda v: lookup[float(v)], otypes=[np.int64])(P) if P.size else P.astype(np.int64)
    except KeyError as exc:
        raise InvalidInputError(f"coordinate {exc.args[0]!r} is not in the alphabet") from None
    S = len(alpha)
    out = np.zeros((len(P), P.shape[1] * S))
    rows = np.repeat(np.arange(len(P)), P.shape[1])
    cols = (np.arange(P.shape[1]) * S)[None, :] + codes
    out[rows, cols.ravel()] = 1.0
    return PointSet(out, Metric.l0(), ps.sides)


L0_BINARY_NOTE = (
    "one-hot encoding doubles L0 distances: measured within-set 2n and crossing 2(n-1), "
    "not the un-doubled n and n-1 sometimes quoted for this construction"
)


def l0_binary(n: int) -> PolarPair:
    """Binary L0 polar pair in dimension ``n**2``: within ``2n``, crossing ``2(n - 1)``."""
    A, B = l0_arbitrary_points(n)
    alphabet = range(1, n + 1)
    Ab = real_to_binary(PointSet(A, Metric.l0()), alphabet).points
    Bb = real_to_binary(PointSet(B, Metric.l0()), alphabet).points
    pp = _pair(
        Ab, Bb, Metric.l0(), 2 * (n - 1), 2 * n, {"construction": "l0-binary", "n": n}, notes=[L0_BINARY_NOTE]
    )
    return _release(pp, error=InternalInvariantError)


# --- Lp, 1 < p < 2 -----------------------------------------------------------


def lp_mid_excess(alpha, n: int, p: float):
    """``(1 - alpha)**p + (n - 1) * alpha**p``; crossing pairs sit below ``2**(1/p)`` iff this is < 1."""
    alpha = np.asarray(alpha, dtype=np.float64)
    return (1.0 - alpha) ** p + (n - 1) * alpha**p


def lp_mid_alpha(n: int, p: float, *, grid: int = 256, iters: int = 200) -> tuple[float, float]:
    """Pick the off-block value maximising ``1 - lp_mid_excess``.

    A coarse grid on ``(0, 1/2]`` brackets the maximiser of the concave
    margin, then bisection on the sign of its derivative refines it.
    Returns ``(alpha, margin)``.
    """

    def slope(a):
        return p * (1.0 - a) ** (p - 1) - (n - 1) * p * a ** (p - 1)

    # Log-spaced grid: the maximiser shrinks like n**(-1/(p-1)).
    xs = np.unique(np.concatenate([np.logspace(-300, math.log10(0.5), grid), [0.5]]))
    margins = 1.0 - lp_mid_excess(xs, n, p)
    best = int(np.argmax(margins))
    lo = xs[max(best - 1, 0)]
    hi = xs[min(best + 1, len(xs) - 1)]
    if slope(hi) > 0:
        lo = hi
    else:
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if slope(mid) > 0:
                lo = mid
            else:
                hi = mid
    cands = np.array([lo, hi, xs[best]])
    m = 1.0 - lp_mid_excess(cands, n, p)
    k = int(np.argmax(m))
    return float(cands[k]), float(m[k])


def lp_mid_points(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(n)
    fill = np.full((n, n), alpha)
    return np.hstack([eye, fill]), np.hstack([fill, eye])


def lp_mid(n: int, p: float, *, alpha: float | None = None, tol: float | None = None) -> PolarPair:
    """Dimension ``2n``: within-set distance ``2**(1/p)``, crossing strictly smaller.

    Raises :class:`InternalInvariantError` when no off-block value gives a
    margin above ``10 * tol`` in double precision; the best achievable margin
    decays like ``(p - 1) * n**(-1/(p - 1))``, so this happens for p close to
    1 and large n.
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if not 1.0 < p < 2.0:
        raise InvalidInputError(f"lp_mid needs 1 < p < 2, got p={p!r}")
    tol = default_tolerance() if tol is None else tol
    if alpha is None:
        alpha, margin = lp_mid_alpha(n, p)
    else:
        if not 0.0 < alpha < 1.0:
            raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha!r}")
        margin = float(1.0 - lp_mid_excess(alpha, n, p))
    prov = {"construction": "lp-mid", "n": n, "p": p, "alpha": alpha, "excess_margin": margin}
    if not margin > 10 * tol:
        raise InternalInvariantError(
            f"lp_mid(n={n}, p={p}): best margin {margin:.3e} does not exceed 10*tol={10 * tol:.1e}",
            report=prov,
        )
    A, B = lp_mid_points(n, alpha)
    metric = Metric.lp(p)
    within = 2.0 ** (1.0 / p)
    crossing = distance(A[0], B[0], metric)
    return _release(_pair(A, B, metric, crossing, within, prov), tol, error=InternalInvariantError)


# --- Lp, p > 2 ---------------------------------------------------------------


def random_min_dim(n: int) -> int:
    return max(2, math.ceil(RANDOM_DIM_FACTOR * math.log(max(n, 1))))


def random_hamming_floor(p: float, half: int) -> float:
    """Minimum Hamming distance demanded between two within-set halves of length ``half``."""
    slack = (0.5 - 2.0 ** (1.0 - p)) / 2.0
    return (0.5 - slack) * half


def _bad_rows(H: np.ndarray, floor: float) -> np.ndarray:
    n = len(H)
    iu = np.triu_indices(n, k=1)
    bad = H[iu] < floor
    # Resample the later member of each offending pair.
    return np.unique(iu[1][bad])


def lp_high_random(n: int, p: float, d: int, seed: int = 0, *, retries: int = RANDOM_RETRIES) -> PolarPair:
    """Random sign vectors on disjoint halves of ``d`` coordinates.

    Every crossing pair differs by exactly 1 on all ``d`` coordinates (p-th
    power ``d``).  Within each side, rows whose Hamming distance to another
    row falls below ``(1/4 + 2**-p) * d/2`` are resampled, at most
    ``retries`` rounds, so the within-set p-th power exceeds ``d``.
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if not p > 2:
        raise InvalidInputError(f"lp_high_random needs p > 2, got p={p!r}")
    if d < 2 or d % 2:
        raise InvalidInputError(f"d must be a positive even integer, got {d}")
    half = d // 2
    if half < 63 and n > 1 << half:
        raise InvalidInputError(f"cannot pick {n} distinct sign vectors of length {half}")
    need = random_min_dim(n)
    if d < need:
        warnings.warn(
            f"d={d} is below {RANDOM_DIM_FACTOR}*ln(n)={need}; retries may be exhausted",
            RuntimeWarning,
            stacklevel=2,
        )
    floor = random_hamming_floor(p, half)
    rng = np.random.default_rng(seed)
    sides = []
    rounds_used = 0
    for _ in range(2):
        S = rng.choice(np.array([-1, 1], dtype=np.int8), size=(n, half))
        for attempt in range(retries + 1):
            H = (half - S.astype(np.float64) @ S.T.astype(np.float64)) / 2.0
            bad = _bad_rows(H, floor)
            if bad.size == 0:
                break
            if attempt == retries:
                iu = np.triu_indices(n, k=1)
                k = int(np.argmin(H[iu]))
                raise ConstructionError(
                    f"retry budget {retries} exhausted: pair ({iu[0][k]}, {iu[1][k]}) at Hamming distance "
                    f"{H[iu][k]:g} < {floor:g}; d={d} is too small for n={n}",
                    report={"worst_pair": (int(iu[0][k]), int(iu[1][k])), "hamming": float(H[iu][k]), "floor": floor},
                )
            S[bad] = rng.choice(np.array([-1, 1], dtype=np.int8), size=(bad.size, half))
            rounds_used = max(rounds_used, attempt + 1)
        sides.append(S.astype(np.float64))
    zeros = np.zeros((n, half))
    A = np.hstack([sides[0], zeros])
    B = np.hstack([zeros, sides[1]])
    metric = Metric.lp(p)
    crossing = distance(A[0], B[0], metric)
    floor_dist = min(_min_inner(A, metric), _min_inner(B, metric))
    prov = {"construction": "lp-random", "n": n, "p": p, "d": d, "seed": seed, "retry_rounds": rounds_used}
    return _release(_pair(A, B, metric, crossing, floor_dist, prov))


def lp_high_code(
    n: int, p: float, backend: str = "hadamard", *, delta: float = 0.05, m: int | None = None, code: BinaryCode | None = None
) -> PolarPair:
    """Codeword-then-zeros versus zeros-then-codeword in dimension ``2 * length``.

    Crossing p-th power is exactly ``d``; within-set p-th power is
    ``min_distance * 2**p``, which must exceed ``(2**(p-3) + 1/2) * d``.
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if not p > 2:
        raise InvalidInputError(f"lp_high_code needs p > 2, got p={p!r}")
    ceiling = 0.25 - 2.0**-p
    if code is None:
        if backend not in ("hadamard", "rs-hadamard", "rs_hadamard"):
            raise InvalidInputError(f"unknown code backend {backend!r}")
        if backend != "hadamard" and not 0 < delta < ceiling:
            raise ConstructionError(
                f"delta={delta:g} is outside (0, 1/4 - 1/2^p) = (0, {ceiling:.6g}) for p={p:g}"
            )
        code = make_code(n, backend, delta=delta, m=m)
    if code.n < n:
        raise InvalidInputError(f"code has {code.n} words, need {n}")
    words = code.words[:n].astype(np.float64)
    L = words.shape[1]
    d = 2 * L
    bound = (2.0 ** (p - 3) + 0.5) * d
    within_pow = code.min_distance * 2.0**p
    prov = {
        "construction": "lp-code",
        "n": n,
        "p": p,
        "backend": code.params.get("backend", backend),
        "code": code.certificate(),
        "d": d,
        "within_pow_floor": within_pow,
        "theorem_bound": bound,
    }
    if not within_pow > bound:
        raise ConstructionError(
            f"code relative distance {code.relative_distance:.4f} too small: within p-th power "
            f"{within_pow:g} <= {bound:g}; need relative distance above 1/4 + 1/2^p "
            f"(delta below {ceiling:.6g})",
            report=prov,
        )
    zeros = np.zeros((n, L))
    A = np.hstack([words, zeros])
    B = np.hstack([zeros, words])
    metric = Metric.lp(p)
    crossing = distance(A[0], B[0], metric)
    floor = within_pow ** (1.0 / p) if n > 1 else math.inf
    pp = _pair(A, B, metric, crossing, floor, prov)
    if n > 1:
        pp.inner_floor = min(floor, _min_inner(A, metric))
    return _release(pp)


# --- L2 ----------------------------------------------------------------------


def l2_simplex(n: int) -> PolarPair:
    """Centred simplex vertices on disjoint halves: within squared 2, crossing squared ``2(1 - 1/n)``."""
    if n < 2:
        raise InvalidInputError(f"l2_simplex needs n >= 2, got {n}")
    S = np.eye(n) - 1.0 / n
    Z = np.zeros((n, n))
    A = np.hstack([S, Z])
    B = np.hstack([Z, S])
    metric = Metric.l2()
    crossing = math.sqrt(2.0 * (1.0 - 1.0 / n))
    floor = _min_inner(A, metric)
    pp = _pair(A, B, metric, crossing, min(floor, _min_inner(B, metric)), {"construction": "l2-simplex", "n": n})
    return _release(pp, error=InternalInvariantError)


CONSTRUCTIONS = ("l0-arbitrary", "l0-binary", "lp-mid", "lp-random", "lp-code", "l2-simplex")


def build(name: str, *, n: int, p: float | None = None, d: int | None = None, seed: int = 0,
          backend: str = "hadamard", delta: float = 0.05, tol: float | None = None) -> PolarPair:
    """Dispatch a construction by its command-line name."""
    if name == "l0-arbitrary":
        return l0_arbitrary(n)
    if name == "l0-binary":
        return l0_binary(n)
    if name == "lp-mid":
        if p is None:
            raise InvalidInputError("lp-mid needs --p in (1, 2)")
        return lp_mid(n, p, tol=tol)
    if name == "lp-random":
        if p is None:
            raise InvalidInputError("lp-random needs --p > 2")
        if d is None:
            d = random_min_dim(n)
            d += d % 2
        return lp_high_random(n, p, d, seed)
    if name == "lp-code":
        if p is None:
            raise InvalidInputError("lp-code needs --p > 2")
        return lp_high_code(n, p, backend, delta=delta)
    if name == "l2-simplex":
        return l2_simplex(n)
    raise InvalidInputError(f"unknown construction {name!r}; choose from {', '.join(CONSTRUCTIONS)}")
