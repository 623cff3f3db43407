"""Distances under L0, Lp (real p >= 1) and Linf, plus the point containers.

All scalars are float64.  Constructions that need exact comparisons emit
integer-valued coordinates; for those inputs :func:`distance_pow_p` and
:func:`pairwise_values` return exactly representable integers, so strict
inequalities can be checked without a tolerance.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .exceptions import InvalidInputError

DEFAULT_TOL = 1e-9

# Upper bound on the number of float64 temporaries a block of pair
# differences may allocate (~128 MiB).
_BLOCK_ELEMENTS = 1 << 24

# Sums of integers stay exact in float64 below this bound.
_EXACT_LIMIT = float(2**52)

SIDE_A = "A"
SIDE_B = "B"
SIDE_NONE = "-"


def default_tolerance() -> float:
    """Relative tolerance from ``POLARPAIRS_TOL`` or :data:`DEFAULT_TOL`."""
    raw = os.environ.get("POLARPAIRS_TOL")
    if not raw:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise InvalidInputError(f"POLARPAIRS_TOL={raw!r} is not a number") from exc
    if not tol >= 0:
        raise InvalidInputError("POLARPAIRS_TOL must be non-negative")
    return tol


@dataclass(frozen=True)
class Metric:
    """A distance: ``kind`` is ``"l0"``, ``"lp"`` or ``"linf"``; ``p`` only for ``"lp"``."""

    kind: str
    p: float | None = None

    def __post_init__(self):
        if self.kind not in ("l0", "lp", "linf"):
            raise InvalidInputError(f"unknown metric kind {self.kind!r}")
        if self.kind == "lp":
            if self.p is None or not math.isfinite(self.p) or self.p < 1:
                raise InvalidInputError(f"Lp metric needs finite p >= 1, got {self.p!r}")
            object.__setattr__(self, "p", float(self.p))
        elif self.p is not None:
            raise InvalidInputError(f"metric {self.kind!r} takes no p")

    @classmethod
    def l0(cls) -> "Metric":
        return cls("l0")

    @classmethod
    def lp(cls, p: float) -> "Metric":
        return cls("lp", p)

    @classmethod
    def l1(cls) -> "Metric":
        return cls("lp", 1.0)

    @classmethod
    def l2(cls) -> "Metric":
        return cls("lp", 2.0)

    @classmethod
    def linf(cls) -> "Metric":
        return cls("linf")

    @classmethod
    def parse(cls, text: str) -> "Metric":
        """Parse ``l0``, ``l1``, ``l2``, ``linf``, ``lp:<p>`` or ``l<p>``."""
        t = text.strip().lower()
        if t in ("l0", "hamming"):
            return cls.l0()
        if t in ("linf", "l_inf", "inf", "max"):
            return cls.linf()
        if t.startswith("lp:"):
            t = t[3:]
        elif t.startswith("l"):
            t = t[1:]
        try:
            return cls.lp(float(t))
        except ValueError as exc:
            raise InvalidInputError(f"cannot parse metric {text!r}") from exc

    @property
    def integer_p(self) -> bool:
        return self.kind == "lp" and float(self.p).is_integer()

    def __str__(self) -> str:
        if self.kind == "lp":
            return f"lp:{self.p:g}"
        return self.kind


def as_points(X, *, name: str = "points") -> np.ndarray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite coordinates")
    return arr


@dataclass(frozen=True, eq=False)
class PointSet:
    """An ordered collection of points sharing a dimension and a metric.

    ``sides`` labels each point ``"A"``, ``"B"`` or ``"-"`` (untyped); it
    carries the bipartition of polar pairs and the colours of BCP inputs.
    The coordinate array is stored read-only.
    """

    points: np.ndarray
    metric: Metric
    sides: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = as_points(self.points).copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.sides is None:
            sides = np.full(len(pts), SIDE_NONE, dtype="<U1")
        else:
            sides = np.asarray(self.sides, dtype="<U1").copy()
            if sides.shape != (len(pts),):
                raise InvalidInputError("sides must have one label per point")
            bad = set(np.unique(sides)) - {SIDE_A, SIDE_B, SIDE_NONE}
            if bad:
                raise InvalidInputError(f"unknown side labels {sorted(bad)}")
        sides.setflags(write=False)
        object.__setattr__(self, "sides", sides)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __getitem__(self, i) -> np.ndarray:
        return self.points[i]

    def side(self, label: str) -> np.ndarray:
        return self.points[self.sides == label]

    def with_sides(self, sides) -> "PointSet":
        return PointSet(self.points, self.metric, sides)


def _check_pair(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.size} vs {b.size}")
    return a, b


def distance(a, b, metric: Metric) -> float:
    """Distance between two points under ``metric``."""
    a, b = _check_pair(a, b)
    if metric.kind == "l0":
        return float(np.count_nonzero(a != b))
    diff = np.abs(a - b)
    if metric.kind == "linf":
        return float(diff.max()) if diff.size else 0.0
    return float(_root(float(np.sum(diff**metric.p)), metric.p))


def distance_pow_p(a, b, p: float) -> float:
    """``sum |a_i - b_i|**p`` without the final root.

    For integer ``p`` and integer coordinates the value is an exact integer.
    """
    if not p >= 1:
        raise InvalidInputError(f"p must be >= 1, got {p!r}")
    a, b = _check_pair(a, b)
    return float(np.sum(np.abs(a - b) ** float(p)))


def _root(value, p: float):
    if p == 1.0:
        return value
    if p == 2.0:
        return np.sqrt(value)
    return value ** (1.0 / p)


def is_integral(X) -> bool:
    """True when every coordinate is an integer small enough for exact sums."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.size == 0:
        return True
    return bool(np.all(arr == np.round(arr)) and np.max(np.abs(arr)) < 2**20)


def exact_comparison(metric: Metric, *arrays) -> bool:
    """Whether comparisons under ``metric`` on ``arrays`` can be done exactly.

    L0 is always exact.  Linf and integer-p Lp are exact on integer data,
    provided the summed p-th powers stay below 2**52.
    """
    if metric.kind == "l0":
        return True
    if not all(is_integral(a) for a in arrays):
        return False
    if metric.kind == "linf":
        return True
    if not metric.integer_p:
        return False
    span = 0.0
    dim = 0
    for a in arrays:
        a = np.asarray(a, dtype=np.float64)
        if a.size:
            span = max(span, float(np.max(np.abs(a))))
            dim = max(dim, a.shape[-1])
    return dim * (2 * span) ** metric.p < _EXACT_LIMIT


def comparison_space(metric: Metric, exact: bool) -> bool:
    """True when pair values should be kept as p-th powers (not rooted)."""
    return exact and metric.kind == "lp"


def _block_values(Xb: np.ndarray, Y: np.ndarray, metric: Metric, power: bool) -> np.ndarray:
    if metric.kind == "l0":
        return np.count_nonzero(Xb[:, None, :] != Y[None, :, :], axis=2).astype(np.float64)
    diff = np.abs(Xb[:, None, :] - Y[None, :, :])
    if metric.kind == "linf":
        if diff.shape[2] == 0:
            return np.zeros(diff.shape[:2])
        return diff.max(axis=2)
    pw = np.sum(diff**metric.p, axis=2)
    return pw if power else _root(pw, metric.p)


def block_rows(n_cols: int, dim: int) -> int:
    return max(1, _BLOCK_ELEMENTS // max(1, n_cols * max(dim, 1)))


def iter_pair_blocks(
    X, Y, metric: Metric, *, power: bool = False
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(row_start, values)`` blocks of the full ``len(X) x len(Y)`` matrix.

    With ``power=True`` Lp values are p-th powers instead of distances.
    """
    X = as_points(X, name="X")
    Y = as_points(Y, name="Y")
    if X.shape[1] != Y.shape[1]:
        raise InvalidInputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    step = block_rows(len(Y), X.shape[1])
    for start in range(0, len(X), step):
        yield start, _block_values(X[start : start + step], Y, metric, power)


def pairwise_values(X, Y=None, metric: Metric = None, *, power: bool = False) -> np.ndarray:
    """Dense matrix of distances (or p-th powers) between rows of X and Y."""
    if metric is None:
        raise InvalidInputError("metric is required")
    X = as_points(X, name="X")
    Y = X if Y is None else as_points(Y, name="Y")
    out = np.empty((len(X), len(Y)))
    for start, vals in iter_pair_blocks(X, Y, metric, power=power):
        out[start : start + len(vals)] = vals
    return out


def _is_ternary(M: np.ndarray) -> bool:
    return bool(np.all((M == 0) | (M == 1) | (M == -1)))


def ternary_pairwise_values(X, Y=None, metric: Metric = None, *, power: bool = False) -> np.ndarray | None:
    """Pair values for data in {-1, 0, 1} via three matrix products, or ``None``.

    Every coordinate difference is then 0, 1 or 2, so the counts ``n1`` and
    ``n2`` of differences equal to 1 and 2 determine every metric: L0 is
    ``n1 + n2``, Linf is the largest difference present and the Lp p-th power
    is ``n1 + n2 * 2**p``.  Counts are exact in float64, so integer-p values
    match the direct sum bit for bit.
    """
    X = as_points(X, name="X")
    Y = X if Y is None else as_points(Y, name="Y")
    if X.shape[1] != Y.shape[1]:
        raise InvalidInputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if not (_is_ternary(X) and _is_ternary(Y)):
        return None
    Px, Nx = (X == 1).astype(np.float64), (X == -1).astype(np.float64)
    Py, Ny = (Y == 1).astype(np.float64), (Y == -1).astype(np.float64)
    Zx, Zy = 1.0 - Px - Nx, 1.0 - Py - Ny
    n2 = Px @ Ny.T + Nx @ Py.T
    n1 = Zx @ (Py + Ny).T + (Px + Nx) @ Zy.T
    if metric.kind == "l0":
        return n1 + n2
    if metric.kind == "linf":
        return np.where(n2 > 0, 2.0, np.where(n1 > 0, 1.0, 0.0))
    pw = n1 + n2 * 2.0**metric.p
    return pw if power else _root(pw, metric.p)


def certify_values(X, Y=None, metric: Metric = None, *, power: bool = False) -> np.ndarray:
    """Pair values for certificates: the ternary shortcut when it applies, else the direct scan.

    The brute-force solvers keep to the direct scan so that they stay an
    independent check on this shortcut.
    """
    fast = ternary_pairwise_values(X, Y, metric, power=power)
    return pairwise_values(X, Y, metric, power=power) if fast is None else fast


def pairwise_distances(X, Y=None, metric: Metric = None) -> np.ndarray:
    return pairwise_values(X, Y, metric, power=False)


def to_distance(value, metric: Metric, power: bool):
    """Undo the p-th power of a comparison value when ``power`` is set."""
    if power and metric.kind == "lp":
        return _root(value, metric.p)
    return value
