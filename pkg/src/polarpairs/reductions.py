"""BCP -> Closest Pair via a polar-pair gadget, and OV -> Closest Pair under Linf."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constructions import PolarPair
from .exceptions import InvalidInputError
from .metrics import SIDE_A, SIDE_B, Metric, PointSet, as_points, iter_pair_blocks
from .solvers import BCPInstance, PairResult

SAFETY_FACTOR = 2.0
DUMMY_FACTOR = 3.0


@dataclass
class ReductionCertificate:
    """How outputs relate to inputs.

    ``mapping[k]`` is ``(label, input_index)`` for output point ``k``; dummy
    points carry index ``-1``.  Every "yes"/bichromatic distance is at most
    ``gap_low`` and every "no"/monochromatic distance at least ``gap_high``.
    """

    kind: str
    scale: float | None
    gap_low: float
    gap_high: float
    mapping: list[tuple[str, int]]
    padded: int = 0
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.gap_low < self.gap_high:
            raise InvalidInputError(f"certificate gap is empty: {self.gap_low!r} >= {self.gap_high!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "scale": self.scale,
            "gap_low": self.gap_low,
            "gap_high": self.gap_high,
            "mapping": [[lab, int(i)] for lab, i in self.mapping],
            "padded": self.padded,
            "notes": list(self.notes),
            "extra": dict(self.extra),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReductionCertificate":
        return cls(
            kind=d["kind"],
            scale=d.get("scale"),
            gap_low=float(d["gap_low"]),
            gap_high=float(d["gap_high"]),
            mapping=[(str(lab), int(i)) for lab, i in d["mapping"]],
            padded=int(d.get("padded", 0)),
            notes=list(d.get("notes", [])),
            extra=dict(d.get("extra", {})),
        )

    def map_pair(self, i: int, j: int) -> tuple[tuple[str, int], tuple[str, int]]:
        """Input labels of output pair ``(i, j)``, ordered by label then index."""
        a, b = self.mapping[i], self.mapping[j]
        return tuple(sorted((a, b)))


# --- OV ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OVInstance:
    """Two collections of {0,1} vectors; ``u_index``/``w_index`` record original positions."""

    U: np.ndarray
    W: np.ndarray
    u_index: np.ndarray = None
    w_index: np.ndarray = None

    def __post_init__(self):
        U = np.asarray(self.U, dtype=np.int8)
        W = np.asarray(self.W, dtype=np.int8)
        if U.ndim != 2 or W.ndim != 2:
            raise InvalidInputError("U and W must be 2-D 0/1 arrays")
        if U.shape[1] != W.shape[1] and U.size and W.size:
            raise InvalidInputError(f"U has dimension {U.shape[1]} but W has {W.shape[1]}")
        for name, M in (("U", U), ("W", W)):
            if not np.all((M == 0) | (M == 1)):
                raise InvalidInputError(f"{name} contains entries other than 0 and 1")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "W", W)
        ui = np.arange(len(U)) if self.u_index is None else np.asarray(self.u_index, dtype=np.int64)
        wi = np.arange(len(W)) if self.w_index is None else np.asarray(self.w_index, dtype=np.int64)
        object.__setattr__(self, "u_index", ui)
        object.__setattr__(self, "w_index", wi)

    @property
    def d(self) -> int:
        return self.U.shape[1] if self.U.size else self.W.shape[1]

    def has_duplicates(self) -> bool:
        return any(len(np.unique(M, axis=0)) != len(M) for M in (self.U, self.W) if len(M))


def _first_occurrences(M: np.ndarray) -> np.ndarray:
    if len(M) == 0:
        return np.arange(0)
    # Lexicographic sort, then keep the first row of each run of equal rows.
    order = np.lexsort(M.T[::-1])
    S = M[order]
    starts = np.ones(len(S), dtype=bool)
    starts[1:] = np.any(S[1:] != S[:-1], axis=1)
    group = np.cumsum(starts) - 1
    first = np.full(int(group[-1]) + 1, len(M))
    np.minimum.at(first, group, order)
    return np.sort(first)


def dedupe(inst: OVInstance) -> OVInstance:
    """Drop repeated vectors, keeping first occurrences in their original order."""
    ku = _first_occurrences(inst.U)
    kw = _first_occurrences(inst.W)
    return OVInstance(inst.U[ku], inst.W[kw], inst.u_index[ku], inst.w_index[kw])


def ov_to_closest_pair_linf(inst: OVInstance) -> tuple[PointSet, ReductionCertificate]:
    """Map ``u -> 2u`` and ``w -> 1 - 2w``; orthogonal pairs land at Linf distance 1, all else >= 2."""
    if inst.has_duplicates():
        raise InvalidInputError("OV instance has duplicate vectors; run dedupe() first")
    A = 2.0 * inst.U.astype(np.float64)
    B = 1.0 - 2.0 * inst.W.astype(np.float64)
    pts = np.vstack([A, B]) if len(A) and len(B) else (A if len(A) else B)
    sides = [SIDE_A] * len(A) + [SIDE_B] * len(B)
    ps = PointSet(pts.reshape(len(sides), inst.d), Metric.linf(), sides)
    mapping = [("U", int(i)) for i in inst.u_index] + [("W", int(i)) for i in inst.w_index]
    cert = ReductionCertificate(
        kind="ov-to-closest-pair-linf",
        scale=None,
        gap_low=1.0,
        gap_high=2.0,
        mapping=mapping,
        notes=["closest pair at distance 1 iff an orthogonal pair exists; otherwise every distance is >= 2"],
    )
    return ps, cert


def decide_ov(cert: ReductionCertificate, result: PairResult) -> tuple[bool, tuple[int, int] | None]:
    """Read a closest-pair answer on a reduced OV instance back as ``(yes, (u, w))``."""
    if result.distance <= cert.gap_low:
        (la, ia), (lb, ib) = cert.map_pair(result.index_i, result.index_j)
        if (la, lb) != ("U", "W"):
            raise InvalidInputError("closest pair at the yes-distance is not a U/W pair")
        return True, (ia, ib)
    return False, None


# --- BCP ---------------------------------------------------------------------


def _max_bichromatic_pow(R: np.ndarray, B: np.ndarray, metric: Metric) -> float:
    best = 0.0
    for _, vals in iter_pair_blocks(R, B, metric, power=True):
        best = max(best, float(vals.max()))
    return best


def _range_bound_pow(R: np.ndarray, B: np.ndarray, p: float) -> float:
    P = np.vstack([R, B])
    span = P.max(axis=0) - P.min(axis=0)
    return float(np.sum(span**p))


def _pad(R: np.ndarray, B: np.ndarray, p: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Pad the smaller colour with far-away dummies on the first coordinate."""
    nr, nb = len(R), len(B)
    if nr == nb:
        return R, B, 0
    P = np.vstack([R, B])
    dmax = _range_bound_pow(R, B, p) ** (1.0 / p)
    step = (DUMMY_FACTOR + 1.0) * dmax + 1.0
    top = float(P[:, 0].max())
    k = abs(nr - nb)
    base = P[np.argmax(P[:, 0])]
    dummies = np.repeat(base[None, :], k, axis=0)
    dummies[:, 0] = top + step * np.arange(1, k + 1)
    if nr < nb:
        return np.vstack([R, dummies]), B, k
    return R, np.vstack([B, dummies]), k


def bcp_to_closest_pair(
    inst: BCPInstance, gadget: PolarPair, *, mode: str = "exact"
) -> tuple[PointSet, ReductionCertificate]:
    """Append ``scale * a_i`` to red point ``i`` and ``scale * b_j`` to blue point ``j``.

    The scale satisfies ``scale**p * (I**p - C**p) = 2 * Dmax**p`` with ``I``
    the gadget's inner floor, ``C`` its crossing distance and ``Dmax`` the
    largest bichromatic input distance (``mode="exact"``) or a per-coordinate
    range bound on it (``mode="fast"``).  All bichromatic p-th powers shift by
    the shared constant ``scale**p * C**p``, so the BCP argmin is preserved,
    and every monochromatic output pair lands strictly above every
    bichromatic one.
    """
    metric = inst.metric
    if metric.kind != "lp":
        raise InvalidInputError(f"BCP reduction needs a finite Lp metric, got {metric}")
    if gadget.metric != metric:
        raise InvalidInputError(f"gadget metric {gadget.metric} differs from instance metric {metric}")
    if not gadget.inner_floor > gadget.crossing_distance:
        raise InvalidInputError("gadget gap is not strict: inner floor <= crossing distance")
    if mode not in ("exact", "fast"):
        raise InvalidInputError(f"mode must be 'exact' or 'fast', got {mode!r}")
    p = metric.p
    R0, B0 = inst.R.points, inst.B.points
    if len(R0) == 0 or len(B0) == 0:
        raise InvalidInputError("both colour classes must be non-empty")
    R, B, padded = _pad(R0, B0, p)
    n = len(R)
    if gadget.n < n:
        raise InvalidInputError(f"gadget has {gadget.n} points per side, need {n}")

    dmax_pow = _max_bichromatic_pow(R, B, metric) if mode == "exact" else _range_bound_pow(R, B, p)
    I_pow = gadget.inner_floor**p
    C_pow = gadget.crossing_distance**p
    if not math.isfinite(I_pow):
        # A one-point-per-side gadget has no monochromatic pairs to push away.
        scale = 1.0
    elif dmax_pow > 0:
        scale = (SAFETY_FACTOR * dmax_pow / (I_pow - C_pow)) ** (1.0 / p)
    else:
        scale = 1.0
    GA = gadget.A.points[:n]
    GB = gadget.B.points[:n]
    out = np.vstack([np.hstack([R, scale * GA]), np.hstack([B, scale * GB])])
    sides = [SIDE_A] * n + [SIDE_B] * n
    ps = PointSet(out, metric, sides)

    mapping = [("R", i if i < len(R0) else -1) for i in range(n)]
    mapping += [("B", j if j < len(B0) else -1) for j in range(n)]
    shift = scale**p * C_pow
    gap_low = (dmax_pow + shift) ** (1.0 / p)
    gap_high = scale * gadget.inner_floor if n > 1 else math.inf
    notes = []
    if padded:
        notes.append(f"{padded} dummy point(s) padded onto the smaller colour; excluded from the answer mapping")
    cert = ReductionCertificate(
        kind="bcp-to-closest-pair",
        scale=float(scale),
        gap_low=float(gap_low),
        gap_high=float(gap_high),
        mapping=mapping,
        padded=padded,
        notes=notes,
        extra={
            "p": p,
            "mode": mode,
            "dmax_pow": dmax_pow,
            "shift_pow": shift,
            "gadget": dict(gadget.provenance),
            "input_dim": int(R0.shape[1]),
            "gadget_dim": int(gadget.dim),
        },
    )
    return ps, cert


def map_bcp_answer(cert: ReductionCertificate, result: PairResult) -> tuple[int, int]:
    """Input ``(red, blue)`` indices of a bichromatic closest pair in the reduced set."""
    (la, ia), (lb, ib) = cert.map_pair(result.index_i, result.index_j)
    if {la, lb} != {"R", "B"}:
        raise InvalidInputError("closest pair of the reduced instance is monochromatic")
    red, blue = (ia, ib) if la == "R" else (ib, ia)
    if red < 0 or blue < 0:
        raise InvalidInputError("closest pair involves a dummy point")
    return red, blue
