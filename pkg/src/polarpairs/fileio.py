"""Text formats: the point-set file and the 0/1 OV instance file.

Point-set file::

    # polarpairs-pointset v1
    # created: 2026-01-01T00:00:00+00:00
    # metric: lp:3
    # dim: 4
    # count: 2
    # <key>: <json value>        (provenance, certificates, reports ...)
    A 1 0 -1 0
    B 0 1 0 -1

Coordinates are written in the shortest form that parses back to the same
double, so write-then-read is bit-exact.  Only the ``created`` line varies
between two runs with the same configuration.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
from pathlib import Path
from typing import IO

import numpy as np

from .codes import BinaryCode
from .constructions import PolarPair
from .exceptions import InvalidInputError
from .metrics import SIDE_A, SIDE_B, SIDE_NONE, Metric, PointSet
from .reductions import OVInstance

MAGIC = "# polarpairs-pointset v1"
TIMESTAMP_KEY = "created"
_RESERVED = {"metric", "dim", "count", "count_A", "count_B", TIMESTAMP_KEY}


def format_float(v: float) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 2**53 and not (v == 0 and math.copysign(1.0, v) < 0):
        return str(int(v))
    return repr(v)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _dumps(value) -> str:
    return json.dumps(value, sort_keys=True, default=_json_default)


def _open_write(target):
    if hasattr(target, "write"):
        return target, False
    return open(target, "w", encoding="utf-8"), True


def write_pointset(target, ps: PointSet, meta: dict | None = None, *, timestamp: bool = True) -> None:
    fh, close = _open_write(target)
    try:
        fh.write(MAGIC + "\n")
        if timestamp:
            now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
            fh.write(f"# {TIMESTAMP_KEY}: {now}\n")
        fh.write(f"# metric: {ps.metric}\n")
        fh.write(f"# dim: {ps.dim}\n")
        fh.write(f"# count: {len(ps)}\n")
        fh.write(f"# count_A: {int(np.sum(ps.sides == SIDE_A))}\n")
        fh.write(f"# count_B: {int(np.sum(ps.sides == SIDE_B))}\n")
        for key in sorted(meta or {}):
            if key in _RESERVED or ":" in key:
                raise InvalidInputError(f"metadata key {key!r} is reserved or invalid")
            fh.write(f"# {key}: {_dumps(meta[key])}\n")
        for side, row in zip(ps.sides, ps.points):
            fh.write(" ".join([str(side)] + [format_float(v) for v in row]) + "\n")
    finally:
        if close:
            fh.close()


def _read_text(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_text(encoding="utf-8")


def parse_pointset(text: str) -> tuple[PointSet, dict]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise InvalidInputError("not a polarpairs point-set file (missing header line)")
    header: dict[str, str] = {}
    rows, sides = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition(":")
            if not sep:
                raise InvalidInputError(f"line {lineno}: malformed header {line!r}")
            header[key.strip()] = value.strip()
            continue
        parts = line.split()
        if parts[0] not in (SIDE_A, SIDE_B, SIDE_NONE):
            raise InvalidInputError(f"line {lineno}: unknown side {parts[0]!r}")
        try:
            rows.append([float(x) for x in parts[1:]])
        except ValueError as exc:
            raise InvalidInputError(f"line {lineno}: {exc}") from None
        sides.append(parts[0])
    for key in ("metric", "dim", "count"):
        if key not in header:
            raise InvalidInputError(f"header field {key!r} missing")
    dim = int(header["dim"])
    count = int(header["count"])
    if len(rows) != count:
        raise InvalidInputError(f"header says {count} points, found {len(rows)}")
    if any(len(r) != dim for r in rows):
        raise InvalidInputError(f"every point must have {dim} coordinates")
    pts = np.array(rows, dtype=np.float64).reshape(count, dim)
    ps = PointSet(pts, Metric.parse(header["metric"]), sides)
    meta = {}
    for key, value in header.items():
        if key in _RESERVED:
            continue
        try:
            meta[key] = json.loads(value)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"header field {key!r} is not valid JSON") from exc
    return ps, meta


def read_pointset(source) -> tuple[PointSet, dict]:
    return parse_pointset(_read_text(source))


def strip_timestamp(text: str) -> str:
    """Drop the ``created`` header line, for reproducibility comparisons."""
    return "\n".join(l for l in text.splitlines() if not l.startswith(f"# {TIMESTAMP_KEY}:")) + "\n"


def write_polar_pair(target, pp: PolarPair, *, timestamp: bool = True) -> None:
    meta = {
        "crossing_distance": pp.crossing_distance,
        "inner_floor": pp.inner_floor,
        "provenance": pp.provenance,
    }
    if pp.report is not None:
        meta["report"] = pp.report.to_dict()
    if pp.notes:
        meta["notes"] = pp.notes
    write_pointset(target, pp.as_pointset(), meta, timestamp=timestamp)


def read_polar_pair(source) -> PolarPair:
    ps, meta = read_pointset(source)
    for key in ("crossing_distance", "inner_floor"):
        if key not in meta:
            raise InvalidInputError(f"polar-pair file lacks {key!r}")
    return PolarPair.from_pointset(
        ps,
        float(meta["crossing_distance"]),
        float(meta["inner_floor"]),
        provenance=meta.get("provenance", {}),
        notes=list(meta.get("notes", [])),
    )


def write_code(target, code: BinaryCode, *, timestamp: bool = True) -> None:
    ps = PointSet(code.words.astype(np.float64), Metric.l0())
    write_pointset(target, ps, {"code": code.certificate()}, timestamp=timestamp)


def read_code(source) -> BinaryCode:
    ps, meta = read_pointset(source)
    if "code" not in meta:
        raise InvalidInputError("file has no 'code' annotation")
    cert = meta["code"]
    return BinaryCode(
        ps.points.astype(np.int8),
        min_distance=int(cert["min_distance"]),
        design_distance=cert.get("design_distance"),
        distinct=bool(cert.get("distinct", True)),
        certified=cert.get("certified"),
        params=dict(cert.get("params", {})),
    )


# --- OV instances ------------------------------------------------------------


def parse_ov(text: str) -> OVInstance:
    """One 0/1 string per line; a blank line separates U from W.  ``#`` starts a comment."""
    groups: list[list[str]] = [[]]
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("#"):
            continue
        if not s:
            if groups[-1]:
                groups.append([])
            continue
        groups[-1].append(s)
    groups = [g for g in groups if g]
    if len(groups) != 2:
        raise InvalidInputError(f"OV file needs exactly two blank-line-separated blocks, found {len(groups)}")
    mats = []
    for g in groups:
        if any(set(s) - {"0", "1"} for s in g):
            raise InvalidInputError("OV vectors must be strings of 0 and 1")
        if len({len(s) for s in g}) != 1:
            raise InvalidInputError("OV vectors differ in length")
        mats.append(np.array([[int(c) for c in s] for s in g], dtype=np.int8))
    if mats[0].shape[1] != mats[1].shape[1]:
        raise InvalidInputError("U and W vectors differ in length")
    return OVInstance(mats[0], mats[1])


def read_ov(source) -> OVInstance:
    return parse_ov(_read_text(source))


def format_ov(inst: OVInstance) -> str:
    def block(M):
        return "\n".join("".join(str(int(v)) for v in row) for row in M)

    return block(inst.U) + "\n\n" + block(inst.W) + "\n"


def write_ov(target, inst: OVInstance) -> None:
    fh, close = _open_write(target)
    try:
        fh.write(format_ov(inst))
    finally:
        if close:
            fh.close()


def is_pointset_text(text: str) -> bool:
    return text.lstrip().startswith(MAGIC)


def write_text(target: IO[str] | str | Path, text: str) -> None:
    fh, close = _open_write(target)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()
