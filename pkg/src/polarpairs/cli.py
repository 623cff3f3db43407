"""Command-line interface.

Exit codes: 0 success/verified, 1 verified-false, 2 usage or parse error,
3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import constructions, fileio, reductions, solvers, verify
from .exceptions import ConstructionError, InternalInvariantError, InvalidInputError
from .metrics import Metric, default_tolerance

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


def _tol(args) -> float:
    return default_tolerance() if args.tol is None else args.tol


def _emit(text: str, path: str | None = None) -> None:
    if path:
        fileio.write_text(path, text + "\n")
    else:
        print(text)


def _report_text(report) -> str:
    if isinstance(report, dict):
        return "\n".join(f"{k}: {v}" for k, v in report.items())
    return report.to_text()


# --- subcommands -------------------------------------------------------------


def cmd_generate(args) -> int:
    name = args.construction
    if name in ("lp-mid",) and (args.p is None or not 1 < args.p < 2):
        raise UsageError("lp-mid needs --p with 1 < p < 2")
    if name in ("lp-random", "lp-code") and (args.p is None or not args.p > 2):
        raise UsageError(f"{name} needs --p > 2")
    if name == "l2-simplex" and args.n < 2:
        raise UsageError("l2-simplex needs --n >= 2")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    try:
        pp = constructions.build(
            name, n=args.n, p=args.p, d=args.d, seed=args.seed, backend=args.backend, delta=args.delta, tol=_tol(args)
        )
    except InternalInvariantError as exc:
        print(f"internal invariant breach: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(_report_text(exc.report), file=sys.stderr)
        return EXIT_INTERNAL
    except ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(_report_text(exc.report), file=sys.stderr)
        return EXIT_FALSE
    if args.out:
        fileio.write_polar_pair(args.out, pp, timestamp=not args.no_timestamp)
    _emit(pp.report.to_text(), args.report)
    return EXIT_OK if pp.report.passed else EXIT_FALSE


def cmd_reduce(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    if not text.strip():
        raise UsageError(f"input {args.input} is empty")
    if args.kind == "ov" or (args.kind is None and not fileio.is_pointset_text(text)):
        inst = reductions.dedupe(fileio.parse_ov(text))
        ps, cert = reductions.ov_to_closest_pair_linf(inst)
    else:
        if not args.gadget:
            raise UsageError("BCP reduction needs --gadget FILE")
        ps_in, _ = fileio.parse_pointset(text)
        inst = solvers.BCPInstance.from_pointset(ps_in)
        gadget = fileio.read_polar_pair(args.gadget)
        ps, cert = reductions.bcp_to_closest_pair(inst, gadget, mode="fast" if args.fast else "exact")
    if args.out:
        fileio.write_pointset(args.out, ps, {"certificate": cert.to_dict()}, timestamp=not args.no_timestamp)
    lines = [f"kind: {cert.kind}", f"points: {len(ps)}", f"dim: {ps.dim}", f"metric: {ps.metric}"]
    lines += [f"scale: {cert.scale!r}", f"gap_low: {cert.gap_low!r}", f"gap_high: {cert.gap_high!r}"]
    lines += [f"padded: {cert.padded}"] + [f"note: {n}" for n in cert.notes]
    _emit("\n".join(lines), args.report)
    return EXIT_OK


def cmd_solve(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    if not text.strip():
        raise UsageError(f"input {args.input} is empty")
    if not fileio.is_pointset_text(text):
        inst = fileio.parse_ov(text)
        hit = solvers.ov_bruteforce(inst.U, inst.W)
        if hit is None:
            print("orthogonal: none\nNO")
            return EXIT_OK
        print(f"orthogonal: U[{hit[0]}] W[{hit[1]}]\nYES")
        return EXIT_OK
    ps, meta = fileio.parse_pointset(text)
    problem = args.problem
    if problem == "bcp":
        res = solvers.bcp_bruteforce(solvers.BCPInstance.from_pointset(ps), tol=args.tol, n_jobs=_threads(args))
    elif args.fast_hamming:
        res = solvers.hamming_closest_pair_fast(ps)
    else:
        res = solvers.closest_pair_bruteforce(ps, tol=args.tol, n_jobs=_threads(args))
    lines = [f"pair: {res.index_i} {res.index_j}", f"distance: {res.distance!r}", f"class: {res.color_class}"]
    cert_d = meta.get("certificate")
    if cert_d and problem == "cp":
        cert = reductions.ReductionCertificate.from_dict(cert_d)
        if cert.kind == "ov-to-closest-pair-linf":
            yes, pair = reductions.decide_ov(cert, res)
            if yes:
                lines.append(f"orthogonal: U[{pair[0]}] W[{pair[1]}]")
            lines.append("YES" if yes else "NO")
        elif cert.kind == "bcp-to-closest-pair":
            red, blue = reductions.map_bcp_answer(cert, res)
            lines.append(f"bcp: R[{red}] B[{blue}]")
    print("\n".join(lines))
    return EXIT_OK


def cmd_verify(args) -> int:
    pp = fileio.read_polar_pair(args.input)
    report = verify.check_polar(pp, _tol(args))
    text = report.to_text()
    if args.spectral:
        spec = verify.spectral_check(pp)
        text += "\n" + spec.to_text()
        ok = report.passed and spec.passed
    else:
        ok = report.passed
    _emit(text, args.report)
    return EXIT_OK if ok else EXIT_FALSE


def cmd_falsify(args) -> int:
    rep = verify.distribution_falsifier(
        args.metric, dim=args.dim, support_size=args.support, trials=args.trials, seed=args.seed, steps=args.steps
    )
    _emit(rep.to_text(), args.report)
    return EXIT_OK if rep.passed else EXIT_INTERNAL


def cmd_bench(args) -> int:
    rows = []
    names = ["bruteforce", "hamming-fast"] if args.solver == "all" else [args.solver]
    metric = Metric.parse(args.metric)
    rng = np.random.default_rng(args.seed)
    if metric.kind == "l0":
        pts = rng.integers(0, 2, size=(args.n, args.d)).astype(np.float64)
    else:
        pts = rng.uniform(-1.0, 1.0, size=(args.n, args.d))
    from .metrics import PointSet

    ps = PointSet(pts, metric)
    for name in names:
        if name == "hamming-fast" and metric.kind != "l0":
            raise UsageError("hamming-fast only runs on L0 binary data")
        rows.append(solvers.bench_row(name, ps, n_jobs=_threads(args), repeats=args.repeats))
    csv_text = solvers.bench_csv(rows)
    if args.out:
        fileio.write_text(args.out, csv_text)
    sys.stdout.write(csv_text)
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarpairs", description="Polar pairs of point-sets and closest-pair reductions.")
    parser.add_argument("--threads", type=int, default=0, help="worker threads (default: all available)")
    parser.add_argument("--tol", type=float, default=None, help="relative tolerance (default: $POLARPAIRS_TOL or 1e-9)")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a polar pair and certify it")
    g.add_argument("--construction", required=True, choices=constructions.CONSTRUCTIONS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float)
    g.add_argument("--d", type=int, help="dimension for lp-random (even)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--backend", default="hadamard", choices=["hadamard", "rs-hadamard"])
    g.add_argument("--delta", type=float, default=0.05)
    g.add_argument("--out", help="point-set file to write")
    g.add_argument("--report", help="write the verification report here instead of stdout")
    g.add_argument("--no-timestamp", action="store_true")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("reduce", help="reduce an OV or BCP instance to closest pair")
    r.add_argument("--input", required=True)
    r.add_argument("--kind", choices=["ov", "bcp"])
    r.add_argument("--gadget", help="polar-pair file used as the BCP gadget")
    r.add_argument("--fast", action="store_true", help="bound the BCP diameter by coordinate ranges")
    r.add_argument("--out")
    r.add_argument("--report")
    r.add_argument("--no-timestamp", action="store_true")
    r.set_defaults(func=cmd_reduce)

    s = sub.add_parser("solve", help="brute-force closest pair / BCP / OV")
    s.add_argument("--input", required=True)
    s.add_argument("--problem", choices=["cp", "bcp"], default="cp")
    s.add_argument("--fast-hamming", action="store_true")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="re-verify a polar-pair file")
    v.add_argument("--input", required=True)
    v.add_argument("--spectral", action="store_true", help="also run the spectral rank check (L2 only)")
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("falsify", help="search for distributions contradicting the L0/L1 impossibility")
    f.add_argument("--metric", choices=["l0", "l1"], required=True)
    f.add_argument("--dim", type=int, default=5)
    f.add_argument("--support", type=int, default=8)
    f.add_argument("--trials", type=int, default=10_000)
    f.add_argument("--steps", type=int, default=100)
    f.add_argument("--seed", type=int, default=1)
    f.add_argument("--report")
    f.set_defaults(func=cmd_falsify)

    b = sub.add_parser("bench", help="closest-pair throughput as CSV")
    b.add_argument("--solver", choices=["bruteforce", "hamming-fast", "all"], default="all")
    b.add_argument("--n", type=int, default=1024)
    b.add_argument("--d", type=int, default=256)
    b.add_argument("--metric", default="l0")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InternalInvariantError as exc:
        print(f"internal invariant breach: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FALSE


if __name__ == "__main__":
    sys.exit(main())
