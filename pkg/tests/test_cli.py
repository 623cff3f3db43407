import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from polarpairs import fileio
from polarpairs.cli import main
from polarpairs.constructions import l0_arbitrary


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def field(text, key):
    for line in text.splitlines():
        if line.startswith(key + ":"):
            return line.split(":", 1)[1].strip()
    raise KeyError(key)


def test_generate_l0_arbitrary(tmp_path, capsys):
    out = tmp_path / "g.txt"
    code, text, _ = run(capsys, "generate", "--construction", "l0-arbitrary", "--n", 16, "--out", out)
    assert code == 0
    assert float(field(text, "margin")) == 1
    ps, meta = fileio.read_pointset(out)
    assert len(ps) == 32 and meta["crossing_distance"] == 15


def test_generate_lp_mid(capsys):
    code, text, _ = run(capsys, "generate", "--construction", "lp-mid", "--n", 8, "--p", 1.5)
    assert code == 0 and field(text, "equal_cross") == "True"


def test_generate_lp_code(tmp_path, capsys):
    out = tmp_path / "code.txt"
    code, text, _ = run(
        capsys, "generate", "--construction", "lp-code", "--n", 16, "--p", 3, "--backend", "hadamard", "--out", out
    )
    assert code == 0
    pp = fileio.read_polar_pair(out)
    assert pp.inner_floor**3 > 1.5 * pp.dim


@pytest.mark.parametrize(
    "argv",
    [
        ["generate", "--construction", "lp-code", "--n", "4", "--p", "1.5"],
        ["generate", "--construction", "lp-mid", "--n", "4"],
        ["generate", "--construction", "l2-simplex", "--n", "1"],
        ["generate", "--construction", "nope", "--n", "4"],
        ["frobnicate"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_generate_admissible_range_message(capsys):
    _, _, err = run(capsys, "generate", "--construction", "lp-code", "--n", "4", "--p", "1.5")
    assert "p > 2" in err


def test_generate_internal_breach(capsys):
    code, _, err = run(capsys, "generate", "--construction", "lp-mid", "--n", 128, "--p", 1.1)
    assert code == 3 and "internal" in err


def test_reduce_and_solve_ov_yes(tmp_path, capsys):
    src = tmp_path / "ov.txt"
    src.write_text("# U\n011\n101\n011\n\n110\n100\n")
    red = tmp_path / "red.txt"
    code, text, _ = run(capsys, "reduce", "--input", src, "--out", red)
    assert code == 0
    assert (field(text, "gap_low"), field(text, "gap_high")) == ("1.0", "2.0")
    ps, meta = fileio.read_pointset(red)
    assert len(ps) == 4 and str(ps.metric) == "linf"
    assert meta["certificate"]["gap_low"] == 1.0
    code, text, _ = run(capsys, "solve", "--input", red)
    assert code == 0
    assert field(text, "distance") == "1.0"
    assert "orthogonal: U[0] W[1]" in text
    assert text.strip().splitlines()[-1] == "YES"


def test_solve_ov_no(tmp_path, capsys):
    src = tmp_path / "ov.txt"
    src.write_text("11\n10\n\n11\n10\n")
    red = tmp_path / "red.txt"
    run(capsys, "reduce", "--input", src, "--out", red)
    code, text, _ = run(capsys, "solve", "--input", red)
    assert text.strip().splitlines()[-1] == "NO"
    assert float(field(text, "distance")) >= 2
    code, text, _ = run(capsys, "solve", "--input", src)
    assert code == 0 and text.strip().endswith("NO")


def test_reduce_and_solve_bcp(tmp_path, capsys):
    rng = np.random.default_rng(0)
    from polarpairs.metrics import Metric, PointSet

    pts = rng.integers(-4, 5, (12, 3)).astype(float)
    inst = tmp_path / "bcp.txt"
    fileio.write_pointset(inst, PointSet(pts, Metric.lp(3), ["A"] * 6 + ["B"] * 6))
    gadget = tmp_path / "gadget.txt"
    assert run(capsys, "generate", "--construction", "lp-code", "--n", 6, "--p", 3, "--out", gadget)[0] == 0
    red = tmp_path / "red.txt"
    code, text, _ = run(capsys, "reduce", "--input", inst, "--kind", "bcp", "--gadget", gadget, "--out", red)
    assert code == 0 and float(field(text, "scale")) > 0
    _, direct, _ = run(capsys, "solve", "--input", inst, "--problem", "bcp")
    _, reduced, _ = run(capsys, "solve", "--input", red)
    i, j = field(direct, "pair").split()
    assert f"bcp: R[{i}] B[{j}]" in reduced
    assert field(reduced, "class") == "bi"


def test_reduce_bcp_needs_gadget(tmp_path, capsys):
    inst = tmp_path / "bcp.txt"
    fileio.write_polar_pair(inst, l0_arbitrary(2))
    assert run(capsys, "reduce", "--input", inst, "--kind", "bcp")[0] == 2


def test_reduce_empty_input(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    code, _, err = run(capsys, "reduce", "--input", empty)
    assert code == 2 and "empty" in err


def test_missing_file(tmp_path, capsys):
    assert run(capsys, "verify", "--input", tmp_path / "nope.txt")[0] == 2


def test_verify_round_trip(tmp_path, capsys):
    out = tmp_path / "s.txt"
    run(capsys, "generate", "--construction", "l2-simplex", "--n", 6, "--out", out)
    code, text, _ = run(capsys, "verify", "--input", out, "--spectral")
    assert code == 0 and "positive_count: 11" in text


def test_verify_corrupted_gadget(tmp_path, capsys):
    out = tmp_path / "g.txt"
    run(capsys, "generate", "--construction", "l0-arbitrary", "--n", 4, "--out", out)
    lines = out.read_text().splitlines()
    idx = next(k for k, l in enumerate(lines) if l.startswith("B "))
    lines[idx] = "B 1 1 1 1"  # now equals the first A point
    out.write_text("\n".join(lines) + "\n")
    code, text, _ = run(capsys, "verify", "--input", out)
    assert code == 1
    assert field(text, "pass") == "False"
    assert field(text, "worst_cross_pair") != "None"


def test_falsify_l1(capsys, tmp_path):
    rep = tmp_path / "f.txt"
    code, _, _ = run(
        capsys, "falsify", "--metric", "l1", "--trials", 500, "--steps", 20, "--seed", 1, "--report", rep
    )
    assert code == 0
    assert float(field(rep.read_text(), "max_objective")) <= 1e-12


def test_bench_csv(capsys, tmp_path):
    out = tmp_path / "b.csv"
    code, text, _ = run(capsys, "bench", "--n", 128, "--d", 64, "--out", out)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["solver"] for r in rows] == ["bruteforce", "hamming-fast"]
    assert out.read_text() == text


def test_bench_hamming_needs_l0(capsys):
    assert run(capsys, "bench", "--solver", "hamming-fast", "--metric", "l2", "--n", 8, "--d", 4)[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["--construction", "lp-random", "--n", "16", "--p", "3", "--d", "400", "--seed", "4"],
        ["--construction", "lp-mid", "--n", "8", "--p", "1.3"],
        ["--construction", "lp-code", "--n", "40", "--p", "4", "--backend", "rs-hadamard", "--delta", "0.1"],
    ],
)
def test_same_config_byte_identical(tmp_path, capsys, argv):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    run(capsys, "generate", *argv, "--out", a)
    run(capsys, "generate", *argv, "--out", b)
    assert fileio.strip_timestamp(a.read_text()) == fileio.strip_timestamp(b.read_text())
    ps_a, _ = fileio.read_pointset(a)
    ps_b, _ = fileio.read_pointset(b)
    assert ps_a.points.tobytes() == ps_b.points.tobytes()


def test_threads_invariance(tmp_path, capsys):
    out = tmp_path / "r.txt"
    run(capsys, "generate", "--construction", "lp-random", "--n", 32, "--p", 3, "--d", 600, "--out", out)
    results = {run(capsys, "--threads", k, "solve", "--input", out)[1] for k in (1, 3)}
    assert len(results) == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "polarpairs", "generate", "--construction", "l0-binary", "--n", "3"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "pass: True" in proc.stdout
