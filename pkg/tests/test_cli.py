import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from imexstab.cli import ValidationError, main, parse_grid, parse_number, read_matrix, write_matrix


def invoke(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_body(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def strip_timestamp(text):
    return "\n".join(ln for ln in text.splitlines() if "timestamp" not in ln)


def test_parse_number_and_grid():
    assert parse_number("2^-3") == 0.125 and parse_number("1e-3") == 1e-3
    assert parse_grid("2^-6..2^-8") == [2.0**-6, 2.0**-7, 2.0**-8]
    assert parse_grid("1..5") == [1.0, 2.0, 3.0, 4.0, 5.0]
    assert parse_grid("0.1, 0.2") == [0.1, 0.2]
    assert parse_grid("2^0..2^2") == [1.0, 2.0, 4.0]
    for bad in ("2^-1..3^-2", "a..b", "x"):
        with pytest.raises(ValidationError):
            parse_grid(bad)


def test_coeffs_sbdf2(capsys):
    code, out, _ = invoke(capsys, "coeffs", "--r", "2", "--delta", "1")
    assert code == 0
    rows = csv_body(out)
    assert [float(r["a"]) for r in rows] == [0.5, -2.0, 1.5]
    assert [float(r["b"]) for r in rows] == [-1.0, 2.0, 0.0]
    assert rows[0]["a"] == "5.0000000000000000e-01"  # 17 significant digits
    header = [ln for ln in out.splitlines() if ln.startswith("# result:")][0]
    res = json.loads(header.split(":", 1)[1])
    assert res["zero_stable"] and res["order_condition_residual"] < 1e-14


def test_coeffs_json(capsys):
    code, out, _ = invoke(capsys, "coeffs", "--r", "3", "--delta", "0.5", "--format", "json", "--tabulated")
    doc = json.loads(out)
    assert code == 0 and doc["meta"]["config"]["tabulated"] is True
    assert doc["rows"][3][1] == pytest.approx(7 / 6)


@pytest.mark.parametrize(
    "args",
    [
        ["coeffs", "--r", "7", "--delta", "1"],
        ["coeffs", "--r", "2", "--delta", "0"],
        ["coeffs", "--r", "2", "--delta", "1.5"],
        ["coeffs", "--r", "2"],
        ["convergence", "--delta", "0.1", "--orders", "1..9"],
        ["convergence", "--delta", "0.1", "--k", "2^-1..3^-2"],
        ["certify", "--problem", "nope", "--r", "2", "--delta", "1"],
        ["certify", "--r", "2", "--delta", "1"],
        ["gte", "--orders", "1"],
        ["region", "--r", "2", "--delta", "1", "--y", "2"],
    ],
)
def test_validation_exit_code(capsys, args):
    code, _, err = invoke(capsys, *args)
    assert code == 2 and err


def test_numerical_failure_exit_code(capsys):
    code, _, err = invoke(
        capsys, "gte", "--problem", "paper-scalar", "--orders", "1", "--deltas", "1", "--k", "1", "--t-final", "100"
    )
    assert code == 3 and "numerical" in err


def test_certify_outputs(capsys):
    code, out, _ = invoke(capsys, "certify", "--problem", "paper-scalar", "--r", "5", "--delta", "0.04")
    assert code == 0 and json.loads(out)["verdict"]["status"] == "certified_sufficient"
    code, out, _ = invoke(capsys, "certify", "--problem", "paper-scalar", "--r", "5", "--delta", "1")
    assert code == 0 and json.loads(out)["verdict"]["status"] == "violates_necessary"


def test_matrix_files(tmp_path, capsys):
    write_matrix(tmp_path / "A.txt", [[-1.0]])
    write_matrix(tmp_path / "B.txt", [[-9.0]])
    assert read_matrix(tmp_path / "A.txt").shape == (1, 1)
    code, out, _ = invoke(
        capsys, "certify", "--A", str(tmp_path / "A.txt"), "--B", str(tmp_path / "B.txt"), "--r", "5", "--delta", "0.04"
    )
    assert code == 0 and json.loads(out)["verdict"]["status"] == "certified_sufficient"
    (tmp_path / "bad.txt").write_text("2 2\n1 2\n3\n")
    code, _, _ = invoke(capsys, "wrange", "--A", str(tmp_path / "bad.txt"), "--B", str(tmp_path / "B.txt"))
    assert code == 2
    write_matrix(tmp_path / "pos.txt", [[1.0]])
    code, _, _ = invoke(capsys, "wrange", "--A", str(tmp_path / "pos.txt"), "--B", str(tmp_path / "B.txt"))
    assert code == 2


def test_region_outputs(tmp_path, capsys):
    out_file = tmp_path / "region.csv"
    code, _, _ = invoke(capsys, "region", "--r", "2", "--delta", "1", "--n", "128", "--out", str(out_file), "--g", "--g-grid", "100")
    assert code == 0
    rows = csv_body(out_file.read_text())
    assert {r["source"] for r in rows} == {"exact", "locus"}
    summary = json.loads(out_file.with_suffix(".summary.json").read_text())["summary"]
    assert summary["m_l"] == pytest.approx(-1 / 3) and summary["G"] > 0


def test_wrange_and_simulate(capsys):
    code, out, _ = invoke(capsys, "wrange", "--problem", "paper-scalar", "--n-angles", "16")
    rows = csv_body(out)
    assert code == 0 and {r["kind"] for r in rows} == {"boundary", "eigenvalue"}
    code, out, _ = invoke(capsys, "simulate", "--problem", "paper-scalar", "--r", "2", "--delta", "0.5", "--k", "0.1", "--steps", "10", "--init", "exact")
    rows = csv_body(out)
    assert code == 0 and len(rows) == 12 and float(rows[-1]["t"]) == pytest.approx(1.0)


def test_convergence_and_gte_tables(capsys):
    code, out, _ = invoke(capsys, "convergence", "--N", "10", "--delta", "0.2", "--orders", "1..2", "--k", "2^-6..2^-8")
    rows = csv_body(out)
    assert code == 0 and len(rows) == 3 and set(rows[0]) == {"k", "error_r1", "rate_r1", "error_r2", "rate_r2"}
    assert rows[0]["rate_r1"] != "nan"
    code, out, _ = invoke(capsys, "gte", "--orders", "1", "--deltas", "2^0..2^-1", "--k", "1e-3")
    rows = csv_body(out)
    assert float(rows[0]["error_r1"]) == pytest.approx(1.839e-4, rel=2e-3)
    code, out, _ = invoke(capsys, "gte", "--orders", "1", "--deltas", "1", "--k-over-delta", "0.2")
    assert float(csv_body(out)[0]["error_r1"]) == pytest.approx(3.400e-2, rel=2e-3)


@pytest.mark.parametrize(
    "args",
    [
        ["coeffs", "--r", "4", "--delta", "0.3"],
        ["region", "--r", "3", "--delta", "0.2", "--n", "64"],
        ["wrange", "--problem", "paper-vardiff", "--N", "10"],
        ["convergence", "--N", "10", "--delta", "0.2", "--orders", "1..2", "--k", "2^-5..2^-6"],
    ],
)
def test_determinism(capsys, args):
    _, first, _ = invoke(capsys, *args)
    _, second, _ = invoke(capsys, *args)
    assert strip_timestamp(first) == strip_timestamp(second)
    assert "# timestamp:" in first


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "imexstab", "coeffs", "--r", "1", "--delta", "1", "--format", "json"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rows"][0][1:] == [-1.0, 1.0, 0.0]
