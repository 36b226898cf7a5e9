import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from spiked_kernel import energy, make_params, psi
from spiked_kernel.cli import HEADERS, main

GOLDEN = Path(__file__).parent / "golden"

GOLDEN_RUNS = {
    "params_A0.75.csv": ["params", "--A", "0.75"],
    "params_A2.json": ["params", "--A", "2", "--format", "json"],
    "eval_diag.csv": ["eval", "--mode", "diag", "--x", "0.5,1,30", "--A", "0.75"],
    "eval_kernel.csv": ["eval", "--mode", "kernel", "--x", "0,1.2", "--y", "0.7,1", "--A", "2"],
    "eval_psi.csv": ["eval", "--mode", "psi", "--n", "0", "--x", "0,0.5,1,2,40", "--A", "0.75"],
    "eval_series.csv": ["eval", "--mode", "series", "--x", "1", "--y", "1", "--A", "0.75"],
    "eval_resolvent.csv": ["eval", "--mode", "resolvent", "--lam", "2", "--x", "1", "--y", "1,2", "--A", "0.75"],
}


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.reader(io.StringIO("\n".join(lines))))


def comments(text):
    return dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# "))


def same_cell(a, b):
    if a == b:
        return True
    try:
        fa, fb = float(a), float(b)
    except ValueError:
        return False
    return math.isclose(fa, fb, rel_tol=1e-13, abs_tol=1e-300)


def same_json(a, b):
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(same_json(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(same_json(x, y) for x, y in zip(a, b))
    if isinstance(a, float) and isinstance(b, float):
        return math.isclose(a, b, rel_tol=1e-13)
    return a == b


# ---------------------------------------------------------------- schema

def test_header_schema_is_pinned():
    pinned = json.loads((GOLDEN / "headers.json").read_text())
    assert pinned == HEADERS


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden_output(name, capsys):
    code, out, _ = run(GOLDEN_RUNS[name], capsys)
    assert code == 0
    want = (GOLDEN / name).read_text()
    if name.endswith(".json"):
        assert same_json(json.loads(out), json.loads(want))
    else:
        got_rows, want_rows = csv_rows(out), csv_rows(want)
        assert got_rows[0] == want_rows[0]
        assert len(got_rows) == len(want_rows)
        for g, w in zip(got_rows[1:], want_rows[1:]):
            assert all(same_cell(a, b) for a, b in zip(g, w)), (g, w)


def test_csv_floats_round_trip(capsys):
    _, out, _ = run(["eval", "--mode", "diag", "--x", "0.7"], capsys)
    value = float(csv_rows(out)[1][1])
    assert value == pytest.approx(-math.expm1(-0.49) / 1.4, rel=1e-14)
    assert repr(value) == csv_rows(out)[1][1]


def test_json_embeds_config(capsys):
    code, out, _ = run(["eval", "--mode", "psi", "--n", "1", "--x", "0,1", "--format", "json", "--tol", "1e-5", "--seed", "7"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert set(doc) == {"command", "config", "columns", "rows"}
    assert doc["config"]["tolerance"] == 1e-5 and doc["config"]["seed"] == 7
    assert doc["columns"] == HEADERS["psi"]
    # JSON has no infinity literal; log|psi(0)| is written as a string
    assert doc["rows"][0]["log_abs"] == "-inf"


# ---------------------------------------------------------------- examples

def test_params_rows(capsys):
    _, out, _ = run(["params", "--A", "2"], capsys)
    row = dict(zip(*csv_rows(out)))
    assert float(row["gamma"]) == 2.5 and float(row["E3"]) == 17.0


def test_eval_examples(capsys):
    _, out, _ = run(["eval", "--mode", "diag", "--x", "1"], capsys)
    assert float(csv_rows(out)[1][1]) == pytest.approx(0.3160603, abs=1e-7)
    _, out, _ = run(["eval", "--mode", "kernel", "--x", "0", "--y", "1"], capsys)
    assert float(csv_rows(out)[1][2]) == 0.0
    _, out, _ = run(["eval", "--mode", "psi", "--n", "0", "--grid", "0.1:4:9"], capsys)
    for row in csv_rows(out)[1:]:
        x = float(row[1])
        assert float(row[2]) == pytest.approx(math.sqrt(2) * x ** 1.5 * math.exp(-x * x / 2), rel=1e-14)


def test_solve_examples(capsys):
    code, out, _ = run(["solve", "--f", "exp-decay", "--grid", "0.3:6:6"], capsys)
    assert code == 0
    meta = comments(out)
    assert float(meta["residual_sup"]) <= 1e-4 and meta["bound_ok"] == "true"
    code, out, _ = run(["solve", "--f", "psi:3", "--grid", "0.5:3:4"], capsys)
    p = make_params(0.75)
    for row in csv_rows(out)[1:]:
        x, u = float(row[0]), float(row[2])
        assert u == pytest.approx(psi(p, 3, x) / energy(p, 3), rel=1e-6)


def test_solve_json_summary(capsys):
    _, out, _ = run(["solve", "--f", "gaussian", "--grid", "1:2:2", "--format", "json"], capsys)
    doc = json.loads(out)
    assert set(doc["summary"]) == {"source", "residual_sup", "sup_ratio", "bound", "bound_ok", "step"}
    assert doc["summary"]["bound"] == pytest.approx(4 / math.sqrt(0.75))


def test_bench(capsys):
    args = ["bench", "--grid", "0.5:3:3"]
    _, first, _ = run(args, capsys)
    _, second, _ = run(args, capsys)
    rows = csv_rows(first)
    assert rows[0] == HEADERS["bench"]
    col = {name: i for i, name in enumerate(rows[0])}
    terms = {}
    for row in rows[1:]:
        tol, x = float(row[col["tolerance"]]), float(row[col["x"]])
        terms[(tol, x)] = int(row[col["n_terms"]])
        assert row[col["converged"]] == "true"
        assert float(row[col["abs_error"]]) <= tol
        if tol == 1e-6:
            assert float(row[col["plain_terms_estimate"]]) >= 1e3
    # more accuracy, more terms
    for (tol, x), n in terms.items():
        for (tol2, x2), n2 in terms.items():
            if x == x2 and tol2 < tol:
                assert n2 >= n
    # deterministic term counts
    second_terms = [r[col["n_terms"]] for r in csv_rows(second)[1:]]
    assert second_terms == [r[col["n_terms"]] for r in rows[1:]]


# ---------------------------------------------------------------- I/O plumbing

def test_out_and_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"A": 6.0, "grid": {"min": 1.0, "max": 2.0, "count": 2}}))
    out = tmp_path / "o.json"
    code, text, _ = run(["params", "--config", str(cfg), "--format", "json", "--out", str(out)], capsys)
    assert code == 0 and text == ""
    doc = json.loads(out.read_text())
    assert doc["config"]["A"] == 6.0 and doc["config"]["grid"]["count"] == 2
    # flags override the file
    run(["params", "--config", str(cfg), "--A", "2", "--format", "json", "--out", str(out)], capsys)
    assert json.loads(out.read_text())["rows"][0]["gamma"] == 2.5


# ---------------------------------------------------------------- exit codes

@pytest.mark.parametrize(
    "args",
    [
        ["params", "--A", "0"],
        ["params", "--A", "-2"],
        ["verify", "--A", "0"],
        ["solve"],
        ["solve", "--f", "sawtooth"],
        ["solve", "--f", "csv:/nonexistent/file.csv"],
        ["eval", "--mode", "psi"],
        ["eval", "--mode", "resolvent", "--x", "1"],
        ["eval", "--mode", "resolvent", "--x", "1", "--lam", "12"],
        ["params", "--grid", "1:2"],
        ["params", "--tol", "0"],
        ["params", "--max-terms", "0"],
    ],
)
def test_usage_errors_exit_2(args, capsys):
    code, out, err = run(args, capsys)
    assert code == 2
    assert out == "" and err.startswith("error:")


def test_bad_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"A": 1.0, "colour": "blue"}))
    assert run(["params", "--config", str(cfg)], capsys)[0] == 2
    cfg.write_text("[1, 2]")
    assert run(["params", "--config", str(cfg)], capsys)[0] == 2


@pytest.mark.parametrize("args", [["params", "--A", "abc"], ["frobnicate"], ["eval", "--mode", "nope"]])
def test_malformed_arguments_exit_2(args):
    proc = subprocess.run([sys.executable, "-m", "spiked_kernel", *args], capture_output=True, text=True)
    assert proc.returncode == 2


@pytest.fixture(scope="module")
def verify_default():
    proc = subprocess.run([sys.executable, "-m", "spiked_kernel", "verify"], capture_output=True, text=True)
    return proc


def test_verify_default_passes(verify_default):
    assert verify_default.returncode == 0, verify_default.stdout
    assert verify_default.stdout.startswith("# all_passed=true")
    rows = csv_rows(verify_default.stdout)
    assert rows[0] == HEADERS["verify"]
    assert all(r[1] == "true" for r in rows[1:])


def test_verify_unreachable_tolerance_exit_1(capsys):
    code, out, _ = run(["verify", "--tol", "1e-30", "--max-terms", "512"], capsys)
    assert code == 1
    assert comments(out)["all_passed"] == "false"
    failed = {r[0] for r in csv_rows(out)[1:] if r[1] == "false"}
    assert "series_grid" in failed
    assert "unconverged=" in {r[0]: r[4] for r in csv_rows(out)[1:]}["series_grid"]
