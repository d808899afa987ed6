import csv
import io
import json
import subprocess
import sys

import pytest

from hypercurv.cli import COLUMNS, PROBE_COLUMNS, main

H2_TEXT = "# vertex 0 x\n# vertex 1 y\n# vertex 2 z\nvertices 3\nedge 1 0 1 2\nedge 1 0 1\n"


def run(argv, stdin_text, monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin_text))
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def gen(argv, capsys):
    assert main(["gen"] + argv) == 0
    return capsys.readouterr().out


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_info_h2(monkeypatch, capsys):
    code, out, _ = run(["info"], H2_TEXT, monkeypatch, capsys)
    assert code == 0
    lines = out.splitlines()
    assert "n 3" in lines and "edges 2" in lines and "vol 5" in lines and "diam 1" in lines
    assert "x 2" in lines and "z 1" in lines


def test_info_r6(monkeypatch, capsys):
    text = gen(["r1", "--n", "6"], capsys)
    code, out, _ = run(["info"], text, monkeypatch, capsys)
    assert code == 0 and "vol 6" in out and "diam 1" in out


def test_info_disconnected(monkeypatch, capsys):
    code, _, err = run(["info"], "vertices 4\nedge 1 0 1\nedge 1 2 3\n", monkeypatch, capsys)
    assert code == 2 and "disconnected" in err.lower()


def test_parse_error_exit(monkeypatch, capsys):
    code, _, err = run(["info"], "vertices 2\nedge -1 0 1\n", monkeypatch, capsys)
    assert code == 2 and err.startswith("error:")


def test_curvature_r4_c(monkeypatch, capsys):
    text = gen(["r1", "--n", "4"], capsys)
    code, out, _ = run(["curvature", "--method", "c", "--all"], text, monkeypatch, capsys)
    assert code == 0
    assert out.splitlines()[0] == ",".join(COLUMNS)
    assert "\r\n" in out
    rs = rows(out)
    assert len(rs) == 6 and all(float(r["C"]) == pytest.approx(1.0) for r in rs)


def test_curvature_c5_lly(monkeypatch, capsys):
    text = gen(["cn", "--n", "5"], capsys)
    code, out, _ = run(["curvature", "--method", "lly", "--all"], text, monkeypatch, capsys)
    assert code == 0
    for r in rows(out):
        if r["d"] == "1":
            assert float(r["kappa_lly"]) == pytest.approx(0.5)


def test_curvature_h2_pair(monkeypatch, capsys):
    code, out, _ = run(["curvature", "--method", "c", "--pair", "x", "y"], H2_TEXT, monkeypatch, capsys)
    assert code == 0
    (r,) = rows(out)
    assert r["x"] == "x" and r["y"] == "y"
    assert r["C"] == "1.66666666667"  # 12 significant digits
    assert "C=exact" in r["certificate"]


def test_curvature_default_methods_json(monkeypatch, capsys):
    # with default methods LLY is skipped silently on hypergraphs
    code, out, _ = run(["curvature", "--pair", "0", "1", "--format", "json"], H2_TEXT, monkeypatch, capsys)
    assert code == 0
    (r,) = json.loads(out)
    assert list(r) == COLUMNS
    assert r["kappa_lly"] is None and r["error"] == ""
    assert r["kappa_iktu"] <= r["kappa_wiktu"] + 1e-3
    assert r["kappa_wiktu"] <= r["C"] + 1e-3


def test_curvature_row_error(monkeypatch, capsys):
    code, out, _ = run(["curvature", "--method", "lly", "--pair", "x", "y"], H2_TEXT, monkeypatch, capsys)
    assert code == 1
    (r,) = rows(out)
    assert "not a graph" in r["error"] and r["kappa_lly"] == ""


def test_curvature_nonstabilized_row(monkeypatch, capsys):
    text = gen(["r1", "--n", "3"], capsys)
    code, out, _ = run(["curvature", "--method", "iktu", "--pair", "0", "1", "--tol", "1e-12"],
                       text, monkeypatch, capsys)
    assert code == 1
    (r,) = rows(out)
    assert r["error"].startswith("iktu:")


def test_curvature_same_vertex(monkeypatch, capsys):
    code, _, err = run(["curvature", "--pair", "x", "x"], H2_TEXT, monkeypatch, capsys)
    assert code == 2


def test_gen_fig_and_multi(capsys):
    assert main(["gen", "fig1", "--A", "1", "--B", "0"]) == 2
    capsys.readouterr()
    text = gen(["fig1", "--A", "1", "--B", "0", "--allow-multi"], capsys)
    assert text.startswith("# family fig1\n")
    assert text.count("edge ") == 2


def test_fig2_json_round(monkeypatch, capsys):
    text = gen(["fig2", "--A", "2", "--B", "2", "--w-ev", "0.5", "--w-e", "2"], capsys)
    code, out, _ = run(["curvature", "--method", "c", "--pair", "x", "y", "--format", "json"],
                       text, monkeypatch, capsys)
    assert code == 0
    assert json.loads(out)[0]["C"] == pytest.approx(0.4, abs=1e-9)


def test_files(tmp_path, capsys):
    src = tmp_path / "h2.txt"
    dst = tmp_path / "out.csv"
    src.write_text(H2_TEXT)
    assert main(["curvature", "-i", str(src), "-o", str(dst), "--method", "c", "--pair", "y", "z"]) == 0
    with open(dst, newline="") as fh:
        (r,) = rows(fh.read())
    assert float(r["C"]) == pytest.approx(1.25)
    assert main(["info", "-i", str(tmp_path / "missing.txt")]) == 2


def test_probe_k2_and_determinism(monkeypatch, capsys):
    text = gen(["kn", "--n", "2"], capsys)
    argv = ["probe", "--samples", "10", "--seed", "3"]
    code, out1, _ = run(argv, text, monkeypatch, capsys)
    assert code == 0
    code, out2, _ = run(argv, text, monkeypatch, capsys)
    assert out1 == out2
    rs = rows(out1)
    assert out1.splitlines()[0] == ",".join(PROBE_COLUMNS)
    assert [float(r["lambda"]) for r in rs] == [1e-2, 1e-3, 1e-4]
    for r in rs:
        lam = float(r["lambda"])
        assert abs(float(r["inf_psi_over_lambda"])) <= 4 * lam
        assert abs(float(r["kd_minus_wkd"])) <= 1e-9


def test_probe_r31(monkeypatch, capsys):
    text = gen(["r1", "--n", "3"], capsys)
    code, out, _ = run(["probe", "--pair", "0", "1", "--samples", "10", "--lambdas", "1e-4"],
                       text, monkeypatch, capsys)
    assert code == 0
    (r,) = rows(out)
    assert float(r["kd_minus_wkd"]) >= -1e-9
    assert float(r["pairing_constant"]) == pytest.approx(1.5)


def test_bad_lambdas(capsys):
    with pytest.raises(SystemExit):
        main(["curvature", "--lambdas", "0,1e-3"])


def test_console_script_pipe():
    g = subprocess.run([sys.executable, "-m", "hypercurv.cli", "gen", "r1", "--n", "4"],
                       capture_output=True, text=True, check=True)
    c = subprocess.run([sys.executable, "-m", "hypercurv.cli", "curvature", "--method", "c", "--all"],
                       input=g.stdout, capture_output=True, text=True)
    assert c.returncode == 0
    assert len(rows(c.stdout)) == 6
