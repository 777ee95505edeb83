import csv
import json
import math
import subprocess
import sys

import pytest

from toricqe import cli


def run(argv, capsys=None):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr() if capsys else None
    return code, out


@pytest.fixture(scope="module")
def docs(tmp_path_factory):
    d = tmp_path_factory.mktemp("docs")
    for argv in (["lpp", "--m", 2], ["page"], ["koiso-cao"], ["cp2b2", "--a", 2, "--m", 2]):
        assert cli.main([str(a) for a in argv] + ["--out", str(d)]) == 0
    return d


def load(path):
    return json.loads(path.read_text())


def test_lpp_document(docs):
    doc = load(docs / "lpp_m2.json")
    assert doc["schema_version"] == cli.SCHEMA_VERSION and doc["family"] == "lpp" and doc["m"] == 2.0
    assert doc["constants"]["b"] == pytest.approx(0.076527, abs=1e-6)
    assert all(r["pass"] for r in doc["residual_summary"])
    prov = doc["provenance"]
    assert {"abs_tol", "rel_tol", "max_iter", "iterations", "build", "timestamp"} <= set(prov)


def test_lpp_m50(tmp_path, capsys):
    code, _ = run(["lpp", "--m", 50, "--out", tmp_path], capsys)
    assert code == 0
    assert load(tmp_path / "lpp_m50.json")["constants"]["b"] == pytest.approx(0.005120, abs=1e-6)


def test_lpp_invalid_m(tmp_path, capsys):
    code, out = run(["lpp", "--m", 0.5, "--out", tmp_path], capsys)
    assert code == 2
    assert "m must exceed 1" in out.err


def test_page_and_koiso_cao_documents(docs):
    page = load(docs / "page.json")["constants"]
    assert page["a_star"] == pytest.approx(1.057769, abs=1e-6)
    assert page["volume_ratio"] == pytest.approx(3.183933, abs=1e-6)
    kc = load(docs / "koiso_cao.json")["constants"]
    assert kc["c"] == pytest.approx(0.5276, abs=5e-4)
    assert kc["d"] == pytest.approx(-6.91561, abs=1e-4)


def test_page_json_to_stdout(tmp_path, capsys):
    code, out = run(["page", "--json", "-", "--out", tmp_path], capsys)
    assert code == 0
    assert json.loads(out.out)["family"] == "page"
    assert "a_star" in out.err


def test_cp2b2_document(docs):
    doc = load(docs / "cp2b2_a2_m2.json")
    k = doc["constants"]
    assert (k["b"], k["c"], k["d"], k["mu"]) == pytest.approx((-0.0744366, 1.00482, -0.463585, 0.282618), abs=2e-6)
    assert len(doc["constraint_residuals"]) == 4
    assert max(map(abs, doc["constraint_residuals"])) < 1e-10


def test_cp2b2_guess_and_errors(tmp_path, capsys):
    code, _ = run(["cp2b2", "--a", 2, "--m", 2, "--guess", -0.2, 1, -0.5, 0.3, "--json", tmp_path / "g.json"], capsys)
    assert code == 0
    base = cli.solution_from_document(load(tmp_path / "g.json"))
    assert base.constants["b"] == pytest.approx(-0.07443657742, abs=1e-10)
    assert run(["cp2b2", "--a", 1, "--m", 2, "--out", tmp_path], capsys)[0] == 2
    assert run(["cp2b2", "--a", 2, "--m", 1, "--out", tmp_path], capsys)[0] == 2
    # the reflected guess converges to the degenerate b = 0 point
    assert run(["cp2b2", "--guess", 0.1, 1, -0.5, 0.3, "--out", tmp_path], capsys)[0] == 1
    assert run(["cp2b2", "--max-iter", 1, "--out", tmp_path], capsys)[0] == 1


def test_tolerance_flags(tmp_path, capsys):
    assert run(["koiso-cao", "--abs-tol", 0, "--out", tmp_path], capsys)[0] == 2
    # a loose root tolerance is honoured, and the 1e-8 boundary check then flags it
    assert run(["koiso-cao", "--abs-tol", 1e-6, "--json", tmp_path / "k.json", "--out", tmp_path], capsys)[0] == 3
    assert load(tmp_path / "k.json")["provenance"]["abs_tol"] == 1e-6


def test_bad_usage_exits_2(capsys):
    assert run(["lpp"], capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2


@pytest.mark.parametrize("name", ["lpp_m2", "page", "koiso_cao", "cp2b2_a2_m2"])
def test_round_trip_verify(docs, name, capsys):
    doc = load(docs / f"{name}.json")
    sol = cli.solution_from_document(doc)
    for k, v in doc["constants"].items():
        assert sol.constants[k] == v
    assert run(["verify", docs / f"{name}.json"], capsys)[0] == 0


@pytest.mark.parametrize("name, key", [("lpp_m2", "b"), ("page", "b"), ("koiso_cao", "c"), ("cp2b2_a2_m2", "b")])
def test_verify_perturbed(docs, tmp_path, name, key, capsys):
    doc = load(docs / f"{name}.json")
    doc["constants"][key] += 0.01
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out = run(["verify", path], capsys)
    assert code == 3
    assert "FAIL" in out.out


def test_verify_malformed(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text("{not json")
    assert run(["verify", p], capsys)[0] == 2
    assert run(["verify", tmp_path / "missing.json"], capsys)[0] == 2
    p.write_text(json.dumps({"schema_version": "1", "family": "lpp", "constants": {"b": "x"}, "m": 2}))
    assert run(["verify", p], capsys)[0] == 2
    p.write_text(json.dumps({"schema_version": "9", "family": "lpp", "constants": {}}))
    assert run(["verify", p], capsys)[0] == 2


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def test_profile_koiso_cao(docs, tmp_path, capsys):
    out = tmp_path / "kc.csv"
    assert run(["profile", docs / "koiso_cao.json", "--samples", 5, "--out", out], capsys)[0] == 0
    header, rows = read_csv(out)
    assert header == ["t", "z", "F", "phi", "sigma", "ode_residual"]
    assert len(rows) == 5 and rows[-1][0] == 1.0
    assert abs(rows[-1][1]) < 1e-14
    script = out.with_suffix(".gp").read_text()
    assert "kc.csv" in script and "separator ','" in script


def test_profile_page_ode_column(docs, tmp_path, capsys):
    out = tmp_path / "page.csv"
    assert run(["profile", docs / "page.json", "--out", out], capsys)[0] == 0
    _, rows = read_csv(out)
    res = [r[5] for r in rows if not math.isnan(r[5])]
    assert len(res) >= 100 and max(map(abs, res)) < 1e-7


def test_profile_lpp_phi_monotone(docs, tmp_path, capsys):
    out = tmp_path / "lpp.csv"
    assert run(["profile", docs / "lpp_m2.json", "--samples", 201, "--out", out], capsys)[0] == 0
    _, rows = read_csv(out)
    phi = [r[3] for r in rows]
    assert all(x < y for x, y in zip(phi, phi[1:]))


def test_profile_invalid(docs, tmp_path, capsys):
    assert run(["profile", docs / "page.json", "--samples", 1, "--out", tmp_path / "x.csv"], capsys)[0] == 2
    assert run(["profile", docs / "cp2b2_a2_m2.json", "--out", tmp_path / "x.csv"], capsys)[0] == 2


def test_csv_deterministic_and_formatted(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["page", "--out", d], capsys)[0] == 0
    ba, bb = (a / "page.csv").read_bytes(), (b / "page.csv").read_bytes()
    assert ba == bb
    assert b"\r" not in ba
    line = ba.split(b"\n")[50].decode()
    assert line.split(",") == ["%.17g" % float(v) for v in line.split(",")]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "toricqe", "koiso-cao", "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "0.5276" in proc.stdout
