import csv
import io
import json

import pytest

from dynrefl.cli import load_config, main, markdown_table


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_reference_suite_n2(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--suite", "paper", "--n", "2", "--out", str(tmp_path))
    assert code == 0
    reports = sorted(tmp_path.glob("*.json"))
    assert len(reports) >= 20
    data = json.loads(reports[0].read_text())
    assert set(data) >= {"identity", "anchor", "mode", "seed", "pass", "witness", "millis"}
    table = (tmp_path / "summary.md").read_text()
    assert "dynYBEnou-a" in table and "theo:tau" in table


def test_verify_reference_suite_n4_random(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "paper", "--n", "4", "--mode", "random", "--seed", "7")
    assert code == 0
    assert "26/26 as expected" in out


def test_verify_findings_exit_zero(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "findings", "--n", "2")
    assert code == 0
    assert "printed-D:dYBE-d" in out


def test_every_report_has_anchor(capsys, tmp_path):
    run(capsys, "verify", "--suite", "findings", "--n", "2", "--out", str(tmp_path))
    for p in tmp_path.glob("*.json"):
        assert json.loads(p.read_text())["anchor"]


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[campaign small]\nsuite = paper\nn = 2\nmode = random\nseed = 3\nout = %s\n" % (tmp_path / "o"))
    code, out, _ = run(capsys, "verify", "--config", str(cfg))
    assert code == 0 and (tmp_path / "o" / "summary.md").exists()
    camps = load_config(cfg)
    assert camps[0]["name"] == "small" and camps[0]["seed"] == 3


@pytest.mark.parametrize("text", ["[campaign x]\nn = two\n", "[other]\nn = 2\n", "[campaign x]\ncolour = red\n", "", "no section\n"])
def test_malformed_config_exits_2(capsys, tmp_path, text):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(text)
    code, _, err = run(capsys, "verify", "--config", str(cfg))
    assert code == 2 and "error" in err


def test_bad_suite_in_config(capsys, tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[campaign x]\nsuite = nope\n")
    code, _, err = run(capsys, "verify", "--config", str(cfg))
    assert code == 2 and "unknown suite" in err


def test_missing_config_exits_2(capsys, tmp_path):
    code, _, _ = run(capsys, "verify", "--config", str(tmp_path / "absent.ini"))
    assert code == 2


def test_unknown_builder_exits_2(capsys):
    code, _, _ = run(capsys, "build", "no-such-builder")
    assert code == 2


def test_build_hamiltonian_n3(capsys):
    code, out, _ = run(capsys, "build", "hamiltonian", "--n", "3")
    assert code == 0
    data = json.loads(out)
    assert data["registry"][:4] == ["q1", "q2", "q3", "mu"]
    assert len(data["terms"]) == 3


@pytest.mark.parametrize("what", ["bcd-from-a", "dual", "fuse", "dress", "monodromy"])
def test_build_outputs_json(capsys, tmp_path, what):
    dest = tmp_path / f"{what}.json"
    code, _, _ = run(capsys, "build", what, "--n", "2", "--out", str(dest))
    assert code == 0
    assert json.loads(dest.read_text())


def test_build_bcd_quadruple(capsys):
    code, out, _ = run(capsys, "build", "bcd-from-a", "--n", "2")
    data = json.loads(out)
    assert set(data) >= {"A", "B", "C", "D", "signature"}


def eigen_rows(capsys, *extra):
    code, out, err = run(capsys, "eigen", *extra)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    return rows, err


def test_eigen_equal_masses(capsys):
    rows, err = eigen_rows(capsys, "--k", "2", "--m1", "1.5", "--m2", "1.5", "--samples", "20")
    assert len(rows) == 20
    assert max(float(r["residual"]) for r in rows) <= 1e-9
    assert "max relative residual" in err


def test_eigen_k0_sin_zero(capsys):
    rows, _ = eigen_rows(capsys, "--k", "0", "--parity", "sin", "--samples", "5")
    assert all(float(r["value"]) == 0.0 for r in rows)


def test_eigen_displayed_mode_reports_residual(capsys):
    rows, err = eigen_rows(capsys, "--k", "1", "--m1", "2", "--m2", "1", "--exponent", "displayed")
    assert "exponent=displayed" in err
    assert max(float(r["residual"]) for r in rows) > 1e-3


def test_report_aggregates(capsys, tmp_path):
    run(capsys, "verify", "--suite", "paper", "--n", "2", "--out", str(tmp_path))
    code, out, _ = run(capsys, "report", str(tmp_path))
    assert code == 0 and "| dYBE-a |" in out
    empty = tmp_path / "empty"
    empty.mkdir()
    code, _, _ = run(capsys, "report", str(empty))
    assert code == 2


def test_jobs_match_serial(capsys, tmp_path):
    run(capsys, "verify", "--suite", "findings", "--n", "2", "--no-timing", "--out", str(tmp_path / "a"))
    run(capsys, "verify", "--suite", "findings", "--n", "2", "--no-timing", "--jobs", "2", "--out", str(tmp_path / "b"))
    for p in (tmp_path / "a").iterdir():
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_markdown_table_counts():
    rows = [{"item": "x", "anchor": "a", "mode": "exact", "seed": None, "pass": False, "expected": False}]
    assert "1/1 identities" in markdown_table(rows, "t")
