import json
import math

import numpy as np
import pytest

from nlolim.cli import main
from nlolim.eigensolver import GridSpec, PotentialSpec, solve_nonrel
from nlolim.io import load_spectrum
from nlolim.scan import ScanTable, scan_beta, scan_gamma_max, scan_gamma_min


def test_scan_gamma_max_values():
    t = scan_gamma_max(0.2, (0.5, 1.5), (0.5, 1.5), 3)
    assert t.values[1, 1] == pytest.approx(0.85, rel=1e-14)
    assert t.columns["gamma"][1, 1] == pytest.approx(3.4, rel=1e-14)
    assert t.mask.dtype == bool


def test_scan_gamma_min_values_and_sign_flip():
    t = scan_gamma_min((2 / 3, 1.0), (0.0, 0.5), 5)
    ident = t.values[-1, 0]
    assert ident == pytest.approx(-1.0, rel=1e-14)
    assert t.columns["gamma_int_upper"][-1, 0] == pytest.approx(-0.25, rel=1e-14)
    # at l00 = 2/3 any l10 > 0 pushes gamma positive
    assert t.mask[0, 1:].all() and not t.mask[-1, 0]


def test_scan_beta_columns_and_nan():
    t = scan_beta(0.0, (0.5, 1.0), (0.5, 1.0), 3)
    assert math.isnan(t.values[0, 1])  # l00 = 0.5 is below 2/3
    assert t.values[2, 2] == pytest.approx(1.0, rel=1e-14)
    assert t.columns["beta_int_published"][2, 2] == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(ValueError):
        scan_beta(normalization="other")


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_table_round_trip(fmt):
    t = scan_beta(0.1, (0.5, 2.0), (0.5, 2.0), 9)
    text = t.to_csv() if fmt == "csv" else t.to_json()
    back = ScanTable.from_csv(text) if fmt == "csv" else ScanTable.from_json(text)
    np.testing.assert_array_equal(back.axis1, t.axis1)
    np.testing.assert_array_equal(back.axis2, t.axis2)
    for k in t.columns:
        np.testing.assert_array_equal(back.columns[k], t.columns[k])
    np.testing.assert_array_equal(back.mask, t.mask)
    assert (back.to_csv() if fmt == "csv" else back.to_json()) == text


def test_csv_layout():
    lines = scan_gamma_min(grid_n=3).to_csv().splitlines()
    head = json.loads(lines[0][2:])
    assert lines[0].startswith("# ") and head["schema"] == "nlolim/1"
    assert lines[1].split(",")[:3] == ["l00", "l10", "gamma_int"]
    assert len(lines) == 2 + 9


def test_threads_do_not_change_results():
    a = scan_beta(0.2, grid_n=41, threads=1)
    b = scan_beta(0.2, grid_n=41, threads=4)
    assert a.to_csv() == b.to_csv()


@pytest.fixture
def ho_config(tmp_path):
    p = tmp_path / "ho.json"
    p.write_text(json.dumps({"potential": {"kind": "harmonic", "omega": 1.0},
                             "grid": {"x_min": -10, "x_max": 10, "n_points": 2001}}))
    return p


def run(argv, capsys):
    rc = main([str(a) for a in argv])
    return rc, capsys.readouterr()


def test_solve_nonrel_matches_library(ho_config, tmp_path, capsys):
    out = tmp_path / "s.json"
    rc, cap = run(["solve", "--config", ho_config, "--nonrel", "--states", 8, "--out", out], capsys)
    assert rc == 0
    assert cap.out.startswith("n,E_n,E_n0,lambda_nn")
    es = solve_nonrel(PotentialSpec.harmonic(), GridSpec(-10, 10, 2001), 8)
    doc = json.loads(out.read_text())
    np.testing.assert_array_equal(doc["metadata"]["eigenvalues"], es.eigenvalues)
    s, lam, _ = load_spectrum(out)
    np.testing.assert_array_equal(lam.values, np.eye(8))
    assert s.n_levels == 8


def test_solve_then_sumrules(ho_config, tmp_path, capsys):
    out = tmp_path / "s.json"
    assert run(["solve", "--config", ho_config, "--states", 20, "--out", out], capsys)[0] == 0
    rc, cap = run(["sumrules", out, "--format", "json"], capsys)
    assert rc == 0
    doc = json.loads(cap.out)
    row = next(r for r in doc["rows"] if r["k"] == 0 and r["n"] == 0)
    assert abs(row["residual_rel"]) < 1e-5
    assert abs(row["residual_rel"]) < abs(row["residual_nonrel"])


def test_ansatz_then_sumrules(tmp_path, capsys):
    out = tmp_path / "a.json"
    argv = ["three-level", "ansatz", "--X", 0.5, "--E", 0.4, "--l00", 0.95, "--l11", 0.9,
            "--l10", 0.05, "--l20", 0.02, "--out", out]
    assert run(argv, capsys)[0] == 0
    rc, cap = run(["sumrules", out, "--format", "json"], capsys)
    doc = json.loads(cap.out)
    assert max(abs(v) for v in doc["constructed_rules"].values()) < 1e-12
    assert max(abs(r["residual_rel"]) for r in doc["rows"] if r["k"] <= 1 and r["n"] == 0) < 1e-12


def test_hydrogenic_command(capsys):
    rc, cap = run(["hydrogenic", "--z-max", 5], capsys)
    assert rc == 0
    lines = cap.out.splitlines()
    assert json.loads(lines[0][2:])["primary"] == "gamma_isolated_ratio"
    assert lines[1].startswith("z,gamma_raw_ratio,gamma_isolated_ratio")
    assert len(lines) == 7


def test_consistency_command(capsys):
    rc, cap = run(["consistency", "--samples", 50, "--seed", 3], capsys)
    assert rc == 0 and "verdict:" in cap.out and "seed 3" in cap.out


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"l10": 0.2, "grid_n": 3, "format": "json"}))
    rc, cap = run(["three-level", "scan-gamma-max", "--config", cfg, "--grid-n", 5], capsys)
    doc = json.loads(cap.out)
    assert doc["metadata"]["fixed"]["l10"] == 0.2
    assert len(doc["axis1"]["values"]) == 5


def test_exit_codes(ho_config, tmp_path, capsys):
    assert run(["solve"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["solve", "--config", bad], capsys)[0] == 2
    assert run(["solve", "--config", ho_config, "--x-range=-3,3", "--states", 30], capsys)[0] == 3
    assert run(["sumrules", tmp_path / "missing.json"], capsys)[0] == 4
    assert run(["consistency", "--samples", 5, "--out", tmp_path / "no" / "dir.txt"], capsys)[0] == 4
    assert run(["three-level", "scan-beta", "--threads", 0], capsys)[0] == 2
    assert run(["three-level", "ansatz", "--X", 0.5], capsys)[0] == 2


def test_schema_is_checked(tmp_path, capsys):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"schema": "other/9", "energies": [0, 1], "moments": [[0, 1], [1, 0]]}))
    assert run(["sumrules", p], capsys)[0] == 2
