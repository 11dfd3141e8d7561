import csv
import json

import pytest

from mchcasimir import cli
from mchcasimir.errors import RangeError, UnknownField


def write(tmp_path, obj, name="cfg.json"):
    f = tmp_path / name
    f.write_text(json.dumps(obj))
    return f


def test_minimal_config_gets_defaults(tmp_path):
    cfg = cli.validate_config(write(tmp_path, {}))
    assert cfg.n_max == 10
    assert cfg.pipelines == ("semiclassical", "qed-analytic", "energy")
    assert cfg.quadrature["eps_ladder"] == [0.32, 0.16, 0.08, 0.04]


def test_negative_frequency_is_range_error(tmp_path):
    f = write(tmp_path, {"molecule": {"m_N": 1836, "omega_x": -1, "omega_y": 1e-4, "omega_z": 1e-4}})
    with pytest.raises(RangeError):
        cli.validate_config(f)


def test_misspelled_field_named(tmp_path):
    with pytest.raises(UnknownField) as ei:
        cli.validate_config(write(tmp_path, {"quadrature": {"eps_ladr": [0.1, 0.05]}}))
    assert "quadrature.eps_ladr" in str(ei.value)


def test_unordered_sweep_rejected(tmp_path):
    with pytest.raises(RangeError):
        cli.validate_config(write(tmp_path, {"sweep": {"param": "B0", "from": 2, "to": 1, "steps": 3}}))


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["validate", "--config", str(write(tmp_path, {}))]) == 0
    assert cli.main(["validate", "--config", str(write(tmp_path, {"nmax": 3}))]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["validate", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "cli.ParseError" in err


def test_nonconvergence_exit_code(tmp_path):
    f = write(tmp_path, {"pipelines": ["semiclassical"],
                         "quadrature": {"eps_ladder": [0.9, 0.6], "rel_tol": 1e-12}})
    assert cli.main(["compute", "--config", str(f), "--out", str(tmp_path / "o")]) == 3


def test_sweep_rows_and_determinism(tmp_path, capsys):
    f = write(tmp_path, {})
    args = ["sweep", "--config", str(f), "--param", "B0_z", "--from", "1e-7", "--to", "1e-6", "--steps", "5"]
    assert cli.main(args) == 0
    first = capsys.readouterr().out
    assert cli.main(args) == 0
    assert capsys.readouterr().out == first
    rows = list(csv.reader(first.splitlines()))
    assert rows[0] == cli.COLUMNS
    assert len(rows) == 6


def test_parallel_sweep_keeps_order(tmp_path):
    cfg = cli.RunConfig.from_dict({"pipelines": ["qed-analytic", "energy"]})
    assert cli.sweep_csv(cfg, "C", 1e-13, 5e-13, 4, jobs=2) == cli.sweep_csv(cfg, "C", 1e-13, 5e-13, 4)


def test_every_row_records_settings_and_conserves_K(tmp_path):
    cfg = cli.RunConfig.from_dict({"pipelines": ["qed-analytic"],
                                   "molecule": {"m_N": 1836.15, "omega": [0.99e-4, 1e-4, 1.013e-4],
                                                "curlyC": 1e-3, "Q0": [0, 0, 1e-15]}})
    text = cli.sweep_csv(cfg, "B0_z", 1e-7, 1e-6, 3)
    rows = list(csv.DictReader(text.splitlines()))
    for r in rows:
        assert r["n_max"] == "10" and r["eps_ladder"] and r["k_panels"] == "59"
        assert float(r["K_residual"]) == 0.0
        assert r["P_sc_z"] == ""


def test_compute_writes_csv_and_sidecar(tmp_path):
    f = write(tmp_path, {"output": {"dir": str(tmp_path / "x"), "csv": "r.csv"}})
    assert cli.main(["compute", "--config", str(f)]) == 0
    assert (tmp_path / "x" / "r.csv").exists()
    prov = json.loads((tmp_path / "x" / "provenance.json").read_text())
    assert prov["command"] == "compute" and prov["columns"] == cli.COLUMNS
    a = (tmp_path / "x" / "r.csv").read_bytes()
    assert cli.main(["compute", "--config", str(f)]) == 0
    assert (tmp_path / "x" / "r.csv").read_bytes() == a


def test_sweep_with_out_dir(tmp_path):
    f = write(tmp_path, {"sweep": {"param": "omega_0", "from": 5e-5, "to": 2e-4, "steps": 3},
                         "pipelines": ["qed-analytic"]})
    out = tmp_path / "s"
    assert cli.main(["sweep", "--config", str(f), "--out", str(out)]) == 0
    assert len((out / "results.csv").read_text().splitlines()) == 4
    assert json.loads((out / "provenance.json").read_text())["sweep"]["param"] == "omega_0"


def test_si_units_config(tmp_path):
    raw = {"units": "si", "pipelines": ["qed-analytic"],
           "molecule": {"m_N": 1.67262192e-27, "omega": [1.2e16, 1.21e16, 1.225e16], "curlyC": 1e-3,
                        "B0": [0, 0, 10.0]}}
    cfg = cli.RunConfig.from_dict(raw)
    p = cfg.params()
    geo = (1.2e16 * 1.21e16 * 1.225e16) ** (1 / 3)
    assert p.omega_0 == pytest.approx(geo / 7.763440407e20, rel=1e-3)
    assert p.B0[2] > 0


def test_apply_sweep_variants(p0):
    assert cli.apply_sweep(p0, "B0", 2e-6).B0_norm == pytest.approx(2e-6)
    assert cli.apply_sweep(p0, "omega_0", 2e-4).omega_0 == pytest.approx(2e-4)
    assert cli.apply_sweep(p0, "Q0_y", 1.0).Q0 == (0.0, 1.0, 0.0)


def test_selftest_filter(capsys):
    assert cli.main(["selftest", "--filter", "scaling_law"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1 and out[0].startswith("PASS [6]")
