import csv
import io
import json
from dataclasses import replace

import pytest

from risbody import cli, fim, harness
from risbody.config import ConfigError, default_config, default_config_text, loads
from risbody.validation import run_validation_suite

SMALL = """
[sweep]
n_u = [1, 4]
l_r_m = [0.03]
seeds = [0, 1]
"""


@pytest.fixture(scope="module")
def config():
    return default_config()


@pytest.fixture(scope="module")
def small():
    return loads(SMALL)


def write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_default_config_matches_setup(config):
    s = config.setup
    assert s.wavelength_m == 0.003 and s.subcarriers == 256 and s.p_tx_dbm == 23.0
    assert s.transmitter == (0.0, 0.0, 4.0) and s.receiver == (2.0, 3.0, 4.0)
    assert s.sensors[1].position == (2.0, 2.3, 4.0)
    assert s.sensors[1].angles == (0.15, 0.12, 0.1)
    assert config.n_u == (1, 2, 4, 8, 16, 32, 64)
    assert len(config.seeds) == 11
    assert config.reference_curves == ()
    assert len(config.sha256) == 64


@pytest.mark.parametrize(
    "text",
    [
        "[sweep]\nregime = 'mid'\n",
        "[sweep]\nn_u = [0, 4]\n",
        "[sweep]\nl_r_m = [-0.03]\n",
        "[sweep]\nseeds = []\n",
        "[sweep]\nsensors = [3]\n",
        "[geometry]\np_u_m = [0.0, 0.0, 4.0]\n",
        "[geometry]\np_b_m = [0.0, 4.0]\n",
        "[numerology]\nwavelength_m = 0\n",
        "[[reference_curves]]\nlabel = 'x'\nquantity = 'speed'\nvalue = 1\n",
        "not toml = = 1",
    ],
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        loads(text)


def test_overrides(small):
    assert small.with_overrides(seed=7).seeds == (7,)
    assert small.with_overrides(regime="far").regime == "far"
    with pytest.raises(ConfigError):
        small.with_overrides(regime="mid")


def test_fraunhofer_curve(config):
    result = harness.run_fraunhofer_curve(config)
    rows = {(r["f_c_hz"], r["l_r_m"]): r["d_f_m"] for r in result.rows}
    assert rows[(10e9, 0.08)] == pytest.approx(0.853, rel=0.01)
    assert rows[(100e9, 0.03)] == pytest.approx(1.2, rel=0.01)
    for f in config.fraunhofer_f_c_hz:
        values = [r["d_f_m"] for r in result.rows if r["f_c_hz"] == f]
        assert all(b > a for a, b in zip(values, values[1:]))
    with pytest.raises(ConfigError):
        harness.run_fraunhofer_curve(replace(config, fraunhofer_l_r_m=()))


def test_scenario1_rows(small):
    result = harness.run_scenario1_sweep(small)
    assert len(result.rows) == 2 * 2 * 2
    assert result.columns == harness.SCENARIO1_COLUMNS
    for row in result.rows:
        assert row["identifiable"] == (row["n_u"] > 1)
        assert row["receiver_in_near_field"]


def test_far_control_run_never_identifiable(small):
    result = harness.run_scenario1_sweep(small.with_overrides(regime="far"))
    assert not any(result.column("identifiable"))


def test_csv_deterministic_and_parallel_order(small):
    serial = harness.run_scenario2_sweep(small).to_csv()
    assert harness.run_scenario2_sweep(small).to_csv() == serial
    assert harness.run_scenario2_sweep(small, parallel=2).to_csv() == serial
    header = next(csv.reader(io.StringIO(serial)))
    assert tuple(header) == harness.SCENARIO2_COLUMNS


def test_csv_quoting():
    text = harness.format_csv(("label", "value"), [{"label": 'gyro, "1 s"', "value": 0.5}])
    assert text == 'label,value\r\n"gyro, ""1 s""",0.5\r\n'


def test_outputs_and_manifest(tmp_path, small):
    cfg = replace(small, reference_curves=loads(
        "[[reference_curves]]\nlabel = 'IMU, hybrid'\nquantity = 'position_m'\nvalue = 0.02\n"
    ).reference_curves)
    result = harness.run_scenario1_sweep(cfg)
    manifest = harness.write_outputs(result, cfg, tmp_path)
    saved = json.loads((tmp_path / "scenario1.manifest.json").read_text())
    assert saved == manifest
    assert saved["config_sha256"] == small.sha256
    assert saved["seeds"] == [0, 1] and saved["version"] == "0.1.0" and saved["wall_time_s"] >= 0
    assert set(saved["files"]) == {"scenario1.csv", "reference_curves.csv"}
    refs = list(csv.DictReader(io.StringIO((tmp_path / "reference_curves.csv").read_text())))
    assert refs == [{"label": "IMU, hybrid", "quantity": "position_m", "value": "0.02"}]


def test_cli_byte_identical(tmp_path):
    cfg = write(tmp_path, SMALL)
    for out in ("a", "b"):
        assert cli.main(["scenario1", "--config", str(cfg), "--out", str(tmp_path / out)]) == 0
    assert (tmp_path / "a" / "scenario1.csv").read_bytes() == (tmp_path / "b" / "scenario1.csv").read_bytes()


def test_cli_seed_and_regime(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert cli.main(["scenario2", "--config", str(cfg), "--seed", "9", "--regime", "far", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "scenario2.csv").read_text())))
    assert {r["seed"] for r in rows} == {"9"} and {r["regime"] for r in rows} == {"far"}


def test_cli_config_errors(tmp_path, capsys):
    assert cli.main(["scenario1", "--config", str(tmp_path / "missing.toml")]) == 2
    assert cli.main(["scenario1", "--config", str(write(tmp_path, "[sweep]\nregime='x'\n"))]) == 2
    tm = write(tmp_path, "[numerology]\nsymbols = 2\n" + SMALL)
    assert cli.main(["scenario1", "--config", str(tm), "--out", str(tmp_path)]) == 2
    assert "insufficient symbols" in capsys.readouterr().err


def test_validation_passes_on_default(config):
    report = run_validation_suite(config)
    assert report.passed, "\n".join(report.lines())
    modules = {c.module for c in report.checks}
    assert modules == {"geometry", "ris-codes", "channel", "fim", "bounds"}


def test_validation_names_corrupted_module(config, monkeypatch):
    original = fim._near_path_derivatives
    monkeypatch.setattr(fim, "_near_path_derivatives", lambda *a: 1.01 * original(*a))
    report = run_validation_suite(config)
    assert not report.passed
    assert {c.module for c in report.failures()} == {"fim"}


def test_validation_reports_code_precondition(tmp_path, capsys):
    text = default_config_text().replace("symbols = 16", "symbols = 2")
    cfg = write(tmp_path, text)
    assert cli.main(["validate", "--config", str(cfg)]) == 1
    out = capsys.readouterr().out
    assert "FAIL [ris-codes]" in out and "insufficient symbols for separability" in out


def test_cli_validate_success(capsys):
    assert cli.main(["validate"]) == 0
    assert "validation passed" in capsys.readouterr().out


def test_medians(small):
    result = harness.run_scenario1_sweep(small)
    med = harness.medians(result, "lambda_min")
    assert med[(0.03, 1)] == 0.0 and med[(0.03, 4)] > 0


def test_empty_config_equals_default(config):
    empty = loads("")
    assert replace(empty, sha256="") == replace(config, sha256="")
