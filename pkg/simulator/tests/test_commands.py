import json
import os

import pandas as pd
import pytest

from simulator.commands import correlations, decay_fit, epsilon, histories, kernel, partition, validate
from simulator.main import main
from simulator.schemas.run_config import RunConfig
from simulator.utils.errors import ValidationFailed


def _read(result, fmt):
    path = result["written"][fmt]
    if fmt == "csv":
        return pd.read_csv(path)
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def test_partition_prints_table(run_config, capsys):
    result = partition.run(run_config)
    lines = capsys.readouterr().out.splitlines()
    assert lines == [
        "(0,0)  {I, Z1Z2Z3}  ->  I",
        "(1,0)  {Z1, Z2Z3}  ->  Z1",
        "(1,1)  {Z2, Z1Z3}  ->  Z2",
        "(0,1)  {Z3, Z1Z2}  ->  Z3",
    ]
    frame = _read(result, "csv")
    assert list(frame["recovery"]) == ["I", "Z1", "Z2", "Z3"]


def test_epsilon_without_coupling_is_zero(tmp_path):
    config = RunConfig(output_path=str(tmp_path), lam=0.0)
    frame = _read(epsilon.run(config), "csv")
    assert list(frame.columns) == epsilon.COLUMNS
    assert (frame["epsilon"] == 0).all()


def test_epsilon_matches_closed_form(run_config):
    frame = _read(epsilon.run(run_config), "csv")
    assert (abs(frame["epsilon"] / frame["closed_form"] - 1) < 1e-12).all()


def test_kernel_table(run_config):
    frame = _read(kernel.run(run_config), "csv")
    assert list(frame.columns) == ["dx", "dt", "ReC", "ImC"]
    assert len(frame) == len(run_config.kernel_dx_values) * len(run_config.kernel_dt_values)


def test_kernel_table_without_ordering_part(tmp_path):
    result = kernel.run(RunConfig(output_path=str(tmp_path), s=0.0, lam=0.1))
    frame = _read(result, "csv")
    assert frame["ImC"].isna().all()
    assert frame["ReC"].notna().all()
    assert _read(result, "json")["diagnostics"]["imaginary_part_omitted"] is True


def test_exact_histories(run_config):
    result = histories.run(run_config)
    frame = _read(result, "csv")
    assert len(frame) == 16
    assert frame["probability"].sum() == pytest.approx(1.0, abs=1e-8)
    assert frame["probability"].between(0, 1).all()
    assert (abs(frame["rho_00"] + frame["rho_11"] - 1) < 1e-10).all()
    payload = _read(result, "json")
    assert set(payload) == {"config", "results", "diagnostics"}
    assert (frame["imag_residual"] < 1e-12).all()
    assert payload["diagnostics"]["max_imag_residual"] == pytest.approx(frame["imag_residual"].max())
    assert payload["config"]["lambda"] == 0.1


def test_reruns_are_byte_identical(run_config):
    first = histories.run(run_config)
    with open(first["written"]["csv"], "rb") as handle:
        csv_bytes = handle.read()
    with open(first["written"]["json"], "rb") as handle:
        json_bytes = handle.read()
    second = histories.run(run_config)
    with open(second["written"]["csv"], "rb") as handle:
        assert handle.read() == csv_bytes
    with open(second["written"]["json"], "rb") as handle:
        assert handle.read() == json_bytes


def test_sampled_histories_ignore_worker_count(tmp_path):
    frames = []
    for workers in (1, 3):
        config = RunConfig(output_path=str(tmp_path / str(workers)), lam=0.1, cycles=2, mode="montecarlo",
                           samples=3000, workers=workers)
        frames.append(_read(histories.run(config), "csv"))
    pd.testing.assert_frame_equal(frames[0], frames[1])


def test_ope_histories(tmp_path):
    config = RunConfig(output_path=str(tmp_path), lam=0.1, cycles=10, mode="ope")
    payload = _read(histories.run(config), "json")
    assert payload["results"]["p2"]["total"] == pytest.approx(0.026636, rel=1e-3)


def test_correlations_report(tmp_path):
    config = RunConfig(output_path=str(tmp_path), lam=0.05, min_separation=4, max_separation=7)
    result = correlations.run(config)
    frame = _read(result, "csv")
    assert list(frame.columns) == correlations.COLUMNS
    assert list(frame["separation"]) == [4, 5, 6, 7]
    assert (frame["exact_connected"] > 0).all()
    ratio = frame["exact_connected"] / frame["ope_predicted"]
    assert ratio.between(0.75, 1.25).all()
    fits = _read(result, "json")["results"]["fits"]["0"]
    assert fits["predicted_exponent"] == 4.0
    assert fits["ope"]["exponent"] == pytest.approx(4.0, abs=1e-9)


def test_correlations_in_ope_mode_skip_exact(tmp_path):
    config = RunConfig(output_path=str(tmp_path), mode="ope", pulses_per_cycle=1)
    frame = _read(correlations.run(config), "csv")
    assert sorted(frame["pulses"].unique()) == [0, 1]
    assert frame["exact_connected"].isna().all()


def test_decay_fit_in_ope_mode(tmp_path):
    config = RunConfig(output_path=str(tmp_path), mode="ope", pulses_per_cycle=1, s_values=[1.0])
    frame = _read(decay_fit.run(config), "csv")
    fitted = dict(zip(frame["pulses"], frame["fitted_exponent"]))
    assert fitted[0] == pytest.approx(4.0, abs=1e-9)
    assert fitted[1] == pytest.approx(8.0, abs=1e-9)


def test_validate_writes_report_before_failing(run_config, monkeypatch):
    report = {"passed": False, "checks": [{"name": "always_fails", "passed": False, "discrepancy": 1.0,
                                            "tolerance": 0.0, "detail": {}}]}
    monkeypatch.setattr(validate, "run_validation_suite", lambda config: report)
    with pytest.raises(ValidationFailed):
        validate.run(run_config)
    with open(os.path.join(run_config.output_path, "validate.json"), encoding="utf-8") as handle:
        assert json.load(handle)["diagnostics"]["failed"] == ["always_fails"]


def test_main_exit_codes(tmp_path):
    out = str(tmp_path)
    assert main(["partition", "--output-path", out]) == 0
    assert main(["histories", "--output-path", out, "--mode", "sometimes"]) == 2
    assert main(["histories", "--output-path", out, "--cycles", "6", "--history-limit", "5"]) == 3
    assert main(["histories", "--output-path", out, "--qubit-positions", "0,1"]) == 65


def test_main_reads_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(f"[bath]\nlambda = 0.0\n[run]\noutput_path = {tmp_path}\n")
    assert main(["epsilon", "--config", str(path)]) == 0
    frame = pd.read_csv(tmp_path / "epsilon.csv")
    assert (frame["epsilon"] == 0).all()
