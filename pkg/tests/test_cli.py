import json
from datetime import datetime, timezone

import numpy as np
import pytest

from co2forecast.cli import emit_report, load_json_report, read_config, run
from co2forecast.evaluation import run_benchmark
from co2forecast.exceptions import ConfigError
from co2forecast.models import ArimaForecaster
from co2forecast.series import HourlySeries, write_csv


@pytest.fixture
def csv_path(tmp_path):
    t = np.arange(1248)
    x = 300 + 50 * np.sin(2 * np.pi * t / 24) + 0.1 * t + np.random.default_rng(0).normal(0, 3, t.size)
    p = tmp_path / "in.csv"
    write_csv(HourlySeries(datetime(2019, 1, 1, tzinfo=timezone.utc), x), p)
    return p


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "manifest.json"}


def test_forecast_method1(csv_path, tmp_path):
    out = tmp_path / "o"
    assert run(["forecast", "--input", str(csv_path), "--out", str(out), "--model", "method1",
                "--horizon", "48"]) == 0
    lines = (out / "forecast.csv").read_text().splitlines()
    assert lines[0] == "timestamp,forecast" and len(lines) == 49
    assert lines[1].startswith("2019-02-22T00:00:00Z,")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 0 and "numpy" in manifest["versions"]
    assert manifest["wall_time_s"] >= 0


def test_usage_errors(csv_path, tmp_path, capsys):
    assert run(["forecast", "--input", str(csv_path), "--out", str(tmp_path), "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err
    assert run(["nope"]) == 1
    assert run(["forecast", "--out", str(tmp_path)]) == 1
    assert run(["forecast", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "x")]) == 1
    assert run(["forecast", "--help"]) == 0


def test_config_file_and_override(csv_path, tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("# test\nmodel = arima\norder = 1,0,0\nhorizon = 6\n")
    out = tmp_path / "o"
    assert run(["forecast", "--config", str(cfg), "--input", str(csv_path), "--out", str(out),
                "--horizon", "3"]) == 0
    assert len((out / "forecast.csv").read_text().splitlines()) == 4
    assert "horizon = 3" in (out / "run.cfg").read_text()
    cfg.write_text("colour = blue\n")
    assert run(["forecast", "--config", str(cfg), "--input", str(csv_path), "--out", str(out)]) == 1
    with pytest.raises(ConfigError):
        bad = tmp_path / "b.cfg"
        bad.write_text("no equals sign\n")
        read_config(bad)


def test_replay_is_byte_identical(csv_path, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["benchmark", "--input", str(csv_path), "--methods", "arima,psf", "--order", "2,0,1",
            "--patches", "3", "--patch-len", "500", "--horizon", "24", "--seed", "5", "--friedman"]
    assert run([*args, "--out", str(a)]) == 0
    assert run(["benchmark", "--config", str(a / "run.cfg"), "--out", str(b)]) == 0
    assert _files(a) == _files(b)
    assert {"benchmark.csv", "benchmark.json", "friedman.csv", "run.cfg"} <= set(_files(a))


def test_decompose_outputs(csv_path, tmp_path):
    out = tmp_path / "c"
    assert run(["decompose", "--input", str(csv_path), "--out", str(out)]) == 0
    lines = (out / "components.csv").read_text().splitlines()
    assert lines[0] == "original,seasonal,trend,random" and len(lines) == 1249
    out = tmp_path / "e"
    assert run(["decompose", "--method", "eemd", "--ensemble-size", "3", "--input", str(csv_path),
                "--out", str(out)]) == 0
    assert (out / "split.csv").read_text().splitlines()[0] == "high,low,trend"
    assert (out / "imfs.csv").read_text().splitlines()[0].endswith("residual")


def test_schedule_savings_ratio_stats(tmp_path):
    t = np.arange(24 * 61)
    p = tmp_path / "long.csv"
    write_csv(HourlySeries(datetime(2020, 1, 1, tzinfo=timezone.utc),
                           200 + 40 * np.sin(2 * np.pi * t / 24)), p)
    common = ["--input", str(p), "--model", "psf", "--train-len", "400"]
    assert run(["schedule", *common, "--duration", "4", "--date", "2020-02-10",
                "--out", str(tmp_path / "s")]) == 0
    summary = json.loads((tmp_path / "s" / "summary.json").read_text())
    assert len(summary["chosen_hours"]) == 4
    assert run(["savings", *common, "--durations", "1..24", "--out", str(tmp_path / "v")]) == 0
    rows = (tmp_path / "v" / "savings.csv").read_text().splitlines()
    assert rows[0] == "duration,scheduled,baseline,ratio" and len(rows) == 25
    assert rows[-1].endswith(",1")
    assert run(["ratio-stats", *common, "--iterations", "3", "--out", str(tmp_path / "r")]) == 0
    assert len((tmp_path / "r" / "ratio_stats.csv").read_text().splitlines()) == 49


def test_emit_report(tmp_path):
    emit_report([], "csv", tmp_path / "e.csv", columns=["a", "b"])
    assert (tmp_path / "e.csv").read_text() == "a,b\n"
    rows = [{"a": 1 / 3, "b": None}, {"a": 12345678.9, "b": "x"}]
    emit_report(rows, "csv", tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text() == "a,b\n0.333333,\n1.23457e+07,x\n"
    emit_report(rows, "csv", tmp_path / "r2.csv")
    assert (tmp_path / "r.csv").read_bytes() == (tmp_path / "r2.csv").read_bytes()


def test_json_round_trip(tmp_path):
    t = np.arange(600)
    x = 10 + np.sin(2 * np.pi * t / 24) + np.random.default_rng(1).normal(0, 0.1, 600)
    rep = run_benchmark(x, {"ar": ArimaForecaster(order=(1, 0, 0))}, n_patches=2, patch_len=300,
                        horizon=12, seed=2)
    emit_report(rep, "json", tmp_path / "r.json")
    assert load_json_report(tmp_path / "r.json") == rep
