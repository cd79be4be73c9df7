"""End-to-end CLI runs: temp configs in, CSV/JSON/WAV artifacts out."""

import json
import pathlib
import subprocess
import sys

import numpy as np
import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource
from scipy.io import wavfile

from wavekit.cli import main
from wavekit.config import load_mtsfm_coefficients

SCHEMA_DIR = pathlib.Path(__file__).resolve().parents[1] / "docs" / "schemas"


def _validator(schema_name):
    contents = {p.name: json.loads(p.read_text())
                for p in SCHEMA_DIR.glob("*.schema.json")}
    resources = [Resource.from_contents(c) for c in contents.values()]
    registry = Registry().with_resources([(r.id(), r) for r in resources])
    return Draft202012Validator(contents[schema_name], registry=registry)


def _config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def _csv(path):
    lines = pathlib.Path(path).read_text().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def _assert_single_header(path):
    lines = pathlib.Path(path).read_text().splitlines()
    assert lines.count(lines[0]) == 1


CW_SYNTH = {"command": "synth",
            "waveform": {"kind": "cw", "duration_s": 1.0},
            "sample_rate_hz": 1000.0}


# ----------------------------------------------------------------------- synth

def test_synth_writes_csv_json_and_wav(tmp_path):
    cfg = _config(tmp_path, CW_SYNTH)
    out = tmp_path / "out"
    assert main(["synth", "--config", cfg, "--out", str(out),
                 "--format", "csv,json,wav"]) == 0

    header, rows = _csv(out / "waveform.csv")
    assert header == ["index", "t_s", "re", "im"]
    assert len(rows) == 1000
    _assert_single_header(out / "waveform.csv")
    assert rows[0][0] == "0"
    assert float(rows[0][1]) == pytest.approx(0.0005, abs=1e-9)
    assert float(rows[0][2]) == pytest.approx(1.0 / np.sqrt(1000.0), abs=1e-6)
    assert float(rows[0][3]) == 0.0

    metrics = json.loads((out / "metrics.json").read_text())
    _validator("metrics.schema.json").validate(metrics)
    assert metrics["tbp"] == pytest.approx(2.0)  # CW: B = 2/T
    assert metrics["sample_rate_hz"] == 1000.0

    rate, data = wavfile.read(out / "waveform.wav")
    assert rate == 1000
    assert data.dtype == np.float32
    assert data.shape == (1000,)


def test_synth_format_filter_limits_outputs(tmp_path):
    cfg = _config(tmp_path, CW_SYNTH)
    out = tmp_path / "csv_only"
    assert main(["synth", "--config", cfg, "--out", str(out),
                 "--format", "csv"]) == 0
    assert (out / "waveform.csv").exists()
    assert not (out / "metrics.json").exists()
    assert not (out / "waveform.wav").exists()

    out2 = tmp_path / "json_only"
    assert main(["synth", "--config", cfg, "--out", str(out2),
                 "--format", "json"]) == 0
    assert not (out2 / "waveform.csv").exists()
    assert (out2 / "metrics.json").exists()


# --------------------------------------------------------------------- analyze

def test_analyze_bundle(tmp_path):
    cfg = _config(tmp_path, {"command": "analyze",
                             "waveform": {"kind": "cw", "duration_s": 1.0},
                             "sample_rate_hz": 256.0})
    out = tmp_path / "out"
    assert main(["analyze", "--config", cfg, "--out", str(out)]) == 0
    for name in ("spectrum.csv", "spectrogram.csv", "autocorrelation.csv",
                 "ambiguity.csv", "metrics.json"):
        assert (out / name).exists()
        if name.endswith(".csv"):
            _assert_single_header(out / name)

    header, rows = _csv(out / "spectrum.csv")
    assert header == ["f_hz", "db"]
    freqs = np.array([float(r[0]) for r in rows])
    dbs = np.array([float(r[1]) for r in rows])
    assert abs(freqs[np.argmax(dbs)]) <= 0.5  # CW line at DC
    assert dbs.max() == 0.0

    header, rows = _csv(out / "autocorrelation.csv")
    assert header == ["lag_s", "db"]
    by_lag = {float(r[0]): float(r[1]) for r in rows}
    assert by_lag[0.0] == 0.0

    header, rows = _csv(out / "ambiguity.csv")
    assert header == ["tau_s", "nu_hz", "db"]
    surface = {(float(r[0]), float(r[1])): float(r[2]) for r in rows}
    assert surface[(0.0, 0.0)] == 0.0
    for tau, nu in [(0.25, 5.0), (0.125, -2.5), (0.5, 10.0)]:
        assert surface[(tau, nu)] == pytest.approx(surface[(-tau, -nu)],
                                                   abs=1.1e-6)


# -------------------------------------------------------------------- optimize

OPT_CONFIG = {"command": "optimize",
              "problem": {"num_harmonics": 4, "duration_s": 1.0,
                          "bandwidth_hz": 64.0, "sample_rate_hz": 512.0,
                          "budget": 300, "seed": 1}}


def test_optimize_bundle_and_round_trip(tmp_path):
    cfg = _config(tmp_path, OPT_CONFIG)
    out = tmp_path / "out"
    assert main(["optimize", "--config", cfg, "--out", str(out)]) == 0

    params = load_mtsfm_coefficients(str(out / "coefficients.json"))
    assert params.num_harmonics == 4
    assert params.duration_s == 1.0

    doc = json.loads((out / "optimize_result.json").read_text())
    _validator("optimize_result.schema.json").validate(doc)
    assert doc["after_metrics"]["isl_db"] < doc["before_metrics"]["isl_db"]
    assert doc["evaluations_used"] <= 300

    header, rows = _csv(out / "trace.csv")
    assert header == ["evaluation", "objective_db"]
    evals = [int(r[0]) for r in rows]
    values = [float(r[1]) for r in rows]
    assert evals == sorted(evals)
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(doc["final_objective_db"], abs=1e-6)

    # Feeding the coefficients back through analyze (same region, same
    # zero padding) must reproduce the optimizer's final metrics.
    cfg2 = _config(tmp_path, {
        "command": "analyze",
        "waveform": {"kind": "mtsfm",
                     "coefficients_file": str(out / "coefficients.json")},
        "sample_rate_hz": 512.0,
        "region": {"inner_delay_s": 2.0 / 64.0, "outer_delay_s": 0.25},
    }, name="analyze.json")
    out2 = tmp_path / "out2"
    assert main(["analyze", "--config", cfg2, "--out", str(out2)]) == 0
    metrics = json.loads((out2 / "metrics.json").read_text())
    for key in ("psl_db", "isl_db", "rms_bandwidth_hz", "p99_bandwidth_hz"):
        assert metrics[key] == pytest.approx(doc["after_metrics"][key],
                                             abs=1e-12)


def test_optimize_rerun_is_byte_identical_and_seed_changes_it(tmp_path):
    cfg = _config(tmp_path, OPT_CONFIG)
    out_a, out_b, out_c = (tmp_path / n for n in ("a", "b", "c"))
    assert main(["optimize", "--config", cfg, "--out", str(out_a)]) == 0
    assert main(["optimize", "--config", cfg, "--out", str(out_b)]) == 0
    for name in ("trace.csv", "coefficients.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    assert main(["optimize", "--config", cfg, "--out", str(out_c),
                 "--seed", "5"]) == 0
    assert (out_a / "trace.csv").read_bytes() != (out_c / "trace.csv").read_bytes()
    assert json.loads((out_c / "optimize_result.json").read_text())["seed"] == 5


# -------------------------------------------------------------------- simulate

def test_simulate_bundle(tmp_path):
    cfg = _config(tmp_path, {
        "command": "simulate",
        "waveform": {"kind": "lfm", "bandwidth_hz": 64.0, "duration_s": 1.0},
        "sample_rate_hz": 512.0,
        "scene": {"benchmark_bandwidth_hz": 64.0},
        "dopplers_hz": [0.0],
    })
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0

    doc = json.loads((out / "resolvability.json").read_text())
    _validator("resolvability.schema.json").validate(doc)
    assert doc["bandwidth_hz"] == 64.0
    assert doc["margin_db"] == 6.0
    assert isinstance(doc["all_detected"], bool)
    assert len(doc["echoes"]) == 6

    # window = last delay (6 * 8/64 = 0.75 s) + pulse -> 896 samples,
    # so the lag axis holds 896 + 512 - 1 = 1407 cells.
    _, cut_rows = _csv(out / "zero_doppler_cut.csv")
    assert len(cut_rows) == 1407
    _, rd_rows = _csv(out / "range_doppler.csv")
    assert len(rd_rows) == 1407  # one Doppler row
    _assert_single_header(out / "range_doppler.csv")


def test_simulate_rejects_empty_doppler_list(tmp_path):
    cfg = _config(tmp_path, {
        "command": "simulate",
        "waveform": {"kind": "lfm", "bandwidth_hz": 64.0, "duration_s": 1.0},
        "scene": {"benchmark_bandwidth_hz": 64.0},
        "dopplers_hz": [],
    })
    assert main(["simulate", "--config", cfg, "--out",
                 str(tmp_path / "out")]) == 2


# --------------------------------------------------------------------- compare

def test_compare_bundle(tmp_path):
    cfg = _config(tmp_path, {
        "command": "compare",
        "waveforms": [
            {"name": "lfm", "waveform": {"kind": "lfm", "bandwidth_hz": 256.0,
                                         "duration_s": 1.0}},
            {"name": "p4", "waveform": {"kind": "p4", "num_chips": 256,
                                        "duration_s": 1.0}},
        ],
    })
    out = tmp_path / "out"
    assert main(["compare", "--config", cfg, "--out", str(out)]) == 0

    header, rows = _csv(out / "comparison.csv")
    assert header == ["name", "psl_db", "isl_db", "rms_bandwidth_hz",
                      "p99_bandwidth_hz", "inband_energy_fraction",
                      "doppler_loss_db"]
    assert [r[0] for r in rows] == ["lfm", "p4"]
    for row in rows:
        assert all(np.isfinite(float(cell)) for cell in row[1:])

    _, curve_rows = _csv(out / "doppler_curves.csv")
    assert len(curve_rows) == 2 * 16

    doc = json.loads((out / "comparison.json").read_text())
    _validator("comparison.schema.json").validate(doc)
    assert doc["doppler_eval_hz"] == pytest.approx(0.1 * 256.0)
    assert len(doc["entries"]) == 2
    assert len(doc["entries"][0]["doppler_curve"]["loss_db"]) == 16


def test_compare_rejects_mixed_sample_rates(tmp_path):
    cfg = _config(tmp_path, {
        "command": "compare",
        "waveforms": [
            {"name": "a", "sample_rate_hz": 512.0,
             "waveform": {"kind": "lfm", "bandwidth_hz": 64.0,
                          "duration_s": 1.0}},
            {"name": "b", "sample_rate_hz": 1024.0,
             "waveform": {"kind": "lfm", "bandwidth_hz": 64.0,
                          "duration_s": 1.0}},
        ],
    })
    assert main(["compare", "--config", cfg, "--out",
                 str(tmp_path / "out")]) == 2


# ------------------------------------------------------------------ exit codes

def test_unknown_config_key_exits_2(tmp_path):
    cfg = _config(tmp_path, {**CW_SYNTH, "bogus": 1})
    assert main(["synth", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_unknown_waveform_kind_exits_2(tmp_path):
    cfg = _config(tmp_path, {"command": "synth",
                             "waveform": {"kind": "zap", "duration_s": 1.0}})
    assert main(["synth", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_command_mismatch_exits_2(tmp_path):
    cfg = _config(tmp_path, CW_SYNTH)
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_missing_config_file_exits_3(tmp_path):
    assert main(["synth", "--config", str(tmp_path / "absent.json"),
                 "--out", str(tmp_path / "o")]) == 3


def test_unwritable_output_directory_exits_3(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    cfg = _config(tmp_path, CW_SYNTH)
    assert main(["synth", "--config", cfg,
                 "--out", str(blocker / "nested")]) == 3


def test_unknown_format_exits_2(tmp_path):
    cfg = _config(tmp_path, CW_SYNTH)
    assert main(["synth", "--config", cfg, "--out", str(tmp_path / "o"),
                 "--format", "xml"]) == 2


def test_missing_subcommand_is_an_argparse_error():
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2


def test_module_entry_point_runs(tmp_path):
    cfg = _config(tmp_path, CW_SYNTH)
    out = tmp_path / "out"
    proc = subprocess.run(
        [sys.executable, "-m", "wavekit.cli", "synth", "--config", cfg,
         "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (out / "waveform.csv").exists()
    assert (out / "metrics.json").exists()
