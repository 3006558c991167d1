import csv
import json

import numpy as np
import pytest

from beamlink.cli import config_hash, load_config, run
from beamlink.dynamics import ar_generate, write_trace
from beamlink.errors import ConfigError
from beamlink.models import LINK_SAMPLE_FIELDS, ARModel, PerturbationTrace

SMALL = {
    "z_list_m": [10.0, 50.0],
    "duration_s": 1.0,
    "timestep_s": 0.01,
}
STATIC_WORLD = {
    "perturbations": {
        "v1_x": {"kind": "zero"},
        "v1_y": {"kind": "zero"},
        "v2_x": {"kind": "zero"},
        "v2_y": {"kind": "zero"},
    },
}


def _config(tmp_path, **fields) -> str:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(fields))
    return str(path)


def _rows(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def test_sweep_writes_csv_and_manifest(tmp_path):
    out = tmp_path / "out"
    assert run(["sweep", "--config", _config(tmp_path, **SMALL), "--out", str(out)]) == 0
    rows = _rows(out / "sweep.csv")
    assert rows[0] == ["strategy", "p0_w", "z_m", "mean_r_bps", "p5_r_bps", "p95_r_bps", "mean_pr_w"]
    assert len(rows) == 1 + 3 * 2 * 2
    assert [r[0] for r in rows[1:5]] == ["none"] * 4
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"] == ["sweep.csv"]
    assert manifest["seed"] == 0
    assert len(manifest["config_hash"]) == 64


def test_sweep_is_byte_identical_on_rerun(tmp_path):
    config = _config(tmp_path, **SMALL)
    assert run(["sweep", "--config", config, "--out", str(tmp_path / "a")]) == 0
    assert run(["sweep", "--config", config, "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()
    first = json.loads((tmp_path / "a" / "manifest.json").read_text())
    second = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert first["config_hash"] == second["config_hash"]


def test_seed_flag_overrides_config(tmp_path):
    out = tmp_path / "out"
    assert run(["sweep", "--config", _config(tmp_path, seed=3, **SMALL), "--seed", "11", "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["seed"] == 11


def test_config_errors_exit_2(tmp_path):
    bad_period = _config(tmp_path, strategy={"delta_t_s": 0.001}, timestep_s=0.01)
    assert run(["sweep", "--config", bad_period, "--out", str(tmp_path)]) == 2

    typo = tmp_path / "typo.json"
    typo.write_text(json.dumps({"beam": {"power_W": 0.01}}))
    assert run(["sweep", "--config", str(typo), "--out", str(tmp_path)]) == 2

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run(["timeseries", "--config", str(broken), "--out", str(tmp_path)]) == 2


def test_validation_message_names_the_key(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        load_config(_config(tmp_path, beam={"power_W": 0.01}))
    assert "beam.power_W" in excinfo.value.detail


def test_missing_config_exit_3(tmp_path):
    assert run(["sweep", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 3


def test_config_hash_ignores_key_order(tmp_path):
    first = load_config(_config(tmp_path, duration_s=2.0, seed=4))
    second = load_config(_config(tmp_path, seed=4, duration_s=2.0))
    assert config_hash(first) == config_hash(second)
    assert config_hash(first) != config_hash(load_config(_config(tmp_path, duration_s=2.0, seed=5)))


def test_config_hash_does_not_depend_on_location(tmp_path):
    spectrum = "wavelength_nm,irradiance_w_m2_nm\n1500,0.1116\n1600,0.1116\n"
    hashes = []
    for name in ("a", "b"):
        folder = tmp_path / name
        folder.mkdir()
        (folder / "spectrum.csv").write_text(spectrum)
        hashes.append(config_hash(load_config(_config(folder, spectrum_path="spectrum.csv"))))
    assert hashes[0] == hashes[1]

    (tmp_path / "b" / "spectrum.csv").write_text(spectrum.replace("0.1116", "0.2"))
    changed = config_hash(load_config(str(tmp_path / "b" / "config.json")))
    assert changed != hashes[0]


def test_relative_paths_resolve_against_config(tmp_path):
    (tmp_path / "spectrum.csv").write_text("wavelength_nm,irradiance_w_m2_nm\n1500,0.1116\n1600,0.1116\n")
    cfg = load_config(_config(tmp_path, spectrum_path="spectrum.csv"))
    assert cfg.spectrum_path == str(tmp_path / "spectrum.csv")


def test_displacement_command(tmp_path):
    out = tmp_path / "out"
    config = _config(tmp_path, z_list_m=[5.0, 50.0], delta_grid_m=[0.0, 0.001, 0.05])
    assert run(["displacement", "--config", config, "--out", str(out)]) == 0
    rows = _rows(out / "displacement.csv")
    assert rows[0] == ["p0_w", "z_m", "delta_m", "r_bps"]
    assert len(rows) == 1 + 2 * 2 * 3
    assert rows[1][:3] == ["0.001", "5.0", "0.0"]


def test_signaling_command(tmp_path):
    out = tmp_path / "out"
    config = _config(tmp_path, delta_t_list_s=[0.1, 0.02], **SMALL)
    assert run(["signaling", "--config", config, "--out", str(out)]) == 0
    rows = _rows(out / "signaling.csv")
    assert rows[0] == ["delta_t_s", "p0_w", "z_m", "mean_r_bps", "p5_r_bps", "p95_r_bps", "mean_pr_w", "overhead_bps"]
    assert len(rows) == 1 + 2 * 2 * 2
    assert rows[1][:3] == ["0.02", "0.001", "10.0"]
    assert rows[1][-1] == "1600.0"
    assert rows[-1][0] == "0.1"
    assert json.loads((out / "manifest.json").read_text())["outputs"] == ["signaling.csv"]


def test_signaling_period_below_timestep_exit_2(tmp_path):
    config = _config(tmp_path, delta_t_list_s=[0.005], **SMALL)
    assert run(["signaling", "--config", config, "--out", str(tmp_path)]) == 2


def test_displacement_empty_grid_exit_2(tmp_path):
    assert run(["displacement", "--config", _config(tmp_path, delta_grid_m=[]), "--out", str(tmp_path)]) == 2


def test_timeseries_command(tmp_path):
    out = tmp_path / "out"
    config = _config(tmp_path, z_list_m=[50.0], p0_list_w=[0.01], duration_s=1.0, timestep_s=0.001, **STATIC_WORLD)
    assert run(["timeseries", "--config", config, "--out", str(out)]) == 0
    rows = _rows(out / "timeseries.csv")
    assert tuple(rows[0]) == LINK_SAMPLE_FIELDS
    assert len(rows) == 1 + 1000
    rates = np.array([float(row[-1]) for row in rows[1:]])
    assert rates.max() == pytest.approx(rates.min(), rel=1e-12)
    assert rows[1][1:3] == ["50.0", "0.01"]


def test_fit_ar_recovers_generator(tmp_path):
    model = ARModel(order=2, coefficients=[0.5, -0.2], noise_std=1e-3, sample_rate_hz=100.0)
    trace_path = tmp_path / "trace.csv"
    write_trace(str(trace_path), ar_generate(model, 100_000, 9))
    out = tmp_path / "out"
    assert run(["fit-ar", "--trace", str(trace_path), "--order", "2", "--out", str(out)]) == 0
    fitted = json.loads((out / "ar_model.json").read_text())
    assert sorted(fitted) == ["coefficients", "noise_std", "order", "sample_rate_hz"]
    assert fitted["order"] == 2
    assert fitted["coefficients"] == pytest.approx([0.5, -0.2], abs=0.02)
    assert fitted["sample_rate_hz"] == pytest.approx(100.0)


def test_fit_ar_on_bundled_trace(tmp_path):
    assert run(["fit-ar", "--out", str(tmp_path)]) == 0
    fitted = json.loads((tmp_path / "ar_model.json").read_text())
    assert fitted["order"] == 10
    roots = np.roots(np.concatenate(([1.0], -np.asarray(fitted["coefficients"]))))
    assert np.all(np.abs(roots) < 1.0)


def test_fit_ar_failures(tmp_path):
    constant = tmp_path / "constant.csv"
    write_trace(str(constant), PerturbationTrace(sample_rate_hz=100.0, samples=np.full(500, 0.02)))
    assert run(["fit-ar", "--trace", str(constant), "--order", "2", "--out", str(tmp_path)]) == 4

    malformed = tmp_path / "malformed.csv"
    malformed.write_text("time,value\n0,0\n")
    assert run(["fit-ar", "--trace", str(malformed), "--out", str(tmp_path)]) == 2
