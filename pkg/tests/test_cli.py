import json

import numpy as np
import pytest

from penningmd import io
from penningmd.cli import main

TINY = """
run:
  n_ions: 6
  f_wall_hz: 204.0e3
  t_final_s: 20.0e-6
  sample_interval_s: 2.0e-6
  seed: 3
outputs:
  directory: "{out}"
"""


@pytest.fixture()
def tiny_config(tmp_path):
    def write(extra: str = "") -> str:
        path = tmp_path / "cfg.yaml"
        path.write_text(TINY.format(out=tmp_path / "out") + extra)
        return str(path)

    return write


def test_equilibrium_command(tiny_config, tmp_path):
    assert main(["equilibrium", "--config", tiny_config()]) == 0
    meta, cols = io.read_csv(tmp_path / "out" / "equilibrium.csv")
    assert len(cols["ion"]) == 6
    assert meta["planar"] == "True"
    assert "config" in meta


def test_modes_command(tiny_config, tmp_path):
    assert main(["modes", "--config", tiny_config()]) == 0
    meta, cols = io.read_csv(tmp_path / "out" / "modes.csv")
    assert len(cols["index"]) == 18  # 3N rows
    for b in ("drumhead", "exb", "cyclotron"):
        assert np.sum(cols["branch"] == b) == 6
    n, freqs, branch, vecs = io.read_modes_binary(tmp_path / "out" / "modes_eigvec.bin")
    assert n == 6 and len(freqs) == 18 and vecs.shape == (18, 36)


def test_evolve_command(tiny_config, tmp_path):
    assert main(["evolve", "--config", tiny_config()]) == 0
    meta, cols = io.read_csv(tmp_path / "out" / "diagnostics.csv")
    assert len(cols["t_s"]) == 11  # initial sample + 10
    assert np.all(np.isfinite(cols["pe_mk"]))
    cfg = json.loads(meta["config"])
    assert cfg["run"]["n_ions"] == 6


def test_evolve_seed_override_changes_output(tiny_config, tmp_path):
    path = tiny_config()
    assert main(["evolve", "--config", path]) == 0
    _, a = io.read_csv(tmp_path / "out" / "diagnostics.csv")
    assert main(["evolve", "--config", path, "--seed", "77"]) == 0
    _, b = io.read_csv(tmp_path / "out" / "diagnostics.csv")
    assert not np.array_equal(a["pe_mk"], b["pe_mk"])


def test_scan_command(tiny_config, tmp_path):
    extra = "scan:\n  f_list_hz: [186.0e3, 204.0e3]\n"
    assert main(["scan", "--config", tiny_config(extra), "--jobs", "1"]) == 0
    meta, cols = io.read_csv(tmp_path / "out" / "scan.csv")
    assert len(cols["f_wall_hz"]) == 2
    assert list(cols["status"]) == ["ok", "ok"]
    assert np.all(np.isfinite(cols["pe_last_ms_mk"]))
    # per-point diagnostics written
    assert (tmp_path / "out" / "scan_point_000.csv").exists()


def test_scan_records_failures_per_row(tiny_config, tmp_path):
    # 150 kHz is below the magnetron frequency: no confined crystal there
    extra = "scan:\n  f_list_hz: [150.0e3, 204.0e3]\n"
    assert main(["scan", "--config", tiny_config(extra), "--jobs", "1"]) == 0
    _, cols = io.read_csv(tmp_path / "out" / "scan.csv")
    assert cols["status"][0].startswith("failed")
    assert cols["status"][1] == "ok"


def test_spectrum_command(tmp_path):
    rng = np.random.default_rng(0)
    fs = 5e7
    t = np.arange(120000) / fs
    z = np.sin(2 * np.pi * 1.58e6 * t)[:, None] + 0.01 * rng.normal(size=(120000, 1))
    traj = tmp_path / "z.bin"
    io.write_trajectory_binary(traj, z, 1 / fs, kind=1)
    assert main(["spectrum", "--traj", str(traj), "--out", str(tmp_path / "psd")]) == 0
    _, cols = io.read_csv(tmp_path / "psd" / "psd.csv")
    fpk = cols["freq_hz"][np.argmax(cols["power_norm"])]
    assert fpk == pytest.approx(1.58e6, abs=2e3)


def test_exit_codes(tmp_path, tiny_config):
    assert main(["evolve", "--config", str(tmp_path / "missing.yaml")]) == 2
    assert main(["evolve", "--recipe", "nope"]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("run:\n  bogus: 1\n")
    assert main(["evolve", "--config", str(bad)]) == 2
    assert main(["evolve", "--config", tiny_config(), "--recipe", "fig2d"]) == 2
    # --points on a listed scan is a config error
    extra = "scan:\n  f_list_hz: [204.0e3]\n"
    assert main(["scan", "--config", tiny_config(extra), "--points", "3"]) == 2


def test_recipe_listing_runs(tmp_path):
    # tiny smoke: recipe config loads and equilibrium command works on it
    assert main(["equilibrium", "--recipe", "doppler1", "--out", str(tmp_path / "d")]) == 0
    _, cols = io.read_csv(tmp_path / "d" / "equilibrium.csv")
    assert len(cols["ion"]) == 1 and cols["x_um"][0] == 0.0


def test_scan_row_reproducible(tiny_config, tmp_path):
    """A scan row is bit-reproducible from its payload, and matches a direct
    evolve at the recorded seed."""
    import numpy as np
    from penningmd.cli import _evolve_once, _scan_point
    from penningmd.config import ExperimentConfig

    cfg = ExperimentConfig.from_file(tiny_config("scan:\n  f_list_hz: [204.0e3]\n"))
    payload = (cfg.raw, 204e3, 0)
    r1 = _scan_point(payload)
    r2 = _scan_point(payload)
    assert r1["status"] == "ok"
    assert r1["ke_par_last_ms_mk"] == r2["ke_par_last_ms_mk"]
    assert np.array_equal(r1["pe"], r2["pe"])
    # the recorded seed reproduces the run directly
    base = cfg.raw["run"]["seed"]
    res, _ = _evolve_once(cfg, f_wall_hz=204e3, seed_offset=r1["seed"] - base)
    assert np.array_equal(res.series.pe, r1["pe"])
    assert np.array_equal(res.series.ke_par, r1["ke_par"])


def test_scan_all_points_failed_exits_nonzero(tiny_config, tmp_path):
    # both frequencies below the magnetron limit: every row fails, exit 1
    extra = "scan:\n  f_list_hz: [150.0e3, 155.0e3]\n"
    assert main(["scan", "--config", tiny_config(extra), "--jobs", "1"]) == 1
    _, cols = io.read_csv(tmp_path / "out" / "scan.csv")
    assert all(s.startswith("failed") for s in cols["status"])
