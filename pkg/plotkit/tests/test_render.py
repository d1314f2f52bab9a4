import numpy as np
import pytest

from plotkit import FigureSpec, SchemaError, render
from plotkit.cli import main


def write_csv(path, header, rows, meta=("# penningmd: 0.1.0",)):
    lines = list(meta) + [header] + rows
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture()
def sample(tmp_path):
    rng = np.random.default_rng(0)
    files = {}
    files["crystal"] = write_csv(
        tmp_path / "equilibrium.csv", "ion,x_um,y_um,z_um",
        [f"{i},{rng.normal()*20:.3f},{rng.normal()*20:.3f},0" for i in range(12)],
    )
    rows = [f"{i},drumhead,{1.58e6 - i*5e4:.1f}" for i in range(12)]
    rows += [f"{12+i},exb,{2e4 + i*1e4:.1f}" for i in range(12)]
    rows += [f"{24+i},cyclotron,{7.2e6 + i*1e3:.1f}" for i in range(12)]
    files["modes"] = write_csv(tmp_path / "modes.csv", "index,branch,frequency_hz", rows)
    files["energies"] = write_csv(
        tmp_path / "diagnostics.csv",
        "t_s,ke_perp_mk,ke_par_mk,pe_mk,t_drum_mk,t_exb_mk,t_cyc_mk,event_rate_hz",
        [f"{i*1e-4:.4e},{10*np.exp(-i/20):.4f},{5*np.exp(-i/15):.4f},"
         f"{12*np.exp(-i/40):.4f},,,,{1e5}" for i in range(50)],
    )
    files["spectrum"] = write_csv(
        tmp_path / "psd.csv", "freq_hz,power_norm",
        [f"{i*1e3:.1f},{np.exp(-((i-700)/30)**2) + 1e-8:.6e}" for i in range(1500)],
    )
    files["scan"] = write_csv(
        tmp_path / "scan.csv",
        "index,f_wall_hz,beta,delta,seed,ke_par_last_ms_mk,ke_perp_last_ms_mk,"
        "pe_last_ms_mk,reconfigured,status",
        [f"{i},{180e3+i*3e3:.0f},0.05,0.01,{i},{0.1+i:.3f},{2.0},{8.0-i:.3f},False,ok"
         for i in range(5)],
    )
    return files, tmp_path


@pytest.mark.parametrize("kind", ["crystal", "modes", "energies", "spectrum", "scan"])
def test_render_each_kind(sample, kind):
    files, tmp = sample
    out = tmp / f"{kind}.png"
    render(FigureSpec(kind=kind, inputs=[files[kind]], output=str(out)))
    assert out.exists() and out.stat().st_size > 2000


def test_render_overlay(sample):
    files, tmp = sample
    out = tmp / "overlay.png"
    render(FigureSpec(kind="energies", inputs=[files["energies"], files["energies"]],
                      output=str(out), title="two runs"))
    assert out.exists()


def test_missing_column_named(sample, tmp_path):
    bad = write_csv(tmp_path / "bad.csv", "t_s,ke_perp_mk,pe_mk",
                    ["0,1,2", "1,2,3"])
    with pytest.raises(SchemaError, match="missing required column 'ke_par_mk'"):
        render(FigureSpec(kind="energies", inputs=[bad], output=str(tmp_path / "x.png")))
    assert not (tmp_path / "x.png").exists()


def test_empty_csv_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError, match="empty CSV"):
        render(FigureSpec(kind="crystal", inputs=[str(empty)],
                          output=str(tmp_path / "y.png")))
    header_only = tmp_path / "h.csv"
    header_only.write_text("ion,x_um,y_um,z_um\n")
    with pytest.raises(SchemaError, match="no data rows"):
        render(FigureSpec(kind="crystal", inputs=[str(header_only)],
                          output=str(tmp_path / "z.png")))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(SchemaError, match="unknown figure kind"):
        FigureSpec(kind="pie", inputs=["a.csv"], output="b.png")


def test_rerender_byte_identical(sample):
    files, tmp = sample
    a, b = tmp / "a.png", tmp / "b.png"
    spec = FigureSpec(kind="crystal", inputs=[files["crystal"]], output=str(a))
    render(spec)
    render(FigureSpec(kind="crystal", inputs=[files["crystal"]], output=str(b)))
    assert a.read_bytes() == b.read_bytes()


def test_cli(sample):
    files, tmp = sample
    out = tmp / "cli.png"
    assert main(["scan", "--in", files["scan"], "--out", str(out)]) == 0
    assert out.exists()
    assert main(["energies", "--in", files["scan"], "--out", str(tmp / "n.png")]) == 2
