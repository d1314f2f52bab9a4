"""File formats: CSV with a commented header block carrying the resolved
configuration, plus little-endian binaries for eigenvectors and trajectories.

Every CSV starts with '# key: value' lines (always including the package
version and, when given, a single-line JSON dump of the fully resolved run
configuration and seeds) followed by one header row of column names.  NaN
values are written as empty fields.

Eigenvector binary (magic PENMODE1, little-endian):
    u32 version | u32 n_ions | u32 count | u32 layout
    f64 frequencies[count]            rad/s
    u8  branch[count]                 0 drumhead, 1 exb, 2 cyclotron
    c128 eigvecs[count, 6 n_ions]     layout 1 = axis-major (q, v) phase space

Trajectory binary (magic PENTRAJ1, little-endian):
    u32 version | u32 n_ions | u32 kind | f64 dt_sample_s | u64 count
    f64 data[count, n_ions, kind]     kind 1 = z only, 3 = full positions [m]
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

MODE_MAGIC = b"PENMODE1"
TRAJ_MAGIC = b"PENTRAJ1"
BRANCH_CODES = {"drumhead": 0, "exb": 1, "cyclotron": 2}
BRANCH_NAMES = {v: k for k, v in BRANCH_CODES.items()}


def _header_lines(meta: dict | None) -> list[str]:
    from . import __version__

    lines = [f"# penningmd: {__version__}"]
    for key, value in (meta or {}).items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True)
        lines.append(f"# {key}: {value}")
    return lines


def write_csv(path, columns: dict, meta: dict | None = None):
    """columns: ordered {name: 1-D array}; NaN becomes an empty field."""
    path = Path(path)
    names = list(columns)
    arrays = [np.asarray(columns[k]) for k in names]
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise ValueError("all columns must have the same length")
    rows = []
    for i in range(length):
        cells = []
        for a in arrays:
            v = a[i]
            if isinstance(v, (float, np.floating)):
                cells.append("" if np.isnan(v) else f"{v:.12g}")
            else:
                cells.append(str(v))
        rows.append(",".join(cells))
    text = "\n".join(_header_lines(meta) + [",".join(names)] + rows) + "\n"
    path.write_text(text)


def read_csv(path):
    """Returns (meta dict, {column: ndarray}); numeric columns become float
    (empty fields NaN), everything else stays str."""
    meta = {}
    names = None
    data = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                k, v = body.split(":", 1)
                meta[k.strip()] = v.strip()
            continue
        if not line.strip():
            continue
        if names is None:
            names = line.split(",")
            continue
        data.append(line.split(","))
    if names is None:
        raise ValueError(f"{path}: no column header found")
    cols = {}
    for j, name in enumerate(names):
        raw = [row[j] if j < len(row) else "" for row in data]
        try:
            cols[name] = np.array(
                [float(x) if x != "" else np.nan for x in raw], dtype=float
            )
        except ValueError:
            cols[name] = np.array(raw, dtype=object)
    return meta, cols


def write_equilibrium_csv(path, eq, meta: dict | None = None):
    n = eq.n_ions
    pos = eq.positions_rot * 1e6
    full_meta = {
        "energy_J": f"{eq.energy:.12e}",
        "gradient_norm_N": f"{eq.gradient_norm:.3e}",
        "planar": eq.planar,
        "radius_um": f"{eq.radius * 1e6:.6f}",
        **(meta or {}),
    }
    write_csv(
        path,
        {
            "ion": np.arange(n),
            "x_um": pos[:, 0],
            "y_um": pos[:, 1],
            "z_um": pos[:, 2],
        },
        full_meta,
    )


def write_modes_csv(path, dec, meta: dict | None = None):
    freqs_hz = dec.frequencies / (2.0 * np.pi)
    drum = dec.branch_frequencies("drumhead")
    exb = dec.branch_frequencies("exb")
    resonant = bool(drum.min() <= 2.0 * exb.max())
    full_meta = {
        "min_drumhead_hz": f"{drum.min() / (2 * np.pi):.3f}",
        "max_exb_hz": f"{exb.max() / (2 * np.pi):.3f}",
        "resonant": resonant,
        **(meta or {}),
    }
    write_csv(
        path,
        {
            "index": np.arange(len(freqs_hz)),
            "branch": dec.branch,
            "frequency_hz": freqs_hz,
        },
        full_meta,
    )


def write_diagnostics_csv(path, series, meta: dict | None = None):
    full_meta = {
        "reconfigured": series.reconfigured,
        "reconfig_time_s": series.reconfig_time if series.reconfig_time is not None else "",
        **(meta or {}),
    }
    write_csv(
        path,
        {
            "t_s": series.times,
            "ke_perp_mk": series.ke_perp * 1e3,
            "ke_par_mk": series.ke_par * 1e3,
            "pe_mk": series.pe * 1e3,
            "t_drum_mk": series.t_drumhead * 1e3,
            "t_exb_mk": series.t_exb * 1e3,
            "t_cyc_mk": series.t_cyclotron * 1e3,
            "event_rate_hz": series.event_rate,
        },
        full_meta,
    )


def write_psd_csv(path, spec, meta: dict | None = None):
    full_meta = {
        "sample_rate_hz": spec.sample_rate,
        "nperseg": spec.nperseg,
        "segments": spec.n_segments,
        "window": spec.window,
        **(meta or {}),
    }
    write_csv(
        path,
        {"freq_hz": spec.frequencies, "power_norm": spec.power},
        full_meta,
    )


def write_modes_binary(path, dec):
    n = dec.n_ions
    count = len(dec.frequencies)
    with open(path, "wb") as fh:
        fh.write(MODE_MAGIC)
        np.array([1, n, count, 1], dtype="<u4").tofile(fh)
        dec.frequencies.astype("<f8").tofile(fh)
        np.array([BRANCH_CODES[b] for b in dec.branch], dtype="u1").tofile(fh)
        dec.eigvecs.astype("<c16").tofile(fh)


def read_modes_binary(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MODE_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        version, n, count, layout = np.fromfile(fh, dtype="<u4", count=4)
        if version != 1 or layout != 1:
            raise ValueError(f"{path}: unsupported version/layout {version}/{layout}")
        freqs = np.fromfile(fh, dtype="<f8", count=count)
        branch = np.array([BRANCH_NAMES[c] for c in np.fromfile(fh, dtype="u1", count=count)])
        vecs = np.fromfile(fh, dtype="<c16", count=count * 6 * int(n)).reshape(count, 6 * int(n))
    return int(n), freqs, branch, vecs


def write_trajectory_binary(path, data: np.ndarray, dt_sample: float, kind: int):
    """data: (count, n_ions) for kind=1 (z only) or (count, n_ions, 3) for kind=3."""
    if kind == 1 and data.ndim != 2:
        raise ValueError("kind=1 expects (count, n_ions)")
    if kind == 3 and (data.ndim != 3 or data.shape[2] != 3):
        raise ValueError("kind=3 expects (count, n_ions, 3)")
    count, n = data.shape[0], data.shape[1]
    with open(path, "wb") as fh:
        fh.write(TRAJ_MAGIC)
        np.array([1, n, kind], dtype="<u4").tofile(fh)
        np.array([dt_sample], dtype="<f8").tofile(fh)
        np.array([count], dtype="<u8").tofile(fh)
        data.astype("<f8").tofile(fh)


def read_trajectory_binary(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != TRAJ_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        version, n, kind = np.fromfile(fh, dtype="<u4", count=3)
        dt_sample = float(np.fromfile(fh, dtype="<f8", count=1)[0])
        count = int(np.fromfile(fh, dtype="<u8", count=1)[0])
        flat = np.fromfile(fh, dtype="<f8")
    n = int(n)
    kind = int(kind)
    shape = (count, n) if kind == 1 else (count, n, 3)
    if flat.size != np.prod(shape):
        raise ValueError(f"{path}: truncated data")
    return flat.reshape(shape), dt_sample, kind
