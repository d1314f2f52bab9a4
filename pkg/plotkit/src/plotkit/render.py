"""Render penningmd CSV outputs into figures.

Strictly a consumer of the documented CSV schemas (comment-prefixed header
block, then one column-name row); no physics is recomputed here.  Every kind
validates its required columns up front and fails naming the offending column.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

KINDS = ("crystal", "modes", "energies", "spectrum", "scan")

REQUIRED_COLUMNS = {
    "crystal": ("ion", "x_um", "y_um", "z_um"),
    "modes": ("index", "branch", "frequency_hz"),
    "energies": ("t_s", "ke_perp_mk", "ke_par_mk", "pe_mk"),
    "spectrum": ("freq_hz", "power_norm"),
    "scan": ("f_wall_hz", "ke_par_last_ms_mk", "ke_perp_last_ms_mk", "pe_last_ms_mk"),
}

BRANCH_COLORS = {"drumhead": "#1f77b4", "exb": "#d62728", "cyclotron": "#2ca02c"}


class SchemaError(ValueError):
    pass


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    output: str
    title: str | None = None
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


def load_table(path, kind: str) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: no such file")
    try:
        df = pd.read_csv(path, comment="#")
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{path}: empty CSV, nothing to plot") from exc
    if df.empty:
        raise SchemaError(f"{path}: no data rows")
    for col in REQUIRED_COLUMNS[kind]:
        if col not in df.columns:
            raise SchemaError(
                f"{path}: missing required column '{col}' for kind '{kind}' "
                f"(found: {', '.join(df.columns)})"
            )
    return df


def _label(path) -> str:
    return Path(path).stem


def _render_crystal(ax, spec):
    for path in spec.inputs:
        df = load_table(path, "crystal")
        ax.scatter(df["x_um"], df["y_um"], s=36, edgecolor="k", linewidth=0.5,
                   label=_label(path))
    ax.set_xlabel("x' (um)")
    ax.set_ylabel("y' (um)")
    ax.set_aspect("equal")
    if len(spec.inputs) > 1:
        ax.legend(fontsize=8)


def _render_modes(ax, spec):
    for path in spec.inputs:
        df = load_table(path, "modes")
        for branch, color in BRANCH_COLORS.items():
            sel = df[df["branch"] == branch]
            if sel.empty:
                continue
            freqs = np.sort(sel["frequency_hz"].to_numpy())
            ax.plot(np.arange(1, len(freqs) + 1), freqs / 1e3, ".", color=color,
                    label=branch if path == spec.inputs[0] else None, markersize=5)
    ax.set_xlabel("mode number (within branch)")
    ax.set_ylabel("frequency (kHz)")
    ax.set_yscale("log")
    ax.legend(fontsize=8)


def _render_energies(ax, spec):
    styles = ["-", "--", ":"]
    for k, path in enumerate(spec.inputs):
        df = load_table(path, "energies")
        t_ms = df["t_s"] * 1e3
        suffix = f" [{_label(path)}]" if len(spec.inputs) > 1 else ""
        ls = styles[k % len(styles)]
        ax.plot(t_ms, df["ke_perp_mk"], ls, color="#1f77b4", label="KE_perp" + suffix)
        ax.plot(t_ms, df["ke_par_mk"], ls, color="#2ca02c", label="KE_par" + suffix)
        ax.plot(t_ms, df["pe_mk"], ls, color="#d62728", label="PE" + suffix)
    ax.set_xlabel("time (ms)")
    ax.set_ylabel("E / (N kB) (mK)")
    ax.set_yscale("log")
    ax.legend(fontsize=8)


def _render_spectrum(ax, spec):
    for path in spec.inputs:
        df = load_table(path, "spectrum")
        ax.plot(df["freq_hz"] / 1e6, df["power_norm"], lw=0.7, label=_label(path))
    ax.set_xlabel("frequency (MHz)")
    ax.set_ylabel("PSD (normalized)")
    ax.set_yscale("log")
    ax.set_ylim(bottom=max(1e-12, ax.get_ylim()[0]))
    if len(spec.inputs) > 1:
        ax.legend(fontsize=8)


def _render_scan(ax, spec):
    for path in spec.inputs:
        df = load_table(path, "scan")
        f_khz = df["f_wall_hz"] / 1e3
        suffix = f" [{_label(path)}]" if len(spec.inputs) > 1 else ""
        ax.plot(f_khz, df["ke_par_last_ms_mk"], "o-", label="KE_par" + suffix)
        ax.plot(f_khz, df["pe_last_ms_mk"], "s-", label="PE" + suffix)
    ax.set_xlabel("wall frequency (kHz)")
    ax.set_ylabel("last-ms average (mK)")
    ax.legend(fontsize=8)


_RENDERERS = {
    "crystal": _render_crystal,
    "modes": _render_modes,
    "energies": _render_energies,
    "spectrum": _render_spectrum,
    "scan": _render_scan,
}


def render(spec: FigureSpec) -> str:
    """Validate inputs, draw, and write the image file; returns the path."""
    fig, ax = plt.subplots(figsize=spec.style.get("figsize", (6.0, 4.5)), dpi=150)
    try:
        _RENDERERS[spec.kind](ax, spec)
        if spec.title:
            ax.set_title(spec.title)
        fig.tight_layout()
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
    finally:
        plt.close(fig)
    return str(spec.output)
