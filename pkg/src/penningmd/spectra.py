"""Power spectra of the axial (drumhead) motion.

The spectrum is the Welch-averaged periodogram of the per-ion axial signals,
summed over ions (incoherent sum, so every mode shows up regardless of its
spatial pattern), normalized to unit peak.  Peak detection against predicted
mode frequencies uses a local-maximum test above a multiple of the median
power, which makes the "resolved peaks" comparison countable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal


@dataclass(frozen=True)
class SpectrumResult:
    frequencies: np.ndarray   # Hz, uniform grid
    power: np.ndarray         # normalized to unit peak
    power_raw: np.ndarray     # density units, before normalization
    sample_rate: float
    nperseg: int
    n_segments: int
    window: str


def drumhead_spectrum(
    z_traj: np.ndarray,
    sample_dt: float,
    segments: int = 4,
    window: str = "hann",
    max_resolution: float = 2e3,
) -> SpectrumResult:
    """PSD of the summed axial motion from a (samples, N) trajectory.

    ``segments`` sets the Welch averaging (50% overlap); the record must be
    long enough that the bin width fs/nperseg resolves ``max_resolution``.
    """
    z = np.atleast_2d(np.asarray(z_traj, dtype=float))
    if z.shape[0] < z.shape[1]:
        raise ValueError("z_traj must be (samples, n_ions) with samples >= n_ions")
    nsamp = z.shape[0]
    fs = 1.0 / sample_dt
    nperseg = int(2 * nsamp // (segments + 1)) if segments > 1 else nsamp
    if nperseg < 8:
        raise ValueError("record too short for the requested segment count")
    resolution = fs / nperseg
    if resolution > max_resolution:
        need = int(np.ceil((segments + 1) / 2 * fs / max_resolution))
        raise ValueError(
            f"record too short: bin width {resolution:.3g} Hz > {max_resolution:.3g} Hz; "
            f"need at least {need} samples ({need * sample_dt:.3g} s)"
        )
    noverlap = nperseg // 2 if segments > 1 else 0
    freqs, psd = signal.welch(
        z, fs=fs, window=window, nperseg=nperseg, noverlap=noverlap,
        detrend=False, axis=0, scaling="density",
    )
    total = psd.sum(axis=1)
    peak = float(np.max(total))
    if peak <= 0:
        raise ValueError("signal has no power")
    return SpectrumResult(
        frequencies=freqs,
        power=total / peak,
        power_raw=total,
        sample_rate=fs,
        nperseg=nperseg,
        n_segments=segments,
        window=window,
    )


def detect_mode_peaks(
    spec: SpectrumResult,
    predicted_hz: np.ndarray,
    tol_hz: float = 2e3,
    floor_factor: float = 3.0,
    prominence: float = 3.0,
    background_hz: float = 25e3,
) -> np.ndarray:
    """Which predicted frequencies have a *resolved* spectral peak nearby.

    A prediction counts as detected when a strict local maximum lies within
    tol_hz of it, rises above floor_factor times the global median power, and
    stands at least ``prominence`` times above the local background (median
    power over +-background_hz excluding the +-tol_hz core).  The prominence
    requirement is what separates a resolved line from the local maxima that
    estimation noise produces on top of a broadened continuum.
    """
    p = spec.power
    f_grid = spec.frequencies
    floor = floor_factor * float(np.median(p))
    local_max = np.zeros_like(p, dtype=bool)
    local_max[1:-1] = (p[1:-1] > p[:-2]) & (p[1:-1] > p[2:])
    cand = np.flatnonzero(local_max & (p > floor))
    out = np.zeros(len(predicted_hz), dtype=bool)
    if cand.size == 0:
        return out
    for i, f in enumerate(np.asarray(predicted_hz, dtype=float)):
        near = cand[np.abs(f_grid[cand] - f) <= tol_hz]
        for j in near:
            annulus = (np.abs(f_grid - f_grid[j]) <= background_hz) & (
                np.abs(f_grid - f_grid[j]) > tol_hz
            )
            if not np.any(annulus):
                continue
            if p[j] >= prominence * float(np.median(p[annulus])):
                out[i] = True
                break
    return out
