import numpy as np
import pytest

from penningmd import detect_mode_peaks, drumhead_spectrum


def test_single_tone_peak_location():
    fs = 5e7
    f0 = 1.2345e6
    t = np.arange(100000) / fs
    z = 1e-8 * np.sin(2 * np.pi * f0 * t)
    spec = drumhead_spectrum(z[:, None], 1 / fs, segments=4)
    fpk = spec.frequencies[np.argmax(spec.power)]
    assert abs(fpk - f0) <= fs / spec.nperseg  # within one bin
    assert spec.power.max() == 1.0


def test_parseval_on_white_noise():
    """Boxcar window, no overlap: sum(PSD) * df equals the mean square."""
    rng = np.random.default_rng(0)
    fs = 1e6
    z = rng.normal(size=(65536, 2))
    spec = drumhead_spectrum(z, 1 / fs, segments=1, window="boxcar")
    df = spec.frequencies[1] - spec.frequencies[0]
    total = np.sum(spec.power_raw) * df
    ms = np.sum(np.mean(z**2, axis=0))
    assert total == pytest.approx(ms, rel=1e-6)


def test_sum_over_ions():
    fs = 1e7
    t = np.arange(30000) / fs
    z = np.column_stack([np.sin(2 * np.pi * 5e5 * t), np.sin(2 * np.pi * 1.5e6 * t)])
    spec = drumhead_spectrum(z, 1 / fs, segments=2)
    detected = detect_mode_peaks(spec, [5e5, 1.5e6], tol_hz=2e3)
    assert detected.all()


def test_too_short_record_raises():
    with pytest.raises(ValueError, match="record too short"):
        drumhead_spectrum(np.random.default_rng(1).normal(size=(2000, 1)), 2e-8,
                          segments=8)


def test_peak_detection_rejects_absent_modes():
    fs = 1e7
    t = np.arange(40000) / fs
    z = (np.sin(2 * np.pi * 6e5 * t) + 0.5 * np.sin(2 * np.pi * 9e5 * t))[:, None]
    z = z + 1e-6 * np.random.default_rng(2).normal(size=z.shape)
    spec = drumhead_spectrum(z, 1 / fs, segments=4)
    detected = detect_mode_peaks(spec, [6e5, 9e5, 1.3e6, 2.2e6], tol_hz=2e3)
    assert list(detected) == [True, True, False, False]


def test_shape_validation():
    with pytest.raises(ValueError, match="samples"):
        drumhead_spectrum(np.zeros((3, 1000)), 1e-8)
