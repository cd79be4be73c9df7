"""Sampled-signal container, dB conversion, and spectral transforms."""

import numpy as np
import pytest

import wavekit as wk
from wavekit.errors import InvalidInputError

from oracles import dirichlet_magnitude


def test_midpoint_time_grid():
    sig = wk.synth_cw(1.0, 64.0)
    t = sig.time_grid()
    assert t[0] == pytest.approx(0.5 / 64.0, abs=0)
    np.testing.assert_allclose(np.diff(t), 1.0 / 64.0, rtol=0, atol=1e-15)


def test_energy_matches_sample_sum():
    sig = wk.synth_lfm(32.0, 1.0, 256.0)
    assert sig.energy() == pytest.approx(np.sum(np.abs(sig.samples) ** 2), abs=0)


def test_duration_snaps_to_sample_count():
    sig = wk.synth_cw(1.0, 100.0)
    assert sig.num_samples == 100
    assert sig.duration_s == pytest.approx(100 / 100.0)


def test_signal_validation():
    with pytest.raises(InvalidInputError):
        wk.SampledSignal(samples=np.ones(1, dtype=complex), sample_rate_hz=10.0)
    with pytest.raises(InvalidInputError):
        wk.SampledSignal(samples=np.ones((2, 2), dtype=complex), sample_rate_hz=10.0)
    with pytest.raises(InvalidInputError):
        wk.SampledSignal(samples=np.ones(4, dtype=complex), sample_rate_hz=0.0)
    with pytest.raises(InvalidInputError):
        wk.SampledSignal(samples=np.array([1.0, np.nan, 1.0], dtype=complex),
                         sample_rate_hz=10.0)
    with pytest.raises(InvalidInputError):
        wk.SampledSignal(samples=np.ones(4, dtype=complex), sample_rate_hz=10.0,
                         duration_s=1.0)


def test_samples_are_immutable():
    sig = wk.synth_cw(1.0, 64.0)
    with pytest.raises(ValueError):
        sig.samples[0] = 0.0


def test_to_db_floor():
    db = wk.to_db(np.array([1.0, 1e-3, 0.0]))
    assert db[0] == pytest.approx(0.0, abs=1e-12)
    assert db[1] == pytest.approx(-60.0, abs=1e-9)
    assert db[2] == -120.0
    assert np.all(np.isfinite(wk.to_db(np.zeros(5))))


def test_spectrum_parseval():
    """sum(|S|^2 df) equals the time-domain energy for any zero padding."""
    sig = wk.synth_lfm(64.0, 1.0, 512.0)
    for zpf in (1, 2, 4):
        spec = wk.spectrum(sig, zpf)
        energy = np.sum(spec.magnitude ** 2) * spec.df_hz
        assert energy == pytest.approx(sig.energy(), rel=1e-9)
        assert spec.total_energy == pytest.approx(sig.energy(), rel=1e-12)


def test_spectrum_axis_spans_nyquist():
    sig = wk.synth_cw(1.0, 256.0)
    spec = wk.spectrum(sig, 4)
    assert spec.freqs_hz[0] == pytest.approx(-128.0)
    assert spec.freqs_hz[-1] == pytest.approx(128.0 - spec.df_hz)
    assert np.all(np.diff(spec.freqs_hz) > 0)


def test_cw_spectrum_matches_dirichlet_kernel():
    """The sampled CW spectrum is the Dirichlet kernel exactly."""
    sig = wk.synth_cw(1.0, 256.0)
    spec = wk.spectrum(sig, 4)
    expected = dirichlet_magnitude(spec.freqs_hz, sig.num_samples, 256.0)
    expected *= spec.magnitude.max() / expected.max()
    np.testing.assert_allclose(spec.magnitude, expected, atol=1e-9)


def test_spectrum_rejects_bad_zero_pad():
    sig = wk.synth_cw(1.0, 64.0)
    with pytest.raises(InvalidInputError):
        wk.spectrum(sig, 0)


def test_spectrogram_shapes_and_peak():
    sig = wk.synth_lfm(64.0, 1.0, 512.0)
    gram = wk.spectrogram(sig, 64, 0.75)
    assert gram.magnitude_db.shape == (gram.times_s.size, gram.freqs_hz.size)
    assert gram.magnitude_db.max() == pytest.approx(0.0, abs=1e-12)
    assert gram.magnitude_db.min() >= -120.0


def test_spectrogram_tracks_lfm_sweep():
    """Per-frame spectral argmax follows the linear frequency law."""
    bandwidth, duration, fs = 64.0, 1.0, 512.0
    sig = wk.synth_lfm(bandwidth, duration, fs)
    gram = wk.spectrogram(sig, 64, 0.875)
    ridge = gram.freqs_hz[np.argmax(gram.magnitude_db, axis=1)]
    expected = bandwidth * (gram.times_s / duration - 0.5)
    # Frequency resolution of a 64-sample window is fs/64 = 8 Hz.
    assert np.max(np.abs(ridge - expected)) <= 8.0


def test_spectrogram_validation():
    sig = wk.synth_cw(1.0, 64.0)
    with pytest.raises(InvalidInputError):
        wk.spectrogram(sig, 1, 0.5)
    with pytest.raises(InvalidInputError):
        wk.spectrogram(sig, 65, 0.5)
    with pytest.raises(InvalidInputError):
        wk.spectrogram(sig, 16, 1.0)


def test_to_passband_baseband_is_real_part():
    sig = wk.synth_lfm(32.0, 1.0, 256.0)
    np.testing.assert_allclose(wk.to_passband(sig), np.real(sig.samples),
                               atol=0)


def test_to_passband_mixes_carrier():
    sig = wk.synth_cw(1.0, 256.0, center_freq_hz=64.0)
    passband = wk.to_passband(sig)
    expected = np.real(sig.samples * np.exp(2j * np.pi * 64.0 * sig.time_grid()))
    np.testing.assert_allclose(passband, expected, atol=1e-15)


def test_to_passband_rejects_carrier_beyond_nyquist():
    sig = wk.synth_lfm(64.0, 1.0, 256.0, center_freq_hz=112.0)
    with pytest.raises(InvalidInputError):
        wk.to_passband(sig)
