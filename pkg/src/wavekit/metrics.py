"""Matched-filter, ambiguity, and scalar design metrics.

Correlation responses are computed with FFT acceleration and reported as
peak-referenced dB magnitudes floored at -120 dB.  Sidelobe metrics
(PSL/ISL) are evaluated over a two-sided delay region
{tau : inner <= |tau| <= outer} matching the red-dashed region picture
of a range response plot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidInputError
from .signal import DB_FLOOR, SampledSignal, Spectrum, _next_pow2, spectrum, to_db


@dataclass(frozen=True)
class RegionSpec:
    """Two-sided delay region {tau : inner <= |tau| <= outer}."""

    inner_delay_s: float
    outer_delay_s: float

    def __post_init__(self):
        if self.inner_delay_s < 0:
            raise InvalidInputError("inner_delay_s must be nonnegative")
        if self.outer_delay_s <= self.inner_delay_s:
            raise InvalidInputError("outer_delay_s must exceed inner_delay_s")

    def mask(self, lags_s: np.ndarray) -> np.ndarray:
        a = np.abs(lags_s)
        return (a >= self.inner_delay_s) & (a <= self.outer_delay_s)


@dataclass(frozen=True)
class CorrelationResponse:
    """Correlation magnitude versus delay.

    For an autocorrelation the peak sits at lag 0 and reads 0 dB.  For a
    cross-correlation the normalization is sqrt(Ea*Eb), so the global
    peak may sit below 0 dB.
    """

    lags_s: np.ndarray
    magnitude_db: np.ndarray

    def __post_init__(self):
        for name in ("lags_s", "magnitude_db"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.lags_s.shape != self.magnitude_db.shape:
            raise InvalidInputError("lag/magnitude length mismatch")

    @property
    def lag_step_s(self) -> float:
        return float(self.lags_s[1] - self.lags_s[0])

    def magnitude_linear(self) -> np.ndarray:
        return 10.0 ** (self.magnitude_db / 20.0)


@dataclass(frozen=True)
class AmbiguitySurface:
    """Narrowband ambiguity magnitude |chi(tau, nu)|, normalized to 1 at (0,0)."""

    delays_s: np.ndarray
    dopplers_hz: np.ndarray
    magnitude: np.ndarray

    def __post_init__(self):
        if self.magnitude.shape != (self.delays_s.size, self.dopplers_hz.size):
            raise InvalidInputError("ambiguity matrix does not match axis lengths")


@dataclass(frozen=True)
class MetricsReport:
    """Scalar design metrics for one waveform."""

    psl_db: float
    isl_db: float
    inband_energy_fraction: float
    rms_bandwidth_hz: float
    tbp: float
    p99_bandwidth_hz: float

    def to_dict(self) -> dict:
        return {
            "psl_db": self.psl_db,
            "isl_db": self.isl_db,
            "inband_energy_fraction": self.inband_energy_fraction,
            "rms_bandwidth_hz": self.rms_bandwidth_hz,
            "tbp": self.tbp,
            "p99_bandwidth_hz": self.p99_bandwidth_hz,
        }


@dataclass(frozen=True)
class DopplerTolerancePoint:
    """One point of a Doppler tolerance curve.

    peak_loss_db is the matched-filter peak level relative to the
    zero-mismatch peak (0 dB = no loss, strongly negative = destroyed);
    peak_shift_s is the delay bias of the surviving peak.
    """

    doppler_hz: float
    peak_loss_db: float
    peak_shift_s: float


def _linear_xcorr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full linear correlation y[k] = sum_n a[n] * conj(b[n-k]).

    Lags k run from -(len(b)-1) to len(a)-1 and a delayed copy of b
    inside a produces a peak at positive k equal to the delay.
    """
    na, nb = a.size, b.size
    nfft = _next_pow2(na + nb)
    fa = np.fft.fft(a, nfft)
    fb = np.fft.fft(b, nfft)
    y = np.fft.ifft(fa * np.conj(fb))
    return np.concatenate([y[nfft - (nb - 1):], y[:na]])


def cross_correlation(a: SampledSignal, b: SampledSignal) -> CorrelationResponse:
    """Cross-correlation magnitude of two signals, normalized by sqrt(Ea*Eb).

    Raises:
        InvalidInputError: if the sample rates differ.
    """
    if a.sample_rate_hz != b.sample_rate_hz:
        raise InvalidInputError("cross_correlation requires equal sample rates")
    fs = a.sample_rate_hz
    y = _linear_xcorr(a.samples, b.samples)
    norm = np.sqrt(a.energy() * b.energy())
    if norm == 0.0:
        raise InvalidInputError("cross_correlation requires nonzero-energy signals")
    lags = np.arange(-(b.num_samples - 1), a.num_samples) / fs
    return CorrelationResponse(lags_s=lags, magnitude_db=to_db(np.abs(y) / norm))


def autocorrelation(signal: SampledSignal) -> CorrelationResponse:
    """Autocorrelation magnitude R(tau), peak-normalized (0 dB at lag 0)."""
    return cross_correlation(signal, signal)


def ambiguity_function(signal: SampledSignal, max_delay_s: float,
                       max_doppler_hz: float, num_delays: int = 129,
                       num_dopplers: int = 129) -> AmbiguitySurface:
    """Narrowband ambiguity surface chi(tau, nu) = integral s(t) s*(t+tau) e^{j2 pi nu t} dt.

    Delay samples lie on the signal's lag lattice; both axes are
    symmetric about zero and always include zero (odd grid sizes are
    enforced), so the surface can be peak-normalized at (0,0).

    Args:
        signal: unit-energy waveform.
        max_delay_s: delay extent (<= T).
        max_doppler_hz: Doppler extent.
        num_delays: delay grid size (rounded up to odd, >= 3).
        num_dopplers: Doppler grid size (rounded up to odd, >= 3).
    """
    if max_delay_s <= 0 or max_delay_s > signal.duration_s:
        raise InvalidInputError("max_delay_s must lie in (0, T]")
    if max_doppler_hz <= 0:
        raise InvalidInputError("max_doppler_hz must be positive")
    if num_delays < 2 or num_dopplers < 2:
        raise InvalidInputError("grid sizes must be >= 2")
    num_delays += (num_delays + 1) % 2
    num_dopplers += (num_dopplers + 1) % 2
    s = signal.samples
    n = s.size
    fs = signal.sample_rate_hz
    t = signal.time_grid()
    max_lag = min(n - 1, int(round(max_delay_s * fs)))
    lag_idx = np.unique(np.round(np.linspace(-max_lag, max_lag, num_delays)).astype(int))
    dopplers = np.linspace(-max_doppler_hz, max_doppler_hz, num_dopplers)
    lag_products = np.zeros((lag_idx.size, n), dtype=np.complex128)
    for row, k in enumerate(lag_idx):
        if k >= 0:
            lag_products[row, : n - k] = s[: n - k] * np.conj(s[k:])
        else:
            lag_products[row, -k:] = s[-k:] * np.conj(s[: n + k])
    basis = np.exp(2j * np.pi * np.outer(t, dopplers))
    surface = np.abs(lag_products @ basis)
    i0 = int(np.where(lag_idx == 0)[0][0])
    j0 = int(np.argmin(np.abs(dopplers)))
    surface /= surface[i0, j0]
    return AmbiguitySurface(delays_s=lag_idx / fs, dopplers_hz=dopplers,
                            magnitude=surface)


def psl_region(resp: CorrelationResponse, region: RegionSpec) -> float:
    """Peak sidelobe level over the region, in dB relative to the mainlobe.

    Raises:
        InvalidInputError: if the region holds no lag samples.
    """
    mask = region.mask(resp.lags_s)
    if not np.any(mask):
        raise InvalidInputError("region contains no lag samples")
    return float(resp.magnitude_db[mask].max())


def isl_region(resp: CorrelationResponse, region: RegionSpec) -> float:
    """Integrated sidelobe level 10*log10(sum |R|^2 dtau / |R(0)|^2) over the region.

    The underlying magnitudes are already peak-normalized, so this is
    the dimensioned sidelobe energy of the region in dB.  Results are
    floored at -120 dB.
    """
    mask = region.mask(resp.lags_s)
    if not np.any(mask):
        raise InvalidInputError("region contains no lag samples")
    mag = resp.magnitude_linear()[mask]
    total = float(np.sum(mag**2) * resp.lag_step_s)
    return float(max(10.0 * np.log10(max(total, 1e-30)), DB_FLOOR))


def inband_energy_fraction(spec: Spectrum, bandwidth_hz: float) -> float:
    """Fraction of spectral energy inside [-B/2, B/2].

    Raises:
        InvalidInputError: if B is nonpositive or exceeds the spectral span.
    """
    if bandwidth_hz <= 0:
        raise InvalidInputError("bandwidth_hz must be positive")
    span = spec.freqs_hz[-1] - spec.freqs_hz[0] + spec.df_hz
    if bandwidth_hz >= span:
        raise InvalidInputError("bandwidth_hz must be below the sampled span")
    power = spec.magnitude**2
    total = power.sum()
    if total == 0.0:
        raise InvalidInputError("spectrum has zero energy")
    mask = np.abs(spec.freqs_hz) <= bandwidth_hz / 2.0
    return float(power[mask].sum() / total)


def rms_bandwidth(spec: Spectrum) -> float:
    """Centroid-removed RMS bandwidth sqrt(int (f-f0)^2 |S|^2 df / int |S|^2 df)."""
    power = spec.magnitude**2
    total = power.sum()
    if total == 0.0:
        raise InvalidInputError("spectrum has zero energy")
    centroid = float((spec.freqs_hz * power).sum() / total)
    return float(np.sqrt(((spec.freqs_hz - centroid) ** 2 * power).sum() / total))


def p99_bandwidth(spec: Spectrum, fraction: float = 0.99) -> float:
    """Width of the central band holding `fraction` of the spectral energy.

    The band edges are the (1-fraction)/2 and 1-(1-fraction)/2 energy
    quantiles of |S|^2, linearly interpolated between bins.
    """
    if not 0.0 < fraction < 1.0:
        raise InvalidInputError("fraction must lie in (0, 1)")
    power = spec.magnitude**2
    total = power.sum()
    if total == 0.0:
        raise InvalidInputError("spectrum has zero energy")
    cum = np.cumsum(power) / total
    tail = (1.0 - fraction) / 2.0
    f_lo = float(np.interp(tail, cum, spec.freqs_hz))
    f_hi = float(np.interp(1.0 - tail, cum, spec.freqs_hz))
    return f_hi - f_lo


def _parabolic_refine(mags: np.ndarray, idx: int) -> float:
    """Sub-sample peak offset in [-0.5, 0.5] via 3-point parabola."""
    if idx <= 0 or idx >= mags.size - 1:
        return 0.0
    y0, y1, y2 = mags[idx - 1], mags[idx], mags[idx + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return 0.0
    return float(np.clip(0.5 * (y0 - y2) / denom, -0.5, 0.5))


def _scaled_replica(signal: SampledSignal, eta: float) -> np.ndarray:
    """Time-scaled echo sqrt(eta) * s(eta t) * e^{j 2 pi fc (eta-1) t} at baseband.

    This is the complex-baseband form of physically time-compressing the
    passband waveform by eta, used by the wideband Doppler model.
    """
    t = signal.time_grid()
    spline_re = CubicSpline(t, signal.samples.real)
    spline_im = CubicSpline(t, signal.samples.imag)
    ts = eta * t
    inside = (ts >= t[0]) & (ts <= t[-1])
    scaled = np.zeros(signal.num_samples, dtype=np.complex128)
    scaled[inside] = spline_re(ts[inside]) + 1j * spline_im(ts[inside])
    carrier = np.exp(2j * np.pi * signal.center_freq_hz * (eta - 1.0) * t)
    return np.sqrt(eta) * scaled * carrier


def doppler_tolerance_curve(signal: SampledSignal, dopplers_hz,
                            mode: str = "narrowband") -> list[DopplerTolerancePoint]:
    """Matched-filter peak loss and range bias versus Doppler mismatch.

    In "narrowband" mode the echo model is a frequency shift
    s(t)*e^{j2 pi nu t}.  In "wideband" mode the echo is the time-scaled
    replica with scale eta = 1 + nu/fc (fc taken from the signal's
    center_freq_hz), which is the physically correct sonar model and the
    one under which hyperbolic FM retains its peak.

    Args:
        signal: unit-energy waveform.
        dopplers_hz: Doppler shifts nu to evaluate.
        mode: "narrowband" or "wideband".

    Returns:
        One DopplerTolerancePoint per requested Doppler.
    """
    if mode not in ("narrowband", "wideband"):
        raise InvalidInputError("mode must be 'narrowband' or 'wideband'")
    if mode == "wideband" and signal.center_freq_hz <= 0:
        raise InvalidInputError("wideband mode requires a positive center_freq_hz")
    s = signal.samples
    fs = signal.sample_rate_hz
    t = signal.time_grid()
    energy = signal.energy()
    points = []
    for nu in np.atleast_1d(np.asarray(dopplers_hz, dtype=float)):
        if mode == "narrowband":
            echo = s * np.exp(2j * np.pi * nu * t)
        else:
            echo = _scaled_replica(signal, 1.0 + nu / signal.center_freq_hz)
        y = np.abs(_linear_xcorr(echo, s))
        idx = int(np.argmax(y))
        loss = float(to_db(y[idx] / energy))
        shift = (idx - (s.size - 1) + _parabolic_refine(y, idx)) / fs
        points.append(DopplerTolerancePoint(doppler_hz=float(nu),
                                            peak_loss_db=float(loss),
                                            peak_shift_s=float(shift)))
    return points


def default_region(bandwidth_hz: float, duration_s: float) -> RegionSpec:
    """Default sidelobe region: inner 2/B (two resolution cells), outer T/4.

    Falls back to [T/4, 3T/4] for low time-bandwidth waveforms where
    2/B reaches past T/4.
    """
    inner = 2.0 / bandwidth_hz
    outer = duration_s / 4.0
    if inner >= outer:
        return RegionSpec(inner_delay_s=duration_s / 4.0,
                          outer_delay_s=0.75 * duration_s)
    return RegionSpec(inner_delay_s=inner, outer_delay_s=outer)


def metrics_report(signal: SampledSignal, bandwidth_hz: float,
                   region: RegionSpec | None = None,
                   zero_pad_factor: int = 4) -> MetricsReport:
    """Assemble the scalar metrics bundle for one waveform.

    Args:
        signal: waveform under test.
        bandwidth_hz: design (swept) bandwidth used for the TBP, the
            inband fraction, and the default region.
        region: sidelobe region; default per `default_region`.
        zero_pad_factor: spectral zero padding for the bandwidth metrics.
    """
    if region is None:
        region = default_region(bandwidth_hz, signal.duration_s)
    resp = autocorrelation(signal)
    spec = spectrum(signal, zero_pad_factor)
    return MetricsReport(
        psl_db=psl_region(resp, region),
        isl_db=isl_region(resp, region),
        inband_energy_fraction=inband_energy_fraction(spec, bandwidth_hz),
        rms_bandwidth_hz=rms_bandwidth(spec),
        tbp=float(bandwidth_hz * signal.duration_s),
        p99_bandwidth_hz=p99_bandwidth(spec),
    )
