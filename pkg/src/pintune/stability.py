"""Long-term drift and vibration analysis of resonance-frequency records.

Drift is reported two ways, since a "less than 1 kHz over 70 hours" style
bound can be read either as a fitted trend or as a total excursion:
  - ordinary least-squares slope (Hz/hr and ppb/hr against the reference f0)
  - peak-to-peak deviation (Hz)
A spectral peak finder flags periodic modulation (pin vibration shows up as a
few-kHz oscillation in the transmitted signal).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, PintuneError

# Spectral peak must exceed this multiple of the median bin power to count as
# an oscillation rather than a noise excursion.
PEAK_TO_MEDIAN_THRESHOLD = 50.0


class NoOscillation(PintuneError):
    """No spectral peak stands out above the noise floor."""


@dataclass
class FrequencyTimeSeries:
    """Resonance frequency vs time: timestamps in s (strictly increasing),
    f_r in Hz, and the reference frequency f0 the drift is quoted against."""

    timestamps: np.ndarray
    f_r: np.ndarray
    f0: float

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        self.f_r = np.asarray(self.f_r, dtype=float)
        if self.timestamps.shape != self.f_r.shape:
            raise DomainError("FrequencyTimeSeries arrays must have equal length")
        if self.timestamps.size and not np.all(np.diff(self.timestamps) > 0):
            raise DomainError("FrequencyTimeSeries.timestamps must be strictly increasing")
        if not self.f0 > 0:
            raise DomainError("FrequencyTimeSeries.f0 must be > 0")


def drift_rate(series):
    """OLS drift of f_r vs time: (slope in Hz/hr, fractional rate in ppb/hr)."""
    t = series.timestamps
    if t.size < 3:
        raise DomainError("drift_rate needs at least 3 samples")
    if t[-1] <= t[0]:
        raise DomainError("drift_rate needs a non-degenerate time span")
    # center both axes first; raw values (seconds x GHz) are badly scaled
    slope_per_s = np.polyfit(t - t.mean(), series.f_r - series.f_r.mean(), 1)[0]
    slope_per_hr = float(slope_per_s) * 3600.0
    return slope_per_hr, slope_per_hr / series.f0 * 1e9


def peak_to_peak_deviation(series):
    """max(f_r) - min(f_r) in Hz."""
    if series.f_r.size == 0:
        raise DomainError("series is empty")
    return float(np.ptp(series.f_r))


def detect_oscillation(series, lineshape_slope=None):
    """Find the dominant periodic modulation in a uniformly sampled record.

    Returns (modulation frequency in Hz, amplitude).  The amplitude is in the
    units of the samples; when the samples are power-ratio values taken at a
    fixed probe frequency, pass the local lineshape slope d(ratio)/df to
    convert the result to equivalent frequency jitter in Hz.

    Raises NoOscillation when no spectral peak clears the noise floor.
    """
    t = series.timestamps
    y = series.f_r
    if t.size < 64:
        raise DomainError("detect_oscillation needs at least 64 samples")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=0.0):
        raise DomainError("detect_oscillation requires uniform sampling")
    dt = float(dt[0])

    y0 = y - np.mean(y)
    power = np.abs(np.fft.rfft(y0)) ** 2
    power[0] = 0.0
    k = int(np.argmax(power))
    floor = float(np.median(power[1:]))
    if floor <= 0.0 or power[k] < PEAK_TO_MEDIAN_THRESHOLD * floor:
        raise NoOscillation("no spectral peak above the noise floor")

    # Refine the peak frequency off the FFT grid, then solve amplitude/phase
    # by linear least squares at the refined frequency.
    n = y0.size
    df_bin = 1.0 / (n * dt)

    def neg_dft_mag(nu):
        z = np.exp(-2j * math.pi * nu * t)
        return -abs(np.sum(y0 * z))

    lo = max(k - 1, 1) * df_bin
    hi = min(k + 1, n // 2) * df_bin
    res = minimize_scalar(neg_dft_mag, bounds=(lo, hi), method="bounded",
                          options={"xatol": df_bin * 1e-6})
    nu = float(res.x)

    design = np.column_stack([np.sin(2 * math.pi * nu * t),
                              np.cos(2 * math.pi * nu * t)])
    coef, *_ = np.linalg.lstsq(design, y0, rcond=None)
    amplitude = float(np.hypot(coef[0], coef[1]))
    if lineshape_slope is not None:
        if lineshape_slope == 0:
            raise DomainError("lineshape_slope must be nonzero")
        amplitude /= abs(lineshape_slope)
    return nu, amplitude


def allan_deviation(series, taus=None):
    """Non-overlapping Allan deviation of the fractional frequency f_r/f0.

    Extra metric beyond the drift/peak-to-peak headline numbers; expects
    uniform sampling.  Returns (taus_s, adev) arrays.
    """
    t = series.timestamps
    if t.size < 9:
        raise DomainError("allan_deviation needs at least 9 samples")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=0.0):
        raise DomainError("allan_deviation requires uniform sampling")
    dt = float(dt[0])

    y = series.f_r / series.f0
    n = y.size
    if taus is None:
        ms = np.unique(np.floor(np.logspace(0, math.log10(n // 3), 20)).astype(int))
    else:
        ms = np.unique(np.asarray([max(int(round(tau / dt)), 1) for tau in taus]))
    ms = ms[ms <= n // 3]

    out_t, out_a = [], []
    for m in ms:
        k = n // m
        block = y[: k * m].reshape(k, m).mean(axis=1)
        if block.size < 2:
            continue
        d = np.diff(block)
        out_t.append(m * dt)
        out_a.append(math.sqrt(0.5 * float(np.mean(d * d))))
    return np.asarray(out_t), np.asarray(out_a)
