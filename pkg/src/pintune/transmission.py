"""Forward model of the measured transmission.

Near resonance the ratio of transmitted to input power for the notch-coupled
resonator is

    P_out/P_in = |1 - (Q_L/Q_e) e^{i phi} / (1 + 2i Q_L (f - f_r)/f_r)|**2

with 1/Q_L = 1/Q_i + 1/Q_e.  This module evaluates that lineshape, composes
quality factors, synthesizes noisy sweeps (including broadening from
mechanical vibration of the tuning pin), and does the power-chain / photon
bookkeeping.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonPhysicalFit
from .resonator import frequency_slope, tuned_frequency
from .units import HBAR, dbm_to_watts


@dataclass(frozen=True)
class SweepConfig:
    """Frequency sweep settings: span [f_start, f_stop] in Hz, point count,
    input power at the resonator, total sweep time."""

    f_start: float
    f_stop: float
    n_points: int
    p_in_dbm: float
    duration_s: float = 160.0

    def __post_init__(self):
        if not self.f_start < self.f_stop:
            raise DomainError("SweepConfig.f_start must be < f_stop")
        if self.n_points < 2:
            raise DomainError("SweepConfig.n_points must be >= 2")
        if not self.duration_s > 0:
            raise DomainError("SweepConfig.duration_s must be > 0")


@dataclass
class SweepTrace:
    """One measured or synthesized sweep: frequency axis (Hz, strictly
    increasing), power ratio P_out/P_in, input power, and the logical time
    offset from session start."""

    frequencies: np.ndarray
    power_ratio: np.ndarray
    p_in_dbm: float
    timestamp: float = 0.0

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.power_ratio = np.asarray(self.power_ratio, dtype=float)
        if self.frequencies.shape != self.power_ratio.shape:
            raise DomainError("SweepTrace arrays must have equal length")
        if self.frequencies.size < 2:
            raise DomainError("SweepTrace needs at least 2 points")
        if not np.all(np.diff(self.frequencies) > 0):
            raise DomainError("SweepTrace.frequencies must be strictly increasing")
        if np.any(self.power_ratio < 0):
            raise DomainError("SweepTrace.power_ratio must be >= 0")


@dataclass(frozen=True)
class NoiseModel:
    """Measurement imperfections for synthesis.

    sigma_rel: relative (multiplicative) Gaussian noise on the power ratio
    vib_amplitude: mechanical vibration amplitude of the pin (m)
    seed: RNG seed (counter-based Philox; fixed seed -> bit-identical traces)
    """

    sigma_rel: float = 0.0
    vib_amplitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma_rel < 0:
            raise DomainError("NoiseModel.sigma_rel must be >= 0")
        if self.vib_amplitude < 0:
            raise DomainError("NoiseModel.vib_amplitude must be >= 0")


@dataclass(frozen=True)
class TlsLossModel:
    """Phenomenological saturable two-level-system loss:

    1/Q_i(P) = 1 / (q_tls_low * sqrt(1 + P/P_sat)) + 1/q_other
    """

    q_tls_low: float
    p_sat_dbm: float
    q_other: float

    def __post_init__(self):
        if not self.q_tls_low > 0 or not self.q_other > 0:
            raise DomainError("TlsLossModel quality factors must be > 0")


def s21_power(f, f_r, q_l, q_e, phi=0.0):
    """Transmitted power ratio at frequency f (scalar or array)."""
    if not f_r > 0:
        raise DomainError("f_r must be > 0")
    if not q_l > 0 or not q_e > 0:
        raise DomainError("quality factors must be > 0")
    if not abs(phi) < math.pi / 2:
        raise DomainError("|phi| must be < pi/2")
    f = np.asarray(f, dtype=float)
    x = (f - f_r) / f_r
    resp = 1.0 - (q_l / q_e) * np.exp(1j * phi) / (1.0 + 2j * q_l * x)
    out = resp.real**2 + resp.imag**2
    return float(out) if out.ndim == 0 else out


def loaded_q(q_i, q_e):
    """Harmonic composition 1/Q_L = 1/Q_i + 1/Q_e."""
    if not q_i > 0 or not q_e > 0:
        raise DomainError("quality factors must be > 0")
    return q_i * q_e / (q_i + q_e)


def internal_q(q_l, q_e):
    """Invert the composition: Q_i from Q_L and Q_e.  Requires Q_L < Q_e."""
    if not q_l > 0 or not q_e > 0:
        raise DomainError("quality factors must be > 0")
    if q_l >= q_e:
        raise NonPhysicalFit("Q_L >= Q_e implies infinite or negative Q_i")
    return q_l * q_e / (q_e - q_l)


def synthesize_sweep(config, params, state, pin, noise, q_i=None, timestamp=0.0):
    """Synthesize one VNA sweep of the tuned plant.

    Pin vibration is modeled as a sinusoidal mechanical oscillation much
    faster than the sweep, so each frequency point sees the resonance
    displaced by an arcsine-distributed offset of amplitude
    |df/dd| * vib_amplitude.  Multiplicative Gaussian noise sigma_rel is then
    applied to the power ratio.  Deterministic for a fixed seed (Philox,
    vectorized draws).
    """
    q_i = params.Qi0 if q_i is None else q_i
    f_r = tuned_frequency(params, state, pin)
    q_l = loaded_q(q_i, params.Qe)
    f = np.linspace(config.f_start, config.f_stop, config.n_points)

    jitter_amp = abs(frequency_slope(params, state, pin)) * noise.vib_amplitude
    if jitter_amp > 0 or noise.sigma_rel > 0:
        rng = np.random.Generator(np.random.Philox(noise.seed))
        phase = rng.uniform(0.0, 2.0 * math.pi, config.n_points)
        gauss = rng.standard_normal(config.n_points)
    else:
        phase = np.zeros(config.n_points)
        gauss = np.zeros(config.n_points)

    df = jitter_amp * np.sin(phase)
    # Per-point resonance displacement: evaluate the lineshape point by point
    # at the jittered f_r.  Vectorized via the detuning variable.
    x = (f - (f_r + df)) / (f_r + df)
    resp = 1.0 - (q_l / params.Qe) * np.exp(1j * params.phi) / (1.0 + 2j * q_l * x)
    ratio = resp.real**2 + resp.imag**2
    ratio = ratio * (1.0 + noise.sigma_rel * gauss)
    np.clip(ratio, 0.0, None, out=ratio)
    return SweepTrace(f, ratio, config.p_in_dbm, timestamp=timestamp)


def _stored_energy_factor(p_in_dbm, f_r, q_l, q_e):
    # (Q_L^2/Q_e) * P_in / (hbar * omega_r^2), the convention-free part of
    # the photon number.
    omega = 2.0 * math.pi * f_r
    return (q_l * q_l / q_e) * dbm_to_watts(p_in_dbm) / (HBAR * omega * omega)


# kappa is fixed so that -131 dBm at 6.828 GHz with Q_L = 32,710 and
# Q_e = 5e5 holds exactly 11 photons (the measured calibration anchor).
PHOTON_ANCHOR = (-131.0, 6.828e9, 32710.0, 5.0e5)
DEFAULT_PHOTON_KAPPA = 11.0 / _stored_energy_factor(*PHOTON_ANCHOR)


def photon_number(p_in_dbm, f_r, q_l, q_e, kappa=DEFAULT_PHOTON_KAPPA):
    """Mean intra-resonator photon number at the given drive power."""
    if not f_r > 0 or not q_l > 0 or not q_e > 0:
        raise DomainError("f_r and quality factors must be > 0")
    return kappa * _stored_energy_factor(p_in_dbm, f_r, q_l, q_e)


def input_chain_power(source_dbm, attenuators):
    """Power at the resonator after the cold attenuation chain (dBm)."""
    total = 0.0
    for a in attenuators:
        if a < 0:
            raise DomainError("attenuation values must be >= 0 dB")
        total += a
    return source_dbm - total


def power_dependent_qi(p_in_dbm, tls):
    """Internal Q at the given drive power under saturable TLS loss."""
    p_ratio = 10.0 ** ((p_in_dbm - tls.p_sat_dbm) / 10.0)
    inv = 1.0 / (tls.q_tls_low * math.sqrt(1.0 + p_ratio)) + 1.0 / tls.q_other
    return 1.0 / inv
