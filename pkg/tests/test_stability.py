import numpy as np
import pytest

from pintune.errors import DomainError
from pintune.stability import (
    FrequencyTimeSeries,
    NoOscillation,
    allan_deviation,
    detect_oscillation,
    drift_rate,
    peak_to_peak_deviation,
)

F0 = 6.8278e9


def series(t, f):
    return FrequencyTimeSeries(np.asarray(t), np.asarray(f), f0=F0)


class TestDriftRate:
    def test_constant_series(self):
        t = np.linspace(0, 3600, 100)
        slope, ppb = drift_rate(series(t, np.full(100, F0)))
        assert slope == pytest.approx(0.0, abs=1e-9)
        assert ppb == pytest.approx(0.0, abs=1e-9)

    def test_paper_regime_linear_drift(self):
        # 1 kHz over 70 hours at 2-minute cadence -> 2.09 ppb/hr
        t = np.arange(0, 70 * 3600, 120.0)
        f = F0 + 1000.0 * t / (70 * 3600.0)
        slope, ppb = drift_rate(series(t, f))
        assert slope == pytest.approx(1000.0 / 70.0, rel=1e-6)
        assert ppb == pytest.approx(2.09, rel=0.01)

    def test_bounded_random_walk_under_2ppb(self):
        # bounded wander with < 1 kHz excursion over 70 h stays below the
        # 2.1 ppb/hr bound
        rng = np.random.default_rng(8)
        t = np.arange(0, 70 * 3600, 120.0)
        walk = np.cumsum(rng.normal(0, 20.0, t.size))
        walk = 400.0 * walk / np.max(np.abs(walk))
        s = series(t, F0 + walk)
        assert peak_to_peak_deviation(s) < 1000.0
        _, ppb = drift_rate(s)
        assert abs(ppb) < 2.1

    def test_offset_invariance(self):
        t = np.linspace(0, 7200, 50)
        rng = np.random.default_rng(5)
        f = F0 + rng.normal(0, 100, 50)
        _, r1 = drift_rate(series(t, f))
        _, r2 = drift_rate(series(t, f + 12345.0))
        assert r1 == pytest.approx(r2, abs=1e-9)

    def test_linear_trend_recovery(self):
        t = np.linspace(0, 10 * 3600, 500)
        for inj in (10.0, -250.0, 4000.0):  # Hz/hr
            slope, _ = drift_rate(series(t, F0 + inj * t / 3600.0))
            assert slope == pytest.approx(inj, rel=1e-3)

    def test_degenerate_inputs(self):
        with pytest.raises(DomainError):
            drift_rate(series([0.0, 1.0], [F0, F0]))


class TestPeakToPeak:
    def test_constant(self):
        t = np.linspace(0, 100, 10)
        assert peak_to_peak_deviation(series(t, np.full(10, F0))) == 0.0

    def test_alternating(self):
        t = np.arange(10.0)
        f = F0 + 500.0 * (-1.0) ** np.arange(10)
        assert peak_to_peak_deviation(series(t, f)) == pytest.approx(1000.0)

    def test_time_reparameterization_invariance(self):
        rng = np.random.default_rng(2)
        f = F0 + rng.normal(0, 200, 64)
        t1 = np.arange(64.0)
        t2 = np.sort(rng.uniform(0, 1e4, 64))
        assert peak_to_peak_deviation(series(t1, f)) == peak_to_peak_deviation(
            series(t2, f)
        )


class TestDetectOscillation:
    def test_sinusoid_recovery(self):
        rng = np.random.default_rng(1)
        n, dt = 1024, 0.01
        t = np.arange(n) * dt
        nu, amp = 7.3, 2000.0
        f = F0 + amp * np.sin(2 * np.pi * nu * t + 0.4)
        nu_hat, amp_hat = detect_oscillation(series(t, f))
        assert nu_hat == pytest.approx(nu, rel=0.05)
        assert amp_hat == pytest.approx(amp, rel=0.05)

    def test_recovery_under_noise_50_seeds(self):
        n, dt = 1024, 0.01
        t = np.arange(n) * dt
        hits = 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            nu = rng.uniform(5 / (n * dt), 0.4 / dt)
            amp = 1000.0
            f = (
                F0
                + amp * np.sin(2 * np.pi * nu * t + rng.uniform(0, 2 * np.pi))
                + (amp / 10.0) * rng.standard_normal(n)  # SNR = 10
            )
            nu_hat, amp_hat = detect_oscillation(series(t, f))
            if abs(nu_hat / nu - 1) < 0.05 and abs(amp_hat / amp - 1) < 0.05:
                hits += 1
        assert hits == 50

    def test_white_noise_rejected(self):
        t = np.arange(1024) * 0.01
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            with pytest.raises(NoOscillation):
                detect_oscillation(series(t, F0 + rng.normal(0, 100, 1024)))

    def test_vibration_equivalent_jitter(self):
        # pin vibration at 40 um: slope 1.45e11 Hz/m x 0.7 um ~ 100 kHz of
        # frequency jitter
        from pintune.resonator import (
            ResonatorParams,
            TuningState,
            calibrate_pin_model,
            capacitance_for_frequency,
            frequency_slope,
        )

        params = ResonatorParams(
            L0=1e-9, C=capacitance_for_frequency(F0, 1e-9), Qi0=35000, Qe=5e5
        )
        pin = calibrate_pin_model(F0, 6.8454e9, 40e-6, 8.7e3 / 60e-9)
        amp = abs(frequency_slope(params, TuningState(40e-6), pin)) * 0.7e-6
        t = np.arange(1024) * 0.001
        f = 6.8454e9 + amp * np.sin(2 * np.pi * 11.0 * t)
        _, amp_hat = detect_oscillation(FrequencyTimeSeries(t, f, 6.8454e9))
        assert amp_hat == pytest.approx(100e3, rel=0.05)

    def test_requires_uniform_sampling(self):
        t = np.sort(np.random.default_rng(3).uniform(0, 10, 128))
        with pytest.raises(DomainError):
            detect_oscillation(series(t, np.full(128, F0)))

    def test_requires_enough_samples(self):
        t = np.arange(32) * 0.1
        with pytest.raises(DomainError):
            detect_oscillation(series(t, np.full(32, F0)))


class TestAllanDeviation:
    def test_white_noise_slope(self):
        # white frequency noise: adev ~ tau^(-1/2)
        rng = np.random.default_rng(4)
        t = np.arange(16384.0)
        f = F0 + rng.normal(0, 100.0, t.size)
        taus, adev = allan_deviation(series(t, f))
        assert len(taus) > 5
        ratio = adev[0] / adev[4]
        expected = (taus[4] / taus[0]) ** 0.5
        assert ratio == pytest.approx(expected, rel=0.3)

    def test_requires_uniform_sampling(self):
        t = np.sort(np.random.default_rng(3).uniform(0, 10, 128))
        with pytest.raises(DomainError):
            allan_deviation(series(t, np.full(128, F0)))


class TestSeriesInvariants:
    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            FrequencyTimeSeries(np.arange(3.0), np.arange(4.0), F0)

    def test_non_increasing_timestamps(self):
        with pytest.raises(DomainError):
            FrequencyTimeSeries(np.array([0.0, 0.0, 1.0]), np.full(3, F0), F0)
