import numpy as np
import pytest

from specmend import (
    AdaptiveRatioConfig,
    AttackConfig,
    AudioSignal,
    Spectrum,
    apply_adaptive_attack,
    apply_attack,
    band_limited_removal,
    dft,
    estimate_removal_ratio,
    plan_segments,
    remove_components,
)
from synth import speech_like


def symmetric_spectrum(rep_mags, n, sr=16000, rng=None):
    """Spectrum with given magnitudes at representative bins 0..n//2 and random phases."""
    rng = rng or np.random.default_rng(0)
    bins = np.zeros(n, dtype=complex)
    for k, mag in enumerate(rep_mags):
        if k == 0 or k == n // 2:
            bins[k] = mag
        else:
            val = mag * np.exp(1j * rng.uniform(0, 2 * np.pi))
            bins[k] = val
            bins[n - k] = np.conj(val)
    return Spectrum(bins, sr)


class TestRemoveComponents:
    def test_ratio_zero_is_noop(self):
        spec = dft(np.random.default_rng(1).normal(0, 100, 64), 16000)
        out = remove_components(spec, 0.0)
        assert np.array_equal(out.bins, spec.bins)

    def test_quantile_selection_n4(self):
        spec = symmetric_spectrum([10, 1, 2], 4)
        assert np.abs(spec.bins).round(6).tolist() == [10, 1, 2, 1]
        out = remove_components(spec, 0.5, 0.0)
        assert np.count_nonzero(out.bins == 0) == 2
        assert out.bins[1] == 0 and out.bins[3] == 0
        assert out.bins[0] == spec.bins[0] and out.bins[2] == spec.bins[2]

    def test_retain_fraction_halves_energy(self):
        rng = np.random.default_rng(7)
        spec = dft(rng.normal(0, 100, 256), 16000)
        out = remove_components(spec, 0.5, retain_fraction=0.5)
        affected = np.abs(out.bins) != np.abs(spec.bins)
        assert affected.any()
        before = np.sum(np.abs(spec.bins[affected]) ** 2)
        after = np.sum(np.abs(out.bins[affected]) ** 2)
        assert after == pytest.approx(0.5 * before, rel=1e-12)

    def test_pairs_removed_together(self):
        rng = np.random.default_rng(8)
        spec = dft(rng.normal(0, 100, 128), 16000)
        out = remove_components(spec, 0.7)
        zeroed = np.flatnonzero(out.bins == 0)
        mirrored = np.sort((128 - zeroed) % 128)
        assert np.array_equal(np.sort(zeroed), mirrored)

    def test_bad_ratio_rejected(self):
        spec = dft([1, 2, 3, 4], 16000)
        with pytest.raises(ValueError):
            remove_components(spec, 1.0)


class TestBandLimitedRemoval:
    def test_full_band_matches_plain_removal(self):
        rng = np.random.default_rng(2)
        spec = dft(rng.normal(0, 100, 512), 16000)
        full = band_limited_removal(spec, 0.5, (0.0, 8000.0))
        plain = remove_components(spec, 0.5)
        assert np.array_equal(full.bins, plain.bins)

    def test_narrow_band_only_dc_eligible(self):
        rng = np.random.default_rng(3)
        spec = dft(rng.normal(0, 100, 1024), 16000)
        out = band_limited_removal(spec, 0.9, (0.0, 0.1))
        # one eligible 1-bin unit: budget floor(0.9 * 1) = 0, nothing changes
        assert np.array_equal(out.bins, spec.bins)

    def test_half_band_count_matches_enumeration(self):
        rng = np.random.default_rng(4)
        spec = dft(rng.normal(0, 100, 1024), 16000)
        band = (4000.0, 8000.0)
        out = band_limited_removal(spec, 0.5, band)
        changed = np.flatnonzero(out.bins != spec.bins)
        reps = np.minimum(changed, 1024 - changed)
        freqs = 16000 * reps / 1024
        assert np.all((freqs >= band[0]) & (freqs <= band[1]))
        eligible_reps = [k for k in range(513) if band[0] <= 16000 * k / 1024 <= band[1]]
        eligible_bins = sum(1 if k in (0, 512) else 2 for k in eligible_reps)
        budget = int(0.5 * eligible_bins)
        # pair atomicity can leave the count one bin short of the budget
        assert budget - 1 <= changed.size <= budget

    def test_empty_band_rejected(self):
        spec = dft(np.ones(1024), 16000)
        with pytest.raises(ValueError, match="no spectrum bins"):
            band_limited_removal(spec, 0.5, (10.0, 12.0))

    def test_band_beyond_nyquist_rejected(self):
        spec = dft(np.ones(1024), 16000)
        with pytest.raises(ValueError):
            band_limited_removal(spec, 0.5, (0.0, 9000.0))


class TestApplyAttack:
    def test_ratio_zero_roundtrip(self):
        sig = speech_like(10, 2048, 16000, 4)
        plan = plan_segments(sig, 128.0, "fixed")
        out = apply_attack(sig, plan, AttackConfig(removal_ratio=0.0, fixed_ms=128.0))
        assert np.allclose(out.samples, sig.samples, atol=1e-4)

    def test_removes_only_secondary_tone(self):
        n, sr = 2048, 16000
        t = np.arange(n)
        primary = 1000.0 * np.sin(2 * np.pi * 100 * t / n)
        secondary = 2.0 * np.sin(2 * np.pi * 400 * t / n)
        sig = AudioSignal(primary + secondary, sr)
        plan = plan_segments(sig, 128.0, "fixed")
        ratio = 2046 / 2048  # removes every unit except the strongest pair
        out = apply_attack(sig, plan, AttackConfig(removal_ratio=ratio, fixed_ms=128.0))
        assert np.allclose(out.samples, primary, atol=1e-6)

    def test_samples_outside_plan_untouched(self):
        sig = speech_like(11, 2048, 16000, 2)
        from specmend.signal_core import SegmentEntry, SegmentPlan

        plan = SegmentPlan([SegmentEntry(0, 2048, "0", "fixed")], len(sig))
        out = apply_attack(sig, plan, AttackConfig(removal_ratio=0.85))
        assert np.array_equal(out.samples[2048:], sig.samples[2048:])
        assert not np.array_equal(out.samples[:2048], sig.samples[:2048])

    def test_plan_length_mismatch_rejected(self):
        sig = speech_like(12, 2048, 16000, 1)
        plan = plan_segments(AudioSignal(np.zeros(100), 16000), 2.0, "fixed")
        with pytest.raises(ValueError):
            apply_attack(sig, plan, AttackConfig())

    def test_retained_energy_monotone_in_ratio(self):
        sig = speech_like(13, 2048, 16000, 4)
        plan = plan_segments(sig, 128.0, "fixed")
        energies = []
        for ratio in (0.1, 0.3, 0.5, 0.7, 0.9):
            out = apply_attack(sig, plan, AttackConfig(removal_ratio=ratio, fixed_ms=128.0))
            spec = dft(out.samples, 16000)
            energies.append(np.sum(np.abs(spec.bins) ** 2))
        assert all(a >= b for a, b in zip(energies, energies[1:]))

    def test_attacked_audio_is_real(self):
        sig = speech_like(14, 2048, 16000, 2)
        spec = dft(sig.samples[:2048], 16000)
        attacked = remove_components(spec, 0.85)
        complex_time = np.fft.ifft(attacked.bins)
        peak = np.abs(complex_time.real).max()
        assert np.abs(complex_time.imag).max() < 1e-6 * peak

    def test_strongest_bin_survives_high_ratio(self):
        rng = np.random.default_rng(15)
        for _ in range(5):
            spec = dft(rng.normal(0, 100, 256), 16000)
            strongest = np.argmax(np.abs(spec.bins))
            out = remove_components(spec, 0.95)
            assert out.bins[strongest] == spec.bins[strongest]

    def test_attack_then_estimate_recovers_ratio(self):
        sig = speech_like(16, 2048, 16000, 6)
        plan = plan_segments(sig, 128.0, "fixed")
        for ratio in (0.3, 0.6, 0.9):
            out = apply_attack(sig, plan, AttackConfig(removal_ratio=ratio, fixed_ms=128.0))
            est = estimate_removal_ratio(out, 2048)
            assert abs(est.ratio - ratio) <= 0.05


class TestAdaptiveAttack:
    def test_deterministic_for_fixed_seed(self):
        sig = speech_like(20, 2048, 16000, 4)
        cfg = AttackConfig(adaptive=AdaptiveRatioConfig(80.0, 0.01, 0.95, seed=99))
        out1, trace1 = apply_adaptive_attack(sig, cfg)
        out2, trace2 = apply_adaptive_attack(sig, cfg)
        assert np.array_equal(out1.samples, out2.samples)
        assert trace1 == trace2

    def test_degenerate_distribution_matches_fixed_attack(self):
        sig = speech_like(21, 2048, 16000, 4)
        cfg = AttackConfig(adaptive=AdaptiveRatioConfig(128.0, 0.85, 0.85, seed=1))
        adaptive_out, trace = apply_adaptive_attack(sig, cfg)
        fixed_out = apply_attack(
            sig, plan_segments(sig, 128.0, "fixed"), AttackConfig(removal_ratio=0.85, fixed_ms=128.0)
        )
        assert all(r == 0.85 for r in trace)
        assert np.allclose(adaptive_out.samples, fixed_out.samples)

    def test_trace_length_80ms_over_2s(self):
        sig = AudioSignal(np.random.default_rng(0).normal(0, 100, 32000), 16000)
        cfg = AttackConfig(adaptive=AdaptiveRatioConfig(80.0, 0.01, 0.95, seed=5))
        _, trace = apply_adaptive_attack(sig, cfg)
        assert len(trace) == 25

    def test_unit_too_short_rejected(self):
        sig = AudioSignal(np.zeros(100), 16000)
        cfg = AttackConfig(adaptive=AdaptiveRatioConfig(0.05, 0.01, 0.95, seed=0))
        with pytest.raises(ValueError, match="shorter than 2 samples"):
            apply_adaptive_attack(sig, cfg)

    def test_missing_adaptive_config_rejected(self):
        sig = AudioSignal(np.zeros(100), 16000)
        with pytest.raises(ValueError):
            apply_adaptive_attack(sig, AttackConfig())

    def test_ratio_bounds_validated(self):
        with pytest.raises(ValueError):
            AdaptiveRatioConfig(80.0, 0.001, 0.95, seed=0)
        with pytest.raises(ValueError):
            AdaptiveRatioConfig(80.0, 0.5, 0.99, seed=0)
