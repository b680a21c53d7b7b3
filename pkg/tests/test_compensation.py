import numpy as np
import pytest

from specmend import (
    DefenseProfile,
    Spectrum,
    TrainingPair,
    apply_filter,
    build_hankel,
    compensate_signal,
    dft,
    fit_filter,
    select_filter,
    spectral_mse,
)
from specmend.compensation import CompensationFilter, stack_real_system
from synth import attack_fixed, impulse_filter, speech_like, train_profile


def random_spectrum(rng, n, sr=16000):
    return dft(rng.normal(0, 100, n), sr)


def stacked_system(pairs, filter_size):
    rows, targets = [], []
    for p in pairs:
        h, f = stack_real_system(build_hankel(p.attacked, filter_size), p.original.bins)
        rows.append(h)
        targets.append(f)
    return np.vstack(rows), np.concatenate(targets)


class TestBuildHankel:
    def test_first_row_wraps_circularly(self):
        spec = Spectrum(np.array([1 + 1j, 2.0, 3 - 1j, 4.0]), 16000)
        h = build_hankel(spec, 1)
        assert h.shape == (4, 3)
        assert np.array_equal(h[0], spec.bins[[3, 0, 1]])
        assert np.array_equal(h[1], spec.bins[[0, 1, 2]])
        assert np.array_equal(h[3], spec.bins[[2, 3, 0]])

    def test_size_zero_filter_is_single_column(self):
        rng = np.random.default_rng(0)
        spec = random_spectrum(rng, 16)
        h = build_hankel(spec, 0)
        assert h.shape == (16, 1)
        assert np.array_equal(h[:, 0], spec.bins)

    def test_columns_are_shift_operators(self):
        rng = np.random.default_rng(1)
        spec = random_spectrum(rng, 32)
        filter_size = 3
        h = build_hankel(spec, filter_size)
        for c in range(2 * filter_size + 1):
            shift = c - filter_size
            assert np.array_equal(h[:, c], np.roll(spec.bins, -shift))

    def test_filter_too_large_rejected(self):
        spec = random_spectrum(np.random.default_rng(2), 8)
        with pytest.raises(ValueError):
            build_hankel(spec, 4)


class TestStackRealSystem:
    def test_shapes_and_content(self):
        rng = np.random.default_rng(3)
        spec = random_spectrum(rng, 8)
        target = random_spectrum(rng, 8).bins
        h, f = stack_real_system(build_hankel(spec, 1), target)
        assert h.shape == (16, 3)
        assert f.shape == (16,)
        assert np.array_equal(h[:8], build_hankel(spec, 1).real)
        assert np.array_equal(h[8:], build_hankel(spec, 1).imag)
        assert np.array_equal(f[:8], target.real)


class TestFitFilter:
    def test_identity_data_yields_unit_impulse(self):
        rng = np.random.default_rng(4)
        pairs = [TrainingPair(s, s) for s in (random_spectrum(rng, 64) for _ in range(5))]
        filt = fit_filter(pairs, 3)
        expected = np.zeros(7)
        expected[3] = 1.0
        assert np.allclose(filt.coeffs, expected, atol=1e-4)
        assert not filt.ridge_applied

    def test_single_pair_matches_dense_solve(self):
        rng = np.random.default_rng(5)
        pair = TrainingPair(random_spectrum(rng, 16), random_spectrum(rng, 16))
        filt = fit_filter([pair], 2)
        h, f = stacked_system([pair], 2)
        oracle = np.linalg.solve(h.T @ h, h.T @ f)
        assert np.allclose(filt.coeffs, oracle, atol=1e-8)

    def test_duplicate_batches_match_single_batch(self):
        rng = np.random.default_rng(6)
        pairs = [TrainingPair(random_spectrum(rng, 32), random_spectrum(rng, 32)) for _ in range(4)]
        one = fit_filter(pairs, 2, batch_size=100)
        two = fit_filter(pairs + pairs, 2, batch_size=4)
        assert np.allclose(one.coeffs, two.coeffs, atol=1e-12)

    def test_mean_over_batches(self):
        rng = np.random.default_rng(7)
        batch_a = [TrainingPair(random_spectrum(rng, 32), random_spectrum(rng, 32)) for _ in range(3)]
        batch_b = [TrainingPair(random_spectrum(rng, 32), random_spectrum(rng, 32)) for _ in range(3)]
        combined = fit_filter(batch_a + batch_b, 2, batch_size=3)
        alpha_a = fit_filter(batch_a, 2).coeffs
        alpha_b = fit_filter(batch_b, 2).coeffs
        assert np.allclose(combined.coeffs, (alpha_a + alpha_b) / 2, atol=1e-12)

    def test_oracle_equivalence_grid(self):
        rng = np.random.default_rng(8)
        for n in (8, 16, 32):
            for filter_size in (1, 2, 3):
                pairs = [
                    TrainingPair(random_spectrum(rng, n), random_spectrum(rng, n)) for _ in range(10)
                ]
                filt = fit_filter(pairs, filter_size, batch_size=10)
                h, f = stacked_system(pairs, filter_size)
                oracle, *_ = np.linalg.lstsq(h, f, rcond=None)
                assert np.allclose(filt.coeffs, oracle, atol=1e-8)

    def test_residual_is_local_minimum(self):
        rng = np.random.default_rng(9)
        pairs = [TrainingPair(random_spectrum(rng, 32), random_spectrum(rng, 32)) for _ in range(6)]
        filt = fit_filter(pairs, 2, batch_size=10)
        h, f = stacked_system(pairs, 2)
        base = np.sum((h @ filt.coeffs - f) ** 2)
        for j in range(filt.coeffs.size):
            for delta in (1e-3, -1e-3):
                perturbed = filt.coeffs.copy()
                perturbed[j] += delta
                assert np.sum((h @ perturbed - f) ** 2) >= base

    def test_training_is_bitwise_deterministic(self):
        rng = np.random.default_rng(10)
        data = [(rng.normal(0, 100, 64), rng.normal(0, 100, 64)) for _ in range(5)]
        runs = []
        for _ in range(2):
            pairs = [TrainingPair(dft(o, 16000), dft(a, 16000)) for o, a in data]
            runs.append(fit_filter(pairs, 3, batch_size=2).coeffs.tobytes())
        assert runs[0] == runs[1]

    def test_singular_system_gets_ridge_flag(self):
        zero = Spectrum(np.zeros(16, dtype=complex), 16000)
        target = random_spectrum(np.random.default_rng(11), 16)
        filt = fit_filter([TrainingPair(target, zero)], 2)
        assert filt.ridge_applied
        assert np.all(np.isfinite(filt.coeffs))

    def test_empty_pairs_rejected(self):
        with pytest.raises(ValueError):
            fit_filter([], 2)

    def test_mismatched_lengths_rejected(self):
        rng = np.random.default_rng(12)
        with pytest.raises(ValueError):
            TrainingPair(random_spectrum(rng, 16), random_spectrum(rng, 32))


class TestApplyFilter:
    def test_unit_impulse_is_identity(self):
        rng = np.random.default_rng(13)
        spec = random_spectrum(rng, 32)
        out = apply_filter(spec, impulse_filter(32, 3, 0.0))
        assert np.allclose(out.bins, spec.bins, atol=1e-9)

    def test_scalar_gain(self):
        rng = np.random.default_rng(14)
        spec = random_spectrum(rng, 16)
        filt = CompensationFilter(np.array([0.0, 2.0, 0.0]), 1, 16, 0.0)
        out = apply_filter(spec, filt)
        assert np.allclose(out.bins, 2 * spec.bins, atol=1e-9)

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(15)
        spec = random_spectrum(rng, 32)
        coeffs = rng.normal(0, 1, 7)
        filt = CompensationFilter(coeffs, 3, 32, 0.0)
        out = apply_filter(spec, filt)
        naive = np.zeros(32, dtype=complex)
        for f in range(32):
            for i in range(-3, 4):
                naive[f] += coeffs[i + 3] * spec.bins[(f - i) % 32]
        assert np.allclose(out.bins, naive, rtol=1e-9, atol=1e-6)

    def test_length_mismatch_rejected(self):
        spec = random_spectrum(np.random.default_rng(16), 16)
        with pytest.raises(ValueError):
            apply_filter(spec, impulse_filter(32, 3, 0.0))

    def test_trained_filter_preserves_conjugate_symmetry(self):
        rng = np.random.default_rng(17)
        pairs = [TrainingPair(random_spectrum(rng, 64), random_spectrum(rng, 64)) for _ in range(8)]
        filt = fit_filter(pairs, 3, batch_size=10)
        spec = random_spectrum(rng, 64)
        out = apply_filter(spec, filt)
        mirrored = np.conj(out.bins[(-np.arange(64)) % 64])
        assert np.allclose(out.bins, mirrored, rtol=1e-6, atol=1e-6)


class TestSelectFilter:
    def test_nearest(self):
        filters = [impulse_filter(32, 1, r) for r in (0.5, 0.85)]
        assert select_filter(filters, 0.83).trained_ratio == 0.85
        assert select_filter(filters, 0.55).trained_ratio == 0.5

    def test_tie_goes_to_larger_ratio(self):
        filters = [impulse_filter(32, 1, r) for r in (0.5, 0.85)]
        assert select_filter(filters, 0.675).trained_ratio == 0.85

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            select_filter([], 0.5)


class TestCompensateSignal:
    def test_identity_profile_on_benign_audio(self):
        sig = speech_like(30, 2048, 16000, 3)
        rng = np.random.default_rng(31)
        pairs = [TrainingPair(s, s) for s in (random_spectrum(rng, 2048) for _ in range(4))]
        profile = DefenseProfile([fit_filter(pairs, 16, trained_ratio=0.0)], {0.85: 4.0})
        out = compensate_signal(sig, profile, 0.0)
        peak = np.abs(sig.samples).max()
        assert np.abs(out.samples - sig.samples).max() < 1e-3 * peak

    def test_selects_nearest_model(self):
        sig = speech_like(32, 2048, 16000, 2)
        identity = impulse_filter(2048, 2, 0.85)
        doubling = CompensationFilter(np.array([0.0, 0.0, 2.0, 0.0, 0.0]), 2, 2048, 0.5)
        profile = DefenseProfile([identity, doubling], {0.85: 4.0})
        near_identity = compensate_signal(sig, profile, 0.83)
        assert np.allclose(near_identity.samples, sig.samples, atol=1e-6)
        near_doubling = compensate_signal(sig, profile, 0.4)
        assert np.allclose(near_doubling.samples, 2 * sig.samples, atol=1e-6)

    def test_compensated_audio_is_real(self, profile_085, corpus_16k):
        sig = attack_fixed(corpus_16k["test"][0], 0.85, corpus_16k["window_ms"])
        filt = profile_085.filters[0]
        spec = dft(sig.samples[:2048], sig.sample_rate)
        out = apply_filter(spec, filt)
        complex_time = np.fft.ifft(out.bins)
        peak = np.abs(complex_time.real).max()
        assert np.abs(complex_time.imag).max() < 1e-6 * peak


class TestSelfRecovery:
    @pytest.mark.parametrize("ratio", [0.5, 0.7, 0.85])
    def test_compensation_reduces_mse_at_trained_ratio(self, ratio):
        sr, window, window_ms = 16000, 2048, 128.0
        profile = train_profile(sr, window, 16, (ratio,), range(100, 130), 6, window_ms)
        worse = 0
        att_all, comp_all = [], []
        for seed in range(970, 985):
            clean = speech_like(seed, window, sr, 6)
            attacked = attack_fixed(clean, ratio, window_ms)
            compensated = compensate_signal(attacked, profile, ratio)
            att_all.append(spectral_mse(clean, attacked))
            comp_all.append(spectral_mse(clean, compensated))
        assert np.mean(comp_all) < np.mean(att_all)
