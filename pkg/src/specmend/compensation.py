"""Learned inverse filtering that estimates an original spectrum from an attacked one.

The estimate of each output bin is a weighted sum of the input bin and its
2L circular neighbors.  Weights are real and come from a closed-form
least-squares fit of attacked spectra against their originals: each complex
equation contributes its real and imaginary parts as two real equations, so
one real kernel serves both and reconstructed audio stays real.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .signal_core import AudioSignal, Spectrum, dft, idft

if TYPE_CHECKING:  # pragma: no cover
    from .adaptation import DefenseProfile

# Normal matrices with condition numbers beyond this are treated as singular
# and re-solved with a scale-aware ridge term.
_COND_LIMIT = 1e12
_RIDGE_SCALE = 1e-8


@dataclass
class CompensationFilter:
    """Real coefficient vector of length 2*filter_size + 1, tagged with its training setup."""

    coeffs: np.ndarray
    filter_size: int
    segment_len: int
    trained_ratio: float
    ridge_applied: bool = False

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.coeffs.size != 2 * self.filter_size + 1:
            raise ValueError(
                f"expected {2 * self.filter_size + 1} coefficients, got {self.coeffs.size}"
            )
        if self.segment_len & (self.segment_len - 1) or self.segment_len < 1:
            raise ValueError(f"segment_len {self.segment_len} is not a power of two")
        if self.filter_size >= self.segment_len:
            raise ValueError("filter_size must be smaller than segment_len")


@dataclass
class TrainingPair:
    """An original spectrum and its attacked counterpart, same length and rate."""

    original: Spectrum
    attacked: Spectrum

    def __post_init__(self) -> None:
        if self.original.n != self.attacked.n:
            raise ValueError("training pair spectra differ in length")
        if self.original.sample_rate != self.attacked.sample_rate:
            raise ValueError("training pair spectra differ in sample rate")


def build_hankel(attacked: Spectrum, filter_size: int) -> np.ndarray:
    """Complex design matrix: row r holds the bins shifted by -L..L around bin r.

    Entry (r, c) is A((r + c - L) mod N); shifts beyond the spectrum edge wrap
    circularly because the underlying bin sequence is periodic.
    """
    n = attacked.n
    if 2 * filter_size + 1 >= n:
        raise ValueError(f"filter_size {filter_size} too large for spectrum length {n}")
    idx = (np.arange(n)[:, None] + np.arange(2 * filter_size + 1)[None, :] - filter_size) % n
    return attacked.bins[idx]


def stack_real_system(hankel: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Realize a complex linear system as 2N real equations (real rows, then imaginary)."""
    h = np.vstack([hankel.real, hankel.imag])
    f = np.concatenate([np.asarray(target).real, np.asarray(target).imag])
    return h, f


def _accumulate_normal(pair: TrainingPair, filter_size: int, ata: np.ndarray, atb: np.ndarray) -> None:
    """Add one pair's normal-equation blocks via circular correlations.

    For the wrapped shift structure of the design matrix, H^T H is the real
    part of the circular autocorrelation of the attacked bins laid out as a
    Toeplitz matrix, and H^T F the matching cross-correlation; this equals
    stacking the real/imaginary rows explicitly but costs O(N log N).
    """
    n = pair.attacked.n
    cols = 2 * filter_size + 1
    fa = np.fft.fft(pair.attacked.bins)
    ff = np.fft.fft(pair.original.bins)
    autocorr = np.real(np.fft.ifft(np.conj(fa) * fa))
    crosscorr = np.real(np.fft.ifft(np.conj(fa) * ff))
    lag = (np.arange(cols)[None, :] - np.arange(cols)[:, None]) % n
    ata += autocorr[lag]
    atb += crosscorr[(filter_size - np.arange(cols)) % n]


def _solve_normal(ata: np.ndarray, atb: np.ndarray) -> tuple[np.ndarray, bool]:
    cols = ata.shape[0]
    singular = False
    try:
        cond = np.linalg.cond(ata)
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            singular = True
    except np.linalg.LinAlgError:
        singular = True
    if not singular:
        try:
            return np.linalg.solve(ata, atb), False
        except np.linalg.LinAlgError:
            pass
    # trace can be zero for fully degenerate data; keep the ridge positive
    ridge = max(_RIDGE_SCALE * np.trace(ata) / cols, np.finfo(np.float64).tiny)
    return np.linalg.solve(ata + ridge * np.eye(cols), atb), True


def fit_filter(
    pairs: Sequence[TrainingPair],
    filter_size: int,
    batch_size: int = 200,
    trained_ratio: float = 0.0,
) -> CompensationFilter:
    """Closed-form least-squares fit, solved per batch and averaged across batches.

    Every batch stacks the design rows of its pairs and solves the normal
    equations; the returned coefficients are the elementwise mean over
    batches, each batch weighted equally regardless of its size.
    """
    if not pairs:
        raise ValueError("at least one training pair is required")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    n = pairs[0].original.n
    for p in pairs:
        if p.original.n != n:
            raise ValueError("all training pairs must share the same spectrum length")
    if 2 * filter_size + 1 >= n:
        raise ValueError(f"filter_size {filter_size} too large for spectrum length {n}")

    cols = 2 * filter_size + 1
    batch_coeffs = []
    ridge_any = False
    for start in range(0, len(pairs), batch_size):
        ata = np.zeros((cols, cols))
        atb = np.zeros(cols)
        for pair in pairs[start : start + batch_size]:
            _accumulate_normal(pair, filter_size, ata, atb)
        coeffs, ridged = _solve_normal(ata, atb)
        batch_coeffs.append(coeffs)
        ridge_any = ridge_any or ridged
    mean_coeffs = np.mean(batch_coeffs, axis=0)
    return CompensationFilter(mean_coeffs, filter_size, n, trained_ratio, ridge_applied=ridge_any)


def apply_filter(attacked: Spectrum, filt: CompensationFilter) -> Spectrum:
    """Weighted sum of circularly shifted bins, evaluated as a circular convolution."""
    if attacked.n != filt.segment_len:
        raise ValueError(f"spectrum length {attacked.n} != filter segment length {filt.segment_len}")
    n = attacked.n
    kernel = np.zeros(n, dtype=np.complex128)
    shifts = np.arange(-filt.filter_size, filt.filter_size + 1)
    kernel[shifts % n] = filt.coeffs
    out = np.fft.ifft(np.fft.fft(attacked.bins) * np.fft.fft(kernel))
    return Spectrum(out, attacked.sample_rate)


def select_filter(filters: Sequence[CompensationFilter], ratio: float) -> CompensationFilter:
    """Filter whose training ratio is nearest to ``ratio``; ties go to the larger ratio."""
    if not filters:
        raise ValueError("no filters available")
    return min(filters, key=lambda f: (abs(f.trained_ratio - ratio), -f.trained_ratio))


def compensate_signal(signal: AudioSignal, profile: "DefenseProfile", estimated_ratio: float) -> AudioSignal:
    """Filter a whole signal in consecutive windows with one ratio-matched filter.

    Windows are segment_len samples long (the last is zero-padded for the
    transform); each is filtered with the profile filter trained nearest to
    ``estimated_ratio`` and written back in place.
    """
    filt = select_filter(profile.filters, estimated_ratio)
    n = filt.segment_len
    out = signal.samples.copy()
    for start in range(0, len(signal), n):
        seg = signal.samples[start : start + n]
        padded = np.zeros(n, dtype=np.float64)
        padded[: seg.size] = seg
        filtered = apply_filter(dft(padded, signal.sample_rate), filt)
        out[start : start + seg.size] = idft(filtered, n)[: seg.size]
    return AudioSignal(out, signal.sample_rate)
