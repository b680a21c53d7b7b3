"""Attack-ratio estimation and per-window dispatch of defense parameters.

The estimator counts conjugate-pair units whose magnitude falls below a
small fraction of the window's strongest unit; removed components sit at
(or near) zero, so that fraction tracks the removal ratio when the
estimation window matches the attacked segment length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attack import pair_unit_reps
from .compensation import CompensationFilter, apply_filter, select_filter
from .perturbation import EchoParams, apply_echo, select_noise_level
from .signal_core import AudioSignal, Spectrum, idft

DEFAULT_WEAK_BIN_THRESHOLD = 0.002  # fraction of the max magnitude
DEFAULT_BENIGN_CUTOFF = 0.05


@dataclass
class DefenseProfile:
    """Trained dispatch table: per-ratio filters, the noise table, and thresholds."""

    filters: list[CompensationFilter]
    noise_table: dict[float, float]
    echo: EchoParams | None = None
    weak_bin_threshold: float = DEFAULT_WEAK_BIN_THRESHOLD
    benign_cutoff: float = DEFAULT_BENIGN_CUTOFF

    def __post_init__(self) -> None:
        if not self.filters:
            raise ValueError("a trained profile needs at least one filter")
        lengths = {f.segment_len for f in self.filters}
        if len(lengths) != 1:
            raise ValueError(f"profile filters disagree on segment length: {sorted(lengths)}")
        if not (0.0 < self.weak_bin_threshold < 1.0):
            raise ValueError(f"weak_bin_threshold must be in (0, 1), got {self.weak_bin_threshold}")
        if not (0.0 <= self.benign_cutoff < 1.0):
            raise ValueError(f"benign_cutoff must be in [0, 1), got {self.benign_cutoff}")

    @property
    def segment_len(self) -> int:
        return self.filters[0].segment_len


@dataclass
class RatioEstimate:
    ratio: float
    per_window: list[tuple[int, float]]
    verdict: str  # "benign" | "attacked"
    padded: bool = False


@dataclass
class ResolvedParams:
    """Defense parameters for one window; ``filter`` is None for pass-through."""

    filter: CompensationFilter | None
    noise_level: float
    echo: EchoParams | None


def _window_weak_fraction(window: np.ndarray, threshold: float) -> float:
    bins = np.fft.fft(window)
    mags = np.abs(bins[pair_unit_reps(window.size)])
    peak = mags.max()
    if peak == 0.0:
        return 0.0  # an all-zero window carries no evidence of an attack
    return float(np.count_nonzero(mags < threshold * peak) / mags.size)


def estimate_removal_ratio(
    signal: AudioSignal,
    window_len: int,
    threshold: float = DEFAULT_WEAK_BIN_THRESHOLD,
    benign_cutoff: float = DEFAULT_BENIGN_CUTOFF,
) -> RatioEstimate:
    """Per-window weak-unit fraction, aggregated by mean into a verdict.

    A signal shorter than one window is analyzed as a single zero-padded
    window and the estimate is flagged accordingly.
    """
    if window_len < 1 or window_len & (window_len - 1):
        raise ValueError(f"window_len {window_len} is not a power of two")
    if len(signal) == 0:
        raise ValueError("cannot estimate on an empty signal")
    num_windows = max(1, math.ceil(len(signal) / window_len))
    per_window = []
    for w in range(num_windows):
        seg = signal.samples[w * window_len : (w + 1) * window_len]
        if seg.size < window_len:
            padded = np.zeros(window_len)
            padded[: seg.size] = seg
            seg = padded
        per_window.append((w, _window_weak_fraction(seg, threshold)))
    ratio = float(np.mean([r for _, r in per_window]))
    verdict = "benign" if ratio < benign_cutoff else "attacked"
    return RatioEstimate(ratio, per_window, verdict, padded=len(signal) < window_len)


def configure(estimate: RatioEstimate, profile: DefenseProfile) -> ResolvedParams:
    """Resolve defense parameters for an estimate; benign input passes through untouched."""
    if estimate.verdict == "benign":
        return ResolvedParams(filter=None, noise_level=0.0, echo=None)
    filt = select_filter(profile.filters, estimate.ratio)
    noise = select_noise_level(estimate.ratio, profile.noise_table)
    return ResolvedParams(filter=filt, noise_level=noise.ns, echo=profile.echo)


def _defend_window(
    out: np.ndarray,
    signal: AudioSignal,
    window_index: int,
    window_ratio: float,
    profile: DefenseProfile,
    noise_seed: int,
) -> None:
    """Defend one window in place; writes only that window's slice of ``out``."""
    n = profile.segment_len
    verdict = "benign" if window_ratio < profile.benign_cutoff else "attacked"
    params = configure(RatioEstimate(window_ratio, [(window_index, window_ratio)], verdict), profile)
    if params.filter is None:
        return
    start = window_index * n
    seg = signal.samples[start : start + n]
    padded = np.zeros(n)
    padded[: seg.size] = seg
    filtered = apply_filter(Spectrum(np.fft.fft(padded), signal.sample_rate), params.filter)
    y = idft(filtered, n)[: seg.size]
    if params.noise_level > 0:
        rng = np.random.default_rng(np.random.SeedSequence(noise_seed, spawn_key=(window_index,)))
        y = y + rng.normal(0.0, params.noise_level, y.size)
    if params.echo is not None:
        y = apply_echo(AudioSignal(y, signal.sample_rate), params.echo).samples
    out[start : start + seg.size] = y


def defend(signal: AudioSignal, profile: DefenseProfile, noise_seed: int = 0) -> tuple[AudioSignal, RatioEstimate]:
    """Estimate per window, then run the resolved chain (filter, noise, optional echo).

    Windows are configured independently, so a time-varying attack gets a
    time-varying defense.  Each window owns a noise stream derived from
    (noise_seed, window index); processing order cannot change the output.
    """
    estimate = estimate_removal_ratio(
        signal, profile.segment_len, profile.weak_bin_threshold, profile.benign_cutoff
    )
    out = signal.samples.copy()
    for window_index, window_ratio in estimate.per_window:
        _defend_window(out, signal, window_index, window_ratio, profile, noise_seed)
    return AudioSignal(out, signal.sample_rate), estimate
