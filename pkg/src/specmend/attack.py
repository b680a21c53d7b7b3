"""Spectrum reduction attacks: drop the weakest frequency components of each segment.

Bins are handled in conjugate-pair units so that attacked spectra stay the
spectra of real signals.  The DC bin and the Nyquist bin are their own
mirror images and count as single-bin units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signal_core import AudioSignal, SegmentPlan, Spectrum, dft, idft


@dataclass(frozen=True)
class AdaptiveRatioConfig:
    """Time-varying removal: one uniform ratio draw per fixed-length unit."""

    unit_ms: float
    ratio_low: float
    ratio_high: float
    seed: int

    def __post_init__(self) -> None:
        if not (0.01 <= self.ratio_low <= self.ratio_high <= 0.95):
            raise ValueError(
                f"adaptive ratio bounds must satisfy 0.01 <= low <= high <= 0.95, "
                f"got [{self.ratio_low}, {self.ratio_high}]"
            )
        if self.unit_ms <= 0:
            raise ValueError("unit_ms must be positive")


@dataclass(frozen=True)
class AttackConfig:
    removal_ratio: float = 0.85
    granularity: str = "fixed"  # "phoneme" | "word" | "fixed"
    fixed_ms: float = 80.0
    retain_fraction: float = 0.0
    band: tuple[float, float] | None = None  # Hz interval restricting the attack
    adaptive: AdaptiveRatioConfig | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.removal_ratio < 1.0):
            raise ValueError(f"removal_ratio must be in [0, 1), got {self.removal_ratio}")
        if not (0.0 <= self.retain_fraction <= 1.0):
            raise ValueError(f"retain_fraction must be in [0, 1], got {self.retain_fraction}")
        if self.granularity not in ("phoneme", "word", "fixed"):
            raise ValueError(f"unknown granularity {self.granularity!r}")
        if self.band is not None and not (0.0 <= self.band[0] <= self.band[1]):
            raise ValueError(f"band must be an ordered non-negative interval, got {self.band}")


def pair_unit_reps(n: int) -> np.ndarray:
    """Representative bin index of each conjugate-pair unit (0 .. n//2)."""
    return np.arange(n // 2 + 1) if n > 1 else np.zeros(1, dtype=int)


def pair_unit_sizes(n: int) -> np.ndarray:
    """Number of bins each unit owns: 2 for true pairs, 1 for DC and Nyquist."""
    if n == 1:
        return np.ones(1, dtype=int)
    sizes = np.full(n // 2 + 1, 2, dtype=int)
    sizes[0] = 1
    sizes[n // 2] = 1
    return sizes


def _attenuate_weakest(bins: np.ndarray, eligible: np.ndarray, bin_budget: int, factor: float) -> int:
    """Scale whole units in ascending magnitude order until the bin budget is spent.

    ``eligible`` holds representative indices; ties in magnitude break toward
    the lower bin index.  A unit that would overshoot the budget is skipped
    (a later single-bin unit may still fit), so the affected bin count lands
    within one bin of the budget.  Returns the number of bins affected.
    """
    n = bins.size
    mags = np.abs(bins[eligible])
    order = np.lexsort((eligible, mags))
    spent = 0
    for idx in order:
        if spent >= bin_budget:
            break
        rep = eligible[idx]
        mirror = (n - rep) % n
        size = 1 if mirror == rep else 2
        if spent + size > bin_budget:
            continue
        bins[rep] *= factor
        if mirror != rep:
            bins[mirror] *= factor
        spent += size
    return spent


def remove_components(spectrum: Spectrum, ratio: float, retain_fraction: float = 0.0) -> Spectrum:
    """Attenuate the floor(ratio*N) weakest bins; retain_fraction is the kept energy share."""
    if not (0.0 <= ratio < 1.0):
        raise ValueError(f"ratio must be in [0, 1), got {ratio}")
    if not (0.0 <= retain_fraction <= 1.0):
        raise ValueError(f"retain_fraction must be in [0, 1], got {retain_fraction}")
    bins = spectrum.bins.copy()
    if ratio > 0.0:
        budget = math.floor(ratio * spectrum.n)
        _attenuate_weakest(bins, pair_unit_reps(spectrum.n), budget, math.sqrt(retain_fraction))
    return Spectrum(bins, spectrum.sample_rate)


def band_limited_removal(spectrum: Spectrum, ratio: float, band: tuple[float, float]) -> Spectrum:
    """Like remove_components, but the quantile only runs over bins inside ``band`` (Hz)."""
    if not (0.0 <= ratio < 1.0):
        raise ValueError(f"ratio must be in [0, 1), got {ratio}")
    lo, hi = band
    nyquist = spectrum.sample_rate / 2
    if not (0.0 <= lo <= hi <= nyquist):
        raise ValueError(f"band {band} outside the Nyquist range [0, {nyquist}]")
    reps = pair_unit_reps(spectrum.n)
    freqs = spectrum.sample_rate * reps / spectrum.n
    eligible = reps[(freqs >= lo) & (freqs <= hi)]
    if eligible.size == 0:
        raise ValueError(f"band {band} contains no spectrum bins at N={spectrum.n}")
    sizes = pair_unit_sizes(spectrum.n)
    eligible_bins = int(sizes[eligible].sum())
    bins = spectrum.bins.copy()
    if ratio > 0.0:
        _attenuate_weakest(bins, eligible, math.floor(ratio * eligible_bins), 0.0)
    return Spectrum(bins, spectrum.sample_rate)


def _attack_segment(segment: np.ndarray, sample_rate: int, config: AttackConfig, ratio: float) -> np.ndarray:
    spec = dft(segment, sample_rate)
    if config.band is not None:
        spec = band_limited_removal(spec, ratio, config.band)
    else:
        spec = remove_components(spec, ratio, config.retain_fraction)
    return idft(spec, segment.size)


def apply_attack(signal: AudioSignal, plan: SegmentPlan, config: AttackConfig) -> AudioSignal:
    """Attack each planned segment in place; samples outside the plan are untouched.

    Each segment is zero-extended to a power-of-two length for the transform
    and only the original sample positions are written back, so neighboring
    segments never bleed into each other.
    """
    if plan.total_len != len(signal):
        raise ValueError(f"plan covers {plan.total_len} samples but signal has {len(signal)}")
    out = signal.samples.copy()
    for entry in plan.entries:
        out[entry.start : entry.end] = _attack_segment(
            signal.samples[entry.start : entry.end], signal.sample_rate, config, config.removal_ratio
        )
    return AudioSignal(out, signal.sample_rate)


def apply_adaptive_attack(signal: AudioSignal, config: AttackConfig) -> tuple[AudioSignal, list[float]]:
    """Attack fixed-length units with independent seeded uniform ratios.

    Returns the attacked signal and the per-unit ratio trace.  Ratios are
    drawn up front in unit order, so results do not depend on how the unit
    loop is scheduled.
    """
    if config.adaptive is None:
        raise ValueError("config.adaptive must be set for an adaptive attack")
    adaptive = config.adaptive
    unit = int(adaptive.unit_ms * signal.sample_rate / 1000)
    if unit < 2:
        raise ValueError(f"adaptive unit of {adaptive.unit_ms} ms is shorter than 2 samples")
    num_units = math.ceil(len(signal) / unit)
    rng = np.random.default_rng(adaptive.seed)
    ratios = rng.uniform(adaptive.ratio_low, adaptive.ratio_high, num_units)
    out = signal.samples.copy()
    for i in range(num_units):
        start, end = i * unit, min((i + 1) * unit, len(signal))
        out[start:end] = _attack_segment(signal.samples[start:end], signal.sample_rate, config, ratios[i])
    return AudioSignal(out, signal.sample_rate), [float(r) for r in ratios]
