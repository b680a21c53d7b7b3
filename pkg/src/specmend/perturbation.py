"""Modeled over-the-air perturbations: Gaussian noise and multipath echo."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .signal_core import AudioSignal

# Indoor reflections: the longest delay a reasonable room produces.
MAX_ECHO_DELAY_MS = 15.0
MAX_ECHO_DELAY_SAMPLES = 240


@dataclass(frozen=True)
class NoiseParams:
    """Zero-mean Gaussian noise level in raw 16-bit PCM sample units."""

    ns: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.ns < 0:
            raise ValueError(f"noise level must be non-negative, got {self.ns}")


@dataclass(frozen=True)
class EchoParams:
    """Multipath model: ``reflections`` delayed copies, geometrically attenuated.

    ``delay`` is the inter-arrival spacing, interpreted in milliseconds or in
    samples depending on ``delay_unit``.  The total delay reflections*delay is
    capped at 15 ms (240 samples) unless ``allow_long_delay`` is set.
    """

    reflections: int
    delay: float
    attenuation: float
    delay_unit: str = "ms"  # "ms" | "samples"
    allow_long_delay: bool = False

    def __post_init__(self) -> None:
        if self.reflections < 0:
            raise ValueError("reflections must be >= 0")
        if self.delay <= 0:
            raise ValueError("delay must be positive")
        if not (0.0 <= self.attenuation < 1.0):
            raise ValueError(f"attenuation must be in [0, 1), got {self.attenuation}")
        if self.delay_unit not in ("ms", "samples"):
            raise ValueError(f"unknown delay unit {self.delay_unit!r}")
        if not self.allow_long_delay:
            limit = MAX_ECHO_DELAY_MS if self.delay_unit == "ms" else MAX_ECHO_DELAY_SAMPLES
            if self.reflections * self.delay > limit:
                raise ValueError(
                    f"total delay {self.reflections * self.delay} {self.delay_unit} exceeds "
                    f"{limit} {self.delay_unit}; set allow_long_delay to override"
                )

    def delay_samples(self, sample_rate: int) -> int:
        if self.delay_unit == "ms":
            return round(self.delay * sample_rate / 1000)
        return round(self.delay)


def add_gaussian_noise(signal: AudioSignal, params: NoiseParams) -> AudioSignal:
    """Add an independent N(0, ns^2) draw to every sample, from the seeded generator."""
    if params.ns == 0:
        return AudioSignal(signal.samples.copy(), signal.sample_rate)
    rng = np.random.default_rng(params.seed)
    noisy = signal.samples + rng.normal(0.0, params.ns, len(signal))
    return AudioSignal(noisy, signal.sample_rate)


def apply_echo(signal: AudioSignal, params: EchoParams) -> AudioSignal:
    """Sum the signal with its delayed, attenuated copies; output length unchanged."""
    d = params.delay_samples(signal.sample_rate)
    if d == 0:
        raise ValueError(
            f"echo delay of {params.delay} {params.delay_unit} rounds to zero samples "
            f"at {signal.sample_rate} Hz"
        )
    n = len(signal)
    out = np.zeros(n, dtype=np.float64)
    for i in range(params.reflections + 1):
        offset = i * d
        if offset >= n:
            break
        out[offset:] += params.attenuation**i * signal.samples[: n - offset]
    return AudioSignal(out, signal.sample_rate)


def select_noise_level(estimated_ratio: float, table: Mapping[float, float]) -> NoiseParams:
    """Noise level of the nearest tabulated ratio; ratios below the table floor get none.

    Weak attacks are hurt rather than helped by added noise, so anything below
    the smallest tabulated ratio maps to silence.
    """
    if not table:
        raise ValueError("noise table must not be empty")
    keys = sorted(table)
    if estimated_ratio < keys[0]:
        return NoiseParams(0.0)
    best = min(keys, key=lambda k: (abs(k - estimated_ratio), -k))
    return NoiseParams(float(table[best]))


def grid_search_echo(
    dev_corpus: Sequence[tuple[AudioSignal, AudioSignal]],
    scorer: Callable[[AudioSignal, AudioSignal], float],
    delay_unit: str = "ms",
    delay_step: float = 5.0,
    attenuation_step: float = 0.1,
) -> EchoParams:
    """Exhaustive search over (delay, reflections, attenuation) against a dev corpus.

    ``dev_corpus`` holds (benign, attacked) pairs; candidates echo the attacked
    side and the scorer compares the result to the benign side (lower is
    better, averaged over the corpus).  Ties break toward fewer reflections,
    then weaker attenuation.
    """
    if not dev_corpus:
        raise ValueError("dev corpus must not be empty")
    limit = MAX_ECHO_DELAY_MS if delay_unit == "ms" else MAX_ECHO_DELAY_SAMPLES
    delays = np.arange(delay_step, limit + delay_step / 2, delay_step)
    if delays.size == 0:
        raise ValueError("empty echo search space")
    betas = np.arange(0.0, 0.9 + attenuation_step / 2, attenuation_step)
    betas = betas[betas <= 0.9 + 1e-12]

    best: EchoParams | None = None
    best_score = math.inf
    for delay in delays:
        for m in range(int(limit // delay) + 1):
            for beta in betas:
                cand = EchoParams(m, float(delay), float(beta), delay_unit)
                score = float(
                    np.mean([scorer(benign, apply_echo(attacked, cand)) for benign, attacked in dev_corpus])
                )
                if score < best_score or (
                    score == best_score
                    and best is not None
                    and (m, beta) < (best.reflections, best.attenuation)
                ):
                    best, best_score = cand, score
    assert best is not None
    return best
