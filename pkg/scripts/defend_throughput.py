#!/usr/bin/env python3
"""Measure the defense's wall-clock cost per second of audio.

The documented soft target is 40 ms per 1 s of 16 kHz audio at the default
window length 2^15 and filter half-width 45, measured as the median over
repeated runs on one CPU core.  Filter coefficients do not affect the cost,
so the benchmark uses a unit-impulse profile of the default shape.
"""

import argparse
import time

import numpy as np

from specmend import (
    AttackConfig,
    AudioSignal,
    CompensationFilter,
    DefenseProfile,
    apply_attack,
    defend,
    plan_segments,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seconds", type=float, default=1.0, help="clip duration to process")
    parser.add_argument("--runs", type=int, default=50)
    parser.add_argument("--sample-rate", type=int, default=16000)
    parser.add_argument("--segment-len", type=int, default=32768)
    parser.add_argument("--filter-size", type=int, default=45)
    args = parser.parse_args()

    coeffs = np.zeros(2 * args.filter_size + 1)
    coeffs[args.filter_size] = 1.0
    profile = DefenseProfile(
        [CompensationFilter(coeffs, args.filter_size, args.segment_len, 0.85)],
        {0.3: 1.0, 0.5: 2.0, 0.7: 3.0, 0.85: 4.0, 0.95: 6.0},
    )

    rng = np.random.default_rng(0)
    n = int(args.seconds * args.sample_rate)
    clip = AudioSignal(rng.normal(0, 1000, n), args.sample_rate)
    duration_ms = 1000 * args.seconds
    attacked = apply_attack(
        clip,
        plan_segments(clip, duration_ms, "fixed"),
        AttackConfig(removal_ratio=0.85, fixed_ms=duration_ms),
    )

    timings = []
    for i in range(args.runs):
        start = time.perf_counter()
        defend(attacked, profile, noise_seed=i)
        timings.append(time.perf_counter() - start)
    timings_ms = 1000 * np.asarray(timings)
    per_second = np.median(timings_ms) / args.seconds
    print(f"clip: {args.seconds:g} s at {args.sample_rate} Hz, "
          f"N={args.segment_len}, L={args.filter_size}, {args.runs} runs")
    print(f"median {np.median(timings_ms):.2f} ms  "
          f"p90 {np.percentile(timings_ms, 90):.2f} ms  "
          f"max {timings_ms.max():.2f} ms")
    print(f"median per second of audio: {per_second:.2f} ms (soft target: 40 ms)")


if __name__ == "__main__":
    main()
