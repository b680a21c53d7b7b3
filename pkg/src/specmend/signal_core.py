"""Audio I/O, segmentation, and exact time/frequency conversion.

Samples are kept as float64 throughout the pipeline; quantization to
16-bit integers happens only when a WAV file is written, so repeated
transforms do not accumulate rounding error.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AnnotationError, AudioFormatError

PCM_MIN = -32768
PCM_MAX = 32767


@dataclass
class AudioSignal:
    """Mono audio: a float64 sample vector plus its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass
class Spectrum:
    """Complex frequency bins of one segment; the bin count is a power of two."""

    bins: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        self.bins = np.asarray(self.bins, dtype=np.complex128)
        if self.bins.ndim != 1 or self.bins.size == 0:
            raise ValueError("bins must be a non-empty vector")
        if self.bins.size & (self.bins.size - 1):
            raise ValueError(f"spectrum length {self.bins.size} is not a power of two")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def n(self) -> int:
        return self.bins.size

    def bin_frequency(self, k: int) -> float:
        """Frequency in Hz represented by bin k."""
        return self.sample_rate * k / self.n


@dataclass(frozen=True)
class SegmentEntry:
    start: int
    end: int  # exclusive
    label: str
    kind: str  # "phoneme" | "word" | "fixed"


@dataclass
class SegmentPlan:
    """Ordered, non-overlapping sample ranges that transforms operate on."""

    entries: list[SegmentEntry]
    total_len: int

    def __post_init__(self) -> None:
        prev_end = 0
        for e in self.entries:
            if not (0 <= e.start < e.end <= self.total_len):
                raise ValueError(f"segment [{e.start}, {e.end}) out of bounds for length {self.total_len}")
            if e.start < prev_end:
                raise ValueError(f"segment [{e.start}, {e.end}) overlaps a previous segment")
            prev_end = e.end

    def __len__(self) -> int:
        return len(self.entries)


def pad_pow2(length: int) -> int:
    """Smallest power of two >= length."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return 1 << (length - 1).bit_length()


def dft(segment: np.ndarray, sample_rate: int) -> Spectrum:
    """Forward transform of a real segment, zero-extended to a power-of-two length.

    Uses the unnormalized convention: bin k is the plain sum of
    samples weighted by exp(-2*pi*i*k*n/N); the inverse carries 1/N.
    """
    seg = np.asarray(segment, dtype=np.float64)
    if seg.size == 0:
        raise ValueError("cannot transform an empty segment")
    n = pad_pow2(seg.size)
    padded = np.zeros(n, dtype=np.float64)
    padded[: seg.size] = seg
    return Spectrum(np.fft.fft(padded), sample_rate)


def idft(spectrum: Spectrum, out_len: int) -> np.ndarray:
    """Real part of the inverse transform, truncated to out_len samples."""
    if out_len > spectrum.n:
        raise ValueError(f"out_len {out_len} exceeds spectrum length {spectrum.n}")
    return np.real(np.fft.ifft(spectrum.bins)[:out_len]).copy()


def read_wav(path: Path | str) -> AudioSignal:
    """Decode a 16-bit mono PCM RIFF/WAVE file losslessly."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            channels = wf.getnchannels()
            if channels != 1:
                raise AudioFormatError(f"{path}: unsupported channel count {channels} (mono required)")
            width = wf.getsampwidth()
            if width != 2:
                raise AudioFormatError(f"{path}: unsupported sample width {8 * width} bits (16-bit required)")
            nframes = wf.getnframes()
            raw = wf.readframes(nframes)
            if len(raw) < 2 * nframes:
                raise AudioFormatError(f"{path}: truncated file ({len(raw) // 2} of {nframes} frames present)")
            rate = wf.getframerate()
    except wave.Error as exc:
        raise AudioFormatError(f"{path}: not a readable PCM WAV file ({exc})") from exc
    except EOFError as exc:
        raise AudioFormatError(f"{path}: truncated or empty file") from exc
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64)
    return AudioSignal(samples, rate)


def write_wav(signal: AudioSignal, path: Path | str) -> None:
    """Write a signal as 16-bit mono PCM, rounding half away from zero and clipping."""
    if len(signal) == 0:
        raise ValueError("refusing to write an empty signal")
    x = signal.samples
    rounded = np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))
    clipped = np.clip(rounded, PCM_MIN, PCM_MAX).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(signal.sample_rate)
        wf.writeframes(clipped.tobytes())


def _parse_annotation(path: Path, total_len: int, kind: str) -> list[SegmentEntry]:
    entries = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 3:
            raise AnnotationError(f"{path}:{lineno}: expected 'start end label', got {line!r}")
        try:
            start, end = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise AnnotationError(f"{path}:{lineno}: non-integer sample index in {line!r}") from exc
        if not (0 <= start < end <= total_len):
            raise AnnotationError(f"{path}:{lineno}: range [{start}, {end}) out of bounds for {total_len} samples")
        entries.append(SegmentEntry(start, end, " ".join(parts[2:]), kind))
    return entries


def plan_segments(signal: AudioSignal, source: float | Path | str, kind: str) -> SegmentPlan:
    """Build a segment plan from a fixed window duration or an annotation file.

    For kind "fixed", ``source`` is a duration in milliseconds and windows are
    laid back to back, the last one truncated.  For "phoneme" or "word",
    ``source`` is an annotation file of whitespace-separated
    "start end label" lines with sample-index units.
    """
    total = len(signal)
    if kind == "fixed":
        duration_ms = float(source)
        win = int(duration_ms * signal.sample_rate / 1000)
        if win < 1:
            raise ValueError(f"fixed duration {duration_ms} ms is shorter than one sample")
        entries = [
            SegmentEntry(start, min(start + win, total), str(i), "fixed")
            for i, start in enumerate(range(0, total, win))
        ]
    elif kind in ("phoneme", "word"):
        entries = _parse_annotation(Path(source), total, kind)
        try:
            return SegmentPlan(entries, total)
        except ValueError as exc:
            raise AnnotationError(f"{source}: {exc}") from exc
    else:
        raise ValueError(f"unknown segmentation kind {kind!r}")
    return SegmentPlan(entries, total)
