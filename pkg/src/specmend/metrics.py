"""Transcription and signal scoring: WER, CER, error reduction, and sample-domain MSE."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .signal_core import AudioSignal

PCM_FULL_SCALE = 32768.0

# Lowercase, drop punctuation except apostrophes (contractions stay words),
# collapse runs of whitespace.
_PUNCT = re.compile(r"[^\w\s']")
_UNDERSCORE = re.compile(r"_")


def normalize_text(text: str) -> str:
    cleaned = _UNDERSCORE.sub(" ", _PUNCT.sub(" ", text.lower()))
    return " ".join(cleaned.split())


@dataclass(frozen=True)
class TranscriptPair:
    reference: str
    hypothesis: str


@dataclass(frozen=True)
class EditCounts:
    distance: int
    substitutions: int
    deletions: int
    insertions: int


@dataclass(frozen=True)
class ErrorReport:
    """Word-level edit decomposition plus both rates for one utterance."""

    wer: float
    cer: float
    substitutions: int
    deletions: int
    insertions: int


def levenshtein(a: Sequence, b: Sequence) -> EditCounts:
    """Minimum unit-cost edit distance from ``a`` (reference) to ``b`` (hypothesis).

    The S/D/I decomposition follows one optimal alignment; where alternatives
    tie, substitution is preferred over insertion over deletion.
    """
    la, lb = len(a), len(b)
    d = np.zeros((la + 1, lb + 1), dtype=np.int64)
    d[:, 0] = np.arange(la + 1)
    d[0, :] = np.arange(lb + 1)
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i, j] = min(d[i - 1, j - 1] + cost, d[i, j - 1] + 1, d[i - 1, j] + 1)
    subs = dels = ins = 0
    i, j = la, lb
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i, j] == d[i - 1, j - 1] + (0 if a[i - 1] == b[j - 1] else 1):
            if a[i - 1] != b[j - 1]:
                subs += 1
            i, j = i - 1, j - 1
        elif j > 0 and d[i, j] == d[i, j - 1] + 1:
            ins += 1
            j -= 1
        else:
            dels += 1
            i -= 1
    return EditCounts(int(d[la, lb]), subs, dels, ins)


def wer(pair: TranscriptPair) -> float:
    """Word-level edit distance divided by the reference word count."""
    ref = normalize_text(pair.reference).split()
    hyp = normalize_text(pair.hypothesis).split()
    if not ref:
        raise ValueError("reference is empty after normalization")
    return levenshtein(ref, hyp).distance / len(ref)


def cer(pair: TranscriptPair) -> float:
    """Character-level edit distance divided by the reference character count.

    Spaces in the normalized text count as characters.
    """
    ref = normalize_text(pair.reference)
    hyp = normalize_text(pair.hypothesis)
    if not ref:
        raise ValueError("reference is empty after normalization")
    return levenshtein(ref, hyp).distance / len(ref)


def error_report(pair: TranscriptPair) -> ErrorReport:
    ref = normalize_text(pair.reference).split()
    hyp = normalize_text(pair.hypothesis).split()
    if not ref:
        raise ValueError("reference is empty after normalization")
    counts = levenshtein(ref, hyp)
    return ErrorReport(
        wer=counts.distance / len(ref),
        cer=cer(pair),
        substitutions=counts.substitutions,
        deletions=counts.deletions,
        insertions=counts.insertions,
    )


def error_reduction_ratio(baseline: float, attacked: float, mitigated: float) -> float:
    """Share of the attack-induced error removed by mitigation."""
    if attacked <= baseline:
        raise ValueError(
            f"reduction undefined: attacked rate {attacked} does not exceed baseline {baseline}"
        )
    return (attacked - mitigated) / (attacked - baseline)


def spectral_mse(a: AudioSignal, b: AudioSignal) -> float:
    """Mean squared sample difference after normalizing both signals to [-1, 1]."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    diff = (a.samples - b.samples) / PCM_FULL_SCALE
    return float(np.mean(diff * diff))


def utterance_record(uid: str, pair: TranscriptPair, **extra) -> str:
    """One line-delimited JSON record scoring a single utterance."""
    report = error_report(pair)
    record = {
        "id": uid,
        "wer": report.wer,
        "cer": report.cer,
        "S": report.substitutions,
        "D": report.deletions,
        "I": report.insertions,
    }
    record.update(extra)
    return json.dumps(record)


def summary_record(wers: Sequence[float], cers: Sequence[float], **extra) -> str:
    """Corpus summary record: mean rates over utterances."""
    record = {
        "id": "summary",
        "utterances": len(wers),
        "wer": float(np.mean(wers)) if len(wers) else 0.0,
        "cer": float(np.mean(cers)) if len(cers) else 0.0,
    }
    record.update(extra)
    return json.dumps(record)
