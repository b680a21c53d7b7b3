"""Batch orchestration behind the CLI subcommands.

Every command is deterministic given its inputs, configuration, and seeds:
per-file random streams are derived from the configured seed and the file's
relative path, output trees mirror input trees, and a resolved-config
snapshot is written beside each run's outputs.
"""

from __future__ import annotations

import dataclasses
import json
import zlib
from pathlib import Path
from typing import Callable, TextIO

import numpy as np

from ..adaptation import DefenseProfile, RatioEstimate, defend, estimate_removal_ratio
from ..attack import AttackConfig, apply_adaptive_attack, apply_attack
from ..compensation import TrainingPair, fit_filter
from ..errors import ManifestError
from ..metrics import (
    TranscriptPair,
    cer,
    error_reduction_ratio,
    summary_record,
    utterance_record,
    wer,
)
from ..signal_core import AudioSignal, SegmentPlan, dft, plan_segments, read_wav, write_wav
from .config import RunConfig, to_ini
from .manifest import CorpusManifest, ManifestEntry, save_manifest
from .profileio import save_profile
from .transcriber import read_hypothesis, run_transcriber

SNAPSHOT_NAME = "run_config.ini"
CHAIN_MANIFEST_NAME = "manifest.tsv"

# Fallback window durations (ms) when no time-aligned annotation is available:
# typical average phoneme and word lengths.
FALLBACK_MS = {"phoneme": 80.0, "word": 300.0}

Log = Callable[[str], None]


def _noop_log(_: str) -> None:
    pass


def _file_seed(base: int, rel_path: str) -> int:
    """Stable per-file seed: the run seed mixed with a checksum of the relative path."""
    return (base << 32) | zlib.crc32(rel_path.encode("utf-8"))


def _rel(entry: ManifestEntry, root: Path) -> Path:
    try:
        return entry.audio.relative_to(root)
    except ValueError as exc:
        raise ManifestError(f"audio {entry.audio} lies outside the manifest root {root}") from exc


def _plan_for(signal: AudioSignal, entry: ManifestEntry, attack: AttackConfig) -> SegmentPlan:
    if attack.granularity == "fixed":
        return plan_segments(signal, attack.fixed_ms, "fixed")
    if entry.annotation is not None:
        return plan_segments(signal, entry.annotation, attack.granularity)
    return plan_segments(signal, FALLBACK_MS[attack.granularity], "fixed")


def _windows(samples: np.ndarray, n: int) -> list[np.ndarray]:
    out = []
    for start in range(0, samples.size, n):
        seg = samples[start : start + n]
        if seg.size < n:
            padded = np.zeros(n)
            padded[: seg.size] = seg
            seg = padded
        out.append(seg)
    return out


def write_snapshot(cfg: RunConfig, out_dir: Path) -> None:
    (out_dir / SNAPSHOT_NAME).write_text(to_ini(cfg), encoding="utf-8")


def cmd_train(manifest: CorpusManifest, cfg: RunConfig, profile_path: Path, log: Log = _noop_log) -> DefenseProfile:
    """Fit one compensation filter per grid ratio over the manifest corpus."""
    n = cfg.defense.segment_len
    clips = [(read_wav(e.audio), e) for e in manifest.entries]
    filters = []
    for ratio in cfg.defense.ratio_grid:
        attack_cfg = dataclasses.replace(cfg.attack, removal_ratio=ratio, adaptive=None)
        pairs = []
        for signal, entry in clips:
            attacked = apply_attack(signal, _plan_for(signal, entry, attack_cfg), attack_cfg)
            for orig_win, att_win in zip(_windows(signal.samples, n), _windows(attacked.samples, n)):
                pairs.append(
                    TrainingPair(dft(orig_win, signal.sample_rate), dft(att_win, signal.sample_rate))
                )
        filt = fit_filter(pairs, cfg.defense.filter_size, cfg.defense.batch_size, trained_ratio=ratio)
        filters.append(filt)
        log(
            f"trained ratio={ratio:g}: {len(pairs)} window pairs, "
            f"ridge={'yes' if filt.ridge_applied else 'no'}"
        )
    profile = DefenseProfile(
        filters,
        dict(cfg.noise_table),
        cfg.defense.echo if cfg.defense.echo_enabled else None,
        cfg.defense.weak_bin_threshold,
        cfg.defense.benign_cutoff,
    )
    profile_path.parent.mkdir(parents=True, exist_ok=True)
    save_profile(profile, profile_path)
    log(f"wrote profile with {len(filters)} filters to {profile_path}")
    return profile


def cmd_attack(manifest: CorpusManifest, cfg: RunConfig, out_dir: Path, log: Log = _noop_log) -> Path:
    """Write an attacked mirror of the corpus plus per-file ratio traces."""
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_lines = []
    chained = []
    for entry in manifest.entries:
        rel = _rel(entry, manifest.root)
        signal = read_wav(entry.audio)
        if cfg.attack.adaptive is not None:
            adaptive = dataclasses.replace(
                cfg.attack.adaptive, seed=_file_seed(cfg.attack_seed, rel.as_posix())
            )
            attacked, trace = apply_adaptive_attack(
                signal, dataclasses.replace(cfg.attack, adaptive=adaptive)
            )
        else:
            attacked = apply_attack(signal, _plan_for(signal, entry, cfg.attack), cfg.attack)
            trace = [cfg.attack.removal_ratio]
        out_path = out_dir / rel
        out_path.parent.mkdir(parents=True, exist_ok=True)
        write_wav(attacked, out_path)
        trace_lines.append(json.dumps({"audio": rel.as_posix(), "ratios": trace}))
        chained.append(ManifestEntry(out_path.resolve(), entry.annotation, entry.transcript))
        log(f"attacked {rel.as_posix()} ({len(trace)} unit(s))")
    (out_dir / "attack_traces.jsonl").write_text("\n".join(trace_lines) + "\n", encoding="utf-8")
    save_manifest(CorpusManifest(out_dir.resolve(), chained), out_dir / CHAIN_MANIFEST_NAME)
    write_snapshot(cfg, out_dir)
    return out_dir / CHAIN_MANIFEST_NAME


def cmd_defend(
    manifest: CorpusManifest,
    profile: DefenseProfile,
    cfg: RunConfig,
    out_dir: Path,
    log: Log = _noop_log,
) -> Path:
    """Defend every manifest file, writing outputs and a per-file estimate report."""
    out_dir.mkdir(parents=True, exist_ok=True)
    report_lines = []
    chained = []
    for entry in manifest.entries:
        rel = _rel(entry, manifest.root)
        signal = read_wav(entry.audio)
        defended, estimate = defend(signal, profile, _file_seed(cfg.noise_seed, rel.as_posix()))
        out_path = out_dir / rel
        out_path.parent.mkdir(parents=True, exist_ok=True)
        write_wav(defended, out_path)
        report_lines.append(
            json.dumps(
                {
                    "audio": rel.as_posix(),
                    "ratio": estimate.ratio,
                    "verdict": estimate.verdict,
                    "windows": [[w, r] for w, r in estimate.per_window],
                }
            )
        )
        chained.append(ManifestEntry(out_path.resolve(), entry.annotation, entry.transcript))
        log(f"defended {rel.as_posix()} (ratio={estimate.ratio:.3f}, {estimate.verdict})")
    (out_dir / "defend_report.jsonl").write_text("\n".join(report_lines) + "\n", encoding="utf-8")
    save_manifest(CorpusManifest(out_dir.resolve(), chained), out_dir / CHAIN_MANIFEST_NAME)
    write_snapshot(cfg, out_dir)
    return out_dir / "defend_report.jsonl"


def cmd_estimate(audio_path: Path, cfg: RunConfig, log: Log = print) -> RatioEstimate:
    signal = read_wav(audio_path)
    estimate = estimate_removal_ratio(
        signal,
        cfg.defense.segment_len,
        cfg.defense.weak_bin_threshold,
        cfg.defense.benign_cutoff,
    )
    for w, r in estimate.per_window:
        log(f"window {w}: {r:.4f}")
    log(f"estimated removal ratio: {estimate.ratio:.4f}")
    log(f"verdict: {estimate.verdict}")
    return estimate


def _hypothesis(wav_path: Path, cfg: RunConfig, hyp_ext: str | None) -> str:
    if cfg.transcriber:
        return run_transcriber(cfg.transcriber, wav_path)
    return read_hypothesis(wav_path, hyp_ext or ".hyp.txt")


def cmd_evaluate(
    manifest: CorpusManifest,
    attacked_dir: Path,
    defended_dir: Path | None,
    cfg: RunConfig,
    out: TextIO,
    hyp_ext: str | None = None,
) -> dict:
    """Score benign/attacked(/defended) corpora and report error-reduction ratios."""
    variants: list[tuple[str, Path | None]] = [("benign", None), ("attacked", attacked_dir)]
    if defended_dir is not None:
        variants.append(("defended", defended_dir))
    rates: dict[str, dict[str, list[float]]] = {v: {"wer": [], "cer": []} for v, _ in variants}
    for entry in manifest.entries:
        if not entry.transcript.strip():
            raise ManifestError(f"{entry.audio}: empty reference transcript; evaluation needs references")
        rel = _rel(entry, manifest.root)
        for variant, base in variants:
            wav_path = entry.audio if base is None else base / rel
            pair = TranscriptPair(entry.transcript, _hypothesis(wav_path, cfg, hyp_ext))
            out.write(utterance_record(rel.as_posix(), pair, variant=variant) + "\n")
            rates[variant]["wer"].append(wer(pair))
            rates[variant]["cer"].append(cer(pair))
    summary: dict = {}
    for variant, _ in variants:
        mean_wer = float(np.mean(rates[variant]["wer"]))
        mean_cer = float(np.mean(rates[variant]["cer"]))
        summary[variant] = {"wer": mean_wer, "cer": mean_cer}
        out.write(summary_record(rates[variant]["wer"], rates[variant]["cer"], variant=variant) + "\n")
    if defended_dir is not None:
        reductions = {}
        for metric in ("wer", "cer"):
            try:
                reductions[metric] = error_reduction_ratio(
                    summary["benign"][metric], summary["attacked"][metric], summary["defended"][metric]
                )
            except ValueError:
                reductions[metric] = None  # attack did not raise this rate; reduction undefined
        summary["reduction"] = reductions
        out.write(json.dumps({"id": "reduction", **reductions}) + "\n")
    return summary
