"""Corpus manifests: tab-separated lists of audio, optional annotation, and reference text."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..errors import ManifestError

NO_ANNOTATION = "-"


@dataclass(frozen=True)
class ManifestEntry:
    audio: Path  # absolute path
    annotation: Path | None
    transcript: str


@dataclass
class CorpusManifest:
    root: Path
    entries: list[ManifestEntry]


def load_manifest(path: Path | str) -> CorpusManifest:
    """Parse a manifest; lines are ``audio<TAB>annotation-or-dash<TAB>transcript``.

    Paths are resolved relative to the manifest's directory.  Every audio file
    must exist; the transcript column may be empty for runs that do not
    evaluate transcriptions.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    root = path.parent.resolve()
    entries = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise ManifestError(f"{path}:{lineno}: expected 3 tab-separated columns, got {len(parts)}")
        audio = (root / parts[0]).resolve()
        if not audio.is_file():
            raise ManifestError(f"{path}:{lineno}: audio file not found: {audio}")
        annotation = None
        if parts[1] != NO_ANNOTATION:
            annotation = (root / parts[1]).resolve()
            if not annotation.is_file():
                raise ManifestError(f"{path}:{lineno}: annotation file not found: {annotation}")
        entries.append(ManifestEntry(audio, annotation, parts[2]))
    if not entries:
        raise ManifestError(f"{path}: manifest lists no audio files")
    return CorpusManifest(root, entries)


def save_manifest(manifest: CorpusManifest, path: Path | str) -> None:
    """Write a manifest with audio paths relative to its own directory."""
    path = Path(path)
    root = path.parent.resolve()
    lines = []
    for e in manifest.entries:
        audio = e.audio.relative_to(root) if e.audio.is_relative_to(root) else e.audio
        annotation = NO_ANNOTATION if e.annotation is None else str(e.annotation)
        lines.append(f"{audio.as_posix()}\t{annotation}\t{e.transcript}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
