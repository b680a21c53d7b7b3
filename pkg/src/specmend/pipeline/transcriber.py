"""Adapter for external speech-to-text commands.

A transcriber is any executable invoked per file with the WAV path
substituted into a command template; the hypothesis is whatever it prints
to stdout, with the trailing newline trimmed.  Keeping ASR engines out of
process keeps this package dependency-free and lets tests run with a stub.
"""

from __future__ import annotations

import shlex
import subprocess
from pathlib import Path

from ..errors import TranscriberError


def run_transcriber(template: str, wav_path: Path | str) -> str:
    """Run the templated command (``{wav}`` expands to the file path) and return stdout."""
    if "{wav}" not in template:
        raise TranscriberError(f"transcriber template {template!r} has no {{wav}} placeholder")
    argv = [part.replace("{wav}", str(wav_path)) for part in shlex.split(template)]
    try:
        result = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise TranscriberError(f"cannot run transcriber {argv[0]!r}: {exc}") from exc
    if result.returncode != 0:
        raise TranscriberError(
            f"transcriber exited with status {result.returncode} on {wav_path}: {result.stderr.strip()}"
        )
    return result.stdout.rstrip("\n")


def read_hypothesis(wav_path: Path | str, hyp_ext: str) -> str:
    """Read a pre-computed hypothesis stored beside the WAV file."""
    hyp_path = Path(str(wav_path) + hyp_ext)
    if not hyp_path.is_file():
        raise TranscriberError(f"hypothesis file not found: {hyp_path}")
    return hyp_path.read_text(encoding="utf-8").rstrip("\n")
