"""Stand-in transcriber for tests and dry runs.

Prints the sidecar transcript stored next to a WAV file (same name,
``.txt`` extension).  Use it as a transcriber template:

    specmend evaluate ... --transcriber "python -m specmend.stub_transcriber {wav}"
"""

from __future__ import annotations

import sys
from pathlib import Path


def main(argv: list[str] | None = None) -> int:
    args = sys.argv[1:] if argv is None else argv
    if len(args) != 1:
        print("usage: python -m specmend.stub_transcriber AUDIO.wav", file=sys.stderr)
        return 1
    sidecar = Path(args[0]).with_suffix(".txt")
    if not sidecar.is_file():
        print(f"no sidecar transcript at {sidecar}", file=sys.stderr)
        return 1
    print(sidecar.read_text(encoding="utf-8").rstrip("\n"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
