"""Binary persistence for defense profiles.

Layout (all little-endian): an 8-byte magic/version header, the filter
records (ratio, segment length, filter size, ridge flag, coefficients as
float64), the noise table, both thresholds, and an optional echo block.
Filters must survive byte-exactly across train/defend runs, hence the
fixed binary encoding.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..adaptation import DefenseProfile
from ..compensation import CompensationFilter
from ..errors import ProfileFormatError
from ..perturbation import EchoParams

_MAGIC = b"SMND"
_VERSION = 1
_UNIT_CODES = {"ms": 0, "samples": 1}
_UNIT_NAMES = {v: k for k, v in _UNIT_CODES.items()}


def save_profile(profile: DefenseProfile, path: Path | str) -> None:
    out = bytearray()
    out += struct.pack("<4sI", _MAGIC, _VERSION)
    out += struct.pack("<I", len(profile.filters))
    for f in profile.filters:
        out += struct.pack("<dIIB", f.trained_ratio, f.segment_len, f.filter_size, int(f.ridge_applied))
        out += np.asarray(f.coeffs, dtype="<f8").tobytes()
    out += struct.pack("<I", len(profile.noise_table))
    for ratio in sorted(profile.noise_table):
        out += struct.pack("<dd", ratio, profile.noise_table[ratio])
    out += struct.pack("<dd", profile.weak_bin_threshold, profile.benign_cutoff)
    if profile.echo is None:
        out += struct.pack("<B", 0)
    else:
        e = profile.echo
        out += struct.pack(
            "<BIdBB", 1, e.reflections, e.delay, _UNIT_CODES[e.delay_unit], int(e.allow_long_delay)
        )
        out += struct.pack("<d", e.attenuation)
    Path(path).write_bytes(bytes(out))


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.offset + size > len(self.data):
            raise ProfileFormatError(f"{self.path}: truncated profile file")
        values = struct.unpack_from(fmt, self.data, self.offset)
        self.offset += size
        return values

    def take_floats(self, count: int) -> np.ndarray:
        size = 8 * count
        if self.offset + size > len(self.data):
            raise ProfileFormatError(f"{self.path}: truncated profile file")
        arr = np.frombuffer(self.data, dtype="<f8", count=count, offset=self.offset).copy()
        self.offset += size
        return arr


def load_profile(path: Path | str) -> DefenseProfile:
    path = Path(path)
    if not path.is_file():
        raise ProfileFormatError(f"profile not found: {path}")
    r = _Reader(path.read_bytes(), path)
    magic, version = r.take("<4sI")
    if magic != _MAGIC:
        raise ProfileFormatError(f"{path}: not a defense profile (bad magic {magic!r})")
    if version != _VERSION:
        raise ProfileFormatError(f"{path}: unsupported profile version {version}")
    (num_filters,) = r.take("<I")
    filters = []
    for _ in range(num_filters):
        ratio, segment_len, filter_size, ridged = r.take("<dIIB")
        coeffs = r.take_floats(2 * filter_size + 1)
        filters.append(
            CompensationFilter(coeffs, filter_size, segment_len, ratio, ridge_applied=bool(ridged))
        )
    (num_noise,) = r.take("<I")
    noise_table = {}
    for _ in range(num_noise):
        ratio, ns = r.take("<dd")
        noise_table[ratio] = ns
    threshold, cutoff = r.take("<dd")
    (echo_flag,) = r.take("<B")
    echo = None
    if echo_flag:
        reflections, delay, unit_code, allow_long = r.take("<IdBB")
        (attenuation,) = r.take("<d")
        if unit_code not in _UNIT_NAMES:
            raise ProfileFormatError(f"{path}: unknown echo delay unit code {unit_code}")
        echo = EchoParams(
            reflections, delay, attenuation, _UNIT_NAMES[unit_code], allow_long_delay=bool(allow_long)
        )
    try:
        return DefenseProfile(filters, noise_table, echo, threshold, cutoff)
    except ValueError as exc:
        raise ProfileFormatError(f"{path}: inconsistent profile contents: {exc}") from exc
