"""Exception types shared across the package."""


class SpecmendError(Exception):
    """Base class for all errors raised by this package."""


class AudioFormatError(SpecmendError):
    """A WAV file could not be decoded as 16-bit mono PCM."""


class AnnotationError(SpecmendError):
    """A segment annotation file is malformed or out of bounds."""


class ManifestError(SpecmendError):
    """A corpus manifest is malformed or references missing files."""


class ConfigError(SpecmendError):
    """A run configuration file contains invalid values."""


class ProfileFormatError(SpecmendError):
    """A defense profile file is corrupt or has an unknown version."""


class TranscriberError(SpecmendError):
    """An external transcriber command failed or produced unusable output."""
