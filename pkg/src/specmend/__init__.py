"""Spectrum-reduction attacks on speech audio and an acoustic compensation defense."""

from .adaptation import (
    DefenseProfile,
    RatioEstimate,
    ResolvedParams,
    configure,
    defend,
    estimate_removal_ratio,
)
from .attack import (
    AdaptiveRatioConfig,
    AttackConfig,
    apply_adaptive_attack,
    apply_attack,
    band_limited_removal,
    remove_components,
)
from .compensation import (
    CompensationFilter,
    TrainingPair,
    apply_filter,
    build_hankel,
    compensate_signal,
    fit_filter,
    select_filter,
)
from .metrics import (
    TranscriptPair,
    cer,
    error_reduction_ratio,
    levenshtein,
    spectral_mse,
    wer,
)
from .perturbation import (
    EchoParams,
    NoiseParams,
    add_gaussian_noise,
    apply_echo,
    grid_search_echo,
    select_noise_level,
)
from .signal_core import (
    AudioSignal,
    SegmentPlan,
    Spectrum,
    dft,
    idft,
    pad_pow2,
    plan_segments,
    read_wav,
    write_wav,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveRatioConfig",
    "AttackConfig",
    "AudioSignal",
    "CompensationFilter",
    "DefenseProfile",
    "EchoParams",
    "NoiseParams",
    "RatioEstimate",
    "ResolvedParams",
    "SegmentPlan",
    "Spectrum",
    "TrainingPair",
    "TranscriptPair",
    "add_gaussian_noise",
    "apply_adaptive_attack",
    "apply_attack",
    "apply_echo",
    "apply_filter",
    "band_limited_removal",
    "build_hankel",
    "cer",
    "compensate_signal",
    "configure",
    "defend",
    "dft",
    "error_reduction_ratio",
    "estimate_removal_ratio",
    "fit_filter",
    "grid_search_echo",
    "idft",
    "levenshtein",
    "pad_pow2",
    "plan_segments",
    "read_wav",
    "remove_components",
    "select_filter",
    "select_noise_level",
    "spectral_mse",
    "wer",
    "write_wav",
]
