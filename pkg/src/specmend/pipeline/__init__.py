"""Batch pipeline: manifests, run configuration, profile persistence, and the CLI."""

from .commands import cmd_attack, cmd_defend, cmd_estimate, cmd_evaluate, cmd_train
from .config import DefenseSettings, RunConfig, load_config, to_ini
from .manifest import CorpusManifest, ManifestEntry, load_manifest, save_manifest
from .profileio import load_profile, save_profile

__all__ = [
    "CorpusManifest",
    "DefenseSettings",
    "ManifestEntry",
    "RunConfig",
    "cmd_attack",
    "cmd_defend",
    "cmd_estimate",
    "cmd_evaluate",
    "cmd_train",
    "load_config",
    "load_manifest",
    "load_profile",
    "save_manifest",
    "save_profile",
    "to_ini",
]
