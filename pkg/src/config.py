"""
Run configuration: flat YAML config files, command-line overrides and the
run manifest written next to every command's outputs.
"""

import hashlib
import logging
import platform
from dataclasses import dataclass, field
from dataclasses import fields as dataclass_fields
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import numpy as np
import yaml

from . import __version__
from .checkpoint import FORMAT_VERSION
from .corpus import FieldConfig
from .decoder import DecodeConfig
from .errors import ConfigError
from .seqmodel import Hyperparams

logger = logging.getLogger(__name__)

MANIFEST_NAME = "run_manifest.yaml"
_SECTIONS = {'hyper': Hyperparams, 'fields': FieldConfig, 'decode': DecodeConfig}


@dataclass
class RunConfig:
    """
    Every effective setting of one command.

    Flattened with dotted keys for the nested sections, e.g.
    ``hyper.learning_rate: 0.15`` or ``decode.beam_size: 8``.
    """
    command: str = ""
    input: Optional[str] = None
    output: Optional[str] = None
    workdir: Optional[str] = None
    vocab: Optional[str] = None
    checkpoint: Optional[str] = None
    references: Optional[str] = None
    mode: str = "copy_generate"
    seed: int = 0
    jobs: int = 1
    verbosity: int = 0
    debug_oov: bool = False
    hyper: Hyperparams = field(default_factory=Hyperparams)
    fields: FieldConfig = field(default_factory=FieldConfig)
    decode: DecodeConfig = field(default_factory=DecodeConfig)

    def to_flat(self) -> Dict[str, Any]:
        """Flat ``{key: value}`` view with sections expanded to dotted keys."""
        flat: Dict[str, Any] = {}
        for f in dataclass_fields(self):
            value = getattr(self, f.name)
            if f.name in _SECTIONS:
                for key, inner in value.to_dict().items():
                    flat[f"{f.name}.{key}"] = inner
            else:
                flat[f.name] = value
        return flat

    def update(self, values: Dict[str, Any]) -> 'RunConfig':
        """
        Apply flat overrides in place.

        Raises:
            ConfigError: On unknown keys or values the sections reject
        """
        sections = {name: getattr(self, name).to_dict() for name in _SECTIONS}
        top = {f.name for f in dataclass_fields(self)} - set(_SECTIONS)
        for key, value in values.items():
            section, _, name = key.partition(".")
            if name and section in sections:
                if name not in sections[section]:
                    raise ConfigError(f"unknown config key {key!r}")
                sections[section][name] = value
            elif key in top:
                setattr(self, key, value)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        try:
            for name, cls in _SECTIONS.items():
                setattr(self, name, cls.from_dict(sections[name]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
        return self

    @classmethod
    def from_flat(cls, values: Dict[str, Any]) -> 'RunConfig':
        return cls().update(values)

    def save(self, filepath: str) -> str:
        Path(filepath).parent.mkdir(parents=True, exist_ok=True)
        with open(filepath, 'w', encoding='utf-8') as f:
            yaml.safe_dump(self.to_flat(), f, sort_keys=True, default_flow_style=False)
        return filepath


def load_config(filepath: str) -> Dict[str, Any]:
    """
    Read a flat YAML config file.

    Raises:
        ConfigError: If the file is not a mapping of scalar values
    """
    try:
        with open(filepath, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {filepath}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {filepath} must be a key: value mapping")
    nested = [k for k, v in data.items() if isinstance(v, (dict, list))]
    if nested:
        raise ConfigError(f"config keys must be flat; nested values under {nested}")
    return {str(k): v for k, v in data.items()}


def file_digest(filepath: str) -> str:
    """sha256 of a file, or of every file under a directory in name order."""
    path = Path(filepath)
    digest = hashlib.sha256()
    files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
    for p in files:
        if path.is_dir():
            digest.update(str(p.relative_to(path)).encode('utf-8'))
        digest.update(p.read_bytes())
    return digest.hexdigest()


def _digests(paths: Iterable[Optional[str]]) -> Dict[str, str]:
    return {str(p): file_digest(p) for p in paths if p and Path(p).exists()}


def write_run_manifest(config: RunConfig, output_dir: str, inputs: Iterable[Optional[str]] = (),
                       outputs: Iterable[Optional[str]] = ()) -> str:
    """
    Record config, seed, versions and file digests in ``run_manifest.yaml``.

    Returns:
        Path of the manifest
    """
    manifest = {
        'command': config.command,
        'seed': config.seed,
        'config': config.to_flat(),
        'versions': {
            'toolkit': __version__,
            'checkpoint_format': FORMAT_VERSION,
            'python': platform.python_version(),
            'numpy': np.__version__,
        },
        'inputs': _digests(inputs),
        'outputs': _digests(outputs),
    }
    path = Path(output_dir) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(manifest, f, sort_keys=True, default_flow_style=False)
    logger.info("✓ Saved run manifest to %s", path)
    return str(path)


def read_run_manifest(filepath: str) -> Dict[str, Any]:
    with open(filepath, 'r', encoding='utf-8') as f:
        return yaml.safe_load(f)
