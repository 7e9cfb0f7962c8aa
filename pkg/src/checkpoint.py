"""
Versioned binary checkpoint container.

Layout (all integers little-endian):

    magic            8 bytes  b"TTGCKPT\\x00"
    format version   uint32
    header length    uint32, then UTF-8 JSON: hyperparams, field config, vocabulary
    tensor count     uint32
    per tensor       uint16 name length, name, uint32 rank, rank x uint32 dims,
                     row-major float32 data
"""

import json
import logging
import struct
from dataclasses import dataclass
from collections import OrderedDict
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .corpus import FieldConfig, Vocabulary, RESERVED_TOKENS
from .errors import CheckpointFormatError
from .seqmodel import Hyperparams, ModelParams, param_shapes

logger = logging.getLogger(__name__)

MAGIC = b"TTGCKPT\x00"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    """A frozen model: parameters plus everything needed to use them."""
    hyper: Hyperparams
    vocab: Vocabulary
    params: ModelParams
    field_config: FieldConfig

    def __post_init__(self):
        if self.params.vocab_size != len(self.vocab):
            raise ValueError(f"params built for {self.params.vocab_size} tokens, vocabulary has {len(self.vocab)}")


def _read_exact(f: BinaryIO, n: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise CheckpointFormatError("checkpoint file is truncated")
    return data


def save_checkpoint(checkpoint: Checkpoint, filepath: str) -> str:
    """
    Write a checkpoint; identical inputs give identical bytes.

    Raises:
        CheckpointFormatError: If the model is not float32, the only tensor
            type the container stores
    """
    wide = [name for name, value in checkpoint.params.tensors.items() if value.dtype != np.float32]
    if checkpoint.hyper.dtype != "float32" or wide:
        raise CheckpointFormatError(f"checkpoints hold float32 tensors only; model is {checkpoint.hyper.dtype}")

    header = json.dumps({
        'hyperparams': checkpoint.hyper.to_dict(),
        'field_config': checkpoint.field_config.to_dict(),
        'vocabulary': checkpoint.vocab.id_to_token[len(RESERVED_TOKENS):],
    }, sort_keys=True, ensure_ascii=False).encode('utf-8')

    Path(filepath).parent.mkdir(parents=True, exist_ok=True)
    with open(filepath, 'wb') as f:
        f.write(MAGIC)
        f.write(struct.pack('<I', FORMAT_VERSION))
        f.write(struct.pack('<I', len(header)))
        f.write(header)
        tensors = checkpoint.params.tensors
        f.write(struct.pack('<I', len(tensors)))
        for name, value in tensors.items():
            encoded = name.encode('utf-8')
            f.write(struct.pack('<H', len(encoded)))
            f.write(encoded)
            f.write(struct.pack('<I', value.ndim))
            f.write(struct.pack(f'<{value.ndim}I', *value.shape))
            f.write(np.ascontiguousarray(value, dtype='<f4').tobytes())

    logger.info("✓ Saved checkpoint (%d tensors) to %s", len(checkpoint.params.tensors), filepath)
    return filepath


def load_checkpoint(filepath: str) -> Checkpoint:
    """
    Read a checkpoint written by ``save_checkpoint``.

    Raises:
        CheckpointFormatError: On bad magic bytes, unknown version, truncation
            or tensors that do not match the stored hyperparameters
    """
    with open(filepath, 'rb') as f:
        if _read_exact(f, len(MAGIC)) != MAGIC:
            raise CheckpointFormatError(f"{filepath} is not a checkpoint (bad magic bytes)")
        (version,) = struct.unpack('<I', _read_exact(f, 4))
        if version != FORMAT_VERSION:
            raise CheckpointFormatError(f"unsupported checkpoint format version {version}")
        (header_len,) = struct.unpack('<I', _read_exact(f, 4))
        header = json.loads(_read_exact(f, header_len).decode('utf-8'))

        hyper = Hyperparams.from_dict(header['hyperparams'])
        vocab = Vocabulary(header['vocabulary'])
        field_config = FieldConfig.from_dict(header['field_config'])

        (count,) = struct.unpack('<I', _read_exact(f, 4))
        tensors = OrderedDict()
        for _ in range(count):
            (name_len,) = struct.unpack('<H', _read_exact(f, 2))
            name = _read_exact(f, name_len).decode('utf-8')
            (rank,) = struct.unpack('<I', _read_exact(f, 4))
            shape = struct.unpack(f'<{rank}I', _read_exact(f, 4 * rank))
            size = int(np.prod(shape)) if rank else 1
            data = np.frombuffer(_read_exact(f, 4 * size), dtype='<f4').reshape(shape)
            tensors[name] = data.astype(hyper.dtype)

    expected = param_shapes(hyper, len(vocab))
    if list(expected) != list(tensors) or any(expected[k] != tensors[k].shape for k in expected):
        raise CheckpointFormatError("checkpoint tensors do not match its hyperparameters")

    logger.info("Loaded checkpoint from %s (vocabulary %d)", filepath, len(vocab))
    return Checkpoint(hyper, vocab, ModelParams(tensors), field_config)
