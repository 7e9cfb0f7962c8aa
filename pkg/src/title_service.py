"""
Title Generation Service

Holds one frozen checkpoint and generates titles for batches of table records,
writing line-delimited predictions. The checkpoint is never mutated, so
generation calls can run on a thread pool.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .checkpoint import Checkpoint, load_checkpoint
from .decoder import MODES, DecodeConfig, generate
from .errors import EmptyInput
from .evalkit import BASELINES
from .table_context import DatasetRecord

logger = logging.getLogger(__name__)


@dataclass
class GenerationResult:
    """One predicted title."""

    table_index: int
    title: str
    score: Optional[float]
    mode: str

    def is_empty(self) -> bool:
        return not self.title.strip()

    def to_dict(self) -> Dict:
        """
        Convert to the prediction-file representation.

        Returns:
            ``{table_index, title, score, mode}``; score is null for baselines
            and empty inputs
        """
        return {
            "table_index": self.table_index,
            "title": self.title,
            "score": None if self.score is None else round(float(self.score), 6),
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'GenerationResult':
        return cls(int(data.get("table_index", 0)), data.get("title", "") or "",
                   data.get("score"), data.get("mode", ""))


def save_predictions(results: Sequence[GenerationResult], filepath: str) -> str:
    """Write predictions as JSON lines, one per record in input order."""
    Path(filepath).parent.mkdir(parents=True, exist_ok=True)
    with open(filepath, 'w', encoding='utf-8') as f:
        for result in results:
            f.write(json.dumps(result.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
    logger.info("✓ Saved %d predictions to %s", len(results), filepath)
    return filepath


def load_predictions(filepath: str) -> List[GenerationResult]:
    with open(filepath, 'r', encoding='utf-8') as f:
        return [GenerationResult.from_dict(json.loads(line)) for line in f if line.strip()]


def baseline_results(records: Sequence[DatasetRecord], name: str) -> List[GenerationResult]:
    """Selection-baseline predictions (``page_title`` or ``section_heading``)."""
    if name not in BASELINES:
        raise ValueError(f"unknown baseline {name!r}; expected one of {sorted(BASELINES)}")
    select = BASELINES[name]
    return [GenerationResult(r.context.table_index, select(r.context), None, name) for r in records]


class TitleGenerationService:
    """
    Batch title generation with a frozen checkpoint.

    Usage:
        service = TitleGenerationService(checkpoint, DecodeConfig(beam_size=8))
        results = service.batch_generate(records, mode="copy_generate", jobs=4)
        save_predictions(results, "predictions.jsonl")
    """

    def __init__(self, checkpoint: Checkpoint, decode_config: Optional[DecodeConfig] = None,
                 debug_oov: bool = False):
        """
        Initialize the service.

        Args:
            checkpoint: Trained model, vocabulary and field configuration
            decode_config: Beam settings (defaults: beam 8, length 4-20)
            debug_oov: Render copied OOV tokens as ``__token__``
        """
        self.checkpoint = checkpoint
        self.decode_config = decode_config or DecodeConfig()
        self.debug_oov = debug_oov
        logger.info("Title service ready: vocabulary %d, beam %d, length %d-%d",
                    len(checkpoint.vocab), self.decode_config.beam_size,
                    self.decode_config.min_len, self.decode_config.max_len)

    def generate_for(self, record: DatasetRecord, mode: str = 'copy_generate') -> GenerationResult:
        """
        Title for one record.

        Records whose context linearizes to nothing get an empty title and no
        score instead of failing the batch.
        """
        try:
            generated = generate(self.checkpoint, record.context, mode, self.decode_config, self.debug_oov)
        except EmptyInput:
            logger.warning("Empty context for table %d; emitting empty title", record.context.table_index)
            return GenerationResult(record.context.table_index, "", None, mode)
        return GenerationResult(record.context.table_index, generated.text, generated.score, mode)

    def batch_generate(self, records: Sequence[DatasetRecord], mode: str = 'copy_generate',
                       jobs: int = 1) -> List[GenerationResult]:
        """
        Generate titles for many records, preserving input order.

        Args:
            records: Records to title
            mode: copy_generate, copy_only or generate_only
            jobs: Worker threads

        Returns:
            One result per record
        """
        if mode not in MODES:
            raise ValueError(f"mode must be one of {sorted(MODES)}, got {mode!r}")
        with ThreadPoolExecutor(max_workers=max(int(jobs), 1)) as pool:
            results = list(pool.map(lambda r: self.generate_for(r, mode), records))

        empty = sum(r.is_empty() for r in results)
        logger.info("Generated %d titles (%s), %d empty", len(results), mode, empty)
        return results

    def get_statistics(self, results: Sequence[GenerationResult]) -> Dict:
        """Counts and mean score/length of a batch of results."""
        scores = [r.score for r in results if r.score is not None]
        lengths = [len(r.title.split()) for r in results]
        return {
            'num_titles': len(results),
            'num_empty': sum(r.is_empty() for r in results),
            'mean_score': float(np.mean(scores)) if scores else 0.0,
            'mean_length': float(np.mean(lengths)) if lengths else 0.0,
        }


def create_title_service_from_file(filepath: str, decode_config: Optional[DecodeConfig] = None,
                                   debug_oov: bool = False) -> TitleGenerationService:
    """
    Create a title service by loading a checkpoint file.

    Args:
        filepath: Checkpoint path
        decode_config: Beam settings
        debug_oov: Render copied OOV tokens as ``__token__``

    Returns:
        Configured TitleGenerationService
    """
    return TitleGenerationService(load_checkpoint(filepath), decode_config, debug_oov)
