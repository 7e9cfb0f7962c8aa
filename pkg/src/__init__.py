"""Table Title Generation Toolkit

Extracts contextual metadata for web tables from HTML pages, linearizes it into
field-tagged token sequences, and trains a pointer-generator network that
composes natural-language titles, with selection baselines and ROUGE evaluation.
"""

__version__ = "1.0.0"
__author__ = "Table Titles Contributors"

from .errors import TableTitleError
from .table_context import TableContext, DatasetRecord
from .extractor import PageExtractor, parse_document, extract_context, extract_all
from .corpus import (
    FieldConfig, Vocabulary, EncodedExample, tokenize, aggregate_titles, linearize,
    build_vocab, encode_example, split_dataset, render_title,
)
from .seqmodel import Hyperparams, ModelParams, init_params, final_distribution
from .training import train, TrainingResult
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from .decoder import DecodeConfig, beam_search, generate_title
from .evalkit import rouge_n, rouge_l, baseline_page_title, baseline_section_heading, evaluate, EvalReport
from .title_service import TitleGenerationService, GenerationResult, create_title_service_from_file
from .data_generator import SyntheticCorpusGenerator
from .edge_case_generator import ExtractionCaseGenerator
from .visualization import TitleVisualizer

__all__ = [
    'TableTitleError',
    'TableContext',
    'DatasetRecord',
    'PageExtractor',
    'parse_document',
    'extract_context',
    'extract_all',
    'FieldConfig',
    'Vocabulary',
    'EncodedExample',
    'tokenize',
    'aggregate_titles',
    'linearize',
    'build_vocab',
    'encode_example',
    'split_dataset',
    'render_title',
    'Hyperparams',
    'ModelParams',
    'init_params',
    'final_distribution',
    'train',
    'TrainingResult',
    'Checkpoint',
    'save_checkpoint',
    'load_checkpoint',
    'DecodeConfig',
    'beam_search',
    'generate_title',
    'rouge_n',
    'rouge_l',
    'baseline_page_title',
    'baseline_section_heading',
    'evaluate',
    'EvalReport',
    'TitleGenerationService',
    'GenerationResult',
    'create_title_service_from_file',
    'SyntheticCorpusGenerator',
    'ExtractionCaseGenerator',
    'TitleVisualizer',
]
