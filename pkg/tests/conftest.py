"""Shared fixtures: tiny contexts, vocabularies and untrained checkpoints."""

import matplotlib
import pytest

matplotlib.use("Agg")

from src.checkpoint import Checkpoint  # noqa: E402
from src.corpus import FieldConfig, build_vocab  # noqa: E402
from src.data_generator import SyntheticCorpusGenerator  # noqa: E402
from src.seqmodel import Hyperparams, init_params  # noqa: E402
from src.table_context import DatasetRecord, TableContext  # noqa: E402


def make_context(**overrides) -> TableContext:
    """Filmography-style context for a named person."""
    values = dict(
        page_title=["nicole", "eggert", "-", "wikipedia"],
        section_headings=[(1, ["nicole", "eggert"]), (2, ["filmography"])],
        column_headers=[["year"], ["title"], ["role"]],
    )
    values.update(overrides)
    return TableContext(**values)


def tiny_hyper(**overrides) -> Hyperparams:
    values = dict(embedding_dim=8, hidden_dim=10, attention_dim=10, batch_size=4,
                  max_steps=20, eval_interval=10, patience=2, seed=3)
    values.update(overrides)
    return Hyperparams(**values)


@pytest.fixture
def context() -> TableContext:
    return make_context()


@pytest.fixture
def synthetic_records():
    return SyntheticCorpusGenerator(seed=11).generate_corpus(40)


@pytest.fixture
def untrained_checkpoint(synthetic_records) -> Checkpoint:
    """Randomly initialised model over the synthetic vocabulary."""
    fields = FieldConfig()
    vocab = build_vocab(synthetic_records[:30], fields)
    hyper = tiny_hyper()
    return Checkpoint(hyper, vocab, init_params(hyper, len(vocab)), fields)


@pytest.fixture
def record(context) -> DatasetRecord:
    return DatasetRecord(context=context, candidate_titles=["nicole eggert filmography"] * 2 + ["films"],
                         title="nicole eggert filmography")
