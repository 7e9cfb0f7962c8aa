"""
End-to-end experiments on the synthetic corpus.

These train real models and take minutes; deselect with ``-m "not slow"``.
"""

import dataclasses

import numpy as np
import pytest
from src.checkpoint import Checkpoint
from src.corpus import FieldConfig, build_vocab, encode_records, linearize, tokenize
from src.data_generator import SyntheticCorpusGenerator
from src.decoder import DecodeConfig, generate
from src.evalkit import duplicate_rate, evaluate
from src.seqmodel import Hyperparams, init_params
from src.training import train

pytestmark = pytest.mark.slow

OVERFIT_HYPER = Hyperparams(embedding_dim=32, hidden_dim=64, attention_dim=64, batch_size=8,
                            max_steps=4000, eval_interval=100, patience=10, seed=1)


@pytest.fixture(scope="module")
def corpus():
    """32 training and 8 held-out records with invented names."""
    records = SyntheticCorpusGenerator(seed=17).generate_corpus(40)
    return records[:32], records[32:]


@pytest.fixture(scope="module")
def overfit(corpus):
    train_records, _ = corpus
    fields = FieldConfig()
    vocab = build_vocab(train_records, fields)
    examples = encode_records(train_records, vocab, fields)
    result = train(examples, examples, len(vocab), OVERFIT_HYPER)
    return result, Checkpoint(OVERFIT_HYPER, vocab, result.params, fields)


class TestOverfit:
    """A small model memorises a small corpus."""

    def test_training_loss(self, overfit):
        result, _ = overfit

        assert result.best_val_loss < 0.1

    def test_titles_reproduced(self, overfit, corpus):
        """Beam decoding recovers at least 90% of training titles exactly."""
        _, checkpoint = overfit
        train_records, _ = corpus
        exact = sum(
            generate(checkpoint, r.context, 'copy_generate').text == " ".join(tokenize(r.title))
            for r in train_records
        )

        assert exact / len(train_records) >= 0.9


class TestModeSeparation:
    """Each decoding mode draws on its own mechanism."""

    def test_copy_only_uses_source_tokens(self, overfit, corpus):
        _, checkpoint = overfit
        for record in corpus[0] + corpus[1]:
            title = generate(checkpoint, record.context, 'copy_only').text

            assert set(title.split()) <= set(linearize(record.context, checkpoint.field_config))

    def test_generate_only_stays_in_vocabulary(self, overfit, corpus):
        _, checkpoint = overfit
        for record in corpus[1]:
            title = generate(checkpoint, record.context, 'generate_only').text

            assert all(token in checkpoint.vocab for token in title.split())

    def test_copy_generate_beats_single_mechanisms(self, overfit, corpus):
        """On held-out records with unseen names, mixing wins on ROUGE-1."""
        _, checkpoint = overfit
        held_out = corpus[1]
        systems = {
            mode: [generate(checkpoint, r.context, mode).text for r in held_out]
            for mode in ('copy_generate', 'copy_only', 'generate_only')
        }
        report = evaluate(systems, [r.title for r in held_out])

        best = report.means['copy_generate']['rouge1']
        assert best > report.means['copy_only']['rouge1']
        assert best > report.means['generate_only']['rouge1']


class TestDecoderInvariants:
    """Properties of titles from many randomly initialised models."""

    def test_random_decodes(self):
        """500 decodes: no repeated ids and lengths within 4-20."""
        records = SyntheticCorpusGenerator(seed=23).generate_corpus(100)
        fields = FieldConfig()
        vocab = build_vocab(records[:50], fields)
        config = DecodeConfig()
        n_decodes = 0
        for seed in range(5):
            hyper = Hyperparams(embedding_dim=8, hidden_dim=10, attention_dim=10, seed=seed)
            checkpoint = Checkpoint(hyper, vocab, init_params(hyper, len(vocab)), fields)
            for record in records:
                ids = generate(checkpoint, record.context, 'copy_generate', config).hypothesis.title_ids

                assert len(ids) == len(set(ids))
                assert config.min_len <= len(ids) <= config.max_len
                n_decodes += 1

        assert n_decodes == 500


class TestNoRepeatAblation:
    """Dropping the no-repeat mask lets titles repeat tokens."""

    def test_duplicate_rate_increases(self):
        """Row commas dominate the copy distribution of an untrained model."""
        records = SyntheticCorpusGenerator(seed=29).generate_corpus(30)
        fields = FieldConfig(table_rows=True)
        hyper = Hyperparams(embedding_dim=8, hidden_dim=10, attention_dim=10, seed=4)
        vocab = build_vocab(records[:20], fields)
        checkpoint = Checkpoint(hyper, vocab, init_params(hyper, len(vocab)), fields)
        with_mask = DecodeConfig(max_len=8, block_special=True)
        without_mask = dataclasses.replace(with_mask, no_repeat=False)

        masked = [generate(checkpoint, r.context, config=with_mask).text for r in records]
        unmasked = [generate(checkpoint, r.context, config=without_mask).text for r in records]

        assert duplicate_rate(masked) == 0.0
        assert duplicate_rate(unmasked) > duplicate_rate(masked)
        assert np.mean([len(t.split()) for t in unmasked]) >= 4
