"""
Tests for plotting helpers (rendered off-screen).
"""

import numpy as np
import pandas as pd
import pytest
from src.decoder import DecodeConfig, generate
from src.evalkit import evaluate
from src.visualization import TitleVisualizer, save_experiment_figures


@pytest.fixture
def log_frame():
    return pd.DataFrame({'step': [10, 20, 30], 'train_loss': [3.0, 2.0, 1.5],
                         'val_loss': [3.2, 2.4, 2.6], 'wall_ms': [5, 9, 14]})


@pytest.fixture
def report():
    refs = ["list of mayors", "the cat"]
    return evaluate({'page_title': ["mayors", ""], 'copy_generate': refs}, refs)


class TestTitleVisualizer:
    """Test TitleVisualizer class."""

    def test_training_curve(self, log_frame, tmp_path):
        viz = TitleVisualizer()
        fig = viz.plot_training_curve(log_frame)

        assert len(fig.axes[0].lines) == 2
        path = viz.save(fig, str(tmp_path / "curve.png"))
        assert (tmp_path / "curve.png").stat().st_size > 0
        assert path.endswith("curve.png")

    def test_rouge_comparison(self, report):
        """One bar per system and metric."""
        fig = TitleVisualizer().plot_rouge_comparison(report)

        assert len(fig.axes[0].patches) == 6
        assert [t.get_text() for t in fig.axes[0].get_xticklabels()] == ['page_title', 'copy_generate']

    def test_attention_heatmap(self):
        attention = np.full((2, 3), 1 / 3)
        fig = TitleVisualizer().plot_attention(attention, ["#page_title", "a", "b"], ["a", "b"])

        assert fig.axes[0].get_images()

    def test_attention_shape_checked(self):
        with pytest.raises(ValueError):
            TitleVisualizer().plot_attention(np.zeros((2, 2)), ["a", "b", "c"], ["a", "b"])

    def test_title_attention_labels(self, untrained_checkpoint, synthetic_records):
        """Rows are the emitted tokens, STOP last; columns are the source tokens."""
        result = generate(untrained_checkpoint, synthetic_records[0].context, config=DecodeConfig(beam_size=2))
        fig = TitleVisualizer().plot_title_attention(result, untrained_checkpoint.vocab)

        rows = [t.get_text() for t in fig.axes[0].get_yticklabels()]
        columns = [t.get_text() for t in fig.axes[0].get_xticklabels()]
        assert len(rows) == len(result.hypothesis.tokens)
        assert rows[-1] == "</s>"
        assert columns == result.example.source_tokens


class TestExperimentFigures:
    """Test save_experiment_figures function."""

    def test_both_figures(self, log_frame, report, tmp_path):
        log_path = tmp_path / "training_log.tsv"
        log_frame.to_csv(log_path, sep="\t", index=False)

        written = save_experiment_figures(str(tmp_path / "figures"), str(log_path), report)

        assert sorted(p.split("/")[-1] for p in written) == ["rouge_comparison.png", "training_curve.png"]

    def test_attention_figure(self, untrained_checkpoint, synthetic_records, tmp_path):
        sample = generate(untrained_checkpoint, synthetic_records[0].context, config=DecodeConfig(beam_size=2))

        written = save_experiment_figures(str(tmp_path), sample=sample, vocab=untrained_checkpoint.vocab)

        assert [p.split("/")[-1] for p in written] == ["attention.png"]
        assert (tmp_path / "attention.png").stat().st_size > 0

    def test_missing_inputs_skipped(self, tmp_path):
        assert save_experiment_figures(str(tmp_path), str(tmp_path / "absent.tsv"), None) == []
