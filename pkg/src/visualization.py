"""
Visualization utilities for training runs, evaluation reports and attention.

This module provides functions to plot training curves, compare systems by
ROUGE and show where the decoder attended while writing a title.
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from .corpus import Vocabulary
from .decoder import GeneratedTitle
from .evalkit import METRICS, EvalReport

logger = logging.getLogger(__name__)


class TitleVisualizer:
    """
    Provides visualization capabilities for title generation experiments.
    """

    def __init__(self, figsize: tuple = (10, 6), dpi: int = 100):
        """
        Initialize the visualizer.

        Args:
            figsize: Figure size for plots
            dpi: Dots per inch for rendering quality
        """
        self.figsize = figsize
        self.dpi = dpi
        self.colors = plt.cm.tab10(np.linspace(0, 1, 10))

    def plot_training_curve(self, log: pd.DataFrame, title: str = "Training Loss"):
        """
        Plot train and validation loss against step.

        Args:
            log: Training log with columns step, train_loss, val_loss

        Returns:
            fig: The matplotlib figure object
        """
        fig, ax = plt.subplots(figsize=self.figsize, dpi=self.dpi)
        ax.plot(log['step'], log['train_loss'], color=self.colors[0], linewidth=2, label='train')
        ax.plot(log['step'], log['val_loss'], color=self.colors[1], linewidth=2, linestyle='--',
                label='validation')

        best = log['val_loss'].idxmin() if len(log) else None
        if best is not None:
            ax.scatter([log.loc[best, 'step']], [log.loc[best, 'val_loss']], color=self.colors[1],
                       s=80, edgecolors='black', zorder=3, label='best checkpoint')

        ax.set_xlabel('Step')
        ax.set_ylabel('Loss (mean -log P)')
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        return fig

    def plot_rouge_comparison(self, report: EvalReport, title: str = "ROUGE by System"):
        """
        Grouped bars of ROUGE-1/2/L per system.

        Returns:
            fig: The matplotlib figure object
        """
        frame = report.to_frame()
        systems = list(frame['system'])
        x = np.arange(len(systems))
        width = 0.8 / len(METRICS)

        fig, ax = plt.subplots(figsize=self.figsize, dpi=self.dpi)
        for i, metric in enumerate(METRICS):
            bars = ax.bar(x + (i - 1) * width, frame[metric], width, label=metric, color=self.colors[i])
            for bar, value in zip(bars, frame[metric]):
                ax.text(bar.get_x() + bar.get_width() / 2, value + 0.01, f"{value:.2f}",
                        ha='center', va='bottom', fontsize=8)

        ax.set_xticks(x)
        ax.set_xticklabels(systems, rotation=15)
        ax.set_ylim(0, 1.05)
        ax.set_ylabel('F1')
        ax.set_title(title)
        ax.legend()
        ax.grid(True, axis='y', alpha=0.3)
        fig.tight_layout()
        return fig

    def plot_attention(self, attention: np.ndarray, source_tokens: Sequence[str],
                       title_tokens: Sequence[str], title: Optional[str] = None):
        """
        Heatmap of attention over source tokens for each generated token.

        Args:
            attention: (title length, source length) matrix
            source_tokens: Linearized source
            title_tokens: Generated tokens, one per attention row
        """
        attention = np.asarray(attention)
        if attention.shape != (len(title_tokens), len(source_tokens)):
            raise ValueError(f"attention shape {attention.shape} does not match "
                             f"{len(title_tokens)} x {len(source_tokens)} tokens")

        width = max(self.figsize[0], 0.3 * len(source_tokens))
        fig, ax = plt.subplots(figsize=(width, max(3, 0.4 * len(title_tokens) + 2)), dpi=self.dpi)
        image = ax.imshow(attention, aspect='auto', cmap='viridis', vmin=0.0)
        ax.set_xticks(np.arange(len(source_tokens)))
        ax.set_xticklabels(source_tokens, rotation=90, fontsize=8)
        ax.set_yticks(np.arange(len(title_tokens)))
        ax.set_yticklabels(title_tokens)
        ax.set_title(title or "Attention")
        fig.colorbar(image, ax=ax, fraction=0.02)
        fig.tight_layout()
        return fig

    def plot_title_attention(self, result: GeneratedTitle, vocab: Vocabulary):
        """Attention of one decoded title, one row per emitted token (STOP included)."""
        oovs = result.example.example_oov_tokens
        labels = [vocab.token_of(t) if t < len(vocab) else oovs[t - len(vocab)]
                  for t in result.hypothesis.tokens]
        return self.plot_attention(result.attention, result.example.source_tokens, labels,
                                   title=result.text or None)

    def save(self, fig, filepath: str) -> str:
        """Write a figure to disk and close it."""
        Path(filepath).parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(filepath, dpi=self.dpi, bbox_inches='tight')
        plt.close(fig)
        logger.info("✓ Saved figure to %s", filepath)
        return filepath


def save_experiment_figures(output_dir: str, log_path: Optional[str] = None,
                            report: Optional[EvalReport] = None,
                            sample: Optional[GeneratedTitle] = None,
                            vocab: Optional[Vocabulary] = None) -> List[str]:
    """Training curve, ROUGE comparison and attention PNGs for whichever inputs exist."""
    viz = TitleVisualizer()
    written = []
    if log_path and Path(log_path).exists():
        log = pd.read_csv(log_path, sep="\t")
        if len(log):
            written.append(viz.save(viz.plot_training_curve(log), str(Path(output_dir) / "training_curve.png")))
    if report is not None and report.means:
        written.append(viz.save(viz.plot_rouge_comparison(report), str(Path(output_dir) / "rouge_comparison.png")))
    if sample is not None and vocab is not None and sample.hypothesis.attention:
        written.append(viz.save(viz.plot_title_attention(sample, vocab), str(Path(output_dir) / "attention.png")))
    return written
