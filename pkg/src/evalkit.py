"""
Title evaluation: ROUGE-1/2/L F1, selection baselines and system comparison
reports.
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
import pandas as pd

from .corpus import tokenize
from .errors import LengthMismatch
from .table_context import TableContext

logger = logging.getLogger(__name__)

METRICS = ('rouge1', 'rouge2', 'rougeL')
REPORT_COLUMNS = ['system', 'rouge1', 'rouge2', 'rougeL', 'n', 'n_empty']
TITLE_DELIMITERS = ("|", "-")
EDIT_MARKER = ["[", "edit", "]"]


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _f1(matches: int, n_candidate: int, n_reference: int) -> float:
    if matches == 0 or n_candidate == 0 or n_reference == 0:
        return 0.0
    precision = matches / n_candidate
    recall = matches / n_reference
    return 2 * precision * recall / (precision + recall)


def _overlap(candidate: Sequence[str], reference: Sequence[str], n: int) -> Tuple[int, int, int]:
    """(matched n-grams, candidate n-grams, reference n-grams)."""
    if n not in (1, 2):
        raise ValueError("rouge_n supports n = 1 or 2")
    cand, ref = _ngrams(candidate, n), _ngrams(reference, n)
    return sum((cand & ref).values()), sum(cand.values()), sum(ref.values())


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> float:
    """
    ROUGE-N F1 over n-gram multisets.

    Args:
        candidate: Generated title tokens
        reference: Reference title tokens
        n: 1 or 2

    Returns:
        F1 in [0, 1]; 0 when either side has no n-grams
    """
    return _f1(*_overlap(candidate, reference, n))


def rouge_n_recall(candidate: Sequence[str], reference: Sequence[str], n: int) -> float:
    """Share of reference n-grams the candidate matches; 0 for an empty reference."""
    matches, _, n_reference = _overlap(candidate, reference, n)
    return matches / n_reference if n_reference else 0.0


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length (dynamic programming)."""
    if not a or not b:
        return 0
    table = np.zeros((len(a) + 1, len(b) + 1), dtype=np.int64)
    for i, x in enumerate(a, 1):
        for j, y in enumerate(b, 1):
            table[i, j] = table[i - 1, j - 1] + 1 if x == y else max(table[i - 1, j], table[i, j - 1])
    return int(table[-1, -1])


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """ROUGE-L F1 from the longest common subsequence."""
    return _f1(lcs_length(candidate, reference), len(candidate), len(reference))


def score_pair(candidate: str, reference: str) -> Dict[str, float]:
    """All three metrics for one title pair, tokenized like the corpus."""
    cand, ref = tokenize(candidate), tokenize(reference)
    return {
        'rouge1': rouge_n(cand, ref, 1),
        'rouge2': rouge_n(cand, ref, 2),
        'rougeL': rouge_l(cand, ref),
    }


def baseline_page_title(context: TableContext) -> str:
    """
    Page title with the trailing site segment removed.

    Only the part after the final standalone ``|`` or ``-`` token is dropped,
    and only when something precedes it.
    """
    tokens = list(context.page_title)
    cut = max((i for i, tok in enumerate(tokens) if tok in TITLE_DELIMITERS), default=-1)
    if cut > 0:
        tokens = tokens[:cut]
    return " ".join(tokens)


def _drop_edit_marker(tokens: List[str]) -> List[str]:
    out, i = [], 0
    while i < len(tokens):
        if tokens[i:i + len(EDIT_MARKER)] == EDIT_MARKER:
            i += len(EDIT_MARKER)
            continue
        out.append(tokens[i])
        i += 1
    return out


def baseline_section_heading(context: TableContext) -> str:
    """Nearest section heading without ``[ edit ]``; page-title baseline if none."""
    heading = context.nearest_heading
    if heading is None:
        return baseline_page_title(context)
    return " ".join(_drop_edit_marker(list(heading)))


BASELINES = {
    'page_title': baseline_page_title,
    'section_heading': baseline_section_heading,
}


def duplicate_rate(titles: Sequence[str]) -> float:
    """Fraction of titles in which some token occurs more than once."""
    if not titles:
        return 0.0
    repeats = 0
    for title in titles:
        tokens = tokenize(title)
        repeats += len(tokens) != len(set(tokens))
    return repeats / len(titles)


@dataclass
class EvalReport:
    """
    Per-system ROUGE means plus the per-example rows they came from.

    Attributes:
        means: system -> {rouge1, rouge2, rougeL}
        rows: system -> list of per-example metric dicts
        n_empty: system -> number of empty predictions
    """
    means: Dict[str, Dict[str, float]] = field(default_factory=dict)
    rows: Dict[str, List[Dict[str, float]]] = field(default_factory=dict)
    n_empty: Dict[str, int] = field(default_factory=dict)

    @property
    def systems(self) -> List[str]:
        return list(self.means)

    def to_frame(self) -> pd.DataFrame:
        records = [
            [name, m['rouge1'], m['rouge2'], m['rougeL'], len(self.rows[name]), self.n_empty[name]]
            for name, m in self.means.items()
        ]
        return pd.DataFrame(records, columns=REPORT_COLUMNS)

    def render(self) -> str:
        """Comparison table as aligned text."""
        return self.to_frame().to_string(index=False, float_format=lambda v: f"{v:.3f}")

    def save_tsv(self, filepath: str) -> str:
        Path(filepath).parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(filepath, sep="\t", index=False, float_format="%.6f")
        logger.info("✓ Saved evaluation report (%d systems) to %s", len(self.means), filepath)
        return filepath


def evaluate(systems: Mapping[str, Sequence[str]], references: Sequence[str], jobs: int = 1) -> EvalReport:
    """
    Score every system against the references.

    Args:
        systems: system name -> predicted titles, aligned with ``references``
        references: Reference titles
        jobs: Worker threads for per-example scoring

    Returns:
        EvalReport with systems in the given order

    Raises:
        LengthMismatch: If a system's prediction count differs from the references
    """
    report = EvalReport()
    for name, predictions in systems.items():
        if len(predictions) != len(references):
            raise LengthMismatch(
                f"system {name!r} has {len(predictions)} predictions for {len(references)} references"
            )
        with ThreadPoolExecutor(max_workers=max(int(jobs), 1)) as pool:
            rows = list(pool.map(score_pair, predictions, references))
        report.rows[name] = rows
        report.n_empty[name] = sum(1 for p in predictions if not tokenize(p))
        report.means[name] = {
            metric: float(np.mean([row[metric] for row in rows])) if rows else 0.0
            for metric in METRICS
        }
        logger.info("%s: R1 %.3f R2 %.3f RL %.3f", name, *report.means[name].values())
    return report
