"""
Optimisation: Adagrad with global-norm gradient clipping, mini-batch training
and early stopping on validation loss.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from .corpus import EncodedExample
from .errors import NonFiniteGradient
from .seqmodel import Hyperparams, ModelParams, forward_loss, backward, init_params, make_batch

logger = logging.getLogger(__name__)


@dataclass
class AdagradState:
    """Per-coordinate squared-gradient accumulators."""
    accumulators: Dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def create(cls, params: ModelParams, initial_value: float) -> 'AdagradState':
        return cls({name: np.full_like(value, initial_value) for name, value in params.tensors.items()})


def clip_by_global_norm(grads: ModelParams, max_norm: float) -> float:
    """
    Scale ``grads`` in place so their joint L2 norm is at most ``max_norm``.

    Returns:
        The norm before clipping
    """
    norm = grads.global_norm()
    if norm > max_norm:
        scale = max_norm / norm
        for name in grads.names():
            grads[name] *= grads[name].dtype.type(scale)
    return norm


def adagrad_update(params: ModelParams, grads: ModelParams, state: AdagradState,
                   learning_rate: float, gradient_clip: float) -> ModelParams:
    """
    One Adagrad step, applied in place.

    The full gradient is clipped to ``gradient_clip`` by global norm, then each
    coordinate moves by ``-lr * g / sqrt(accumulator)`` after adding ``g**2``
    to its accumulator.

    Raises:
        NonFiniteGradient: If any gradient entry is NaN or infinite
    """
    if not grads.all_finite():
        raise NonFiniteGradient("non-finite gradient; update aborted", step=state.step)

    clip_by_global_norm(grads, gradient_clip)
    for name in params.names():
        g = grads[name]
        acc = state.accumulators[name]
        acc += g * g
        params[name] -= params[name].dtype.type(learning_rate) * g / np.sqrt(acc)
    state.step += 1

    if not params.all_finite():
        raise NonFiniteGradient("update produced non-finite parameters", step=state.step)
    return params


@dataclass
class TrainingLogEntry:
    step: int
    train_loss: float
    val_loss: float
    wall_ms: int


@dataclass
class TrainingResult:
    """
    Outcome of a training run.

    Attributes:
        params: Parameters with the lowest validation loss seen
        best_step: Step at which ``params`` were captured
        best_val_loss: Their validation loss
        history: One entry per validation evaluation
        stopped_early: True when patience ran out before ``max_steps``
    """
    params: ModelParams
    best_step: int
    best_val_loss: float
    history: List[TrainingLogEntry] = field(default_factory=list)
    stopped_early: bool = False

    @property
    def final_train_loss(self) -> float:
        return self.history[-1].train_loss if self.history else float('nan')


def batches(examples: Sequence[EncodedExample], batch_size: int, rng: np.random.Generator):
    """Endless stream of shuffled mini-batches (lists of examples)."""
    n = len(examples)
    while True:
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            yield [examples[i] for i in order[start:start + batch_size]]


def evaluate_loss(examples: Sequence[EncodedExample], params: ModelParams, hyper: Hyperparams) -> float:
    """Example-weighted mean loss over a dataset, in fixed order."""
    if not examples:
        return float('nan')
    total = 0.0
    for start in range(0, len(examples), hyper.batch_size):
        chunk = examples[start:start + hyper.batch_size]
        loss, _ = forward_loss(make_batch(chunk, params.vocab_size, hyper.dtype), params, hyper)
        total += loss * len(chunk)
    return total / len(examples)


class TrainingLog:
    """Append-only tab-separated log: step, train_loss, val_loss, wall_ms."""

    COLUMNS = ['step', 'train_loss', 'val_loss', 'wall_ms']

    def __init__(self, filepath: Optional[str] = None):
        self.filepath = filepath
        if filepath:
            Path(filepath).parent.mkdir(parents=True, exist_ok=True)
            if not Path(filepath).exists():
                pd.DataFrame(columns=self.COLUMNS).to_csv(filepath, sep="\t", index=False)

    def append(self, entry: TrainingLogEntry):
        if not self.filepath:
            return
        row = pd.DataFrame([[entry.step, entry.train_loss, entry.val_loss, entry.wall_ms]], columns=self.COLUMNS)
        row.to_csv(self.filepath, sep="\t", index=False, header=False, mode='a', float_format="%.6f")

    @staticmethod
    def read(filepath: str) -> pd.DataFrame:
        return pd.read_csv(filepath, sep="\t")


def train(
    train_examples: Sequence[EncodedExample],
    val_examples: Sequence[EncodedExample],
    vocab_size: int,
    hyper: Hyperparams,
    log_path: Optional[str] = None,
    initial_params: Optional[ModelParams] = None,
    progress: bool = False
) -> TrainingResult:
    """
    Train with Adagrad and keep the checkpoint with the lowest validation loss.

    Every ``hyper.eval_interval`` steps the validation loss is computed; after
    ``hyper.patience`` evaluations without improvement training stops.

    Args:
        train_examples: Encoded training split
        val_examples: Encoded validation split
        vocab_size: Size of the fixed vocabulary
        hyper: Hyperparameters (dimensions, optimiser, schedule, seed)
        log_path: Optional TSV training log
        initial_params: Start from these instead of a fresh initialisation
        progress: Show a progress bar

    Returns:
        TrainingResult with the best parameters

    Raises:
        NonFiniteGradient: If a gradient becomes NaN or infinite
    """
    if not train_examples:
        raise ValueError("train needs at least one training example")
    val_examples = list(val_examples) or list(train_examples)

    params = initial_params.copy() if initial_params is not None else init_params(hyper, vocab_size)
    state = AdagradState.create(params, hyper.accumulator_init)
    rng = np.random.default_rng(hyper.seed)
    log = TrainingLog(log_path)

    logger.info("Training: %d train / %d validation examples, %d parameters",
                len(train_examples), len(val_examples), params.num_parameters())

    best = params.copy()
    best_step, best_val = 0, float('inf')
    history: List[TrainingLogEntry] = []
    bad_evals = 0
    stopped_early = False
    window: List[float] = []
    started = time.perf_counter()

    stream = batches(train_examples, hyper.batch_size, rng)
    bar = tqdm(total=hyper.max_steps, desc='Train', disable=not progress)
    for step in range(1, hyper.max_steps + 1):
        batch = make_batch(next(stream), vocab_size, hyper.dtype)
        loss, cache = forward_loss(batch, params, hyper)
        grads = backward(cache)
        try:
            adagrad_update(params, grads, state, hyper.learning_rate, hyper.gradient_clip)
        except NonFiniteGradient as exc:
            exc.step = step
            logger.error("Non-finite gradient at step %d (batch loss %.4f)", step, loss)
            raise
        window.append(loss)
        bar.update()

        if step % hyper.eval_interval and step != hyper.max_steps:
            continue

        val_loss = evaluate_loss(val_examples, params, hyper)
        entry = TrainingLogEntry(step, float(np.mean(window)), val_loss,
                                 int((time.perf_counter() - started) * 1000))
        window = []
        history.append(entry)
        log.append(entry)
        bar.set_postfix(train=f"{entry.train_loss:.4f}", val=f"{val_loss:.4f}")
        logger.info("step %d  train %.4f  val %.4f", step, entry.train_loss, val_loss)

        if val_loss < best_val:
            best, best_step, best_val = params.copy(), step, val_loss
            bad_evals = 0
        else:
            bad_evals += 1
            if bad_evals >= max(hyper.patience, 1):
                stopped_early = step != hyper.max_steps
                break
    bar.close()

    logger.info("✓ Best validation loss %.4f at step %d", best_val, best_step)
    return TrainingResult(best, best_step, best_val, history, stopped_early)
