"""
Beam-search title generation.

Decoding runs over the masked final distribution: tokens already emitted are
zeroed (no-repeat), STOP is withheld until the title has ``min_len`` tokens and
is the only choice once it has ``max_len``. Ranking uses length-normalized
log-probability with ties broken by the token ids.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .checkpoint import Checkpoint
from .corpus import (
    MARKER_IDS, EncodedExample, FieldConfig, Vocabulary, encode_source, linearize, render_title,
)
from .errors import DeadEnd, EmptyInput
from .seqmodel import (
    PAD_ID, START_ID, STOP_ID, UNK_ID, ModelParams, decoder_step, encode, final_distribution,
)
from .table_context import TableContext

logger = logging.getLogger(__name__)

MODES = {
    'copy_generate': None,
    'copy_only': 0.0,
    'generate_only': 1.0,
}


@dataclass
class DecodeConfig:
    """Beam search settings."""
    beam_size: int = 8
    min_len: int = 4
    max_len: int = 20
    no_repeat: bool = True
    renormalize: bool = True
    block_special: bool = False
    length_normalize: bool = True

    def __post_init__(self):
        """Validate decode settings after initialization."""
        if self.beam_size < 1:
            raise ValueError("beam_size must be at least 1")
        if self.min_len < 0:
            raise ValueError("min_len must be non-negative")
        if self.max_len < max(self.min_len, 1):
            raise ValueError("max_len must be at least min_len and at least 1")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DecodeConfig':
        known = cls.__dataclass_fields__
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass(frozen=True)
class Hypothesis:
    """
    A partial or finished title.

    Attributes:
        tokens: Extended-space ids emitted so far (STOP included once finished)
        log_prob: Sum of log masked-probabilities of ``tokens``
        state: Decoder state after the last token
        emitted: Set of ids in ``tokens``
        finished: True once STOP was chosen
        attention: Attention distribution that produced each token
    """
    tokens: Tuple[int, ...] = ()
    log_prob: float = 0.0
    state: Any = field(default=None, compare=False, repr=False)
    emitted: frozenset = frozenset()
    finished: bool = False
    attention: Tuple[np.ndarray, ...] = field(default=(), compare=False, repr=False)

    @property
    def title_ids(self) -> Tuple[int, ...]:
        """Tokens without the trailing STOP."""
        if self.tokens and self.tokens[-1] == STOP_ID:
            return self.tokens[:-1]
        return self.tokens

    def extend(self, token_id: int, log_p: float, state: Any, attn: Optional[np.ndarray]) -> 'Hypothesis':
        return Hypothesis(
            tokens=self.tokens + (token_id,),
            log_prob=self.log_prob + log_p,
            state=state,
            emitted=self.emitted | {token_id} if token_id != STOP_ID else self.emitted,
            finished=token_id == STOP_ID,
            attention=self.attention + ((attn,) if attn is not None else ()),
        )

    def score(self, length_normalize: bool = True) -> float:
        if not length_normalize:
            return self.log_prob
        return self.log_prob / max(len(self.tokens), 1)


class StepModel(Protocol):
    """Anything that yields next-token distributions for a set of hypotheses."""

    def initial_state(self) -> Any:
        ...

    def step(self, states: Sequence[Any], last_ids: Sequence[int]
             ) -> Tuple[np.ndarray, List[Any], Optional[np.ndarray]]:
        """Return (probabilities (N, size), new states, attention (N, S) or None)."""
        ...


class PointerGeneratorStepper:
    """Step model backed by trained pointer-generator parameters for one source."""

    def __init__(self, params: ModelParams, example: EncodedExample, use_pgen_bias: bool = True,
                 p_gen_override: Optional[float] = None):
        self.params = params
        self.example = example
        self.use_pgen_bias = use_pgen_bias
        self.p_gen_override = p_gen_override
        self.enc = encode(params, np.asarray(example.source_ids))
        self.extended_ids = np.asarray(example.source_extended_ids, dtype=np.int64)

    def initial_state(self):
        return self.enc.init_h[0], self.enc.init_c[0]

    def step(self, states, last_ids):
        n = len(states)
        h = np.stack([s[0] for s in states])
        c = np.stack([s[1] for s in states])
        vocab_size = self.params.vocab_size
        # copied OOV tokens are fed back as UNK
        inputs = np.array([t if t < vocab_size else UNK_ID for t in last_ids], dtype=np.int64)
        out = decoder_step(self.params, self.enc.repeat(n), h, c, inputs,
                           self.use_pgen_bias, self.p_gen_override)
        probs = final_distribution(out.P_vocab, out.P_attn, out.p_gen,
                                   np.tile(self.extended_ids, (n, 1)), self.example.n_oov)
        return probs, [(out.h[k], out.c[k]) for k in range(n)], out.P_attn


def mask_step_distribution(P_final: np.ndarray, emitted: Sequence[int], step_index: int,
                           min_len: int = 4, max_len: Optional[int] = None,
                           block_special: bool = False, renormalize: bool = True) -> np.ndarray:
    """
    Apply the decoding constraints to one next-token distribution.

    PAD and START are never emitted. Ids in ``emitted`` are zeroed (STOP is
    exempt), STOP is zeroed while ``step_index < min_len`` and is the only
    survivor once ``step_index >= max_len``. With ``block_special`` UNK and the
    field markers are zeroed too.

    Args:
        P_final: Distribution over the extended vocabulary
        emitted: Ids already produced by the hypothesis
        step_index: Number of tokens produced so far

    Returns:
        The masked distribution, renormalized unless ``renormalize`` is False

    Raises:
        DeadEnd: If no probability mass survives
    """
    P = np.array(P_final, dtype=np.float64)
    P[PAD_ID] = 0.0
    P[START_ID] = 0.0
    if block_special:
        P[UNK_ID] = 0.0
        P[sorted(MARKER_IDS)] = 0.0
    for token_id in emitted:
        if token_id != STOP_ID:
            P[token_id] = 0.0
    if step_index < min_len:
        P[STOP_ID] = 0.0
    if max_len is not None and step_index >= max_len:
        stop = P[STOP_ID]
        P[:] = 0.0
        P[STOP_ID] = stop

    total = P.sum()
    if not total > 0:
        raise DeadEnd(f"no probability mass left at step {step_index}")
    return P / total if renormalize else P


def _rank_key(hyp: Hypothesis, length_normalize: bool):
    return -hyp.score(length_normalize), hyp.tokens


def beam_search_with(model: StepModel, config: Optional[DecodeConfig] = None) -> Hypothesis:
    """
    Beam search over any step model.

    Each live hypothesis proposes its ``beam_size`` most likely continuations;
    the best ``beam_size`` non-STOP candidates stay live while STOP candidates
    join the completed pool. Search ends when the pool holds ``beam_size``
    titles or no hypothesis is live. Hypotheses whose masked distribution is
    empty go to a fallback pool, used only if nothing completed.
    """
    config = config or DecodeConfig()
    live = [Hypothesis(state=model.initial_state())]
    completed: List[Hypothesis] = []
    dead: List[Hypothesis] = []

    for step in range(config.max_len + 1):
        if not live or len(completed) >= config.beam_size:
            break
        probs, states, attn = model.step([h.state for h in live], [h.tokens[-1] if h.tokens else START_ID
                                                                   for h in live])
        candidates: List[Hypothesis] = []
        for k, hyp in enumerate(live):
            try:
                P = mask_step_distribution(
                    probs[k], hyp.emitted if config.no_repeat else (), step,
                    min_len=config.min_len, max_len=config.max_len,
                    block_special=config.block_special, renormalize=config.renormalize,
                )
            except DeadEnd:
                dead.append(hyp)
                continue
            # stable sort: equal probabilities keep the lower id first
            for token_id in np.argsort(-P, kind='stable')[:config.beam_size]:
                if P[token_id] <= 0:
                    break
                candidates.append(hyp.extend(int(token_id), float(np.log(P[token_id])), states[k],
                                             None if attn is None else attn[k]))

        candidates.sort(key=lambda h: (-h.log_prob, h.tokens))
        live = []
        for cand in candidates:
            if cand.finished:
                completed.append(cand)
            else:
                live.append(cand)
            if len(live) == config.beam_size or len(completed) >= config.beam_size:
                break

    dead.extend(live)
    pool = completed or dead
    best = min(pool, key=lambda h: _rank_key(h, config.length_normalize))
    if not completed:
        logger.debug("No hypothesis finished; falling back to %d forced hypotheses", len(dead))
    return best


def beam_search(checkpoint: Checkpoint, example: EncodedExample, config: Optional[DecodeConfig] = None,
                p_gen_override: Optional[float] = None) -> Hypothesis:
    """
    Decode one encoded source with a trained model.

    Raises:
        EmptySource: If the example has no source tokens
    """
    stepper = PointerGeneratorStepper(checkpoint.params, example, checkpoint.hyper.use_pgen_bias, p_gen_override)
    return beam_search_with(stepper, config)


@dataclass
class GeneratedTitle:
    """A decoded title and how it was obtained."""
    text: str
    score: float
    mode: str
    hypothesis: Hypothesis = field(repr=False)
    example: EncodedExample = field(repr=False)

    @property
    def attention(self) -> np.ndarray:
        """(title tokens, source positions) attention matrix."""
        if not self.hypothesis.attention:
            return np.zeros((0, len(self.example.source_ids)))
        return np.stack(self.hypothesis.attention)


def dedupe_surface(ids: Sequence[int], vocab: Vocabulary, example_oov_tokens: Sequence[str]) -> List[int]:
    """Drop ids whose plain surface form already appeared, keeping the first."""
    seen, kept = set(), []
    for token_id in ids:
        surface = render_title([token_id], vocab, example_oov_tokens)
        if surface and surface in seen:
            continue
        seen.add(surface)
        kept.append(token_id)
    return kept


def mode_override(mode: str) -> Optional[float]:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {sorted(MODES)}, got {mode!r}")
    return MODES[mode]


def generate(checkpoint: Checkpoint, context: TableContext, mode: str = 'copy_generate',
             config: Optional[DecodeConfig] = None, debug_oov: bool = False,
             field_config: Optional[FieldConfig] = None) -> GeneratedTitle:
    """
    Linearize, encode and decode one table context.

    Args:
        checkpoint: Trained model with its vocabulary and field configuration
        context: Table metadata
        mode: copy_generate, copy_only (p_gen = 0) or generate_only (p_gen = 1)
        config: Beam settings
        debug_oov: Render copied OOV tokens as ``__token__``
        field_config: Overrides the checkpoint's field configuration

    Raises:
        EmptyInput: If linearization yields no tokens
    """
    override = mode_override(mode)
    config = config or DecodeConfig()
    source = linearize(context, field_config or checkpoint.field_config)
    if not source:
        raise EmptyInput("table context is empty after linearization")

    example = encode_source(source, checkpoint.vocab)
    hyp = beam_search(checkpoint, example, config, override)
    ids = hyp.title_ids
    if config.no_repeat:
        # surface forms of a copied OOV and a generated id can coincide
        ids = dedupe_surface(ids, checkpoint.vocab, example.example_oov_tokens)
    text = render_title(ids, checkpoint.vocab, example.example_oov_tokens, debug=debug_oov)
    return GeneratedTitle(text, hyp.score(config.length_normalize), mode, hyp, example)


def generate_title(checkpoint: Checkpoint, context: TableContext, mode: str = 'copy_generate',
                   config: Optional[DecodeConfig] = None, debug_oov: bool = False) -> str:
    """Title text for one table context."""
    return generate(checkpoint, context, mode, config, debug_oov).text
