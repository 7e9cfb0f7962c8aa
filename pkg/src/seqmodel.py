"""
Pointer-generator network in numpy.

A bi-directional LSTM encodes the linearized table context; an LSTM decoder
with additive attention produces, at each step, a vocabulary distribution
``P_vocab``, an attention distribution ``P_attn`` over source positions and a
switch ``p_gen``. The final distribution mixes the two:

    P_final(w) = p_gen * P_vocab(w) + (1 - p_gen) * sum_{i: src_i = w} P_attn(i)

over the fixed vocabulary extended with the example's OOV source tokens.
Gradients are derived by hand (no autodiff) and cover every parameter,
including the copy path and both encoder directions.
"""

from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, softmax

from .errors import AllMasked, EmptySource, ShapeError

PAD_ID, UNK_ID, START_ID, STOP_ID = range(4)


@dataclass
class Hyperparams:
    """
    Model and optimisation settings.

    Defaults: 128-dim embeddings, 256-dim LSTM states, Adagrad at 0.15 with
    gradient clipping 2.0, mini-batches of 64, 150-token inputs, uniform init
    within +-0.02.
    """
    embedding_dim: int = 128
    hidden_dim: int = 256
    attention_dim: int = 256
    learning_rate: float = 0.15
    gradient_clip: float = 2.0
    batch_size: int = 64
    max_source_len: int = 150
    init_magnitude: float = 0.02
    accumulator_init: float = 0.1
    patience: int = 5
    eval_interval: int = 100
    max_steps: int = 20000
    seed: int = 0
    use_pgen_bias: bool = True
    prob_floor: float = 1e-12
    dtype: str = "float32"

    def __post_init__(self):
        """Validate hyperparameters after initialization."""
        for name in ('embedding_dim', 'hidden_dim', 'attention_dim', 'batch_size',
                     'max_source_len', 'eval_interval', 'max_steps'):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.gradient_clip <= 0:
            raise ValueError("gradient_clip must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.accumulator_init <= 0:
            raise ValueError("accumulator_init must be positive")
        if self.patience < 0:
            raise ValueError("patience must be non-negative")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Hyperparams':
        known = cls.__dataclass_fields__
        return cls(**{k: v for k, v in data.items() if k in known})


def param_shapes(hyper: Hyperparams, vocab_size: int) -> 'OrderedDict[str, Tuple[int, ...]]':
    """Name -> shape of every learnable tensor, in serialization order."""
    E, H, A, V = hyper.embedding_dim, hyper.hidden_dim, hyper.attention_dim, vocab_size
    return OrderedDict([
        ('embedding', (V, E)),
        ('enc_fw_W', (E + H, 4 * H)), ('enc_fw_b', (4 * H,)),
        ('enc_bw_W', (E + H, 4 * H)), ('enc_bw_b', (4 * H,)),
        ('reduce_h_W', (2 * H, H)), ('reduce_h_b', (H,)),
        ('reduce_c_W', (2 * H, H)), ('reduce_c_b', (H,)),
        ('attn_W_enc', (2 * H, A)), ('attn_W_dec', (H, A)),
        ('attn_v', (A,)), ('attn_b', (A,)),
        ('dec_W', (E + H, 4 * H)), ('dec_b', (4 * H,)),
        ('out_W', (3 * H, V)), ('out_b', (V,)),
        ('pgen_w_c', (2 * H,)), ('pgen_w_h', (H,)), ('pgen_w_x', (E,)),
        ('pgen_b', (1,)),
    ])


def _is_bias(name: str) -> bool:
    return name.endswith('_b')


@dataclass
class ModelParams:
    """Named parameter tensors of one model."""
    tensors: 'OrderedDict[str, np.ndarray]'

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __setitem__(self, name: str, value: np.ndarray):
        self.tensors[name] = value

    def names(self) -> List[str]:
        return list(self.tensors)

    @property
    def vocab_size(self) -> int:
        return self.tensors['embedding'].shape[0]

    def copy(self) -> 'ModelParams':
        return ModelParams(OrderedDict((k, v.copy()) for k, v in self.tensors.items()))

    def zeros_like(self) -> 'ModelParams':
        return ModelParams(OrderedDict((k, np.zeros_like(v)) for k, v in self.tensors.items()))

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.tensors.values())

    def global_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(v.astype(np.float64) ** 2) for v in self.tensors.values())))

    def num_parameters(self) -> int:
        return int(sum(v.size for v in self.tensors.values()))

    def __repr__(self) -> str:
        return f"ModelParams(vocab={self.vocab_size}, parameters={self.num_parameters()})"


def init_params(hyper: Hyperparams, vocab_size: int, seed: Optional[int] = None) -> ModelParams:
    """
    Draw every weight uniformly in [-init_magnitude, init_magnitude]; zero biases.

    The same seed always yields the same parameters.
    """
    rng = np.random.default_rng(hyper.seed if seed is None else seed)
    m = hyper.init_magnitude
    tensors = OrderedDict()
    for name, shape in param_shapes(hyper, vocab_size).items():
        if _is_bias(name):
            tensors[name] = np.zeros(shape, dtype=hyper.dtype)
        else:
            tensors[name] = rng.uniform(-m, m, size=shape).astype(hyper.dtype)
    return ModelParams(tensors)


# ---------------------------------------------------------------------------
# LSTM cell
# ---------------------------------------------------------------------------

def _lstm_step(W, b, x, h, c, mask):
    """One LSTM step; where ``mask`` is 0 the previous state is carried."""
    H = h.shape[1]
    xh = np.concatenate([x, h], axis=1)
    z = xh @ W + b
    i = expit(z[:, :H])
    f = expit(z[:, H:2 * H])
    g = np.tanh(z[:, 2 * H:3 * H])
    o = expit(z[:, 3 * H:])
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    h_new = o * tc
    m = mask[:, None]
    h_out = m * h_new + (1 - m) * h
    c_out = m * c_new + (1 - m) * c
    return h_out, c_out, (xh, i, f, g, o, c, tc, m)


def _lstm_step_backward(W, cache, dh_out, dc_out, dW, db):
    xh, i, f, g, o, c_prev, tc, m = cache
    dh = dh_out * m
    dc = dc_out * m + dh * o * (1 - tc ** 2)
    do = dh * tc
    di = dc * g
    dg = dc * i
    df = dc * c_prev
    dc_prev = dc * f + dc_out * (1 - m)
    dz = np.concatenate([di * i * (1 - i), df * f * (1 - f), dg * (1 - g ** 2), do * o * (1 - o)], axis=1)
    dW += xh.T @ dz
    db += dz.sum(axis=0)
    dxh = dz @ W.T
    in_dim = xh.shape[1] - dh.shape[1]
    return dxh[:, :in_dim], dxh[:, in_dim:] + dh_out * (1 - m), dc_prev


# ---------------------------------------------------------------------------
# Encoder
# ---------------------------------------------------------------------------

@dataclass
class EncoderOutput:
    """
    Encoder results for a batch.

    Attributes:
        states: (B, S, 2H) concatenated forward/backward states per position
        projected: (B, S, A) encoder states projected for attention
        mask: (B, S) 1.0 on real positions, 0.0 on padding
        init_h, init_c: (B, H) initial decoder state
    """
    states: np.ndarray
    projected: np.ndarray
    mask: np.ndarray
    init_h: np.ndarray
    init_c: np.ndarray
    cache: Optional[Dict[str, Any]] = field(default=None, repr=False)

    def repeat(self, n: int) -> 'EncoderOutput':
        """Tile a single-example encoding ``n`` times along the batch axis."""
        return EncoderOutput(
            states=np.repeat(self.states, n, axis=0),
            projected=np.repeat(self.projected, n, axis=0),
            mask=np.repeat(self.mask, n, axis=0),
            init_h=np.repeat(self.init_h, n, axis=0),
            init_c=np.repeat(self.init_c, n, axis=0),
        )


def encode(params: ModelParams, source_ids: np.ndarray, source_mask: Optional[np.ndarray] = None) -> EncoderOutput:
    """
    Run the bi-directional encoder.

    Args:
        params: Model parameters
        source_ids: (S,) or (B, S) in-vocabulary ids (OOV as UNK)
        source_mask: (B, S) 1 for real tokens; defaults to all ones

    Raises:
        EmptySource: If any example has no real tokens
    """
    source_ids = np.atleast_2d(np.asarray(source_ids, dtype=np.int64))
    B, S = source_ids.shape
    dtype = params['embedding'].dtype
    mask = np.ones((B, S), dtype=dtype) if source_mask is None else np.asarray(source_mask, dtype=dtype)
    if S == 0 or np.any(mask.sum(axis=1) == 0):
        raise EmptySource("encode needs at least one source token per example")

    H = params['enc_fw_b'].shape[0] // 4
    x = params['embedding'][source_ids]

    hf = np.zeros((B, S, H), dtype=dtype)
    hb = np.zeros((B, S, H), dtype=dtype)
    fw_cache, bw_cache = [None] * S, [None] * S

    h = np.zeros((B, H), dtype=dtype)
    c = np.zeros((B, H), dtype=dtype)
    for t in range(S):
        h, c, fw_cache[t] = _lstm_step(params['enc_fw_W'], params['enc_fw_b'], x[:, t], h, c, mask[:, t])
        hf[:, t] = h
    fw_h, fw_c = h, c

    h = np.zeros((B, H), dtype=dtype)
    c = np.zeros((B, H), dtype=dtype)
    for t in reversed(range(S)):
        h, c, bw_cache[t] = _lstm_step(params['enc_bw_W'], params['enc_bw_b'], x[:, t], h, c, mask[:, t])
        hb[:, t] = h
    bw_h, bw_c = h, c

    states = np.concatenate([hf, hb], axis=2)
    final_h = np.concatenate([fw_h, bw_h], axis=1)
    final_c = np.concatenate([fw_c, bw_c], axis=1)
    init_h = final_h @ params['reduce_h_W'] + params['reduce_h_b']
    init_c = final_c @ params['reduce_c_W'] + params['reduce_c_b']
    projected = states @ params['attn_W_enc']

    cache = {
        'source_ids': source_ids, 'fw': fw_cache, 'bw': bw_cache,
        'final_h': final_h, 'final_c': final_c,
    }
    return EncoderOutput(states, projected, mask, init_h, init_c, cache)


# ---------------------------------------------------------------------------
# Attention, switch and mixture
# ---------------------------------------------------------------------------

def _masked_softmax(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if np.any(mask.sum(axis=-1) == 0):
        raise AllMasked("attention over zero unmasked positions")
    masked = np.where(mask > 0, scores, -np.inf)
    return softmax(masked, axis=-1)


def attention(decoder_state: np.ndarray, encoder_states: np.ndarray, source_mask: np.ndarray,
              params: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Additive attention for one decoder state.

    score_i = v . tanh(W_enc e_i + W_dec s + b), softmax over unmasked positions.

    Args:
        decoder_state: (H,) decoder state s
        encoder_states: (S, 2H) encoder states e_i
        source_mask: (S,) 1 on real positions

    Returns:
        (P_attn of shape (S,), context vector c_t of shape (2H,))
    """
    if encoder_states.ndim != 2 or encoder_states.shape[0] != np.shape(source_mask)[0]:
        raise ShapeError("encoder_states and source_mask disagree")
    u = encoder_states @ params['attn_W_enc'] + decoder_state @ params['attn_W_dec'] + params['attn_b']
    scores = np.tanh(u) @ params['attn_v']
    p_attn = _masked_softmax(scores, np.asarray(source_mask))
    return p_attn, p_attn @ encoder_states


def p_gen(c_t: np.ndarray, h_t: np.ndarray, x_t: np.ndarray, params: ModelParams,
          use_bias: bool = True) -> np.ndarray:
    """Generation switch: sigmoid(w_c . c_t + w_h . h_t + w_x . x_t + b_gen)."""
    z = c_t @ params['pgen_w_c'] + h_t @ params['pgen_w_h'] + x_t @ params['pgen_w_x']
    if use_bias:
        z = z + params['pgen_b'][0]
    return expit(z)


def final_distribution(P_vocab: np.ndarray, P_attn: np.ndarray, p_gen_value, source_extended_ids,
                       n_example_oov: int) -> np.ndarray:
    """
    Mix generation and copy distributions over the extended vocabulary.

    Works on single vectors ``(V,)``/``(S,)`` or batches ``(B, V)``/``(B, S)``.
    Extended (OOV) ids receive no vocabulary mass.

    Raises:
        ShapeError: If attention and extended ids disagree, or an id is out of range
    """
    P_vocab = np.asarray(P_vocab)
    P_attn = np.asarray(P_attn)
    ext = np.asarray(source_extended_ids, dtype=np.int64)
    single = P_vocab.ndim == 1
    if single:
        P_vocab, P_attn, ext = P_vocab[None], P_attn[None], ext[None]
    if P_attn.shape != ext.shape or P_vocab.shape[0] != P_attn.shape[0]:
        raise ShapeError(f"P_attn {P_attn.shape} vs extended ids {ext.shape} vs P_vocab {P_vocab.shape}")
    B, V = P_vocab.shape
    size = V + int(n_example_oov)
    if ext.size and (ext.min() < 0 or ext.max() >= size):
        raise ShapeError(f"extended id outside [0, {size})")

    gen = np.broadcast_to(np.asarray(p_gen_value, dtype=P_vocab.dtype).reshape(-1, 1), (B, 1))
    out = np.zeros((B, size), dtype=P_vocab.dtype)
    out[:, :V] = gen * P_vocab
    rows = np.repeat(np.arange(B), ext.shape[1])
    np.add.at(out, (rows, ext.ravel()), ((1 - gen) * P_attn).ravel())
    return out[0] if single else out


# ---------------------------------------------------------------------------
# Decoder step
# ---------------------------------------------------------------------------

@dataclass
class StepOutputs:
    """Everything one decoder step produces (batched)."""
    P_vocab: np.ndarray
    P_attn: np.ndarray
    context: np.ndarray
    p_gen: np.ndarray
    h: np.ndarray
    c: np.ndarray
    x: np.ndarray
    cache: Optional[Tuple] = field(default=None, repr=False)


def decoder_step(params: ModelParams, enc: EncoderOutput, h: np.ndarray, c: np.ndarray,
                 input_ids: np.ndarray, use_pgen_bias: bool = True,
                 p_gen_override: Optional[float] = None) -> StepOutputs:
    """
    Advance the decoder one token for a batch.

    ``input_ids`` must be in-vocabulary (copied OOV tokens are fed as UNK).
    ``p_gen_override`` pins the switch (0 = copy only, 1 = generate only).
    """
    x = params['embedding'][input_ids]
    ones = np.ones(x.shape[0], dtype=x.dtype)
    h_new, c_new, lstm_cache = _lstm_step(params['dec_W'], params['dec_b'], x, h, c, ones)

    u = enc.projected + (h_new @ params['attn_W_dec'])[:, None, :] + params['attn_b']
    tu = np.tanh(u)
    p_attn = _masked_softmax(tu @ params['attn_v'], enc.mask)
    context = np.einsum('bs,bsd->bd', p_attn, enc.states)

    out_in = np.concatenate([h_new, context], axis=1)
    p_vocab = softmax(out_in @ params['out_W'] + params['out_b'], axis=1)

    switch = p_gen(context, h_new, x, params, use_pgen_bias)
    if p_gen_override is not None:
        switch = np.full_like(switch, p_gen_override)

    cache = (input_ids, x, lstm_cache, tu, out_in)
    return StepOutputs(p_vocab, p_attn, context, switch, h_new, c_new, x, cache)


# ---------------------------------------------------------------------------
# Loss and gradients
# ---------------------------------------------------------------------------

@dataclass
class Batch:
    """
    Padded arrays for a mini-batch.

    Attributes:
        source_ids: (B, S) in-vocabulary ids
        source_extended_ids: (B, S) ids over the extended space
        source_mask: (B, S)
        decoder_inputs: (B, T) START then gold tokens (OOV as UNK)
        target_ids: (B, T) gold ids over the extended space
        target_mask: (B, T)
        max_oov: Largest per-example OOV count in the batch
    """
    source_ids: np.ndarray
    source_extended_ids: np.ndarray
    source_mask: np.ndarray
    decoder_inputs: np.ndarray
    target_ids: np.ndarray
    target_mask: np.ndarray
    max_oov: int

    @property
    def size(self) -> int:
        return self.source_ids.shape[0]


def make_batch(examples: Sequence, vocab_size: int, dtype: str = "float32") -> Batch:
    """Pad encoded examples to the longest source and target in the batch."""
    B = len(examples)
    S = max(len(ex.source_ids) for ex in examples)
    T = max(len(ex.target_ids) for ex in examples)
    source_ids = np.full((B, S), PAD_ID, dtype=np.int64)
    source_ext = np.full((B, S), PAD_ID, dtype=np.int64)
    source_mask = np.zeros((B, S), dtype=dtype)
    dec_in = np.full((B, T), PAD_ID, dtype=np.int64)
    target = np.full((B, T), PAD_ID, dtype=np.int64)
    target_mask = np.zeros((B, T), dtype=dtype)

    for b, ex in enumerate(examples):
        n, m = len(ex.source_ids), len(ex.target_ids)
        source_ids[b, :n] = ex.source_ids
        source_ext[b, :n] = ex.source_extended_ids
        source_mask[b, :n] = 1
        target[b, :m] = ex.target_ids
        target_mask[b, :m] = 1
        fed = [START_ID] + [t if t < vocab_size else UNK_ID for t in ex.target_ids[:-1]]
        dec_in[b, :m] = fed

    return Batch(source_ids, source_ext, source_mask, dec_in, target, target_mask,
                 max(ex.n_oov for ex in examples))


def forward_loss(batch: Batch, params: ModelParams, hyper: Hyperparams) -> Tuple[float, Dict[str, Any]]:
    """
    Teacher-forced loss: mean over examples of mean per-step -log P_final(gold).

    Returns:
        (loss, cache) where cache feeds ``backward``
    """
    V = params.vocab_size
    enc = encode(params, batch.source_ids, batch.source_mask)
    B, T = batch.target_ids.shape
    lengths = batch.target_mask.sum(axis=1)
    weights = batch.target_mask / (B * lengths[:, None])

    h, c = enc.init_h, enc.init_c
    steps, gold_probs = [], []
    total = 0.0
    for t in range(T):
        out = decoder_step(params, enc, h, c, batch.decoder_inputs[:, t], hyper.use_pgen_bias)
        gold = batch.target_ids[:, t]
        in_vocab = gold < V
        vocab_part = np.where(in_vocab, out.P_vocab[np.arange(B), np.minimum(gold, V - 1)], 0.0)
        hits = (batch.source_extended_ids == gold[:, None]).astype(out.P_attn.dtype)
        copy_part = np.sum(out.P_attn * hits, axis=1)
        prob = out.p_gen * vocab_part + (1 - out.p_gen) * copy_part
        total += float(np.sum(weights[:, t].astype(np.float64) * -np.log(np.maximum(prob, hyper.prob_floor))))
        steps.append((out, vocab_part, copy_part, hits, in_vocab))
        gold_probs.append(prob)
        h, c = out.h, out.c

    cache = {'batch': batch, 'enc': enc, 'steps': steps, 'probs': gold_probs,
             'weights': weights, 'hyper': hyper, 'params': params}
    return total, cache


def backward(cache: Dict[str, Any]) -> ModelParams:
    """Exact gradients of ``forward_loss`` with respect to every parameter."""
    params: ModelParams = cache['params']
    hyper: Hyperparams = cache['hyper']
    batch: Batch = cache['batch']
    enc: EncoderOutput = cache['enc']
    weights = cache['weights']
    grads = params.zeros_like()
    g = grads.tensors
    P = params.tensors
    V = params.vocab_size
    B = batch.size
    H = P['dec_b'].shape[0] // 4
    rows = np.arange(B)

    d_states = np.zeros_like(enc.states)
    d_projected = np.zeros_like(enc.projected)
    dh_next = np.zeros_like(enc.init_h)
    dc_next = np.zeros_like(enc.init_c)

    for t in reversed(range(len(cache['steps']))):
        out, vocab_part, copy_part, hits, in_vocab = cache['steps'][t]
        input_ids, x, lstm_cache, tu, out_in = out.cache
        prob = cache['probs'][t]
        gold = batch.target_ids[:, t]

        dprob = np.where(prob > hyper.prob_floor, -weights[:, t] / np.maximum(prob, hyper.prob_floor), 0.0)
        dprob = dprob.astype(out.P_vocab.dtype)

        # mixture
        d_switch = dprob * (vocab_part - copy_part)
        d_vocab_gold = np.where(in_vocab, dprob * out.p_gen, 0.0)
        d_attn = (dprob * (1 - out.p_gen))[:, None] * hits

        # vocabulary softmax and output layer
        d_pvocab = np.zeros_like(out.P_vocab)
        d_pvocab[rows, np.minimum(gold, V - 1)] += d_vocab_gold
        d_logits = out.P_vocab * (d_pvocab - np.sum(d_pvocab * out.P_vocab, axis=1, keepdims=True))
        g['out_W'] += out_in.T @ d_logits
        g['out_b'] += d_logits.sum(axis=0)
        d_out_in = d_logits @ P['out_W'].T
        dh = d_out_in[:, :H] + dh_next
        d_context = d_out_in[:, H:]

        # generation switch
        dz = d_switch * out.p_gen * (1 - out.p_gen)
        g['pgen_w_c'] += dz @ out.context
        g['pgen_w_h'] += dz @ out.h
        g['pgen_w_x'] += dz @ x
        if hyper.use_pgen_bias:
            g['pgen_b'] += dz.sum()
        d_context += dz[:, None] * P['pgen_w_c']
        dh += dz[:, None] * P['pgen_w_h']
        dx = dz[:, None] * P['pgen_w_x']

        # attention
        d_attn += np.einsum('bd,bsd->bs', d_context, enc.states)
        d_states += out.P_attn[:, :, None] * d_context[:, None, :]
        d_scores = out.P_attn * (d_attn - np.sum(d_attn * out.P_attn, axis=1, keepdims=True))
        g['attn_v'] += np.einsum('bs,bsa->a', d_scores, tu)
        du = d_scores[:, :, None] * P['attn_v'] * (1 - tu ** 2)
        g['attn_b'] += du.sum(axis=(0, 1))
        d_projected += du
        d_dec_proj = du.sum(axis=1)
        g['attn_W_dec'] += out.h.T @ d_dec_proj
        dh += d_dec_proj @ P['attn_W_dec'].T

        # decoder LSTM
        dx_lstm, dh_next, dc_next = _lstm_step_backward(P['dec_W'], lstm_cache, dh, dc_next, g['dec_W'], g['dec_b'])
        np.add.at(g['embedding'], input_ids, dx + dx_lstm)

    # state reduction
    ec = enc.cache
    g['reduce_h_W'] += ec['final_h'].T @ dh_next
    g['reduce_h_b'] += dh_next.sum(axis=0)
    g['reduce_c_W'] += ec['final_c'].T @ dc_next
    g['reduce_c_b'] += dc_next.sum(axis=0)
    d_final_h = dh_next @ P['reduce_h_W'].T
    d_final_c = dc_next @ P['reduce_c_W'].T

    # attention projection of encoder states
    g['attn_W_enc'] += np.einsum('bsd,bsa->da', enc.states, d_projected)
    d_states += d_projected @ P['attn_W_enc'].T

    source_ids = ec['source_ids']
    S = source_ids.shape[1]

    dh_f, dc_f = d_final_h[:, :H], d_final_c[:, :H]
    for t in reversed(range(S)):
        dx_t, dh_f, dc_f = _lstm_step_backward(P['enc_fw_W'], ec['fw'][t], d_states[:, t, :H] + dh_f, dc_f,
                                                g['enc_fw_W'], g['enc_fw_b'])
        np.add.at(g['embedding'], source_ids[:, t], dx_t)

    dh_b, dc_b = d_final_h[:, H:], d_final_c[:, H:]
    for t in range(S):
        dx_t, dh_b, dc_b = _lstm_step_backward(P['enc_bw_W'], ec['bw'][t], d_states[:, t, H:] + dh_b, dc_b,
                                                g['enc_bw_W'], g['enc_bw_b'])
        np.add.at(g['embedding'], source_ids[:, t], dx_t)

    return grads


def loss_and_grads(batch: Batch, params: ModelParams, hyper: Hyperparams) -> Tuple[float, ModelParams]:
    """Convenience wrapper running ``forward_loss`` then ``backward``."""
    loss, cache = forward_loss(batch, params, hyper)
    return loss, backward(cache)
