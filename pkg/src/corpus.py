"""
Corpus preparation: tokenization, title aggregation, field linearization,
vocabulary construction and per-example extended-id encoding.

The encoded form follows the pointer-generator convention: every source token
outside the fixed vocabulary receives a temporary id ``>= len(vocab)`` that is
unique within its example, so the decoder can copy it.
"""

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import EmptyCandidates, EmptyCorpus, InvalidId, TooFewRecords
from .table_context import DatasetRecord, TableContext

logger = logging.getLogger(__name__)

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
START_TOKEN = "<s>"
STOP_TOKEN = "</s>"
SPECIAL_TOKENS = (PAD_TOKEN, UNK_TOKEN, START_TOKEN, STOP_TOKEN)
PAD_ID, UNK_ID, START_ID, STOP_ID = range(4)

# Table order; one marker per metadata field.
FIELD_MARKERS = {
    'page_title': "#page_title",
    'section_headings': "#section_heading",
    'captions': "#caption",
    'spanning_headers': "#spanning_header",
    'column_headers': "#column_header",
    'prefix_text': "#prefix",
    'suffix_text': "#suffix",
    'table_rows': "#row",
}
MARKER_TOKENS = tuple(FIELD_MARKERS.values())
RESERVED_TOKENS = SPECIAL_TOKENS + MARKER_TOKENS
MARKER_IDS = frozenset(range(len(SPECIAL_TOKENS), len(RESERVED_TOKENS)))

MAX_SOURCE_TOKENS = 150

_TOKEN_RE = re.compile(r"\w+(?:['’-]\w+)*|[^\w\s]")


def tokenize(text: str) -> List[str]:
    """
    Lowercase and split text into word and punctuation tokens.

    Punctuation becomes its own token except hyphens and apostrophes inside a
    word ("father-in-law", "don't").
    """
    if not text:
        return []
    return _TOKEN_RE.findall(text.lower())


def aggregate_titles(candidates: Sequence[str]) -> str:
    """
    Pick the accepted title from annotator candidates.

    A title given by two or more annotators wins; otherwise the candidate with
    the most tokens. Ties go to the earliest candidate.

    Raises:
        EmptyCandidates: If no candidates were given
    """
    if not candidates:
        raise EmptyCandidates("aggregate_titles needs at least one candidate")

    counts = Counter(candidates)
    best_count = max(counts.values())
    if best_count >= 2:
        return next(c for c in candidates if counts[c] == best_count)

    lengths = [len(tokenize(c)) for c in candidates]
    return candidates[int(np.argmax(lengths))]


@dataclass
class FieldConfig:
    """Which metadata fields are linearized, and the source length cap."""
    page_title: bool = True
    section_headings: bool = True
    captions: bool = True
    spanning_headers: bool = True
    column_headers: bool = True
    prefix_text: bool = False
    suffix_text: bool = False
    table_rows: bool = False
    max_source_len: int = MAX_SOURCE_TOKENS

    def __post_init__(self):
        if self.max_source_len <= 0:
            raise ValueError("max_source_len must be positive")

    def enabled_fields(self) -> List[str]:
        return [name for name in FIELD_MARKERS if getattr(self, name)]

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in list(FIELD_MARKERS) + ['max_source_len']}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FieldConfig':
        known = set(FIELD_MARKERS) | {'max_source_len'}
        return cls(**{k: v for k, v in data.items() if k in known})


def _field_values(context: TableContext, name: str) -> List[List[str]]:
    if name == 'page_title':
        return [context.page_title] if context.page_title else []
    if name == 'section_headings':
        return [tokens for _, tokens in context.section_headings]
    if name in ('prefix_text', 'suffix_text'):
        value = getattr(context, name)
        return [value] if value else []
    if name == 'table_rows':
        return [tokenize(row) for row in context.table_rows]
    return list(getattr(context, name))


def truncate(tokens: Sequence[str], limit: int = MAX_SOURCE_TOKENS) -> List[str]:
    """Keep the first ``limit`` tokens."""
    return list(tokens[:limit])


def linearize(context: TableContext, field_config: Optional[FieldConfig] = None) -> List[str]:
    """
    Serialize a table context into one marked token sequence.

    Each value of each enabled field is preceded by its field marker; fields
    follow the fixed table order. The marked sequence is truncated last.
    """
    config = field_config or FieldConfig()
    tokens: List[str] = []
    for name in config.enabled_fields():
        marker = FIELD_MARKERS[name]
        for value in _field_values(context, name):
            if not value:
                continue
            tokens.append(marker)
            tokens.extend(value)
    return truncate(tokens, config.max_source_len)


class Vocabulary:
    """
    Dense token <-> id mapping.

    Ids 0-3 are PAD, UNK, START, STOP; the eight field markers follow; corpus
    tokens come after in first-occurrence order.
    """

    def __init__(self, tokens: Iterable[str] = ()):
        self.id_to_token: List[str] = list(RESERVED_TOKENS)
        self.token_to_id: Dict[str, int] = {t: i for i, t in enumerate(self.id_to_token)}
        for token in tokens:
            self.add(token)

    def add(self, token: str) -> int:
        if token not in self.token_to_id:
            self.token_to_id[token] = len(self.id_to_token)
            self.id_to_token.append(token)
        return self.token_to_id[token]

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.id_to_token == other.id_to_token

    def id_of(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def token_of(self, token_id: int) -> str:
        return self.id_to_token[token_id]

    def save(self, filepath: str) -> str:
        """Write one token per line; line number is the id."""
        Path(filepath).parent.mkdir(parents=True, exist_ok=True)
        with open(filepath, 'w', encoding='utf-8', newline='\n') as f:
            for token in self.id_to_token:
                f.write(token + "\n")
        logger.info("✓ Saved vocabulary of %d tokens to %s", len(self), filepath)
        return filepath

    @classmethod
    def load(cls, filepath: str) -> 'Vocabulary':
        with open(filepath, 'r', encoding='utf-8') as f:
            tokens = [line.rstrip("\n") for line in f if line.rstrip("\n")]
        if tuple(tokens[:len(RESERVED_TOKENS)]) != RESERVED_TOKENS:
            raise ValueError(f"{filepath} does not start with the reserved tokens")
        return cls(tokens[len(RESERVED_TOKENS):])

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"


def build_vocab(train_records: Sequence[DatasetRecord],
                field_config: Optional[FieldConfig] = None) -> Vocabulary:
    """
    Build the vocabulary from training records, without a frequency threshold.

    Raises:
        EmptyCorpus: If no records were given
    """
    if not train_records:
        raise EmptyCorpus("Cannot build a vocabulary from zero records")

    vocab = Vocabulary()
    for record in train_records:
        for token in linearize(record.context, field_config):
            vocab.add(token)
        for token in tokenize(record.title):
            vocab.add(token)
    logger.info("Built vocabulary: %d tokens from %d records", len(vocab), len(train_records))
    return vocab


@dataclass
class EncodedExample:
    """
    Model-ready ids for one example.

    Attributes:
        source_ids: Source ids with OOV tokens as UNK
        source_extended_ids: Source ids with OOV tokens as per-example ids
        example_oov_tokens: OOV source tokens in first-occurrence order
        target_ids: Title ids over the extended space, ending with STOP
        source_tokens: The linearized source
        target_tokens: The tokenized title
    """
    source_ids: List[int]
    source_extended_ids: List[int]
    example_oov_tokens: List[str]
    target_ids: List[int] = field(default_factory=list)
    source_tokens: List[str] = field(default_factory=list)
    target_tokens: List[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.source_ids) != len(self.source_extended_ids):
            raise ValueError("source_ids and source_extended_ids differ in length")

    @property
    def n_oov(self) -> int:
        return len(self.example_oov_tokens)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'source_ids': self.source_ids,
            'source_extended_ids': self.source_extended_ids,
            'example_oov_tokens': self.example_oov_tokens,
            'target_ids': self.target_ids,
        }


def encode_source(tokens: Sequence[str], vocab: Vocabulary) -> EncodedExample:
    """Encode a linearized source without a target."""
    source_ids, extended, oovs = [], [], []
    for token in tokens:
        token_id = vocab.id_of(token)
        source_ids.append(token_id)
        if token in vocab:
            extended.append(token_id)
        else:
            if token not in oovs:
                oovs.append(token)
            extended.append(len(vocab) + oovs.index(token))
    return EncodedExample(source_ids, extended, oovs, source_tokens=list(tokens))


def encode_example(record: DatasetRecord, vocab: Vocabulary,
                   field_config: Optional[FieldConfig] = None) -> EncodedExample:
    """Encode a record's linearized context and its accepted title."""
    example = encode_source(linearize(record.context, field_config), vocab)
    target_tokens = tokenize(record.title)
    target_ids = []
    for token in target_tokens:
        if token in vocab:
            target_ids.append(vocab.id_of(token))
        elif token in example.example_oov_tokens:
            target_ids.append(len(vocab) + example.example_oov_tokens.index(token))
        else:
            target_ids.append(UNK_ID)
    target_ids.append(STOP_ID)
    example.target_ids = target_ids
    example.target_tokens = target_tokens
    return example


def encode_records(records: Sequence[DatasetRecord], vocab: Vocabulary,
                   field_config: Optional[FieldConfig] = None) -> List[EncodedExample]:
    """Encode records, dropping those with an empty input or an empty title."""
    examples = []
    dropped = 0
    for record in records:
        example = encode_example(record, vocab, field_config)
        if not example.source_ids or not example.target_tokens:
            dropped += 1
            continue
        examples.append(example)
    if dropped:
        logger.warning("Dropped %d of %d records with empty input or title", dropped, len(records))
    return examples


def split_dataset(records: Sequence[DatasetRecord], seed: int) -> List[DatasetRecord]:
    """
    Assign an 80/10/10 train/validation/test split.

    Records are shuffled with ``seed``; validation and test each take
    ``n // 10`` records and the remainder goes to train. Records come back in
    their original order carrying their labels.

    Raises:
        TooFewRecords: If fewer than ten records were given
    """
    n = len(records)
    if n < 10:
        raise TooFewRecords(f"split_dataset needs at least 10 records, got {n}")

    order = np.random.default_rng(seed).permutation(n)
    n_held = n // 10
    labels = ['train'] * n
    for position, index in enumerate(order):
        if position < n_held:
            labels[index] = 'validation'
        elif position < 2 * n_held:
            labels[index] = 'test'
    logger.info("Split %d records: %d train / %d validation / %d test",
                n, n - 2 * n_held, n_held, n_held)
    return [record.with_split(label) for record, label in zip(records, labels)]


def render_title(ids: Sequence[int], vocab: Vocabulary, example_oov_tokens: Sequence[str],
                 debug: bool = False) -> str:
    """
    Turn extended-space ids back into title text.

    Special tokens and field markers are dropped. Copied OOV tokens are wrapped
    as ``__token__`` when ``debug`` is set.

    Raises:
        InvalidId: If an id lies outside the example's extended vocabulary
    """
    limit = len(vocab) + len(example_oov_tokens)
    words = []
    for token_id in ids:
        token_id = int(token_id)
        if token_id < 0 or token_id >= limit:
            raise InvalidId(f"id {token_id} outside extended vocabulary of size {limit}")
        if token_id < len(RESERVED_TOKENS):
            if token_id == UNK_ID:
                words.append(UNK_TOKEN)
            continue
        if token_id < len(vocab):
            words.append(vocab.token_of(token_id))
        else:
            token = example_oov_tokens[token_id - len(vocab)]
            words.append(f"__{token}__" if debug else token)
    return " ".join(words)


def verbatim_rate(records: Sequence[DatasetRecord]) -> float:
    """Fraction of records whose accepted title occurs verbatim on the page."""
    if not records:
        return 0.0
    return sum(1 for r in records if r.title_verbatim) / len(records)


def oov_rate(examples: Sequence[EncodedExample], vocab: Vocabulary) -> float:
    """Fraction of examples whose title holds at least one out-of-vocabulary token."""
    if not examples:
        return 0.0
    hits = sum(1 for ex in examples if any(t not in vocab for t in ex.target_tokens))
    return hits / len(examples)


def save_records(records: Sequence[DatasetRecord], filepath: str) -> str:
    """Write records as UTF-8 JSON lines."""
    Path(filepath).parent.mkdir(parents=True, exist_ok=True)
    with open(filepath, 'w', encoding='utf-8', newline='\n') as f:
        for record in records:
            f.write(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
    logger.info("✓ Saved %d records to %s", len(records), filepath)
    return filepath


def load_records(filepath: str) -> List[DatasetRecord]:
    """Read JSON-lines records."""
    records = []
    with open(filepath, 'r', encoding='utf-8') as f:
        for line in f:
            if line.strip():
                records.append(DatasetRecord.from_dict(json.loads(line)))
    logger.info("Loaded %d records from %s", len(records), filepath)
    return records


def save_examples(examples: Sequence[EncodedExample], filepath: str) -> str:
    """Write encoded examples as JSON lines."""
    Path(filepath).parent.mkdir(parents=True, exist_ok=True)
    with open(filepath, 'w', encoding='utf-8', newline='\n') as f:
        for example in examples:
            f.write(json.dumps(example.to_dict(), ensure_ascii=False) + "\n")
    logger.info("✓ Saved %d encoded examples to %s", len(examples), filepath)
    return filepath
