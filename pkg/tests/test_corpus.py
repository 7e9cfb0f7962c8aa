"""
Tests for corpus preparation: tokenization, aggregation, linearization,
vocabulary, encoding and splitting.
"""

import pytest
from src.corpus import (
    MARKER_IDS, MARKER_TOKENS, RESERVED_TOKENS, STOP_ID, UNK_ID, FieldConfig, Vocabulary, aggregate_titles,
    build_vocab, encode_example, encode_records, encode_source, linearize, load_records, oov_rate,
    render_title, save_records, split_dataset, tokenize, truncate, verbatim_rate,
)
from src.errors import EmptyCandidates, EmptyCorpus, InvalidId, TooFewRecords
from src.table_context import DatasetRecord, TableContext

from .conftest import make_context


def _record(title: str, **fields) -> DatasetRecord:
    return DatasetRecord(context=TableContext(**fields), title=title)


class TestTokenize:
    """Test tokenize function."""

    def test_page_title(self):
        """Lowercased words with punctuation split off."""
        assert tokenize("Nicole Eggert - Wikipedia") == ["nicole", "eggert", "-", "wikipedia"]

    def test_empty(self):
        """Empty text gives no tokens."""
        assert tokenize("") == []

    def test_brackets_split(self):
        """Brackets glued to a word become tokens of their own."""
        assert tokenize("Filmography[edit]") == ["filmography", "[", "edit", "]"]

    def test_word_internal_punctuation(self):
        """Hyphens and apostrophes inside words stay attached."""
        assert tokenize("Father-in-law don't") == ["father-in-law", "don't"]


class TestAggregateTitles:
    """Test the title aggregation heuristic."""

    def test_majority(self):
        """A title given twice wins."""
        assert aggregate_titles(["A", "A", "B"]) == "A"

    def test_most_tokens(self):
        """Without agreement the longest candidate wins."""
        assert aggregate_titles(["a b c", "d e", "f"]) == "a b c"

    def test_unanimous(self):
        """Unanimous candidates."""
        assert aggregate_titles(["x", "x", "x"]) == "x"

    def test_length_tie_goes_to_first(self):
        """Equal token counts break toward the earliest candidate."""
        assert aggregate_titles(["a b", "c d", "e"]) == "a b"

    def test_majority_not_first(self):
        """The majority title is chosen wherever it appears."""
        assert aggregate_titles(["long single title here", "B", "B"]) == "B"

    def test_empty(self):
        """No candidates is an error."""
        with pytest.raises(EmptyCandidates):
            aggregate_titles([])


class TestLinearize:
    """Test field linearization."""

    def test_filmography_context(self):
        """Markers precede every value, fields in table order."""
        assert linearize(make_context()) == [
            "#page_title", "nicole", "eggert", "-", "wikipedia",
            "#section_heading", "nicole", "eggert",
            "#section_heading", "filmography",
            "#column_header", "year", "#column_header", "title", "#column_header", "role",
        ]

    def test_empty_context(self):
        """No fields, no tokens."""
        assert linearize(TableContext()) == []

    def test_truncation(self):
        """Long sources are cut to 150 tokens."""
        context = TableContext(column_headers=[[f"h{i}"] for i in range(150)])

        assert len(linearize(context)) == 150

    def test_optional_fields(self):
        """Prefix, suffix and rows appear only when enabled."""
        context = TableContext(prefix_text=["before"], suffix_text=["after"], table_rows=["1976, Rocky"])

        assert linearize(context) == []
        assert linearize(context, FieldConfig(prefix_text=True, suffix_text=True, table_rows=True)) == [
            "#prefix", "before", "#suffix", "after", "#row", "1976", ",", "rocky",
        ]

    def test_custom_limit(self):
        """max_source_len applies to the marked sequence."""
        tokens = linearize(make_context(), FieldConfig(max_source_len=3))

        assert tokens == ["#page_title", "nicole", "eggert"]


class TestVocabulary:
    """Test Vocabulary and build_vocab."""

    def test_reserved_ids(self):
        """Specials come first, then the eight field markers."""
        vocab = Vocabulary()

        assert len(vocab) == len(RESERVED_TOKENS) == 12
        assert vocab.token_of(STOP_ID) == "</s>"
        assert {vocab.token_of(i) for i in MARKER_IDS} == {
            "#page_title", "#section_heading", "#caption", "#spanning_header",
            "#column_header", "#prefix", "#suffix", "#row",
        }

    def test_unknown_maps_to_unk(self):
        assert Vocabulary().id_of("never-seen") == UNK_ID

    def test_union_of_records(self):
        """Tokens of every record, first occurrence first, no threshold."""
        records = [_record("", column_headers=[["a"], ["b"]]), _record("", column_headers=[["c"]])]
        vocab = build_vocab(records)

        assert vocab.id_to_token[len(RESERVED_TOKENS):] == ["a", "b", "c"]

    def test_title_tokens_included(self):
        """Title tokens join the vocabulary."""
        vocab = build_vocab([_record("list of mayors", column_headers=[["name"]])])

        assert "of" in vocab
        assert "mayors" in vocab

    def test_deterministic(self):
        """Rebuilding from the same records gives the same ids."""
        records = [_record("x y", captions=[["p", "q"]]), _record("z", captions=[["q", "r"]])]

        assert build_vocab(records) == build_vocab(records)

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            build_vocab([])

    def test_save_and_load(self, tmp_path):
        """One token per line; loading restores the ids."""
        vocab = Vocabulary(["alpha", "beta"])
        path = tmp_path / "vocab.txt"
        vocab.save(str(path))

        assert Vocabulary.load(str(path)) == vocab
        assert path.read_text(encoding="utf-8").splitlines()[-1] == "beta"

    def test_load_rejects_foreign_file(self, tmp_path):
        """A vocabulary file must start with the reserved tokens."""
        path = tmp_path / "vocab.txt"
        path.write_text("alpha\nbeta\n", encoding="utf-8")

        with pytest.raises(ValueError):
            Vocabulary.load(str(path))


class TestEncodeExample:
    """Test per-example extended ids."""

    def test_all_in_vocab(self):
        """Without OOV tokens both id lists agree."""
        record = _record("year title", column_headers=[["year"], ["title"]])
        vocab = build_vocab([record])
        example = encode_example(record, vocab)

        assert example.source_ids == example.source_extended_ids
        assert example.example_oov_tokens == []
        assert example.target_ids[-1] == STOP_ID

    def test_copyable_oov(self):
        """A title OOV that occurs in the source gets the extended id."""
        vocab = Vocabulary(["filmography"])
        record = _record("jyotii sethi filmography", page_title=["jyotii", "sethi"],
                         section_headings=[(2, ["filmography"])])
        example = encode_example(record, vocab)

        assert example.example_oov_tokens == ["jyotii", "sethi"]
        assert example.target_ids == [len(vocab), len(vocab) + 1, vocab.id_of("filmography"), STOP_ID]
        assert example.source_ids[1] == UNK_ID
        assert example.source_extended_ids[1] == len(vocab)

    def test_uncopyable_oov(self):
        """A title OOV absent from the source is UNK."""
        vocab = Vocabulary(["filmography"])
        record = _record("filmography of someone", section_headings=[(2, ["filmography"])])
        example = encode_example(record, vocab)

        assert example.target_ids == [vocab.id_of("filmography"), UNK_ID, UNK_ID, STOP_ID]

    def test_repeated_oov_shares_id(self):
        """Repeated occurrences of one OOV type share an id; types get distinct ids."""
        vocab = Vocabulary()
        record = _record("", captions=[["zed", "quo", "zed"]])
        example = encode_example(record, vocab)
        ext = example.source_extended_ids

        assert ext[1] == ext[3] != ext[2]
        assert max(ext) < len(vocab) + example.n_oov

    def test_encode_records_drops_empty(self):
        """Records with no source or no title are skipped."""
        vocab = Vocabulary(["a"])
        records = [_record("a", captions=[["a"]]), _record("a"), _record("", captions=[["a"]])]

        assert len(encode_records(records, vocab)) == 1

    def test_oov_rate(self):
        """Share of examples whose title holds an OOV token."""
        vocab = Vocabulary(["a", "b"])
        examples = encode_records([_record("a", captions=[["a"]]), _record("a zz", captions=[["zz"]])], vocab)

        assert oov_rate(examples, vocab) == pytest.approx(0.5)


class TestSplitDataset:
    """Test the 80/10/10 split."""

    @staticmethod
    def _records(n):
        return [_record(f"t{i}", captions=[[f"t{i}"]]) for i in range(n)]

    def test_ten_records(self):
        splits = [r.split for r in split_dataset(self._records(10), seed=0)]

        assert (splits.count("train"), splits.count("validation"), splits.count("test")) == (8, 1, 1)

    def test_remainder_to_train(self):
        """Held-out splits take n // 10 each."""
        splits = [r.split for r in split_dataset(self._records(10102), seed=5)]

        assert (splits.count("train"), splits.count("validation"), splits.count("test")) == (8082, 1010, 1010)

    def test_deterministic(self):
        """Same seed, same assignment; order of records preserved."""
        records = self._records(50)
        first = split_dataset(records, seed=9)
        second = split_dataset(records, seed=9)

        assert [r.split for r in first] == [r.split for r in second]
        assert [r.title for r in first] == [r.title for r in records]

    def test_too_few(self):
        with pytest.raises(TooFewRecords):
            split_dataset(self._records(9), seed=0)


class TestRenderTitle:
    """Test id-to-text rendering."""

    def test_in_vocab(self):
        vocab = Vocabulary(["filmography"])

        assert render_title([vocab.id_of("filmography")], vocab, []) == "filmography"

    def test_debug_oov(self):
        """Copied OOV tokens are wrapped in debug mode."""
        vocab = Vocabulary(["filmography"])

        assert render_title([len(vocab)], vocab, ["eggert"], debug=True) == "__eggert__"
        assert render_title([len(vocab)], vocab, ["eggert"]) == "eggert"

    def test_mixed(self):
        """Mixed ids render in order; STOP and markers are dropped."""
        vocab = Vocabulary(["filmography", "of"])
        ids = [vocab.id_of("filmography"), vocab.id_of("of"), len(vocab), min(MARKER_IDS), STOP_ID]

        assert render_title(ids, vocab, ["eggert"]) == "filmography of eggert"

    def test_out_of_range(self):
        vocab = Vocabulary()

        with pytest.raises(InvalidId):
            render_title([len(vocab) + 1], vocab, ["only"])


class TestRecordFiles:
    """Test dataset file I/O and statistics."""

    def test_save_and_load(self, tmp_path, record):
        path = tmp_path / "records.jsonl"
        save_records([record, record.with_split("test")], str(path))
        loaded = load_records(str(path))

        assert len(loaded) == 2
        assert loaded[1].split == "test"
        assert loaded[0].context == record.context

    def test_verbatim_rate(self, context):
        records = [DatasetRecord(context=context, title_verbatim=flag) for flag in (True, False, False, True)]

        assert verbatim_rate(records) == pytest.approx(0.5)
        assert verbatim_rate([]) == 0.0


class TestCorpusProperties:
    """Properties over the synthetic corpus."""

    FIELDS = FieldConfig(prefix_text=True, table_rows=True, max_source_len=100_000)

    def test_source_round_trip(self, synthetic_records):
        """Rendering the extended ids of an OOV-free source gives its tokens without markers."""
        vocab = build_vocab(synthetic_records, self.FIELDS)
        for record in synthetic_records:
            tokens = linearize(record.context, self.FIELDS)
            example = encode_source(tokens, vocab)

            assert example.example_oov_tokens == []
            assert render_title(example.source_extended_ids, vocab, []) == \
                " ".join(t for t in tokens if t not in MARKER_TOKENS)

    def test_title_round_trip(self, synthetic_records):
        vocab = build_vocab(synthetic_records, self.FIELDS)
        for record in synthetic_records:
            example = encode_example(record, vocab, self.FIELDS)

            assert render_title(example.target_ids, vocab, example.example_oov_tokens) == \
                " ".join(tokenize(record.title))

    @pytest.mark.parametrize("limit", [1, 5, 12, 150])
    def test_truncation_idempotent(self, synthetic_records, limit):
        """Truncating a linearized sequence again changes nothing."""
        fields = FieldConfig(prefix_text=True, suffix_text=True, table_rows=True, max_source_len=limit)
        for record in synthetic_records:
            tokens = linearize(record.context, fields)

            assert truncate(tokens, limit) == tokens
            assert len(tokens) <= limit
