"""
Tests for table context data structures.
"""

import pytest
from src.table_context import DatasetRecord, TableContext

from .conftest import make_context


class TestTableContext:
    """Test TableContext class."""

    def test_context_creation(self):
        """Test creating a context with a few fields."""
        context = make_context()

        assert context.page_title == ["nicole", "eggert", "-", "wikipedia"]
        assert len(context.section_headings) == 2
        assert context.table_index == 0
        assert context.source_url is None

    def test_nearest_heading(self):
        """The last heading is the one closest to the table."""
        assert make_context().nearest_heading == ["filmography"]
        assert TableContext().nearest_heading is None

    def test_is_empty(self):
        """Only a context without any field value is empty."""
        assert TableContext().is_empty()
        assert not TableContext(table_rows=["1976, Rocky"]).is_empty()

    def test_headings_must_increase(self):
        """Heading levels have to be strictly increasing outermost first."""
        with pytest.raises(ValueError):
            TableContext(section_headings=[(2, ["a"]), (2, ["b"])])
        with pytest.raises(ValueError):
            TableContext(section_headings=[(3, ["a"]), (1, ["b"])])

    def test_heading_level_range(self):
        """Heading levels must lie within 1-6."""
        with pytest.raises(ValueError):
            TableContext(section_headings=[(7, ["a"])])

    def test_window_limit(self):
        """Prefix and suffix hold at most 200 tokens."""
        TableContext(prefix_text=["w"] * 200)
        with pytest.raises(ValueError):
            TableContext(prefix_text=["w"] * 201)
        with pytest.raises(ValueError):
            TableContext(suffix_text=["w"] * 201)

    def test_negative_table_index(self):
        """Table index is non-negative."""
        with pytest.raises(ValueError):
            TableContext(table_index=-1)

    def test_dict_round_trip(self):
        """Dataset representation restores every field."""
        context = make_context(captions=[["results"]], prefix_text=["some", "text"],
                               table_rows=["1976, Rocky"], table_index=2, source_url="https://x.org/a")
        data = context.to_dict()

        assert data['page_title'] == "nicole eggert - wikipedia"
        assert data['section_headings'] == [[1, "nicole eggert"], [2, "filmography"]]
        assert TableContext.from_dict(data) == context

    def test_from_dict_tokenizes_raw_text(self):
        """Hand-written records with casing and punctuation load tokenized."""
        context = TableContext.from_dict({'page_title': "Nicole Eggert - Wikipedia",
                                          'section_headings': [[2, "Filmography[edit]"]]})

        assert context.page_title == ["nicole", "eggert", "-", "wikipedia"]
        assert context.section_headings == [(2, ["filmography", "[", "edit", "]"])]

    def test_clone_is_deep(self):
        """Mutating a clone leaves the original untouched."""
        context = make_context()
        clone = context.clone()
        clone.page_title.append("extra")
        clone.section_headings[0][1].append("extra")

        assert context.page_title == ["nicole", "eggert", "-", "wikipedia"]
        assert context.section_headings[0][1] == ["nicole", "eggert"]


class TestDatasetRecord:
    """Test DatasetRecord class."""

    def test_record_creation(self, record):
        """Test creating a record."""
        assert record.title == "nicole eggert filmography"
        assert record.split is None
        assert record.title_verbatim is False

    def test_unknown_split_rejected(self, context):
        """Only train, validation and test are valid splits."""
        with pytest.raises(ValueError):
            DatasetRecord(context=context, split="dev")

    def test_title_must_be_a_candidate(self, context):
        """The accepted title comes from the candidates."""
        with pytest.raises(ValueError):
            DatasetRecord(context=context, candidate_titles=["a", "b"], title="c")

    def test_with_split(self, record):
        """with_split returns a labelled copy."""
        labelled = record.with_split("test")

        assert labelled.split == "test"
        assert record.split is None

    def test_dict_round_trip(self, record):
        """Records survive the JSON-lines representation."""
        restored = DatasetRecord.from_dict(record.with_split("train").to_dict())

        assert restored.title == record.title
        assert restored.candidate_titles == record.candidate_titles
        assert restored.split == "train"
        assert restored.context == record.context
