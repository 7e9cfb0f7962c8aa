"""
Tests for HTML table metadata extraction.

Every fixture from ExtractionCaseGenerator is checked field by field.
"""

import json

import pytest
from src.edge_case_generator import ExtractionCaseGenerator
from src.errors import EmptyDocument
from src.extractor import (
    PageExtractor, extract_all, extract_context, extract_page_title, extract_prefix_suffix,
    extract_section_headings, extract_table_fields, parse_document,
)

FIXTURES = ExtractionCaseGenerator().get_all_fixtures()


class TestParseDocument:
    """Test parse_document function."""

    def test_no_tables(self):
        """A page without tables parses to zero tables."""
        assert parse_document("<html><body></body></html>").num_tables == 0

    def test_minimal_table(self):
        assert parse_document("<table><tr><td>a</td></tr></table>").num_tables == 1

    def test_empty_input(self):
        """Empty or whitespace input is rejected."""
        with pytest.raises(EmptyDocument):
            parse_document("")
        with pytest.raises(EmptyDocument):
            parse_document("   \n")

    def test_table_index_out_of_range(self):
        doc = parse_document("<table><tr><td>a</td></tr></table>")

        with pytest.raises(IndexError):
            doc.table(1)


class TestExtractionFixtures:
    """Field-exact extraction over the hand-built fixtures."""

    @pytest.mark.parametrize("name,html,table_index,expected", FIXTURES, ids=[f[0] for f in FIXTURES])
    def test_fixture(self, name, html, table_index, expected):
        """Every expected field matches exactly."""
        doc = parse_document(html)
        context = extract_context(doc, table_index)

        for field_name, value in expected.items():
            if field_name == 'num_tables':
                assert doc.num_tables == value, name
            else:
                assert getattr(context, field_name) == value, f"{name}: {field_name}"

    def test_fixture_count(self):
        """At least twenty fixtures exist."""
        assert len(FIXTURES) >= 20


class TestFieldExtractors:
    """Test the individual field extractors."""

    def test_page_title(self):
        doc = parse_document("<html><head><title>Nicole Eggert - Wikipedia</title></head><body></body></html>")

        assert extract_page_title(doc) == ["nicole", "eggert", "-", "wikipedia"]

    def test_headings_after_table_ignored(self):
        """Only headings before the table govern it."""
        doc = parse_document("<h2>Before</h2><table><tr><td>x</td></tr></table><h2>After</h2>")

        assert extract_section_headings(doc, 0) == [(2, ["before"])]

    def test_table_fields_tuple(self):
        """Captions, spanning headers, column headers, rows."""
        doc = parse_document("<table><caption>Results</caption><tr><th>Year</th></tr>"
                             "<tr><td>1976</td></tr></table>")

        assert extract_table_fields(doc, 0) == ([["results"]], [["year"]], [["year"]], ["1976"])

    def test_prefix_suffix_pair(self):
        doc = parse_document("<p>before it</p><table><tr><td>x</td></tr></table><p>after it</p>")

        assert extract_prefix_suffix(doc, 0) == (["before", "it"], ["after", "it"])

    def test_table_text_not_in_windows(self):
        """The table's own cells never leak into prefix or suffix."""
        doc = parse_document("<p>a</p><table><tr><td>cell</td></tr></table><p>b</p>")
        prefix, suffix = extract_prefix_suffix(doc, 0)

        assert "cell" not in prefix + suffix


class TestInlineMarkup:
    """Words split by inline tags stay whole; blocks and line breaks separate words."""

    def test_prefix_word_split_by_bold(self):
        doc = parse_document("<p>Hello wor<b>ld</b> foo</p><table><tr><td>x</td></tr></table>")

        assert extract_prefix_suffix(doc, 0)[0] == ["hello", "world", "foo"]

    def test_suffix_across_paragraphs(self):
        doc = parse_document("<table><tr><td>x</td></tr></table><p>end</p><p>start<i>ed</i></p>")

        assert extract_prefix_suffix(doc, 0)[1] == ["end", "started"]

    def test_heading_with_inline_span(self):
        doc = parse_document("<h2>Film<span>ography</span></h2><table><tr><td>x</td></tr></table>")

        assert extract_section_headings(doc, 0) == [(2, ["filmography"])]

    def test_cell_text(self):
        """Inline tags join within a cell; <br> still separates."""
        doc = parse_document("<table><tr><th>Cap<b>tain</b></th></tr>"
                             "<tr><td>Rocky<br>Balboa</td></tr></table>")
        _, _, column_headers, rows = extract_table_fields(doc, 0)

        assert column_headers == [["captain"]]
        assert rows == ["Rocky Balboa"]

    def test_long_prefix_split_words(self):
        """The 200-token window counts joined words."""
        words = "".join(f"<p>w{i}a<b>b</b></p>" for i in range(250))
        doc = parse_document(words + "<table><tr><td>x</td></tr></table>")
        prefix, _ = extract_prefix_suffix(doc, 0)

        assert len(prefix) == 200
        assert prefix[0] == "w50ab"
        assert prefix[-1] == "w249ab"


class TestExtractAll:
    """Test whole-page extraction."""

    def test_two_tables(self):
        """Contexts share the page title but differ in heading and prefix."""
        html = ("<html><head><title>Page</title></head><body>"
                "<h2>One</h2><p>first</p><table><tr><td>1</td></tr></table>"
                "<h2>Two</h2><p>second</p><table><tr><td>2</td></tr></table></body></html>")
        first, second = extract_all(html, source_url="https://example.org/p")

        assert first.page_title == second.page_title == ["page"]
        assert first.section_headings != second.section_headings
        assert first.prefix_text == ["first"] and second.prefix_text == ["second"]
        assert (first.table_index, second.table_index) == (0, 1)
        assert second.source_url == "https://example.org/p"


class TestPageExtractor:
    """Test batch extraction over a directory."""

    def _write_pages(self, tmp_path):
        (tmp_path / "b.html").write_text("<h2>Beta</h2><p>text</p><table><tr><td>1, 2</td></tr></table>",
                                         encoding="utf-8")
        (tmp_path / "a.html").write_text("<table><tr><th>A</th></tr></table><table><tr><td>z</td></tr></table>",
                                         encoding="utf-8")
        (tmp_path / "empty.html").write_text("", encoding="utf-8")
        entries = [
            {"file": "a.html", "table_index": 1, "candidate_titles": ["t", "t", "u"], "source_url": "u-a"},
            {"file": "b.html", "title": "beta table"},
        ]
        with open(tmp_path / "manifest.jsonl", "w", encoding="utf-8") as f:
            for entry in entries:
                f.write(json.dumps(entry) + "\n")

    def test_directory_in_name_order(self, tmp_path):
        """Files sorted by name, tables in document order, empty pages skipped."""
        self._write_pages(tmp_path)
        records = PageExtractor().extract_directory(str(tmp_path))

        assert len(records) == 3
        assert [r.context.table_index for r in records] == [0, 1, 0]
        assert records[2].context.section_headings == [(2, ["beta"])]

    def test_manifest_applied(self, tmp_path):
        """Per-table and per-file manifest entries attach titles and URLs."""
        self._write_pages(tmp_path)
        records = PageExtractor().extract_directory(str(tmp_path))

        assert records[0].candidate_titles == []
        assert records[1].candidate_titles == ["t", "t", "u"]
        assert records[1].context.source_url == "u-a"
        assert records[2].title == "beta table"

    def test_optional_fields_stripped(self, tmp_path):
        """Rows and windows are dropped unless requested."""
        self._write_pages(tmp_path)
        plain = PageExtractor().extract_directory(str(tmp_path))[2]
        full = PageExtractor(include_rows=True, include_prefix_suffix=True, jobs=2).extract_directory(
            str(tmp_path))[2]

        assert plain.context.table_rows == [] and plain.context.prefix_text == []
        assert full.context.table_rows == ["1, 2"]
        assert full.context.prefix_text == ["text"]
