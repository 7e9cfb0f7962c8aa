"""
Edge Case Generator for Table Metadata Extraction

Builds small HTML pages that exercise each extraction rule, together with the
field values extraction must return, including:
- Section heading traversal (nearest heading per level)
- Captions, column headers and spanning headers
- Comma-delimited rows and nested tables
- Prefix/suffix windows and their boundaries
- Malformed markup and non-text content
"""

from typing import Any, Dict, List, Tuple

Fixture = Tuple[str, int, Dict[str, Any]]


def _page(body: str, title: str = "") -> str:
    head = f"<head><title>{title}</title></head>" if title else "<head></head>"
    return f"<html>{head}<body>{body}</body></html>"


SIMPLE_TABLE = "<table><tr><td>x</td></tr></table>"


class ExtractionCaseGenerator:
    """
    Generates extraction fixtures as ``(html, table_index, expected_fields)``.

    ``expected_fields`` maps TableContext attribute names (plus the pseudo
    field ``num_tables``) to the exact extracted value.
    """

    def __init__(self, window: int = 200):
        """
        Initialize the fixture generator.

        Args:
            window: Prefix/suffix window size in tokens (default: 200)
        """
        self.window = window

    def heading_trace(self) -> Fixture:
        """h1 A, h2 B, h3 C, h2 D before the table: keeps A and D only."""
        body = "<h1>A</h1><h2>B</h2><h3>C</h3><h2>D</h2>" + SIMPLE_TABLE
        return _page(body), 0, {'section_headings': [(1, ["a"]), (2, ["d"])]}

    def single_heading(self) -> Fixture:
        return _page("<h2>Filmography</h2>" + SIMPLE_TABLE), 0, {'section_headings': [(2, ["filmography"])]}

    def decreasing_levels(self) -> Fixture:
        """h3, h2, h1 in document order: the h1 is nearest and hides the rest."""
        body = "<h3>Three</h3><h2>Two</h2><h1>One</h1>" + SIMPLE_TABLE
        return _page(body), 0, {'section_headings': [(1, ["one"])]}

    def no_headings(self) -> Fixture:
        return _page("<p>just text</p>" + SIMPLE_TABLE), 0, {'section_headings': []}

    def page_title(self) -> Fixture:
        return (_page(SIMPLE_TABLE, title="Nicole Eggert - Wikipedia"), 0,
                {'page_title': ["nicole", "eggert", "-", "wikipedia"]})

    def page_title_with_pipes(self) -> Fixture:
        return (_page(SIMPLE_TABLE, title="Chocolate Gifts | Artisan Truffles"), 0,
                {'page_title': ["chocolate", "gifts", "|", "artisan", "truffles"]})

    def missing_page_title(self) -> Fixture:
        return _page(SIMPLE_TABLE), 0, {'page_title': []}

    def caption_and_headers(self) -> Fixture:
        table = ("<table><caption>Results</caption>"
                 "<tr><th>Year</th><th>Title</th><th>Role</th></tr>"
                 "<tr><td>1976</td><td>Rocky</td><td>Rocky Balboa</td></tr></table>")
        return _page(table), 0, {
            'captions': [["results"]],
            'column_headers': [["year"], ["title"], ["role"]],
            'spanning_headers': [],
            'table_rows': ["1976, Rocky, Rocky Balboa"],
        }

    def spanning_header(self) -> Fixture:
        table = ('<table><tr><th colspan="3">Awards and nominations</th></tr>'
                 "<tr><th>Year</th><th>Award</th><th>Result</th></tr>"
                 "<tr><td>1977</td><td>Oscar</td><td>Won</td></tr></table>")
        return _page(table), 0, {
            'spanning_headers': [["awards", "and", "nominations"]],
            'column_headers': [["awards", "and", "nominations"], ["year"], ["award"], ["result"]],
            'table_rows': ["1977, Oscar, Won"],
        }

    def partial_span(self) -> Fixture:
        """A header spanning two of three columns is not a spanning header."""
        table = ('<table><tr><th colspan="2">Team</th><th>Points</th></tr>'
                 "<tr><td>Red</td><td>Sox</td><td>12</td></tr></table>")
        return _page(table), 0, {
            'spanning_headers': [],
            'column_headers': [["team"], ["points"]],
        }

    def comma_rows(self) -> Fixture:
        table = "<table><tr><td>1976</td><td>Rocky</td></tr><tr><td>1979</td><td>Rocky II</td></tr></table>"
        return _page(table), 0, {'table_rows': ["1976, Rocky", "1979, Rocky II"], 'column_headers': []}

    def cell_markup_removed(self) -> Fixture:
        table = '<table><tr><td><b>Rocky</b> <i>II</i></td><td><a href="/x">1979</a></td></tr></table>'
        return _page(table), 0, {'table_rows': ["Rocky II, 1979"]}

    def row_header_cells(self) -> Fixture:
        """A row mixing th and td is a body row; its th still counts as a header."""
        table = ("<table><tr><th>Medal</th><th>Count</th></tr>"
                 "<tr><th>Gold</th><td>3</td></tr></table>")
        return _page(table), 0, {
            'column_headers': [["medal"], ["count"], ["gold"]],
            'table_rows': ["Gold, 3"],
        }

    def nested_outer(self) -> Fixture:
        return self._nested(), 0, {'table_rows': ["outer cell"], 'column_headers': [], 'num_tables': 2}

    def nested_inner(self) -> Fixture:
        return self._nested(), 1, {'table_rows': ["inner data"], 'column_headers': [["inner"]]}

    @staticmethod
    def _nested() -> str:
        return _page("<table><tr><td>outer cell"
                     "<table><tr><th>Inner</th></tr><tr><td>inner data</td></tr></table>"
                     "</td></tr></table>")

    def prefix_after_heading(self) -> Fixture:
        return _page("<p>earlier words</p><h2>Section</h2>" + SIMPLE_TABLE), 0, {'prefix_text': []}

    def prefix_window_cap(self) -> Fixture:
        """350 tokens before the table: the 200 nearest are kept."""
        words = [f"t{i}" for i in range(350)]
        return (_page(f"<p>{' '.join(words)}</p>" + SIMPLE_TABLE), 0,
                {'prefix_text': words[-self.window:]})

    def prefix_stops_at_table(self) -> Fixture:
        """Paragraph, another table, 50 tokens, target table: only the 50 tokens."""
        words = [f"w{i}" for i in range(50)]
        body = "<p>alpha beta</p>" + SIMPLE_TABLE + f"<p>{' '.join(words)}</p>" + SIMPLE_TABLE
        return _page(body), 1, {'prefix_text': words}

    def suffix_stops_at_heading(self) -> Fixture:
        body = SIMPLE_TABLE + "<p>after text here</p><h2>Next</h2><p>ignored words</p>"
        return _page(body), 0, {'suffix_text': ["after", "text", "here"]}

    def suffix_window_cap(self) -> Fixture:
        words = [f"s{i}" for i in range(250)]
        return _page(SIMPLE_TABLE + f"<p>{' '.join(words)}</p>"), 0, {'suffix_text': words[:self.window]}

    def non_text_ignored(self) -> Fixture:
        body = ("<script>var secret = 1;</script><style>.hidden { color: red; }</style>"
                "<!-- comment words --><p>visible words</p>" + SIMPLE_TABLE)
        return _page(body), 0, {'prefix_text': ["visible", "words"]}

    def malformed_cells(self) -> Fixture:
        """Unclosed th/td/tr tags are closed by the parser."""
        table = "<table><tr><th>Year<th>Title<tr><td>1976<td>Rocky</table>"
        return _page(table), 0, {
            'column_headers': [["year"], ["title"]],
            'table_rows': ["1976, Rocky"],
        }

    def three_tables(self) -> Fixture:
        return _page(SIMPLE_TABLE * 3), 2, {'num_tables': 3, 'table_index': 2}

    def second_of_two_tables(self) -> Fixture:
        body = ("<h2>First</h2><p>one</p>" + SIMPLE_TABLE
                + "<h2>Second</h2><p>two</p>" + SIMPLE_TABLE)
        return _page(body, title="Shared"), 1, {
            'page_title': ["shared"],
            'section_headings': [(2, ["second"])],
            'prefix_text': ["two"],
        }

    def formatting_only(self) -> Fixture:
        """Layout table: no headers, captions or headings."""
        body = "<p>intro words</p><table><tr><td>a</td><td>b</td></tr></table><p>outro</p>"
        return _page(body, title="Layout"), 0, {
            'page_title': ["layout"],
            'section_headings': [],
            'captions': [],
            'spanning_headers': [],
            'column_headers': [],
            'prefix_text': ["intro", "words"],
            'suffix_text': ["outro"],
            'table_rows': ["a, b"],
        }

    def person_filmography(self) -> Fixture:
        """Person page with h1 name, h2 Filmography[edit] and a Year/Title/Role table."""
        body = ("<h1>Nicole Eggert</h1><p>Nicole Eggert is an actress.</p>"
                "<h2>Filmography<span>[edit]</span></h2>"
                "<table><tr><th>Year</th><th>Title</th><th>Role</th></tr>"
                "<tr><td>1986</td><td>Haunted by Her Past</td><td>Jennifer</td></tr></table>")
        return _page(body, title="Nicole Eggert - Wikipedia"), 0, {
            'page_title': ["nicole", "eggert", "-", "wikipedia"],
            'section_headings': [(1, ["nicole", "eggert"]), (2, ["filmography", "[", "edit", "]"])],
            'captions': [],
            'column_headers': [["year"], ["title"], ["role"]],
            'prefix_text': [],
            'table_rows': ["1986, Haunted by Her Past, Jennifer"],
        }

    def get_all_fixtures(self) -> List[Tuple[str, str, int, Dict[str, Any]]]:
        """
        Generate every fixture with its expected fields.

        Returns:
            List of (name, html, table_index, expected_fields) tuples
        """
        builders = [
            ("Heading trace A/B/C/D", self.heading_trace),
            ("Single heading", self.single_heading),
            ("Decreasing heading levels", self.decreasing_levels),
            ("No headings", self.no_headings),
            ("Page title", self.page_title),
            ("Page title with pipes", self.page_title_with_pipes),
            ("Missing page title", self.missing_page_title),
            ("Caption and headers", self.caption_and_headers),
            ("Spanning header", self.spanning_header),
            ("Partial span", self.partial_span),
            ("Comma rows", self.comma_rows),
            ("Cell markup removed", self.cell_markup_removed),
            ("Row header cells", self.row_header_cells),
            ("Nested table (outer)", self.nested_outer),
            ("Nested table (inner)", self.nested_inner),
            ("Prefix after heading", self.prefix_after_heading),
            ("Prefix window cap", self.prefix_window_cap),
            ("Prefix stops at table", self.prefix_stops_at_table),
            ("Suffix stops at heading", self.suffix_stops_at_heading),
            ("Suffix window cap", self.suffix_window_cap),
            ("Script/style/comment ignored", self.non_text_ignored),
            ("Malformed cells", self.malformed_cells),
            ("Three tables", self.three_tables),
            ("Second of two tables", self.second_of_two_tables),
            ("Formatting-only table", self.formatting_only),
            ("Person filmography", self.person_filmography),
        ]
        return [(name, *build()) for name, build in builders]
