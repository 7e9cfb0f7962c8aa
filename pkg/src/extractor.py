"""
HTML table metadata extraction.

Parses a page with BeautifulSoup (lxml tree builder, which applies the usual
HTML error recovery) and harvests, for each table, the metadata fields used as
model input: page title, section headings, captions, spanning and column
headers, prefix/suffix text and comma-delimited rows.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from bs4 import BeautifulSoup, Comment, Doctype, NavigableString, Tag
from bs4.element import CData, Declaration, ProcessingInstruction

from .corpus import tokenize
from .errors import EmptyDocument
from .table_context import MAX_WINDOW_TOKENS, DatasetRecord, TableContext

logger = logging.getLogger(__name__)

HEADING_TAGS = ["h1", "h2", "h3", "h4", "h5", "h6"]
_NON_TEXT_TAGS = ["script", "style", "noscript", "template"]
_NON_TEXT_STRINGS = (Comment, Doctype, CData, Declaration, ProcessingInstruction)
_BLOCK_TAGS = HEADING_TAGS + [
    "address", "article", "aside", "blockquote", "body", "br", "caption", "dd", "div", "dl", "dt",
    "figcaption", "footer", "head", "header", "hr", "html", "li", "main", "nav", "ol", "p", "pre",
    "section", "table", "td", "th", "title", "tr", "ul",
]


@dataclass(frozen=True)
class DocumentTree:
    """
    A parsed page and its tables in document order.

    The tree is never mutated after ``parse_document`` returns, so it can be
    shared between threads.
    """
    soup: BeautifulSoup
    tables: Tuple[Tag, ...]

    @property
    def num_tables(self) -> int:
        return len(self.tables)

    def table(self, table_index: int) -> Tag:
        if not 0 <= table_index < len(self.tables):
            raise IndexError(f"table_index {table_index} out of range (0-{len(self.tables) - 1})")
        return self.tables[table_index]


def parse_document(html: str) -> DocumentTree:
    """
    Parse possibly malformed HTML into a document tree.

    Script, style and comment content is removed so it never surfaces as text.

    Raises:
        EmptyDocument: If the input is empty or whitespace only
    """
    if not html or not html.strip():
        raise EmptyDocument("Cannot parse an empty HTML document")

    soup = BeautifulSoup(html, 'lxml')
    for tag in soup.find_all(_NON_TEXT_TAGS):
        tag.decompose()
    for node in soup.find_all(string=lambda s: isinstance(s, _NON_TEXT_STRINGS)):
        node.extract()

    return DocumentTree(soup=soup, tables=tuple(soup.find_all("table")))


def _is_text(node) -> bool:
    return isinstance(node, NavigableString) and not isinstance(node, _NON_TEXT_STRINGS)


def _block_of(node) -> Optional[Tag]:
    return node.find_parent(_BLOCK_TAGS)


def _breaks_between(first: NavigableString, second: NavigableString) -> bool:
    """True when a block boundary or line break separates two strings in document order."""
    if _block_of(first) is not _block_of(second):
        return True
    for node in first.next_elements:
        if node is second:
            return False
        if isinstance(node, Tag) and node.name in _BLOCK_TAGS:
            return True
    return True


def _join_strings(strings: Sequence[NavigableString]) -> str:
    """
    Text of strings given in document order.

    Inline markup does not split a word ("wor<b>ld</b>" reads "world");
    block boundaries and <br> separate words.
    """
    parts: List[str] = []
    for i, node in enumerate(strings):
        if i and _breaks_between(strings[i - 1], node):
            parts.append(" ")
        parts.append(str(node))
    return " ".join("".join(parts).split())


def _owning_table(node) -> Optional[Tag]:
    return node.find_parent("table")


def _own_text(node: Tag, table: Tag) -> str:
    """Text of ``node`` excluding anything inside tables nested in ``table``."""
    parts = [s for s in node.find_all(string=True) if _is_text(s) and _owning_table(s) is table]
    return _join_strings(parts)


def _own_rows(table: Tag) -> List[Tag]:
    return [tr for tr in table.find_all("tr") if _owning_table(tr) is table]


def _row_cells(row: Tag) -> List[Tag]:
    return row.find_all(["td", "th"], recursive=False)


def _span(cell: Tag) -> int:
    try:
        return max(int(str(cell.get("colspan", 1)).strip()), 1)
    except ValueError:
        return 1


def extract_page_title(doc: DocumentTree) -> List[str]:
    """Tokens of the first <title> inside <head>; empty if absent."""
    head = doc.soup.head
    if head is None:
        return []
    title = head.find("title")
    if title is None:
        return []
    return tokenize(title.get_text(" "))


def extract_section_headings(doc: DocumentTree, table_index: int) -> List[Tuple[int, List[str]]]:
    """
    Headings governing a table, outermost first.

    Walks backward from the table; a heading is kept only if its level is
    strictly lower than every level kept so far.
    """
    table = doc.table(table_index)
    kept: List[Tuple[int, List[str]]] = []
    lowest = 7
    for heading in table.find_all_previous(HEADING_TAGS):
        level = int(heading.name[1])
        if level < lowest:
            kept.append((level, tokenize(_join_strings(heading.find_all(string=_is_text)))))
            lowest = level
            if level == 1:
                break
    kept.reverse()
    return kept


def extract_table_fields(
    doc: DocumentTree,
    table_index: int
) -> Tuple[List[List[str]], List[List[str]], List[List[str]], List[str]]:
    """
    Captions, spanning headers, column headers and rows of one table.

    Rows and cells of nested tables belong to the nested table only.

    Returns:
        (captions, spanning_headers, column_headers, table_rows)
    """
    table = doc.table(table_index)

    captions = [
        tokenize(_own_text(caption, table))
        for caption in table.find_all("caption")
        if _owning_table(caption) is table
    ]

    rows = [(row, _row_cells(row)) for row in _own_rows(table)]
    rows = [(row, cells) for row, cells in rows if cells]
    num_columns = max((sum(_span(c) for c in cells) for _, cells in rows), default=0)

    column_headers: List[List[str]] = []
    spanning_headers: List[List[str]] = []
    table_rows: List[str] = []

    for _, cells in rows:
        for cell in cells:
            if cell.name == "th":
                tokens = tokenize(_own_text(cell, table))
                column_headers.append(tokens)
                if _span(cell) == num_columns:
                    spanning_headers.append(tokens)

        if all(cell.name == "th" for cell in cells):
            continue
        table_rows.append(", ".join(_own_text(cell, table) for cell in cells))

    return captions, spanning_headers, column_headers, table_rows


def _is_one_of(node, tables: Sequence[Tag]) -> bool:
    # Tag equality is structural; identity is what matters here.
    return any(node is t for t in tables)


def _stops_window(node, ancestor_tables: Sequence[Tag]) -> bool:
    """True when ``node`` marks a table or section boundary."""
    if isinstance(node, Tag):
        if node.name in HEADING_TAGS:
            return True
        return node.name == "table" and not _is_one_of(node, ancestor_tables)
    if node.find_parent(HEADING_TAGS) is not None:
        return True
    owner = _owning_table(node)
    return owner is not None and not _is_one_of(owner, ancestor_tables)


def _window_strings(nodes: Iterator, table: Tag) -> Iterator[NavigableString]:
    """Running-text strings from ``nodes`` until the first boundary."""
    ancestors = [table] + list(table.find_parents("table"))
    for node in nodes:
        if _stops_window(node, ancestors):
            return
        if _is_text(node) and node.find_parent(["head", "title"]) is None:
            yield node


def _following(table: Tag) -> Iterator:
    """Document-order nodes after the end of ``table``."""
    last = table
    while isinstance(last, Tag) and last.contents:
        last = last.contents[-1]
    return last.next_elements


def _window_tokens(nodes: Iterator, table: Tag, backward: bool) -> List[str]:
    """Tokens of the text window, in reading order, before truncation."""
    strings: List[NavigableString] = []
    estimate = 0
    for node in _window_strings(nodes, table):
        strings.append(node)
        estimate += len(tokenize(str(node)))
        # summed per-string counts never undercount the joined text
        if estimate >= MAX_WINDOW_TOKENS:
            tokens = tokenize(_join_strings(strings[::-1] if backward else strings))
            if len(tokens) >= MAX_WINDOW_TOKENS:
                return tokens
    return tokenize(_join_strings(strings[::-1] if backward else strings))


def extract_prefix_suffix(doc: DocumentTree, table_index: int) -> Tuple[List[str], List[str]]:
    """
    Up to 200 tokens of running text on each side of a table.

    Collection stops early at another table or at any heading. Both windows
    are returned in reading order; the prefix keeps the tokens nearest the
    table.
    """
    table = doc.table(table_index)
    prefix = _window_tokens(table.previous_elements, table, backward=True)[-MAX_WINDOW_TOKENS:]
    suffix = _window_tokens(_following(table), table, backward=False)[:MAX_WINDOW_TOKENS]
    return prefix, suffix


def extract_context(doc: DocumentTree, table_index: int, source_url: Optional[str] = None) -> TableContext:
    """Collect every metadata field of one table."""
    captions, spanning, columns, rows = extract_table_fields(doc, table_index)
    prefix, suffix = extract_prefix_suffix(doc, table_index)
    return TableContext(
        page_title=extract_page_title(doc),
        section_headings=extract_section_headings(doc, table_index),
        captions=captions,
        spanning_headers=spanning,
        column_headers=columns,
        prefix_text=prefix,
        suffix_text=suffix,
        table_rows=rows,
        table_index=table_index,
        source_url=source_url,
    )


def extract_all(html: str, source_url: Optional[str] = None) -> List[TableContext]:
    """Contexts for every table of a page, in document order."""
    doc = parse_document(html)
    return [extract_context(doc, i, source_url) for i in range(doc.num_tables)]


class PageExtractor:
    """
    Batch extraction over a directory of .html files.

    Optional manifest (JSON lines) entries look like
    ``{"file": "page.html", "source_url": "...", "table_index": 0,
    "candidate_titles": [...], "title_verbatim": false}``; entries without a
    ``table_index`` apply to every table of the file.
    """

    def __init__(self, include_rows: bool = False, include_prefix_suffix: bool = False, jobs: int = 1):
        self.include_rows = include_rows
        self.include_prefix_suffix = include_prefix_suffix
        self.jobs = max(int(jobs), 1)

    @staticmethod
    def load_manifest(filepath: Optional[str]) -> Dict[Tuple[str, Optional[int]], dict]:
        """Read a titles/URL manifest keyed by (file name, table index)."""
        entries: Dict[Tuple[str, Optional[int]], dict] = {}
        if not filepath or not Path(filepath).exists():
            return entries
        with open(filepath, 'r', encoding='utf-8') as f:
            for line in f:
                if not line.strip():
                    continue
                entry = json.loads(line)
                index = entry.get('table_index')
                entries[(entry['file'], None if index is None else int(index))] = entry
        return entries

    def _strip(self, context: TableContext) -> TableContext:
        if not self.include_rows:
            context.table_rows = []
        if not self.include_prefix_suffix:
            context.prefix_text = []
            context.suffix_text = []
        return context

    def extract_file(self, filepath: Path, manifest: Dict[Tuple[str, Optional[int]], dict]) -> List[DatasetRecord]:
        """Records for every table of one file."""
        html = filepath.read_text(encoding='utf-8', errors='replace')
        file_entry = manifest.get((filepath.name, None), {})
        try:
            doc = parse_document(html)
        except EmptyDocument:
            logger.warning("Skipping empty document %s", filepath)
            return []

        records = []
        for index in range(doc.num_tables):
            entry = manifest.get((filepath.name, index), file_entry)
            context = self._strip(extract_context(doc, index, entry.get('source_url') or file_entry.get('source_url')))
            records.append(DatasetRecord(
                context=context,
                candidate_titles=list(entry.get('candidate_titles', [])),
                title=entry.get('title', '') or '',
                title_verbatim=bool(entry.get('title_verbatim', False)),
            ))
        return records

    def extract_directory(self, input_dir: str, manifest_path: Optional[str] = None) -> List[DatasetRecord]:
        """
        Extract every .html/.htm file under ``input_dir`` (sorted by name).

        Args:
            input_dir: Directory of pages, or a single HTML file
            manifest_path: Manifest file; defaults to ``manifest.jsonl`` in the directory

        Returns:
            One record per (page, table), pages in name order
        """
        root = Path(input_dir)
        if root.is_file():
            files = [root]
            root = root.parent
        else:
            files = sorted(p for p in root.rglob("*") if p.suffix.lower() in (".html", ".htm"))
        manifest = self.load_manifest(manifest_path or str(root / "manifest.jsonl"))

        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            per_file = list(pool.map(lambda p: self.extract_file(p, manifest), files))

        records = [record for batch in per_file for record in batch]
        logger.info("Extracted %d tables from %d pages", len(records), len(files))
        return records
