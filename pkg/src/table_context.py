"""
Table context data structures.

This module defines the per-table bundle of metadata harvested from an HTML
page (``TableContext``) and the dataset record that pairs it with crowdsourced
titles (``DatasetRecord``).
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

MAX_WINDOW_TOKENS = 200
SPLITS = ("train", "validation", "test")


@dataclass
class TableContext:
    """
    Metadata fields surrounding one table on one page.

    Attributes:
        page_title: Tokens of the <title> element inside <head>
        section_headings: (level, tokens) pairs in reading order, nearest last
        captions: Token lists of the table's <caption> elements
        spanning_headers: Header cells spanning every column
        column_headers: All header cells in document order
        prefix_text: Up to 200 tokens of running text before the table
        suffix_text: Up to 200 tokens of running text after the table
        table_rows: One comma-delimited string per non-header row
        table_index: 0-based position of the table in document order
        source_url: Page URL when known
    """
    page_title: List[str] = field(default_factory=list)
    section_headings: List[Tuple[int, List[str]]] = field(default_factory=list)
    captions: List[List[str]] = field(default_factory=list)
    spanning_headers: List[List[str]] = field(default_factory=list)
    column_headers: List[List[str]] = field(default_factory=list)
    prefix_text: List[str] = field(default_factory=list)
    suffix_text: List[str] = field(default_factory=list)
    table_rows: List[str] = field(default_factory=list)
    table_index: int = 0
    source_url: Optional[str] = None

    def __post_init__(self):
        """Validate context invariants after initialization."""
        if len(self.prefix_text) > MAX_WINDOW_TOKENS:
            raise ValueError(f"prefix_text exceeds {MAX_WINDOW_TOKENS} tokens")
        if len(self.suffix_text) > MAX_WINDOW_TOKENS:
            raise ValueError(f"suffix_text exceeds {MAX_WINDOW_TOKENS} tokens")
        levels = [level for level, _ in self.section_headings]
        if any(not 1 <= level <= 6 for level in levels):
            raise ValueError("Section heading levels must be within 1-6")
        if any(a >= b for a, b in zip(levels, levels[1:])):
            raise ValueError("Section heading levels must be strictly increasing")
        if self.table_index < 0:
            raise ValueError("table_index must be non-negative")

    @property
    def nearest_heading(self) -> Optional[List[str]]:
        """Tokens of the heading closest to the table, if any."""
        if not self.section_headings:
            return None
        return self.section_headings[-1][1]

    def is_empty(self) -> bool:
        """True when no field carries any token."""
        return not any([
            self.page_title, self.section_headings, self.captions,
            self.spanning_headers, self.column_headers, self.prefix_text,
            self.suffix_text, self.table_rows,
        ])

    def to_dict(self) -> Dict[str, Any]:
        """Convert to the dataset-file representation (values as text)."""
        return {
            'table_index': self.table_index,
            'source_url': self.source_url,
            'page_title': " ".join(self.page_title),
            'section_headings': [[level, " ".join(tokens)] for level, tokens in self.section_headings],
            'captions': [" ".join(c) for c in self.captions],
            'spanning_headers': [" ".join(h) for h in self.spanning_headers],
            'column_headers': [" ".join(h) for h in self.column_headers],
            'prefix_text': " ".join(self.prefix_text),
            'suffix_text': " ".join(self.suffix_text),
            'table_rows': list(self.table_rows),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TableContext':
        """
        Build a context from its dataset-file representation.

        Text values are re-tokenized so hand-written records with original
        casing and punctuation load the same way extracted ones do.
        """
        from .corpus import tokenize

        return cls(
            page_title=tokenize(data.get('page_title', '') or ''),
            section_headings=[(int(level), tokenize(text)) for level, text in data.get('section_headings', [])],
            captions=[tokenize(c) for c in data.get('captions', [])],
            spanning_headers=[tokenize(h) for h in data.get('spanning_headers', [])],
            column_headers=[tokenize(h) for h in data.get('column_headers', [])],
            prefix_text=tokenize(data.get('prefix_text', '') or '')[-MAX_WINDOW_TOKENS:],
            suffix_text=tokenize(data.get('suffix_text', '') or '')[:MAX_WINDOW_TOKENS],
            table_rows=list(data.get('table_rows', [])),
            table_index=int(data.get('table_index', 0) or 0),
            source_url=data.get('source_url'),
        )

    def clone(self) -> 'TableContext':
        """Create a deep copy of the context."""
        return TableContext(
            page_title=list(self.page_title),
            section_headings=[(level, list(tokens)) for level, tokens in self.section_headings],
            captions=[list(c) for c in self.captions],
            spanning_headers=[list(h) for h in self.spanning_headers],
            column_headers=[list(h) for h in self.column_headers],
            prefix_text=list(self.prefix_text),
            suffix_text=list(self.suffix_text),
            table_rows=list(self.table_rows),
            table_index=self.table_index,
            source_url=self.source_url,
        )

    def __repr__(self) -> str:
        return (f"TableContext(table_index={self.table_index}, "
                f"page_title={' '.join(self.page_title)!r}, "
                f"headings={len(self.section_headings)}, columns={len(self.column_headers)})")


@dataclass
class DatasetRecord:
    """
    One training example: a table context plus its titles.

    Attributes:
        context: Metadata around the table
        candidate_titles: Titles proposed by annotators (typically three)
        title: Accepted title after aggregation ("" until aggregated)
        title_verbatim: Whether the title appears verbatim on the page
        split: "train", "validation", "test" or None before splitting
    """
    context: TableContext
    candidate_titles: List[str] = field(default_factory=list)
    title: str = ""
    title_verbatim: bool = False
    split: Optional[str] = None

    def __post_init__(self):
        """Validate record after initialization."""
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"Unknown split {self.split!r}; expected one of {SPLITS}")
        if self.title and self.candidate_titles and self.title not in self.candidate_titles:
            raise ValueError("Accepted title must be one of the candidate titles")

    def with_split(self, split: str) -> 'DatasetRecord':
        """Copy of the record carrying a split label."""
        return replace(self, split=split)

    def to_dict(self) -> Dict[str, Any]:
        """Convert record to dictionary for JSON-lines serialization."""
        data = self.context.to_dict()
        data.update({
            'candidate_titles': list(self.candidate_titles),
            'title': self.title,
            'title_verbatim': bool(self.title_verbatim),
            'split': self.split or "",
        })
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DatasetRecord':
        """Build a record from one parsed dataset line."""
        return cls(
            context=TableContext.from_dict(data),
            candidate_titles=list(data.get('candidate_titles', [])),
            title=data.get('title', '') or '',
            title_verbatim=bool(data.get('title_verbatim', False)),
            split=data.get('split') or None,
        )

    def __repr__(self) -> str:
        return f"DatasetRecord(title={self.title!r}, split={self.split}, {self.context!r})"
