"""
Synthetic Table Corpus Generator

Generates (table context, title) pairs from a handful of page templates with
invented names, so names are out-of-vocabulary for unseen splits and titles
must be composed by copying names and generating the connecting words.

Key features:
- Seeded, reproducible corpora
- Three crowd-style candidate titles per table (majority agrees)
- Rendering to HTML pages plus a titles manifest, for extraction round trips
"""

import html
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .corpus import FieldConfig, aggregate_titles, linearize, tokenize
from .table_context import DatasetRecord, TableContext

logger = logging.getLogger(__name__)

SYLLABLES = ["ka", "lo", "mi", "ren", "dor", "vel", "sa", "tin", "bra", "quo",
             "zel", "mon", "ar", "is", "en", "ul", "fen", "gri", "ho", "pax"]
MASCOTS = ["rovers", "falcons", "miners", "comets", "wolves", "pilots"]
PARTIES = ["green", "liberal", "labour", "civic", "independent"]


@dataclass
class PageTemplate:
    """
    One kind of page and how its table is titled.

    String fields are ``str.format`` patterns over the slots
    ``first``, ``last``, ``city`` and ``team``.
    """
    name: str
    title: str
    variant: str
    page_title: str
    headings: List[Tuple[int, str]]
    columns: List[str]
    spanning: Optional[str] = None
    caption: Optional[str] = None
    prefix: str = ""


TEMPLATES: Dict[str, PageTemplate] = {
    'filmography': PageTemplate(
        name='filmography',
        title="filmography of {first} {last}",
        variant="{first} {last} films",
        page_title="{first} {last} - wikipedia",
        headings=[(2, "filmography [ edit ]")],
        columns=["year", "title", "role", "notes"],
        prefix="{first} {last} appeared in the following productions .",
    ),
    'mayors': PageTemplate(
        name='mayors',
        title="list of {city} mayors",
        variant="mayors of {city}",
        page_title="{city} - wikipedia",
        headings=[(2, "politics"), (3, "mayors [ edit ]")],
        columns=["name", "term start", "term end", "party"],
    ),
    'albums': PageTemplate(
        name='albums',
        title="{first} {last} studio albums",
        variant="albums by {first} {last}",
        page_title="{first} {last} discography | wiki",
        headings=[(2, "studio albums")],
        columns=["year", "album", "label", "peak"],
        caption="studio albums",
    ),
    'season_stats': PageTemplate(
        name='season_stats',
        title="{team} player season statistics",
        variant="{team} statistics",
        page_title="{team} season - wikipedia",
        headings=[(2, "statistics")],
        columns=["player", "games", "points", "assists"],
        spanning="player statistics",
    ),
}


class NameFactory:
    """Invented names built from syllables."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def word(self, min_syllables: int = 2, max_syllables: int = 3) -> str:
        n = int(self.rng.integers(min_syllables, max_syllables + 1))
        return "".join(str(s) for s in self.rng.choice(SYLLABLES, size=n))

    def slots(self) -> Dict[str, str]:
        city = self.word()
        return {
            'first': self.word(),
            'last': self.word(),
            'city': city,
            'team': f"{city} {self.rng.choice(MASCOTS)}",
        }


@dataclass
class SyntheticCorpusGenerator:
    """
    Generate reproducible synthetic table corpora.

    Attributes:
        seed: Random seed
        rows_per_table: Body rows per generated table
        templates: Template names to draw from (all by default)
    """
    seed: Optional[int] = None
    rows_per_table: int = 3
    templates: List[str] = field(default_factory=lambda: list(TEMPLATES))

    def __post_init__(self):
        unknown = [t for t in self.templates if t not in TEMPLATES]
        if unknown:
            raise ValueError(f"Unknown templates: {unknown}")
        if self.rows_per_table < 1:
            raise ValueError("rows_per_table must be at least 1")
        self.rng = np.random.default_rng(self.seed)
        self.names = NameFactory(self.rng)

    def _row(self, template: PageTemplate, slots: Dict[str, str]) -> List[str]:
        year = str(int(self.rng.integers(1950, 2020)))
        if template.name == 'mayors':
            start = int(self.rng.integers(1900, 2010))
            return [f"{self.names.word()} {self.names.word()}", str(start), str(start + 4),
                    str(self.rng.choice(PARTIES))]
        if template.name == 'season_stats':
            return [f"{self.names.word()} {self.names.word()}", str(int(self.rng.integers(1, 83))),
                    str(int(self.rng.integers(0, 2000))), str(int(self.rng.integers(0, 600)))]
        if template.name == 'albums':
            return [year, self.names.word(), f"{self.names.word()} records", str(int(self.rng.integers(1, 100)))]
        return [year, self.names.word(), self.names.word(), "-"]

    def generate_record(self, template_name: Optional[str] = None, table_index: int = 0) -> DatasetRecord:
        """
        Generate one table with its candidate and accepted titles.

        Args:
            template_name: Template to use (random if None)
            table_index: Index recorded in the context

        Returns:
            DatasetRecord whose title is the majority of three candidates
        """
        if template_name is None:
            template_name = str(self.rng.choice(self.templates))
        template = TEMPLATES[template_name]
        slots = self.names.slots()

        spanning = [tokenize(template.spanning)] if template.spanning else []
        context = TableContext(
            page_title=tokenize(template.page_title.format(**slots)),
            section_headings=[(level, tokenize(text.format(**slots))) for level, text in template.headings],
            captions=[tokenize(template.caption)] if template.caption else [],
            spanning_headers=spanning,
            column_headers=spanning + [tokenize(c) for c in template.columns],
            prefix_text=tokenize(template.prefix.format(**slots)),
            table_rows=[", ".join(self._row(template, slots)) for _ in range(self.rows_per_table)],
            table_index=table_index,
        )

        title = template.title.format(**slots)
        candidates = [title, title, template.variant.format(**slots)]
        order = self.rng.permutation(len(candidates))
        candidates = [candidates[i] for i in order]

        accepted = aggregate_titles(candidates)
        return DatasetRecord(
            context=context,
            candidate_titles=candidates,
            title=accepted,
            title_verbatim=appears_verbatim(tokenize(accepted), context),
        )

    def generate_corpus(self, num_records: int = 100) -> List[DatasetRecord]:
        """Generate ``num_records`` records with randomly drawn templates."""
        records = [self.generate_record(table_index=0) for _ in range(num_records)]
        logger.info("Generated %d synthetic records", len(records))
        return records

    def write_html_pages(self, records: Sequence[DatasetRecord], output_dir: str) -> str:
        """
        Write one HTML page per record plus ``manifest.jsonl`` with its titles.

        Returns:
            The output directory
        """
        root = Path(output_dir)
        root.mkdir(parents=True, exist_ok=True)
        with open(root / "manifest.jsonl", 'w', encoding='utf-8') as manifest:
            for i, record in enumerate(records):
                filename = f"page_{i:05d}.html"
                (root / filename).write_text(render_page(record.context), encoding='utf-8')
                manifest.write(json.dumps({
                    'file': filename,
                    'source_url': f"https://example.org/wiki/page_{i:05d}",
                    'table_index': 0,
                    'candidate_titles': record.candidate_titles,
                    'title': record.title,
                    'title_verbatim': record.title_verbatim,
                }, sort_keys=True) + "\n")

        logger.info("✓ Saved %d synthetic pages to %s", len(records), output_dir)
        return output_dir


def appears_verbatim(title_tokens: Sequence[str], context: TableContext) -> bool:
    """True when the title occurs as a contiguous run in the full linearized context."""
    everything = FieldConfig(prefix_text=True, suffix_text=True, table_rows=True, max_source_len=10 ** 6)
    source = linearize(context, everything)
    n = len(title_tokens)
    if n == 0:
        return False
    return any(source[i:i + n] == list(title_tokens) for i in range(len(source) - n + 1))


def render_page(context: TableContext) -> str:
    """HTML page whose extraction reproduces ``context`` (single table)."""
    def esc(tokens: Sequence[str]) -> str:
        return html.escape(" ".join(tokens))

    parts = ["<!DOCTYPE html>", "<html><head>", f"<title>{esc(context.page_title)}</title>",
             "</head><body>"]
    for level, tokens in context.section_headings:
        parts.append(f"<h{level}>{esc(tokens)}</h{level}>")
    if context.prefix_text:
        parts.append(f"<p>{esc(context.prefix_text)}</p>")

    num_columns = max([len(row.split(", ")) for row in context.table_rows] + [1])
    spanning = [list(h) for h in context.spanning_headers]
    columns = [h for h in context.column_headers if list(h) not in spanning]

    parts.append("<table>")
    for caption in context.captions:
        parts.append(f"<caption>{esc(caption)}</caption>")
    for header in spanning:
        parts.append(f'<tr><th colspan="{num_columns}">{esc(header)}</th></tr>')
    if columns:
        parts.append("<tr>" + "".join(f"<th>{esc(c)}</th>" for c in columns) + "</tr>")
    for row in context.table_rows:
        parts.append("<tr>" + "".join(f"<td>{html.escape(cell)}</td>" for cell in row.split(", ")) + "</tr>")
    parts.append("</table>")

    if context.suffix_text:
        parts.append(f"<p>{esc(context.suffix_text)}</p>")
    parts.append("</body></html>")
    return "\n".join(parts)
