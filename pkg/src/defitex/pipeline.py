"""Paper-level extraction: from a manifest entry to rendered definition records."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, List, Optional, Sequence, Tuple

from .corpus_ingest import PaperEntry, format_timestamp, parse_timestamp, read_paper_source
from .dataset_builder import SchemaError
from .def_extractor import (
    DefinitionBlock,
    SpanKind,
    extract_definienda_spans,
    extract_definition_blocks,
)
from .diagnostics import Diagnostic
from .text_renderer import SpanVanished, map_span, normalize_ws, render_plain_text

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecordSpan:
    start: int
    end: int
    term: str
    kind: str = SpanKind.EMPH.value


@dataclass
class DefinitionRecord:
    paper_id: str
    block_index: int
    latex: str
    optional_arg: Optional[str]
    text: str
    spans: List[RecordSpan] = field(default_factory=list)
    last_updated: Optional[datetime] = None

    @property
    def id(self) -> str:
        return "%s#%d" % (self.paper_id, self.block_index)

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "block_index": self.block_index,
            "latex": self.latex,
            "optional_arg": self.optional_arg,
            "text": self.text,
            "spans": [
                {"start": s.start, "end": s.end, "term": s.term, "kind": s.kind}
                for s in self.spans
            ],
            "last_updated": format_timestamp(self.last_updated) if self.last_updated else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DefinitionRecord":
        try:
            text = d["text"]
            spans = [
                RecordSpan(int(s["start"]), int(s["end"]), str(s["term"]), s.get("kind", "emph"))
                for s in d["spans"]
            ]
            rec = cls(
                paper_id=str(d["paper_id"]),
                block_index=int(d["block_index"]),
                latex=d.get("latex", ""),
                optional_arg=d.get("optional_arg"),
                text=text,
                spans=spans,
                last_updated=parse_timestamp(d["last_updated"]) if d.get("last_updated") else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError("bad definition record: %r" % exc) from None
        for s in spans:
            if not 0 <= s.start <= s.end <= len(text):
                raise SchemaError("%s: span %d-%d outside text" % (rec.id, s.start, s.end))
        return rec


def locate_term(text: str, term: str, taken: Sequence[Tuple[int, int]] = ()) -> Optional[Tuple[int, int]]:
    """First case-insensitive occurrence of ``term`` in ``text``.

    Whole-word occurrences are preferred. An occurrence overlapping an
    already placed span is fine: the labeler merges them.
    """
    if not term:
        return None
    hits = [m.start() for m in re.finditer(re.escape(term.lower()), text.lower())]
    if not hits:
        return None

    def whole(s: int) -> bool:
        e = s + len(term)
        return (s == 0 or not text[s - 1].isalnum()) and (e == len(text) or not text[e].isalnum())

    for s in hits:
        if whole(s):
            return s, s + len(term)
    return hits[0], hits[0] + len(term)


def record_from_block(
    block: DefinitionBlock,
    symbols: Optional[Dict[str, str]] = None,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> DefinitionRecord:
    diags: List[Diagnostic] = []
    rendered = render_plain_text(block.raw_latex, symbols)
    diags.extend(rendered.warnings)
    text = rendered.text
    spans: List[RecordSpan] = []
    for span in extract_definienda_spans(block, diags):
        term = normalize_ws(render_plain_text(span.term_latex, symbols).text)
        if span.kind is SpanKind.OPTIONAL_ARG:
            where = locate_term(text, term)
            if where is None:
                diags.append(Diagnostic("optional-arg-not-in-text", term))
                continue
        else:
            try:
                where = map_span(rendered, span.range)
            except SpanVanished:
                diags.append(Diagnostic("span-vanished", span.term_latex, span.start))
                continue
            shown = normalize_ws(text[where[0] : where[1]])
            if shown.lower() != term.lower():
                diags.append(Diagnostic("term-mismatch", "%r rendered in context as %r" % (term, shown), span.start))
        spans.append(RecordSpan(where[0], where[1], term, span.kind.value))
    spans.sort(key=lambda s: (s.start, s.end))
    if diagnostics is not None:
        diagnostics.extend(d.with_paper(block.paper_id) for d in diags)
    return DefinitionRecord(
        paper_id=block.paper_id,
        block_index=block.block_index,
        latex=block.raw_latex,
        optional_arg=block.optional_arg,
        text=text,
        spans=spans,
        last_updated=block.last_updated,
    )


def extract_paper(
    entry: PaperEntry,
    env_names: Sequence[str] = ("definition",),
    symbols: Optional[Dict[str, str]] = None,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> List[DefinitionRecord]:
    source = read_paper_source(entry)
    if diagnostics is not None:
        for target in source.missing:
            diagnostics.append(Diagnostic("missing-input", target, None, entry.paper_id))
    blocks = extract_definition_blocks(entry, source.text, env_names, diagnostics)
    return [record_from_block(b, symbols, diagnostics) for b in blocks]
