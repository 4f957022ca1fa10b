"""IOB2 labeling, dataset assembly and train/test splitting."""

from __future__ import annotations

import bisect
import enum
import json
import logging
import random
import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .corpus_ingest import EPOCH, format_timestamp, parse_timestamp
from .def_extractor import NoiseFilter
from .diagnostics import Diagnostic

log = logging.getLogger(__name__)

Range = Tuple[int, int]

PEEL = set('.,;:!?()[]{}"“”')


class Tag(str, enum.Enum):
    B_MATH_TERM = "B-MATH_TERM"
    I_MATH_TERM = "I-MATH_TERM"
    O = "O"


B, I, O = Tag.B_MATH_TERM, Tag.I_MATH_TERM, Tag.O


class Token(NamedTuple):
    surface: str
    start: int
    end: int


class SchemaError(ValueError):
    pass


class CorrectionError(ValueError):
    def __init__(self, unknown_ids):
        self.unknown_ids = list(unknown_ids)
        super().__init__("corrections reference unknown ids: %s" % ", ".join(self.unknown_ids))


def tokenize_text(text: str) -> List[Token]:
    """Split on whitespace, then peel leading and trailing punctuation.

    >>> [t.surface for t in tokenize_text("(G, ≤)")]
    ['(', 'G', ',', '≤', ')']
    """
    tokens: List[Token] = []
    for m in re.finditer(r"\S+", text):
        lo, hi = m.start(), m.end()
        head = []
        while lo < hi and text[lo] in PEEL:
            head.append(Token(text[lo], lo, lo + 1))
            lo += 1
        tail = []
        while hi > lo and text[hi - 1] in PEEL:
            tail.append(Token(text[hi - 1], hi - 1, hi))
            hi -= 1
        tokens.extend(head)
        if lo < hi:
            tokens.append(Token(text[lo:hi], lo, hi))
        tokens.extend(reversed(tail))
    return tokens


def merge_spans(spans: Iterable[Range]) -> List[Range]:
    merged: List[List[int]] = []
    for s, e in sorted(spans):
        if merged and s < merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    return [(s, e) for s, e in merged]


def label_iob2(
    tokens: Sequence[Token],
    spans: Iterable[Range],
    text_length: Optional[int] = None,
    unmatched: Optional[List[Range]] = None,
) -> List[Tag]:
    """Tag tokens from character spans.

    A token touching a span by at least one character is inside it.
    Overlapping spans are merged first; a token shared by two adjacent
    spans belongs to the earlier one. Spans that cover no token are
    appended to ``unmatched``.
    """
    spans = list(spans)
    for s, e in spans:
        if s < 0 or e < s or (text_length is not None and e > text_length):
            raise ValueError("span %r outside text of length %s" % ((s, e), text_length))
    tags = [O] * len(tokens)
    starts = [t.start for t in tokens]
    taken = [False] * len(tokens)
    # an empty span overlaps nothing
    if unmatched is not None:
        unmatched.extend((s, e) for s, e in spans if s == e)
    for s, e in merge_spans((s, e) for s, e in spans if s < e):
        k = max(bisect.bisect_right(starts, s) - 1, 0)
        first = True
        hit = False
        while k < len(tokens) and tokens[k].start < e:
            tok = tokens[k]
            if tok.end > s and not taken[k]:
                tags[k] = B if first else I
                taken[k] = True
                first = False
                hit = True
            k += 1
        if not hit and unmatched is not None:
            unmatched.append((s, e))
    return tags


def is_valid_iob2(tags: Sequence[str]) -> bool:
    prev = O
    for tag in tags:
        if tag not in (B, I, O):
            return False
        if tag == I and prev == O:
            return False
        prev = tag
    return True


def decode_iob2(tokens: Sequence[Token], tags: Sequence[str]) -> List[Range]:
    """Character ranges of the chunks encoded by ``tags``."""
    chunks: List[Range] = []
    for tok, tag in zip(tokens, tags):
        if tag == B or (tag == I and not chunks):
            chunks.append((tok.start, tok.end))
        elif tag == I:
            chunks[-1] = (chunks[-1][0], tok.end)
    return chunks


@dataclass
class LabeledExample:
    id: str
    text: str
    tokens: List[Token]
    tags: List[Tag]
    terms: List[str]
    last_updated: Optional[datetime] = None

    @property
    def paper_id(self) -> str:
        return self.id.rsplit("#", 1)[0]

    @property
    def block_index(self) -> int:
        tail = self.id.rsplit("#", 1)[-1]
        return int(tail) if tail.isdigit() else 0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "tokens": [t.surface for t in self.tokens],
            "tags": [t.value for t in self.tags],
            "terms": list(self.terms),
            "last_updated": format_timestamp(self.last_updated) if self.last_updated else None,
            "text": self.text,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LabeledExample":
        try:
            surfaces = d["tokens"]
            tags = [Tag(t) for t in d["tags"]]
            ex_id = d["id"]
            terms = list(d.get("terms", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError("bad example record: %s" % exc) from None
        text = d.get("text") or " ".join(surfaces)
        tokens = tokenize_text(text)
        if [t.surface for t in tokens] != list(surfaces):
            raise SchemaError("%s: tokens do not match text" % ex_id)
        if len(tags) != len(tokens):
            raise SchemaError("%s: %d tags for %d tokens" % (ex_id, len(tags), len(tokens)))
        ts = d.get("last_updated")
        return cls(ex_id, text, tokens, tags, terms, parse_timestamp(ts) if ts else None)


def example_from_spans(
    ex_id: str,
    text: str,
    spans: Iterable[Range],
    last_updated: Optional[datetime] = None,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> LabeledExample:
    """Tokenize ``text``, tag ``spans`` and read the gold terms back off the tags."""
    tokens = tokenize_text(text)
    unmatched: List[Range] = []
    tags = label_iob2(tokens, spans, len(text), unmatched)
    if diagnostics is not None:
        for s, e in unmatched:
            diagnostics.append(Diagnostic("span-without-token", text[s:e], s, ex_id))
    terms = [text[s:e] for s, e in decode_iob2(tokens, tags)]
    return LabeledExample(ex_id, text, tokens, tags, terms, last_updated)


def build_examples(
    records,
    max_tokens: int = 500,
    drop_empty: bool = False,
    noise=None,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> Tuple[List[LabeledExample], int]:
    """Turn extracted definition records into labeled examples.

    Returns the kept examples and the number dropped for having more than
    ``max_tokens`` tokens. ``noise`` is a :class:`NoiseFilter` (the default
    one when omitted); rejected candidate terms are not tagged.
    """
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    if noise is None:
        noise = NoiseFilter()
    kept: List[LabeledExample] = []
    dropped = 0
    for rec in records:
        spans = []
        for span in rec.spans:
            reason = noise.check(span.term)
            if reason is None:
                spans.append((span.start, span.end))
            elif diagnostics is not None:
                diagnostics.append(Diagnostic("noise-term", "%s: %s" % (reason, span.term), span.start, rec.paper_id))
        ex = example_from_spans(rec.id, rec.text, spans, rec.last_updated, diagnostics)
        if len(ex.tokens) > max_tokens:
            dropped += 1
            continue
        if drop_empty and not ex.terms:
            continue
        kept.append(ex)
    return kept, dropped


def sort_chronological(
    examples: Iterable[LabeledExample],
    timestamps: Optional[Dict[str, datetime]] = None,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> List[LabeledExample]:
    """Oldest paper first; ties broken by paper id, then block index.

    ``timestamps`` (paper id to last-update time) takes precedence over the
    timestamp carried by each example.
    """

    def key(ex: LabeledExample):
        ts = None
        if timestamps is not None:
            ts = timestamps.get(ex.paper_id)
        if ts is None:
            ts = ex.last_updated
        if ts is None:
            if diagnostics is not None:
                diagnostics.append(Diagnostic("missing-timestamp", "sorted as epoch", None, ex.paper_id))
            ts = EPOCH
        return (ts, ex.paper_id, ex.block_index, ex.id)

    return sorted(examples, key=key)


def reserve_test(ordered: Sequence, n: int = 1024) -> Tuple[list, list]:
    """Take the earliest ``n`` items as the test pool."""
    if n < 0:
        raise ValueError("test size must be >= 0")
    if len(ordered) < n:
        log.warning("only %d examples for a test pool of %d", len(ordered), n)
    return list(ordered[:n]), list(ordered[n:])


def load_corrections(lines: Iterable[str]) -> List[dict]:
    corrections = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError("corrections line %d: %s" % (lineno, exc)) from None
        if not isinstance(obj, dict) or not isinstance(obj.get("id"), str):
            raise SchemaError("corrections line %d: missing id" % lineno)
        action = obj.get("action")
        if action == "replace":
            terms = obj.get("terms")
            if not isinstance(terms, list) or not all(isinstance(t, str) for t in terms):
                raise SchemaError("corrections line %d: replace needs a list of terms" % lineno)
        elif action != "drop":
            raise SchemaError("corrections line %d: unknown action %r" % (lineno, action))
        corrections.append(obj)
    return corrections


def _locate_terms(ex: LabeledExample, terms: Sequence[str]) -> Tuple[List[Range], List[str]]:
    """Find one occurrence of each listed term, preferring token boundaries."""
    starts = {t.start for t in ex.tokens}
    ends = {t.end for t in ex.tokens}
    used: List[Range] = []
    missing = []
    for term in terms:
        found = None
        for text, needle in ((ex.text, term), (ex.text.lower(), term.lower())):
            candidates = [m.start() for m in re.finditer(re.escape(needle), text)] if needle else []
            free = [
                (s, s + len(needle))
                for s in candidates
                if not any(s < e and s + len(needle) > b for b, e in used)
            ]
            aligned = [r for r in free if r[0] in starts and r[1] in ends]
            pick = (aligned or free or [None])[0]
            if pick is not None:
                found = pick
                break
        if found is None:
            missing.append(term)
        else:
            used.append(found)
    return used, missing


def apply_corrections(
    test_pool: Sequence[LabeledExample],
    corrections: Sequence[dict],
    diagnostics: Optional[List[Diagnostic]] = None,
) -> List[LabeledExample]:
    """Apply manual ``drop``/``replace`` decisions to the test pool.

    A replaced example is retagged from exact matches of its new terms in
    the rendered text. Raises :class:`CorrectionError` for unknown ids.
    """
    by_id = {c["id"]: c for c in corrections}
    known = {ex.id for ex in test_pool}
    unknown = [c["id"] for c in corrections if c["id"] not in known]
    if unknown:
        raise CorrectionError(unknown)
    out = []
    for ex in test_pool:
        fix = by_id.get(ex.id)
        if fix is None:
            out.append(ex)
            continue
        if fix["action"] == "drop":
            continue
        spans, missing = _locate_terms(ex, fix["terms"])
        for term in missing:
            log.warning("%s: replacement term %r not found in text", ex.id, term)
            if diagnostics is not None:
                diagnostics.append(Diagnostic("correction-term-missing", term, None, ex.paper_id))
        out.append(example_from_spans(ex.id, ex.text, spans, ex.last_updated, diagnostics))
    return out


def kfold(items: Sequence, k: int = 10, seed: int = 42) -> List[list]:
    """Shuffle with ``seed`` and cut into ``k`` folds whose sizes differ by at most one."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > len(items):
        raise ValueError("cannot cut %d items into %d folds" % (len(items), k))
    shuffled = list(items)
    random.Random(seed).shuffle(shuffled)
    size, extra = divmod(len(shuffled), k)
    folds, pos = [], 0
    for i in range(k):
        width = size + (1 if i < extra else 0)
        folds.append(shuffled[pos : pos + width])
        pos += width
    return folds


def training_set(folds: Sequence[Sequence], i: int) -> list:
    return [x for j, fold in enumerate(folds) if j != i for x in fold]


def subsample(items: Sequence, n: int, seed) -> list:
    """Seeded sample without replacement, in the original order."""
    if n >= len(items):
        if n > len(items):
            log.warning("subsample of %d requested from %d items; using all", n, len(items))
        return list(items)
    if n <= 0:
        return []
    picked = sorted(random.Random(seed).sample(range(len(items)), n))
    return [items[i] for i in picked]


@dataclass
class SplitSpec:
    test_ids: List[str]
    folds: List[List[str]]
    seed: int
    subsample_sizes: List[int] = field(default_factory=list)
    test_pool_ids: List[str] = field(default_factory=list)

    def subsamples(self) -> Dict[str, List[List[str]]]:
        """Per size, one seeded subsample of each fold's training set."""
        out = {}
        for n in self.subsample_sizes:
            out[str(n)] = [
                subsample(training_set(self.folds, i), n, "%d/%d/%d" % (self.seed, i, n))
                for i in range(len(self.folds))
            ]
        return out

    def check(self) -> None:
        test = set(self.test_ids)
        seen = set()
        for fold in self.folds:
            ids = set(fold)
            if ids & test:
                raise AssertionError("test ids leak into a fold")
            if ids & seen:
                raise AssertionError("folds overlap")
            seen |= ids

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "test_selection": "earliest",
            "test": list(self.test_ids),
            "test_pool": list(self.test_pool_ids),
            "folds": [list(f) for f in self.folds],
            "subsamples": self.subsamples(),
        }
