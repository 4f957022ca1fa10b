"""Definition blocks, definiendum candidates and noise filtering."""

from __future__ import annotations

import enum
import logging
import re
import unicodedata
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

from .diagnostics import Diagnostic
from .tex_parser import Kind, TexToken, find_environments, tokenize_tex

log = logging.getLogger(__name__)

Range = Tuple[int, int]

EMPHASIS_COMMANDS = {"emph": "emph", "textit": "textit"}
# characters that end a compound word around emphasis markup
_WORD_STOP = set("{}()[],;:!?\"~")


class SpanKind(enum.Enum):
    EMPH = "emph"
    TEXTIT = "textit"
    OPTIONAL_ARG = "optional_arg"


@dataclass(frozen=True)
class DefinitionBlock:
    paper_id: str
    block_index: int
    raw_latex: str
    optional_arg: Optional[str]
    source_span: Range
    last_updated: Optional[datetime] = None
    env_name: str = "definition"


@dataclass(frozen=True)
class LatexSpan:
    """A definiendum candidate inside a definition block.

    For emphasis spans ``start``/``end`` index ``raw_latex``; ``content`` is
    the braced argument before compound extension. For the optional argument
    the range indexes ``optional_arg`` itself.
    """

    start: int
    end: int
    kind: SpanKind
    term_latex: str
    content: Range
    in_math: bool = False

    @property
    def range(self) -> Range:
        return (self.start, self.end)


def strip_comments(latex: str) -> str:
    """Remove ``%`` comments the way TeX does, newline and indent included."""
    out = []
    eat = False
    for tok in tokenize_tex(latex):
        if tok.kind is Kind.COMMENT:
            eat = True
            continue
        lexeme = tok.lexeme
        if eat and tok.kind is Kind.TEXT:
            lexeme = re.sub(r"\A\r?\n[ \t]*", "", lexeme)
        eat = False
        out.append(lexeme)
    return "".join(out)


def extract_definition_blocks(
    paper,
    source: str,
    env_names: Sequence[str] = ("definition",),
    diagnostics: Optional[List[Diagnostic]] = None,
) -> List[DefinitionBlock]:
    """One block per balanced definition environment, in document order.

    ``paper`` only needs ``paper_id`` and ``last_updated`` attributes.
    """
    tokens = tokenize_tex(source)
    local: List[Diagnostic] = []
    found = []
    for name in dict.fromkeys(env_names):
        found.extend(find_environments(tokens, name, local))
    found.sort(key=lambda b: b.begin_span[0])

    blocks = []
    for env in found:
        raw = strip_comments(env.body)
        if not raw.strip():
            local.append(Diagnostic("empty-definition", "body empty after comment removal", env.body_span[0]))
            continue
        opt = strip_comments(env.optional_arg) if env.optional_arg is not None else None
        blocks.append(
            DefinitionBlock(
                paper_id=paper.paper_id,
                block_index=len(blocks),
                raw_latex=raw,
                optional_arg=opt,
                source_span=env.body_span,
                last_updated=getattr(paper, "last_updated", None),
                env_name=env.name,
            )
        )
    if diagnostics is not None:
        diagnostics.extend(d.with_paper(paper.paper_id) for d in local)
    return blocks


def _matching_close(tokens: Sequence[TexToken], open_idx: int) -> Optional[int]:
    depth = 0
    for k in range(open_idx, len(tokens)):
        kind = tokens[k].kind
        if kind is Kind.GROUP_OPEN:
            depth += 1
        elif kind is Kind.GROUP_CLOSE:
            depth -= 1
            if depth == 0:
                return k
    return None


def _extend_right(raw: str, pos: int) -> int:
    n = len(raw)
    if pos >= n or not (raw[pos].isalnum() or raw[pos] == "-"):
        return pos
    p = pos
    while p < n:
        c = raw[p]
        if c == "$":
            close = raw.find("$", p + 1)
            if close < 0:
                break
            p = close + 1
            continue
        if c.isspace() or c in _WORD_STOP or c == "\\":
            break
        p += 1
    while p > pos and raw[p - 1] == ".":
        p -= 1
    return p


def _extend_left(raw: str, pos: int) -> int:
    if pos <= 0 or not (raw[pos - 1].isalnum() or raw[pos - 1] == "-"):
        return pos
    p = pos
    while p > 0:
        c = raw[p - 1]
        if c == "$":
            open_ = raw.rfind("$", 0, p - 1)
            if open_ < 0:
                break
            p = open_
            continue
        if c.isspace() or c in _WORD_STOP:
            break
        p -= 1
    return p


def extract_definienda_spans(
    block: DefinitionBlock, diagnostics: Optional[List[Diagnostic]] = None
) -> List[LatexSpan]:
    """Candidate definienda of one block, in document order.

    Every outermost ``\\emph{...}``/``\\textit{...}`` yields a span; markup
    glued to a word (``\\emph{non}-k-equivalent``) is widened to the whole
    word. Overlapping emphasis spans are merged. The optional argument of
    the environment, when present, comes first.
    """
    raw = block.raw_latex
    tokens = tokenize_tex(raw)
    diags: List[Diagnostic] = []
    spans: List[LatexSpan] = []
    math = False
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        i += 1
        if tok.kind is Kind.MATH_SHIFT:
            math = not math
            continue
        if tok.kind is Kind.COMMAND and tok.name in ("(", "["):
            math = True
            continue
        if tok.kind is Kind.COMMAND and tok.name in (")", "]"):
            math = False
            continue
        if tok.kind is not Kind.COMMAND or tok.name not in EMPHASIS_COMMANDS:
            continue
        j = i
        while j < len(tokens) and tokens[j].kind is Kind.TEXT and tokens[j].lexeme.isspace():
            j += 1
        if j >= len(tokens) or tokens[j].kind is not Kind.GROUP_OPEN:
            continue
        close = _matching_close(tokens, j)
        if close is None:
            diags.append(Diagnostic("unbalanced-markup", "\\%s{ never closed" % tok.name, tok.start))
            continue
        content = (tokens[j].end, tokens[close].start)
        i = close + 1
        if content[0] == content[1]:
            continue
        markup = (tok.start, tokens[close].end)
        left = _extend_left(raw, markup[0])
        right = _extend_right(raw, markup[1])
        if left == markup[0] and right == markup[1]:
            start, end = content
        else:
            start, end = left, right
        if math:
            diags.append(Diagnostic("emphasis-in-math", raw[start:end], tok.start))
        kind = SpanKind.EMPH if tok.name == "emph" else SpanKind.TEXTIT
        in_math = math
        if spans and start < spans[-1].end:
            prev = spans.pop()
            start = min(start, prev.start)
            end = max(end, prev.end)
            kind, content = prev.kind, prev.content
            in_math = in_math or prev.in_math
        spans.append(LatexSpan(start, end, kind, raw[start:end], content, in_math))

    if block.optional_arg is not None and block.optional_arg.strip():
        opt = block.optional_arg
        spans.insert(
            0, LatexSpan(0, len(opt), SpanKind.OPTIONAL_ARG, opt, (0, len(opt)))
        )
    if diagnostics is not None:
        diagnostics.extend(d.with_paper(block.paper_id) for d in diags)
    return spans


# -- noise filtering ---------------------------------------------------------

_ROMAN = r"(?:(?=[ivx])x{0,3}(?:ix|iv|v?i{0,3}))"

DEFAULT_PATTERNS = {
    "abbreviation": [
        r"i\.?\s*e", r"e\.?\s*g", r"cf", r"resp", r"etc", r"viz", r"w\.?\s*r\.?\s*t",
        r"a\.?\s*k\.?\s*a", r"n\.?\s*b", r"q\.?\s*v", r"ibid", r"op\.?\s*cit",
    ],
    "latin-locution": [
        r"et\s+al", r"a\s+priori", r"a\s+posteriori", r"ad\s+hoc", r"per\s+se",
        r"vice\s+versa", r"mutatis\s+mutandis", r"de\s+facto", r"inter\s+alia",
        r"ceteris\s+paribus", r"a\s+fortiori", r"ad\s+infinitum", r"sui\s+generis",
        r"bona\s+fide", r"in\s+situ", r"ipso\s+facto", r"status\s+quo",
    ],
    # list markers are matched before punctuation trimming
    "list-entry": [
        r"[(\[]\s*(?:%s|[a-z]|\d{1,3})\s*[)\]]" % _ROMAN,
        r"(?:%s|[a-z]|\d{1,3})\s*[.)\]]" % _ROMAN,
        r"(?=[ivx]{2,}$)%s" % _ROMAN,
    ],
}


def _trim(s: str) -> str:
    """Drop surrounding whitespace and punctuation."""
    lo, hi = 0, len(s)
    while lo < hi and (s[lo].isspace() or unicodedata.category(s[lo]).startswith("P")):
        lo += 1
    while hi > lo and (s[hi - 1].isspace() or unicodedata.category(s[hi - 1]).startswith("P")):
        hi -= 1
    return s[lo:hi]


class NoiseFilter:
    """Reject abbreviations, Latin locutions, list markers and junk terms.

    ``patterns`` maps a rejection reason to regular expressions that must
    match the whole (lowercased) term. The structural rules for empty,
    punctuation-only, digit-only and single-character terms always apply.
    """

    def __init__(self, patterns: Optional[dict] = None):
        patterns = DEFAULT_PATTERNS if patterns is None else patterns
        self.rules = [
            (reason, re.compile(p, re.IGNORECASE))
            for reason, plist in patterns.items()
            for p in plist
        ]

    @classmethod
    def from_file(cls, path: Path) -> "NoiseFilter":
        """Load patterns from a text file, one regex per line.

        ``#`` starts a comment line. A line may name its rejection reason
        with a ``reason:`` prefix, e.g. ``latin-locution: et\\s+al``;
        unprefixed patterns are reported as ``custom``.
        """
        patterns: dict = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                m = re.match(r"([a-z][a-z-]*):\s+(.*)$", line)
                reason, pattern = (m.group(1), m.group(2)) if m else ("custom", line)
                re.compile(pattern)
                patterns.setdefault(reason, []).append(pattern)
        return cls(patterns)

    def check(self, term: str) -> Optional[str]:
        """Return the rejection reason for ``term``, or None to keep it."""
        squeezed = " ".join(term.split()).lower()
        core = _trim(squeezed)
        for reason, rx in self.rules:
            target = squeezed if reason == "list-entry" else core
            if target and rx.fullmatch(target):
                return reason
        if not squeezed:
            return "empty"
        if not core:
            return "punctuation"
        if re.fullmatch(r"[\d\s.,]+", core):
            return "digits"
        if len(core) == 1:
            return "single-character"
        return None

    def keep(self, term: str) -> bool:
        return self.check(term) is None

    def partition(self, terms: Iterable[str]):
        kept, rejected = [], []
        for t in terms:
            reason = self.check(t)
            if reason is None:
                kept.append(t)
            else:
                rejected.append((t, reason))
        return kept, rejected


_DEFAULT_FILTER = NoiseFilter()


def filter_noise(term: str) -> Optional[str]:
    """Check ``term`` against the default filter; None means keep."""
    return _DEFAULT_FILTER.check(term)
