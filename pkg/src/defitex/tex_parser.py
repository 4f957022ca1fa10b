"""Lossless LaTeX lexer and environment locator.

The lexer never fails: anything it does not recognise becomes ``TEXT``, and
joining the lexemes of the returned tokens always gives back the input.
Environment search works on the token stream, so delimiters hidden in
comments or verbatim material never open or close an environment.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .diagnostics import Diagnostic

Range = Tuple[int, int]

VERBATIM_ENVS = frozenset(
    {"verbatim", "verbatim*", "Verbatim", "Verbatim*", "lstlisting", "comment"}
)


class Kind(enum.Enum):
    TEXT = "text"
    COMMAND = "command"
    GROUP_OPEN = "group_open"
    GROUP_CLOSE = "group_close"
    MATH_SHIFT = "math_shift"
    ENV_BEGIN = "env_begin"
    ENV_END = "env_end"
    COMMENT = "comment"
    VERBATIM = "verbatim"


@dataclass(frozen=True)
class TexToken:
    kind: Kind
    lexeme: str
    start: int
    end: int
    # command name (without backslash) or environment name
    name: Optional[str] = None
    # absolute range of the text inside ``[...]`` after ``\begin{name}``
    opt_range: Optional[Range] = None

    @property
    def span(self) -> Range:
        return (self.start, self.end)


@dataclass(frozen=True)
class EnvBlock:
    name: str
    optional_arg: Optional[str]
    body_span: Range
    body: str
    begin_span: Range
    end_span: Range


_TEXT_RUN = re.compile(r"[^\\{}$%]+")
_CONTROL_WORD = re.compile(r"\\([A-Za-z]+)")
_ENV_DELIM = re.compile(r"\\(begin|end)[ \t]*\{([^{}\\%\s]+)\}")
_VERB = re.compile(r"\\verb\*?([^A-Za-z\s*])")


def _scan_optional_arg(source: str, pos: int) -> Optional[Tuple[Range, int]]:
    """Find ``[...]`` starting at ``pos`` (after optional whitespace).

    Returns the inner range and the index just past ``]``. Like LaTeX, the
    argument ends at the first ``]`` outside braces; a blank line in front
    of ``[`` means there is no argument.
    """
    i = pos
    n = len(source)
    newlines = 0
    while i < n and source[i] in " \t\r\n":
        if source[i] == "\n":
            newlines += 1
        i += 1
    if newlines > 1 or i >= n or source[i] != "[":
        return None
    j = i + 1
    depth = 0
    while j < n:
        c = source[j]
        if c == "\\":
            j += 2
            continue
        if c == "%":
            return None
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth < 0:
                return None
        elif c == "]" and depth == 0:
            return (i + 1, j), j + 1
        j += 1
    return None


def tokenize_tex(source: str) -> List[TexToken]:
    tokens: List[TexToken] = []
    add = tokens.append
    n = len(source)
    i = 0
    while i < n:
        c = source[i]
        if c == "\\":
            m = _ENV_DELIM.match(source, i)
            if m:
                which, name = m.group(1), m.group(2)
                end = m.end()
                if which == "begin" and name in VERBATIM_ENVS:
                    close = source.find("\\end{%s}" % name, end)
                    stop = n if close < 0 else close + len(name) + 6
                    add(TexToken(Kind.VERBATIM, source[i:stop], i, stop, name))
                    i = stop
                    continue
                if which == "begin":
                    opt = _scan_optional_arg(source, end)
                    opt_range = None
                    if opt is not None:
                        opt_range, end = opt
                    add(TexToken(Kind.ENV_BEGIN, source[i:end], i, end, name, opt_range))
                else:
                    add(TexToken(Kind.ENV_END, source[i:end], i, end, name))
                i = end
                continue
            m = _VERB.match(source, i)
            if m:
                close = source.find(m.group(1), m.end())
                newline = source.find("\n", m.end())
                if close >= 0 and (newline < 0 or close < newline):
                    add(TexToken(Kind.VERBATIM, source[i : close + 1], i, close + 1, "verb"))
                    i = close + 1
                    continue
            m = _CONTROL_WORD.match(source, i)
            if m:
                add(TexToken(Kind.COMMAND, m.group(0), i, m.end(), m.group(1)))
                i = m.end()
            elif i + 1 < n:
                add(TexToken(Kind.COMMAND, source[i : i + 2], i, i + 2, source[i + 1]))
                i += 2
            else:
                add(TexToken(Kind.TEXT, c, i, i + 1))
                i += 1
        elif c == "{":
            add(TexToken(Kind.GROUP_OPEN, c, i, i + 1))
            i += 1
        elif c == "}":
            add(TexToken(Kind.GROUP_CLOSE, c, i, i + 1))
            i += 1
        elif c == "$":
            width = 2 if source.startswith("$$", i) else 1
            add(TexToken(Kind.MATH_SHIFT, source[i : i + width], i, i + width))
            i += width
        elif c == "%":
            stop = source.find("\n", i)
            if stop < 0:
                stop = n
            add(TexToken(Kind.COMMENT, source[i:stop], i, stop))
            i = stop
        else:
            m = _TEXT_RUN.match(source, i)
            add(TexToken(Kind.TEXT, m.group(0), i, m.end()))
            i = m.end()
    return tokens


def find_environments(
    tokens: Sequence[TexToken],
    name: str,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> List[EnvBlock]:
    """Return every balanced ``name`` environment in ``tokens``.

    Matching is case-sensitive. Nested environments of the same name are
    both reported, the inner one first. An unclosed ``\\begin{name}`` is
    appended to ``diagnostics`` as ``unbalanced-environment``.
    """
    blocks: List[EnvBlock] = []
    stack: List[int] = []
    for idx, tok in enumerate(tokens):
        if tok.name != name:
            continue
        if tok.kind is Kind.ENV_BEGIN:
            stack.append(idx)
        elif tok.kind is Kind.ENV_END:
            if not stack:
                if diagnostics is not None:
                    diagnostics.append(
                        Diagnostic("unmatched-end", "\\end{%s} without \\begin" % name, tok.start)
                    )
                continue
            begin_idx = stack.pop()
            begin = tokens[begin_idx]
            body = "".join(t.lexeme for t in tokens[begin_idx + 1 : idx])
            opt = None
            if begin.opt_range is not None:
                lo, hi = begin.opt_range
                opt = begin.lexeme[lo - begin.start : hi - begin.start]
            blocks.append(
                EnvBlock(name, opt, (begin.end, tok.start), body, begin.span, tok.span)
            )
    if diagnostics is not None:
        for idx in stack:
            diagnostics.append(
                Diagnostic(
                    "unbalanced-environment",
                    "\\begin{%s} has no matching \\end" % name,
                    tokens[idx].start,
                )
            )
    return blocks
