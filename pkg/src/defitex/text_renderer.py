"""Render partial LaTeX to plain Unicode text with an offset map.

Every character of the rendered text remembers the range of LaTeX source it
came from, so a range located in LaTeX coordinates (an ``\\emph`` argument,
say) can be carried over to the rendered text with :func:`map_span`.
"""

from __future__ import annotations

import bisect
import unicodedata
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from .diagnostics import Diagnostic
from .symbols import ACCENTS, SYMBOLS
from .tex_parser import Kind, TexToken, tokenize_tex

Range = Tuple[int, int]


class SpanVanished(ValueError):
    """The requested LaTeX range produced no visible text."""


# commands that disappear but keep their (first) braced argument
STYLE_COMMANDS = frozenset(
    """emph textit textbf textrm textsf texttt textsl textsc textup textmd
    textnormal text mathrm mathbf mathit mathsf mathtt mathcal mathbb mathfrak
    mathscr mathnormal boldsymbol bm pmb mbox hbox fbox makebox underline
    ensuremath operatorname textsuperscript textsubscript uppercase lowercase
    MakeUppercase MakeLowercase mathop mathrel mathbin mathord""".split()
)
# their argument is typeset in text mode even inside math
TEXT_MODE_COMMANDS = frozenset(
    "text textrm textit textbf textsf texttt textsl textnormal textup mbox hbox emph".split()
)
# layout commands whose arguments are not text
DROP_ARG_COMMANDS = frozenset(
    "hspace vspace hspace* vspace* phantom hphantom vphantom addvspace includegraphics".split()
)
REFERENCE_COMMANDS = frozenset("label ref eqref cite citep citet pageref autoref cref Cref".split())
DELIMITER_SIZERS = frozenset(
    """left right middle big Big bigg Bigg bigl bigr Bigl Bigr biggl biggr
    Biggl Biggr bigm Bigm""".split()
)
FRACTIONS = frozenset("frac dfrac tfrac cfrac".split())
BREAK_COMMANDS = frozenset({"\\", "par", "newline", "item", "linebreak"})
MATH_TOGGLES = frozenset({"(", ")", "[", "]"})
DISPLAY_ENVS = frozenset(
    """equation equation* align align* alignat alignat* gather gather*
    multline multline* eqnarray eqnarray* displaymath flalign flalign*
    itemize enumerate description center flushleft flushright quote
    quotation""".split()
)
MATH_ENVS = DISPLAY_ENVS - frozenset(
    "itemize enumerate description center flushleft flushright quote quotation".split()
) | frozenset("math cases array matrix pmatrix bmatrix vmatrix Vmatrix smallmatrix aligned gathered split".split())
COLUMN_SPEC_ENVS = frozenset({"array", "tabular", "tabular*"})

_LIGATURES = (("---", "—"), ("--", "–"), ("``", "“"), ("''", "”"))


class Segment(NamedTuple):
    latex_start: int
    latex_end: int
    text_start: int
    text_end: int


@dataclass(frozen=True)
class OffsetMap:
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        object.__setattr__(self, "_ends", [s.latex_end for s in self.segments])

    def to_text_range(self, latex_range: Range) -> Range:
        lo, hi = latex_range
        if hi <= lo:
            raise SpanVanished("empty latex range %r" % (latex_range,))
        segs = self.segments
        i = bisect.bisect_right(self._ends, lo)
        start = end = None
        while i < len(segs) and segs[i].latex_start < hi:
            seg = segs[i]
            ls, le, ts, te = seg
            if le - ls == te - ts:
                # one-to-one run: clip precisely
                a = ts + max(lo, ls) - ls
                b = ts + min(hi, le) - ls
            else:
                a, b = ts, te
            if start is None:
                start = a
            end = b
            i += 1
        if start is None:
            raise SpanVanished("span vanished in rendering: %r" % (latex_range,))
        return start, end


@dataclass(frozen=True)
class RenderedText:
    text: str
    map: OffsetMap
    warnings: Tuple[Diagnostic, ...] = field(default=())


class _Group:
    __slots__ = ("open", "children", "close")

    def __init__(self, open_tok: TexToken):
        self.open = open_tok
        self.children: List[_Node] = []
        self.close: Optional[TexToken] = None


_Node = Union[TexToken, _Group]


def _split_text(tok: TexToken) -> List[TexToken]:
    """Break a TEXT token into whitespace runs, ligatures and single chars."""
    out = []
    s = tok.lexeme
    i, n = 0, len(s)
    while i < n:
        c = s[i]
        if c.isspace():
            j = i + 1
            while j < n and s[j].isspace():
                j += 1
        else:
            j = i + 1
            for lig, _ in _LIGATURES:
                if s.startswith(lig, i):
                    j = i + len(lig)
                    break
        out.append(TexToken(Kind.TEXT, s[i:j], tok.start + i, tok.start + j))
        i = j
    return out


def _build_tree(tokens: Sequence[TexToken], warnings: List[Diagnostic]) -> List[_Node]:
    root: List[_Node] = []
    stack: List[_Group] = []
    for tok in tokens:
        target = stack[-1].children if stack else root
        if tok.kind is Kind.GROUP_OPEN:
            group = _Group(tok)
            target.append(group)
            stack.append(group)
        elif tok.kind is Kind.GROUP_CLOSE:
            if stack:
                stack.pop().close = tok
            else:
                warnings.append(Diagnostic("unbalanced-braces", "unmatched }", tok.start))
        elif tok.kind is Kind.TEXT:
            target.extend(_split_text(tok))
        else:
            target.append(tok)
    for group in stack:
        warnings.append(Diagnostic("unbalanced-braces", "unclosed {", group.open.start))
    return root


def _is_space(node: _Node) -> bool:
    return isinstance(node, TexToken) and node.kind is Kind.TEXT and node.lexeme.isspace()


class _Renderer:
    def __init__(self, symbols: Dict[str, str]):
        self.symbols = symbols
        self.chars: List[str] = []
        self.ls: List[int] = []
        self.le: List[int] = []
        self.math = False
        self.warnings: List[Diagnostic] = []

    def emit(self, text: str, start: int, end: int) -> None:
        for c in text:
            self.chars.append(c)
            self.ls.append(start)
            self.le.append(end)

    def compose(self, index: int, mark: str, start: int) -> None:
        """Attach a combining ``mark`` to output char ``index``."""
        if index >= len(self.chars):
            return
        self.chars[index] = unicodedata.normalize("NFC", self.chars[index] + mark)
        self.ls[index] = start

    def next_arg(self, nodes: Sequence[_Node], i: int, skip_space: bool = True):
        j = i
        if skip_space:
            while j < len(nodes) and _is_space(nodes[j]):
                j += 1
        if j < len(nodes):
            return nodes[j], j + 1
        return None, i

    def render_node(self, node: _Node) -> None:
        if isinstance(node, _Group):
            self.render_nodes(node.children)
        else:
            self.render_nodes([node])

    def render_nodes(self, nodes: Sequence[_Node]) -> None:
        i = 0
        while i < len(nodes):
            node = nodes[i]
            i += 1
            if isinstance(node, _Group):
                self.render_nodes(node.children)
                continue
            kind = node.kind
            if kind is Kind.TEXT:
                self.render_text(node)
            elif kind is Kind.COMMAND:
                i = self.render_command(node, nodes, i)
            elif kind is Kind.MATH_SHIFT:
                self.math = not self.math
            elif kind is Kind.VERBATIM:
                self.render_verbatim(node)
            elif kind is Kind.ENV_BEGIN:
                if node.name in DISPLAY_ENVS:
                    self.emit("\n", node.start, node.end)
                if node.name in MATH_ENVS:
                    self.math = True
                if node.name in COLUMN_SPEC_ENVS:
                    arg, j = self.next_arg(nodes, i)
                    if isinstance(arg, _Group):
                        i = j
            elif kind is Kind.ENV_END:
                if node.name in MATH_ENVS:
                    self.math = False
                if node.name in DISPLAY_ENVS:
                    self.emit("\n", node.start, node.end)
            # comments render to nothing

    def render_text(self, tok: TexToken) -> None:
        s = tok.lexeme
        if s.isspace():
            if s.count("\n") >= 2:
                self.emit("\n", tok.start, tok.end)
            else:
                for k in range(len(s)):
                    self.emit(" ", tok.start + k, tok.start + k + 1)
            return
        if s in ("~", "&"):
            self.emit(" ", tok.start, tok.end)
            return
        if len(s) > 1 and not self.math:
            for lig, rep in _LIGATURES:
                if s == lig:
                    self.emit(rep, tok.start, tok.end)
                    return
        if s == "`" and not self.math:
            self.emit("‘", tok.start, tok.end)
            return
        for k, c in enumerate(s):
            self.emit(c, tok.start + k, tok.start + k + 1)

    def render_verbatim(self, tok: TexToken) -> None:
        s = tok.lexeme
        if tok.name == "verb":
            head = 6 if s.startswith("\\verb*") else 5
            lo, hi = head + 1, len(s) - 1
        else:
            lo = s.index("}") + 1
            tail = "\\end{%s}" % tok.name
            hi = len(s) - len(tail) if s.endswith(tail) else len(s)
        for k in range(lo, hi):
            c = s[k]
            self.emit(" " if c.isspace() else c, tok.start + k, tok.start + k + 1)

    def render_command(self, tok: TexToken, nodes: Sequence[_Node], i: int) -> int:
        name = tok.name
        if name in BREAK_COMMANDS:
            self.emit("\n", tok.start, tok.end)
            return i
        if name in MATH_TOGGLES:
            self.math = name in ("(", "[")
            return i
        if name in ACCENTS:
            return self.render_accent(tok, nodes, i)
        if name == "not":
            arg, j = self.next_arg(nodes, i)
            if arg is None:
                return i
            first = len(self.chars)
            self.render_node(arg)
            self.compose(first, "\u0338", tok.start)
            return j
        if name in FRACTIONS:
            num, j = self.next_arg(nodes, i)
            if num is None:
                return i
            den, k = self.next_arg(nodes, j)
            self.render_node(num)
            if den is None:
                return j
            pos = num.close.start if isinstance(num, _Group) and num.close else tok.start
            self.emit("/", pos, pos + 1)
            self.render_node(den)
            return k
        if name == "sqrt":
            self.emit("√", tok.start, tok.end)
            return i
        if name in DELIMITER_SIZERS:
            arg, j = self.next_arg(nodes, i)
            if isinstance(arg, TexToken) and arg.kind is Kind.TEXT and arg.lexeme == ".":
                return j
            return i
        if name in self.symbols:
            self.emit(self.symbols[name], tok.start, tok.end)
            return i
        arg, j = self.next_arg(nodes, i)
        if not isinstance(arg, _Group):
            if name in STYLE_COMMANDS and arg is not None:
                # \mathbb R: a single-token argument
                self.render_node(arg)
                return j
            # unknown or declaration-style command without argument
            return i
        if name in DROP_ARG_COMMANDS:
            return j
        if name in REFERENCE_COMMANDS:
            self.warnings.append(Diagnostic("reference-kept", "\\" + name, tok.start))
        if name in TEXT_MODE_COMMANDS:
            saved, self.math = self.math, False
            self.render_nodes(arg.children)
            self.math = saved
        else:
            self.render_nodes(arg.children)
        return j

    def render_accent(self, tok: TexToken, nodes: Sequence[_Node], i: int) -> int:
        # letter-named accents (\c c, \v s) may be separated from their argument
        arg, j = self.next_arg(nodes, i, skip_space=tok.name.isalpha())
        if arg is None or _is_space(arg):
            return i
        first = len(self.chars)
        self.render_node(arg)
        self.compose(first, ACCENTS[tok.name], tok.start)
        return j

    def result(self) -> RenderedText:
        text, segments = _normalize(self.chars, self.ls, self.le)
        return RenderedText(text, OffsetMap(tuple(segments)), tuple(self.warnings))


def _normalize(chars, ls, le) -> Tuple[str, List[Segment]]:
    """Collapse whitespace runs and coalesce per-char ranges into segments."""
    out_c: List[str] = []
    out_ls: List[int] = []
    out_le: List[int] = []
    n = len(chars)
    i = 0
    while i < n:
        c = chars[i]
        if c.isspace():
            j = i
            hard = False
            while j < n and chars[j].isspace():
                hard = hard or chars[j] == "\n"
                j += 1
            if out_c and j < n:
                out_c.append("\n" if hard else " ")
                out_ls.append(ls[i])
                out_le.append(le[j - 1])
            i = j
            continue
        out_c.append(c)
        out_ls.append(ls[i])
        out_le.append(le[i])
        i += 1

    segments: List[Segment] = []
    k = 0
    m = len(out_c)
    while k < m:
        a, b = out_ls[k], out_le[k]
        t = k + 1
        if b - a == 1 and len(out_c[k]) == 1:
            while t < m and out_ls[t] == out_le[t - 1] and out_le[t] - out_ls[t] == 1 and len(out_c[t]) == 1:
                t += 1
            b = out_le[t - 1]
        else:
            while t < m and out_ls[t] == a and out_le[t] == b:
                t += 1
        segments.append(Segment(a, b, k, t))
        k = t
    # composed characters may hold more than one code point
    text_parts = []
    fixed: List[Segment] = []
    pos = 0
    for seg in segments:
        piece = "".join(out_c[seg.text_start : seg.text_end])
        text_parts.append(piece)
        fixed.append(Segment(seg.latex_start, seg.latex_end, pos, pos + len(piece)))
        pos += len(piece)
    return "".join(text_parts), fixed


def render_plain_text(fragment: str, symbols: Optional[Dict[str, str]] = None) -> RenderedText:
    """Render a comment-free LaTeX fragment to plain text.

    >>> render_plain_text(r"the \\emph{spread} of $G$").text
    'the spread of G'
    """
    warnings: List[Diagnostic] = []
    tree = _build_tree(tokenize_tex(fragment), warnings)
    renderer = _Renderer(SYMBOLS if symbols is None else symbols)
    renderer.warnings = warnings
    renderer.render_nodes(tree)
    return renderer.result()


def map_span(rendered: RenderedText, latex_range: Range) -> Range:
    """Carry a LaTeX range into rendered-text coordinates.

    The result is trimmed of surrounding whitespace. Raises
    :class:`SpanVanished` when the range produced no visible text.
    """
    start, end = rendered.map.to_text_range(latex_range)
    text = rendered.text
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if start == end:
        raise SpanVanished("span vanished in rendering: %r" % (latex_range,))
    return start, end


def normalize_ws(s: str) -> str:
    return " ".join(s.split())
