import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defitex.text_renderer import SpanVanished, map_span, normalize_ws, render_plain_text


def text(src):
    return render_plain_text(src).text


@pytest.mark.parametrize(
    "src, out",
    [
        (r"the \emph{spread} of $G$", "the spread of G"),
        (r"\alpha-critical", "α-critical"),
        (r"\foo{bar} baz", "bar baz"),
        (r"P\'olya", "Pólya"),
        (r"Erd\H{o}s", "Erdős"),
        (r"M\"obius", "Möbius"),
        (r"$x\not\in A$", "x∉ A"),
        (r"$a\le b$", "a≤ b"),
        (r"pages 1--3 --- done", "pages 1–3 — done"),
        (r"``quoted''", "“quoted”"),
        (r"a~b", "a b"),
        (r"$\mathbb{R}^n$", "R^n"),
        (r"$\frac{a}{b}$", "a/b"),
        (r"see \cite{X} and \label{y}here", "see X and yhere"),
        ("a  \n  b", "a b"),
        ("a\\\\ b", "a\nb"),
    ],
)
def test_examples(src, out):
    assert text(src) == out


def test_align_breaks_lines():
    src = "\\begin{align}x &= y\\\\ z\\end{align} done"
    assert text(src) == "x = y\nz\ndone"


def test_comments_disappear():
    assert text("a % hidden\n   b") == "a b"


def test_unknown_command_warns_nothing_fatal():
    r = render_plain_text(r"\weird{x}")
    assert r.text == "x"


def test_unbalanced_braces_warn():
    r = render_plain_text(r"a {b")
    assert r.text == "a b"
    assert any(w.kind == "unbalanced-braces" for w in r.warnings)


def test_symbol_override():
    r = render_plain_text(r"$\foo$", {"foo": "★"})
    assert r.text == "★"


def test_map_span_inside_emphasis():
    src = r"A \emph{spread} B"
    r = render_plain_text(src)
    s = src.index("spread")
    assert map_span(r, (s, s + 6)) == (2, 8)
    whole = (src.index("\\emph"), src.index("}") + 1)
    assert map_span(r, whole) == (2, 8)


def test_map_span_of_symbol():
    src = r"\alpha-critical"
    r = render_plain_text(src)
    assert map_span(r, (0, 6)) == (0, 1)
    assert map_span(r, (0, len(src))) == (0, len(r.text))


def test_map_span_vanished():
    r = render_plain_text(r"a \vspace{1cm} b")
    with pytest.raises(SpanVanished):
        map_span(r, (2, 14))


def test_normalize_ws():
    assert normalize_ws("  a \n\t b  ") == "a b"


FRAGMENTS = [
    "word", " ", "\n", "\\emph{", "}", "{", "$x$", "$\\alpha$", "\\'e", "--", "~",
    "% c\n", "\\\\", "\\textit{", "\\weird", "\\frac{a}{b}", "é", "\\cite{k}",
]


@settings(max_examples=400, deadline=None)
@given(st.lists(st.sampled_from(FRAGMENTS), max_size=25).map("".join))
def test_offset_map_monotone_and_covering(src):
    r = render_plain_text(src)
    segs = r.map.segments
    assert r.text == r.text.strip(" ")
    prev_t, prev_l = 0, 0
    for seg in segs:
        assert seg.text_start == prev_t, "segments tile the text"
        assert seg.text_end > seg.text_start
        assert seg.latex_start >= prev_l, "latex ranges are non-decreasing"
        assert seg.latex_end >= seg.latex_start
        prev_t, prev_l = seg.text_end, seg.latex_start
    assert prev_t == len(r.text)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(FRAGMENTS), max_size=20).map("".join), st.data())
def test_map_span_within_bounds(src, data):
    r = render_plain_text(src)
    a = data.draw(st.integers(0, len(src)))
    b = data.draw(st.integers(a, len(src)))
    try:
        s, e = map_span(r, (a, b))
    except SpanVanished:
        return
    assert 0 <= s < e <= len(r.text)
    assert r.text[s:e] == r.text[s:e].strip()
