import re
from types import SimpleNamespace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defitex.def_extractor import (
    DefinitionBlock,
    NoiseFilter,
    SpanKind,
    extract_definienda_spans,
    extract_definition_blocks,
    filter_noise,
    strip_comments,
)
from defitex.text_renderer import render_plain_text

PAPER = SimpleNamespace(paper_id="p", last_updated=None)


def block(raw, opt=None):
    return DefinitionBlock("p", 0, raw, opt, (0, len(raw)))


def terms(raw, opt=None):
    return [s.term_latex for s in extract_definienda_spans(block(raw, opt))]


def test_three_blocks_in_order():
    src = "".join("\\begin{definition}%d\\end{definition}" % i for i in range(3))
    blocks = extract_definition_blocks(PAPER, src)
    assert [b.block_index for b in blocks] == [0, 1, 2]
    assert [b.raw_latex for b in blocks] == ["0", "1", "2"]


def test_no_definitions():
    assert extract_definition_blocks(PAPER, "\\begin{theorem}x\\end{theorem}") == []


def test_def_environment_ignored_and_extra_env_optional():
    src = "\\begin{Def}\\emph{a}\\end{Def}\\begin{definition}\\emph{b}\\end{definition}"
    assert len(extract_definition_blocks(PAPER, src)) == 1
    both = extract_definition_blocks(PAPER, src, env_names=("definition", "Def"))
    assert [b.env_name for b in both] == ["Def", "definition"]


def test_comments_removed_from_raw_latex():
    src = "\\begin{definition}A % \\emph{no}\n  \\emph{yes} 50\\% \\end{definition}"
    (b,) = extract_definition_blocks(PAPER, src)
    assert "no" not in b.raw_latex and "50\\%" in b.raw_latex
    assert terms(b.raw_latex) == ["yes"]


def test_strip_comments_keeps_escaped_percent():
    assert strip_comments("a\\% b % c\nd") == "a\\% b d"


def test_spread_components_spans():
    raw = r"The \emph{spread} of $G$ \dots the \emph{components} of $G$."
    assert terms(raw) == ["spread", "components"]


def rendered(raw):
    return [render_plain_text(t).text for t in terms(raw)]


def test_compound_extension():
    raw = r"are \emph{non}-k-equivalent."
    spans = extract_definienda_spans(block(raw))
    assert [(s.term_latex, s.kind) for s in spans] == [(r"\emph{non}-k-equivalent", SpanKind.EMPH)]
    assert rendered(raw) == ["non-k-equivalent"]


def test_compound_extension_through_math_and_leftwards():
    assert rendered(r"a \emph{$k$}-connected graph") == ["k-connected"]
    assert rendered(r"a $k$-\emph{connected} graph") == ["k-connected"]


def test_no_extension_across_space():
    assert terms(r"\emph{spread} of") == ["spread"]


def test_optional_argument_only():
    spans = extract_definienda_spans(block("no emphasis here", opt="spread"))
    assert [(s.kind, s.term_latex) for s in spans] == [(SpanKind.OPTIONAL_ARG, "spread")]


def test_textit_and_nested_outermost():
    assert terms(r"\textit{a} and \emph{b \emph{c} d}") == ["a", r"b \emph{c} d"]


def test_duplicates_preserved():
    assert terms(r"\emph{x y} and \emph{x y}") == ["x y", "x y"]


def test_unbalanced_markup_skipped():
    diags = []
    spans = extract_definienda_spans(block(r"\emph{open and \emph{ok}"), diags)
    assert any(d.kind == "unbalanced-markup" for d in diags)
    assert all(s.term_latex != "open and" for s in spans)


def test_term_latex_is_braced_content_before_extension():
    raw = r"x \emph{foo bar} y"
    (s,) = extract_definienda_spans(block(raw))
    assert s.term_latex == raw[s.start : s.end] == "foo bar"
    assert raw[slice(*s.content)] == "foo bar"


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(
    [" ", "w", "-", "\\emph{", "\\textit{", "}", "a b", "$x$", ".", "\\emph{t}"]
), max_size=20).map("".join))
def test_spans_never_overlap_within_kind(raw):
    spans = [s for s in extract_definienda_spans(block(raw)) if s.kind is not SpanKind.OPTIONAL_ARG]
    for a, b in zip(spans, spans[1:]):
        assert a.end <= b.start
    for s in spans:
        lo, hi = s.content
        assert s.start <= lo <= hi <= s.end
        assert s.term_latex == raw[s.start : s.end]


# -- noise filter ------------------------------------------------------------


@pytest.mark.parametrize(
    "term, reason",
    [
        ("i.e.", "abbreviation"),
        ("e.g.", "abbreviation"),
        ("cf.", "abbreviation"),
        ("resp.", "abbreviation"),
        ("etc.", "abbreviation"),
        ("et al.", "latin-locution"),
        ("a priori", "latin-locution"),
        ("Vice  Versa", "latin-locution"),
        ("(i)", "list-entry"),
        ("(iii)", "list-entry"),
        ("(a)", "list-entry"),
        ("(1)", "list-entry"),
        ("1.", "list-entry"),
        ("iv)", "list-entry"),
        ("", "empty"),
        ("  ", "empty"),
        ("--", "punctuation"),
        ("42", "digits"),
        ("x", "single-character"),
        ("\\d", "single-character"),
    ],
)
def test_rejected(term, reason):
    assert filter_noise(term) == reason


@pytest.mark.parametrize("term", ["chromatic number", "mix", "dim", "vertex", "k-critical", "Ramsey number"])
def test_kept(term):
    assert filter_noise(term) is None


def test_filter_file(tmp_path):
    f = tmp_path / "filters.txt"
    f.write_text("# comment\nlatin-locution: et\\s+al\nfoo+\n", encoding="utf-8")
    nf = NoiseFilter.from_file(f)
    assert nf.check("et al.") == "latin-locution"
    assert nf.check("fooo") == "custom"
    assert nf.check("i.e.") is None  # defaults replaced
    assert nf.check("x") == "single-character"


def test_filter_file_bad_regex(tmp_path):
    f = tmp_path / "filters.txt"
    f.write_text("(unclosed\n", encoding="utf-8")
    with pytest.raises(re.error):
        NoiseFilter.from_file(f)


@given(st.lists(st.text(max_size=12), max_size=30))
def test_filter_partitions_and_is_idempotent(items):
    nf = NoiseFilter()
    kept, rejected = nf.partition(items)
    assert len(kept) + len(rejected) == len(items)
    assert all(nf.check(t) is None for t in kept)
    assert all(nf.check(t) == r for t, r in rejected)
    assert nf.partition(kept) == (kept, [])
