import json
from collections import Counter
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defitex.dataset_builder import (
    B,
    I,
    O,
    CorrectionError,
    LabeledExample,
    SchemaError,
    SplitSpec,
    apply_corrections,
    build_examples,
    decode_iob2,
    example_from_spans,
    is_valid_iob2,
    kfold,
    label_iob2,
    load_corrections,
    reserve_test,
    sort_chronological,
    subsample,
    tokenize_text,
    training_set,
)
from defitex.pipeline import DefinitionRecord, RecordSpan
from defitex.text_renderer import normalize_ws

import oracles


def surfaces(text):
    return [t.surface for t in tokenize_text(text)]


@pytest.mark.parametrize(
    "text, toks",
    [
        ("A spread is large.", ["A", "spread", "is", "large", "."]),
        ("non-k-equivalent", ["non-k-equivalent"]),
        ("(G, ≤)", ["(", "G", ",", "≤", ")"]),
        ("a/b x_1", ["a/b", "x_1"]),
        ("“quoted”", ["“", "quoted", "”"]),
        ("", []),
    ],
)
def test_tokenize(text, toks):
    assert surfaces(text) == toks


@given(st.text(alphabet=st.sampled_from(list("ab -.,()\n\"“é")), max_size=40))
def test_tokenize_matches_oracle(text):
    assert [tuple(t) for t in tokenize_text(text)] == oracles.tokenize(text)


def test_label_single_and_multi_token():
    toks = tokenize_text("A spread is")
    assert label_iob2(toks, [(2, 8)]) == [O, B, O]
    toks = tokenize_text("graph coloring")
    assert label_iob2(toks, [(0, 14)]) == [B, I]
    assert label_iob2(toks, []) == [O, O]


def test_label_partial_overlap_counts():
    toks = tokenize_text("hypergraphs are fun")
    assert label_iob2(toks, [(5, 7)]) == [B, O, O]


def test_label_out_of_range():
    with pytest.raises(ValueError):
        label_iob2(tokenize_text("ab"), [(0, 5)], text_length=2)


def test_unmatched_span_reported():
    unmatched = []
    label_iob2(tokenize_text("a  b"), [(1, 3)], 4, unmatched)
    assert unmatched == [(1, 3)]


def test_adjacent_spans_are_separate_chunks():
    toks = tokenize_text("red blue")
    assert label_iob2(toks, [(0, 3), (4, 8)]) == [B, B]


def test_is_valid_iob2():
    assert is_valid_iob2([O, B, I, O, B])
    assert not is_valid_iob2([I])
    assert not is_valid_iob2([O, I])


TEXT_ALPHABET = st.sampled_from(list("ab  c.,()-x"))


@settings(max_examples=1000, deadline=None)
@given(st.text(alphabet=TEXT_ALPHABET, max_size=30), st.data())
def test_label_matches_character_oracle(text, data):
    n = len(text)
    spans = data.draw(st.lists(st.tuples(st.integers(0, n), st.integers(0, n)).map(sorted).map(tuple), max_size=4))
    toks = tokenize_text(text)
    tags = label_iob2(toks, spans, n)
    assert [t.value for t in tags] == oracles.iob2_by_overlap([tuple(t) for t in toks], spans)
    assert len(tags) == len(toks) and is_valid_iob2(tags)


def record(text, spans, pid="p", idx=0, ts=None):
    return DefinitionRecord(pid, idx, "", None, text, [RecordSpan(s, e, text[s:e]) for s, e in spans], ts)


def test_build_examples_terms_and_filter():
    text = "The spread of G, i.e. the (iii) thing."
    kept, dropped = build_examples([record(text, [(4, 10), (17, 21), (26, 31)])])
    assert dropped == 0
    (ex,) = kept
    assert ex.terms == ["spread"]
    assert ex.id == "p#0"


def test_build_examples_length_threshold_is_strict():
    at = " ".join(["w"] * 500)
    over = " ".join(["w"] * 501)
    kept, dropped = build_examples([record(at, []), record(over, [], idx=1)])
    assert [e.id for e in kept] == ["p#0"] and dropped == 1


def test_build_examples_drop_empty():
    kept, _ = build_examples([record("no terms here", [])])
    assert len(kept) == 1 and set(kept[0].tags) == {O}
    kept, _ = build_examples([record("no terms here", [])], drop_empty=True)
    assert kept == []


def test_seventy_token_block_kept():
    words = ["w%d" % i for i in range(69)] + ["term"]
    text = " ".join(words)
    kept, _ = build_examples([record(text, [(len(text) - 4, len(text))])])
    assert len(kept[0].tokens) == 70 and kept[0].terms == ["term"]


def test_example_dict_round_trip():
    ex = example_from_spans("p#3", "A (graph coloring).", [(3, 17)], datetime(2020, 1, 1, tzinfo=timezone.utc))
    d = json.loads(json.dumps(ex.to_dict()))
    assert d["tags"] == ["O", "O", "B-MATH_TERM", "I-MATH_TERM", "O", "O"]
    back = LabeledExample.from_dict(d)
    assert back.tokens == ex.tokens and back.tags == ex.tags and back.terms == ex.terms
    assert back.last_updated == ex.last_updated


def test_example_schema_errors():
    with pytest.raises(SchemaError):
        LabeledExample.from_dict({"id": "x", "tokens": ["a"], "tags": ["Q"]})
    with pytest.raises(SchemaError):
        LabeledExample.from_dict({"id": "x", "tokens": ["a"], "tags": ["O", "O"], "text": "a"})


def test_terms_round_trip_on_fixtures(examples):
    for ex in examples:
        decoded = [ex.text[s:e] for s, e in decode_iob2(ex.tokens, ex.tags)]
        assert Counter(map(normalize_ws, decoded)) == Counter(map(normalize_ws, ex.terms))
        assert is_valid_iob2(ex.tags) and len(ex.tags) == len(ex.tokens) <= 500


def mk(pid, idx, ts):
    return LabeledExample("%s#%d" % (pid, idx), "t", tokenize_text("t"), [O], [], ts)


def test_sort_chronological():
    t1 = datetime(2019, 1, 1, tzinfo=timezone.utc)
    t0 = datetime(2018, 6, 1, tzinfo=timezone.utc)
    out = sort_chronological([mk("b", 0, t1), mk("a", 0, t0)])
    assert [e.id for e in out] == ["a#0", "b#0"]
    out = sort_chronological([mk("b", 1, t0), mk("b", 0, t0), mk("a", 2, t0)])
    assert [e.id for e in out] == ["a#2", "b#0", "b#1"]
    single = [mk("a", 0, t0)]
    assert sort_chronological(single) == single


def test_sort_block_index_numeric():
    t = datetime(2018, 1, 1, tzinfo=timezone.utc)
    out = sort_chronological([mk("a", 10, t), mk("a", 2, t)])
    assert [e.id for e in out] == ["a#2", "a#10"]


def test_sort_missing_timestamp_epoch():
    diags = []
    t = datetime(2018, 1, 1, tzinfo=timezone.utc)
    out = sort_chronological([mk("b", 0, t), mk("a", 0, None)], diagnostics=diags)
    assert out[0].id == "a#0"
    assert [d.kind for d in diags] == ["missing-timestamp"]


def test_sort_uses_manifest_timestamps():
    t0 = datetime(2018, 1, 1, tzinfo=timezone.utc)
    t1 = datetime(2019, 1, 1, tzinfo=timezone.utc)
    out = sort_chronological([mk("a", 0, t0), mk("b", 0, t1)], {"a": t1, "b": t0})
    assert [e.id for e in out] == ["b#0", "a#0"]


def test_reserve_test():
    items = list(range(13653))
    pool, rest = reserve_test(items, 1024)
    assert len(pool) == 1024 and len(rest) == 12629 and pool == items[:1024]
    pool, rest = reserve_test(list(range(10)), 1024)
    assert len(pool) == 10 and rest == []
    assert reserve_test([1, 2], 0) == ([], [1, 2])


def test_corrections():
    exs = [example_from_spans("p#%d" % i, "A spread and a coloring.", [(2, 8)]) for i in range(1024)]
    drops = ['{"id": "p#%d", "action": "drop"}' % i for i in range(25)]
    gt = apply_corrections(exs, load_corrections(drops))
    assert len(gt) == 999
    assert apply_corrections(exs, load_corrections([])) == exs
    fix = load_corrections(['{"id": "p#30", "action": "replace", "terms": []}',
                            '{"id": "p#31", "action": "replace", "terms": ["coloring", "Spread"]}'])
    out = apply_corrections(exs, fix)
    assert out[30].terms == [] and set(out[30].tags) == {O}
    assert out[31].terms == ["spread", "coloring"]
    assert [e.id for e in out] == [e.id for e in exs]


def test_corrections_unknown_id():
    with pytest.raises(CorrectionError) as info:
        apply_corrections([], load_corrections(['{"id": "zz", "action": "drop"}']))
    assert info.value.unknown_ids == ["zz"]


@pytest.mark.parametrize("line", ['{"id": 1, "action": "drop"}', '{"id": "a", "action": "zap"}',
                                  '{"id": "a", "action": "replace"}', "not json"])
def test_corrections_schema(line):
    with pytest.raises(SchemaError):
        load_corrections([line])


def test_kfold_sizes():
    assert [len(f) for f in kfold(list(range(20)), 10, 1)] == [2] * 10
    assert sorted(len(f) for f in kfold(list(range(21)), 10, 1)) == [2] * 9 + [3]
    assert kfold(list(range(50)), 10, 7) == kfold(list(range(50)), 10, 7)
    for bad in (1, 51):
        with pytest.raises(ValueError):
            kfold(list(range(50)), bad, 0)


@given(st.integers(2, 60), st.integers(2, 10), st.integers(0, 2**31))
def test_split_algebra(n, k, seed):
    if k > n:
        return
    items = list(range(n))
    folds = kfold(items, k, seed)
    flat = [x for f in folds for x in f]
    assert sorted(flat) == items
    assert max(map(len, folds)) - min(map(len, folds)) <= 1
    for i in range(k):
        assert sorted(training_set(folds, i) + folds[i]) == items


def test_subsample():
    items = list(range(12000))
    a = subsample(items, 2048, "42/0/2048")
    assert len(a) == 2048 == len(set(a))
    assert a == subsample(items, 2048, "42/0/2048")
    assert a == sorted(a)
    assert subsample(items[:5], 10, 1) == items[:5]
    assert subsample(items, 0, 1) == []


def test_split_spec_check_and_dict():
    spec = SplitSpec(["t"], [["a"], ["b"]], 42, [1], ["t", "u"])
    spec.check()
    d = spec.to_dict()
    assert d["seed"] == 42 and d["test"] == ["t"] and d["folds"] == [["a"], ["b"]]
    assert d["subsamples"] == {"1": [["b"], ["a"]]}
    with pytest.raises(AssertionError):
        SplitSpec(["a"], [["a"], ["b"]], 42).check()
