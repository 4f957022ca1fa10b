"""Term-level scoring of extracted definienda against ground truth.

For every unique expected term four independent tests are run against the
extracted terms of the same text (all lowercased):

* true positive: some extracted term is identical;
* cut off: the expected term strictly contains some extracted term;
* too long: some extracted term strictly contains the expected term;
* true positive or split term: a true positive, or the expected term with
  spaces removed occurs in the concatenation of all extracted terms with
  spaces removed.

A term can land in several categories at once. Precision, recall and F1
are computed from the last count.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import asdict, dataclass, fields
from typing import Dict, Iterable, List, Optional, Sequence, Tuple


class EvaluationError(ValueError):
    pass


class IdMismatchError(EvaluationError):
    def __init__(self, message: str, ids: Sequence[str]):
        self.ids = list(ids)
        super().__init__("%s: %s" % (message, ", ".join(self.ids)))


def normalize_term(term: str) -> str:
    return " ".join(term.lower().split())


def dedupe_terms(terms: Iterable[str]) -> List[str]:
    """Lowercase, squeeze whitespace and drop repeats, keeping first occurrences.

    Terms that normalize to the empty string are dropped.
    """
    seen = {}
    for t in terms:
        key = normalize_term(t)
        if key:
            seen.setdefault(key, None)
    return list(seen)


def dedupe_expected(example) -> List[str]:
    terms = example.terms if hasattr(example, "terms") else example
    return dedupe_terms(terms)


def _nospace(s: str) -> str:
    return "".join(s.split())


@dataclass(frozen=True)
class TermMatch:
    expected: str
    tp: bool
    tp_split: bool
    cut_off: bool
    too_long: bool
    # extracted terms responsible for each flag
    exact: Tuple[str, ...] = ()
    contained: Tuple[str, ...] = ()
    containing: Tuple[str, ...] = ()

    @property
    def split_only(self) -> bool:
        return self.tp_split and not self.tp


def match_term(expected: str, extracted: Sequence[str], joined: Optional[str] = None) -> TermMatch:
    if joined is None:
        joined = "".join(_nospace(x) for x in extracted)
    exact = tuple(x for x in extracted if x == expected)
    contained = tuple(x for x in extracted if x != expected and x in expected)
    containing = tuple(x for x in extracted if x != expected and expected in x)
    tp = bool(exact)
    return TermMatch(
        expected=expected,
        tp=tp,
        tp_split=tp or _nospace(expected) in joined,
        cut_off=bool(contained),
        too_long=bool(containing),
        exact=exact,
        contained=contained,
        containing=containing,
    )


@dataclass
class MatchCounts:
    n_expected: int = 0
    n_extracted: int = 0
    tp: int = 0
    tp_split: int = 0
    too_long: int = 0
    cut_off: int = 0

    def add(self, other: "MatchCounts") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


def count_matches(expected: Sequence[str], extracted: Sequence[str]) -> MatchCounts:
    """Category counts for one text; both sides already lowercased and unique."""
    extracted = [x for x in extracted if x]
    joined = "".join(_nospace(x) for x in extracted)
    counts = MatchCounts(n_expected=len(expected), n_extracted=len(extracted))
    for e in expected:
        m = match_term(e, extracted, joined)
        counts.tp += m.tp
        counts.tp_split += m.tp_split
        counts.cut_off += m.cut_off
        counts.too_long += m.too_long
    return counts


def compute_metrics(tp_split: int, n_extracted: int, n_expected: int) -> Tuple[float, float, float]:
    if n_expected <= 0:
        raise EvaluationError("empty ground truth")
    if n_extracted < 0 or tp_split < 0:
        raise EvaluationError("negative count")
    precision = tp_split / n_extracted if n_extracted else 0.0
    recall = tp_split / n_expected
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


METRICS = ("precision", "recall", "f1")
COUNTS = ("n_expected", "n_extracted", "tp", "tp_split", "too_long", "cut_off")


@dataclass(frozen=True)
class EvalReport:
    n_expected: int
    n_extracted: int
    tp: int
    tp_split: int
    too_long: int
    cut_off: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, c: MatchCounts) -> "EvalReport":
        p, r, f = compute_metrics(c.tp_split, c.n_extracted, c.n_expected)
        return cls(c.n_expected, c.n_extracted, c.tp, c.tp_split, c.too_long, c.cut_off, p, r, f)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in METRICS:
            d[k] = round(d[k], 4)
        d["metadata"] = {"dedup_extracted": True, "category_semantics": "independent"}
        return d

    def summary(self) -> str:
        return "P=%.4f R=%.4f F1=%.4f (tp+split %d / extracted %d / expected %d)" % (
            self.precision, self.recall, self.f1, self.tp_split, self.n_extracted, self.n_expected
        )


@dataclass(frozen=True)
class PredictionRecord:
    example_id: str
    terms: Tuple[str, ...]

    @classmethod
    def from_dict(cls, d: dict) -> "PredictionRecord":
        if not isinstance(d, dict) or not isinstance(d.get("id"), str):
            raise EvaluationError("prediction record needs a string id")
        terms = d.get("terms")
        if not isinstance(terms, list) or not all(isinstance(t, str) for t in terms):
            raise EvaluationError("%s: terms must be a list of strings" % d["id"])
        return cls(d["id"], tuple(terms))

    def to_dict(self) -> dict:
        return {"id": self.example_id, "terms": list(self.terms)}


def evaluate_run(ground_truth, predictions: Iterable[PredictionRecord], details: Optional[list] = None) -> EvalReport:
    """Score one prediction run against the ground-truth examples.

    Examples without a prediction count as having extracted nothing. When
    ``details`` is a list, one dict per expected term is appended to it.
    """
    by_id: Dict[str, PredictionRecord] = {}
    dupes = []
    for p in predictions:
        if p.example_id in by_id:
            dupes.append(p.example_id)
        by_id[p.example_id] = p
    if dupes:
        raise IdMismatchError("duplicate prediction ids", sorted(set(dupes)))
    gold_ids = {ex.id for ex in ground_truth}
    unknown = sorted(set(by_id) - gold_ids)
    if unknown:
        raise IdMismatchError("predictions for unknown ids", unknown)

    total = MatchCounts()
    for ex in ground_truth:
        expected = dedupe_expected(ex)
        pred = by_id.get(ex.id)
        extracted = dedupe_terms(pred.terms) if pred else []
        total.add(count_matches(expected, extracted))
        if details is not None:
            joined = "".join(_nospace(x) for x in extracted)
            for e in expected:
                m = match_term(e, extracted, joined)
                details.append(
                    {
                        "id": ex.id,
                        "expected": e,
                        "tp": m.tp,
                        "tp_split": m.tp_split,
                        "cut_off": m.cut_off,
                        "too_long": m.too_long,
                        # split credit with no single extracted term touching e
                        "accidental_split": m.split_only and not (m.contained or m.containing),
                        "exact": list(m.exact),
                        "contained": list(m.contained),
                        "containing": list(m.containing),
                    }
                )
    return EvalReport.from_counts(total)


@dataclass(frozen=True)
class AggregateReport:
    n_runs: int
    mean: Dict[str, float]
    std: Dict[str, float]

    def to_dict(self) -> dict:
        return {
            "n_runs": self.n_runs,
            "mean": {k: round(v, 4) for k, v in self.mean.items()},
            "std": {k: round(v, 4) for k, v in self.std.items()},
        }


def aggregate_folds(reports: Sequence[EvalReport]) -> AggregateReport:
    """Mean and sample standard deviation (n - 1) of every field."""
    if not reports:
        raise EvaluationError("no reports to aggregate")
    mean, std = {}, {}
    for name in COUNTS + METRICS:
        values = [float(getattr(r, name)) for r in reports]
        mean[name] = statistics.fmean(values)
        std[name] = statistics.stdev(values) if len(values) > 1 else 0.0
        if math.isnan(std[name]):
            std[name] = 0.0
    return AggregateReport(len(reports), mean, std)


def oracle_predictions(ground_truth) -> List[PredictionRecord]:
    return [PredictionRecord(ex.id, tuple(dedupe_expected(ex))) for ex in ground_truth]


def read_predictions(lines: Iterable[str]) -> List[PredictionRecord]:
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            out.append(PredictionRecord.from_dict(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise EvaluationError("predictions line %d: %s" % (lineno, exc)) from None
        except EvaluationError as exc:
            raise EvaluationError("predictions line %d: %s" % (lineno, exc)) from None
    return out
