"""Definienda dataset builder for LaTeX definition environments, plus a term-level evaluator."""

__version__ = "0.1.0"

from .evaluator import EvalReport, evaluate_run  # noqa: E402
from .dataset_builder import LabeledExample  # noqa: E402

__all__ = ["EvalReport", "LabeledExample", "evaluate_run", "__version__"]
