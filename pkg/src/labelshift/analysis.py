"""Correlating familiarity with downstream evaluation scores.

Two small statistical helpers (Pearson correlation and an ordinary
least-squares fit in log10 space) plus the plumbing to pair a
familiarity report with an external per-label F1 table.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

from .corpus import EvalLabelSet, LabelStats, normalize_label
from .errors import DegenerateInputError, ParseError
from .metric import FamiliarityReport


@dataclass(frozen=True)
class F1Table:
    """Per-label downstream scores, e.g. zero-shot NER F1 in [0, 1]."""

    source: str
    per_label: Mapping[str, float]


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"fit needs at least 2 points, got {self.n}")
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError(f"r_squared out of range: {self.r_squared}")

    def predict(self, x: float) -> float:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    paired: tuple[tuple[str, float, float], ...]  # (label, familiarity, f1)
    only_in_report: tuple[str, ...]
    only_in_f1: tuple[str, ...]


def load_f1_table(stream: IO[str], *, normalize: bool = True, source: str = "") -> F1Table:
    """Read {"source": ..., "per_label": {label: f1}} from JSON.

    A bare {label: f1} object is accepted too. Labels are normalized the
    same way corpus labels are, so tables written with raw benchmark
    names still join against reports.
    """
    where = source or "<f1 table>"
    try:
        obj = json.load(stream)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", source=where) from exc
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", source=where)
    table = obj.get("per_label", obj)
    label_source = obj.get("source", source) if "per_label" in obj else source
    if not isinstance(table, dict):
        raise ParseError('"per_label" must be an object', source=where)
    per_label: dict[str, float] = {}
    for label, value in table.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"score for {label!r} is not a number", source=where)
        score = float(value)
        if not math.isfinite(score):
            raise ParseError(f"score for {label!r} is not finite", source=where)
        key = normalize_label(label) if normalize else label
        if key in per_label and per_label[key] != score:
            raise ParseError(
                f"label {key!r} appears twice with conflicting scores", source=where
            )
        per_label[key] = score
    if not per_label:
        raise ParseError("table has no labels", source=where)
    return F1Table(source=str(label_source), per_label=per_label)


def partition_eval_labels(
    eval_labels: EvalLabelSet, stats: LabelStats
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Split evaluation labels into (seen in training, unseen)."""
    seen = tuple(l for l in eval_labels.labels if l in stats.counts)
    unseen = tuple(l for l in eval_labels.labels if l not in stats.counts)
    return seen, unseen


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson r, clamped to [-1, 1] against rounding overshoot."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise DegenerateInputError("correlation needs at least 2 points")
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    var_x = sum(d * d for d in dx)
    var_y = sum(d * d for d in dy)
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateInputError("degenerate input: a variable is constant")
    r = sum(a * b for a, b in zip(dx, dy)) / math.sqrt(var_x * var_y)
    return min(max(r, -1.0), 1.0)


def log_linear_fit(counts: Sequence[float], scores: Sequence[float]) -> RegressionFit:
    """OLS of score against log10(count).

    Captures the "every decade of extra mentions buys a constant score
    increment" shape; slope is per factor-of-ten.
    """
    if len(counts) != len(scores):
        raise ValueError(f"length mismatch: {len(counts)} vs {len(scores)}")
    if len(counts) < 2:
        raise DegenerateInputError("fit needs at least 2 points")
    for c in counts:
        if c <= 0:
            raise ValueError(f"counts must be positive to take logs, got {c}")
    xs = [math.log10(c) for c in counts]
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(scores) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in scores]
    ss_xx = sum(d * d for d in dx)
    if ss_xx == 0.0:
        raise DegenerateInputError("all counts are equal; slope is undefined")
    slope = sum(a * b for a, b in zip(dx, dy)) / ss_xx
    intercept = mean_y - slope * mean_x
    ss_tot = sum(d * d for d in dy)
    if ss_tot == 0.0:
        # constant target is fit exactly by the horizontal line
        r_squared = 1.0
    else:
        ss_res = sum(
            (y - (slope * x + intercept)) ** 2 for x, y in zip(xs, scores)
        )
        r_squared = 1.0 - ss_res / ss_tot
    return RegressionFit(
        slope=slope, intercept=intercept, r_squared=min(max(r_squared, 0.0), 1.0), n=n
    )


def correlate_report(report: FamiliarityReport, table: F1Table) -> CorrelationResult:
    """Pair report labels with F1 scores and correlate.

    Pairs follow report order. Labels present on only one side are
    returned, not silently dropped; fewer than 2 matches is an error.
    """
    paired = []
    for label, score in report.per_label.items():
        if label in table.per_label:
            paired.append((label, score, table.per_label[label]))
    only_in_report = tuple(l for l in report.per_label if l not in table.per_label)
    only_in_f1 = tuple(l for l in table.per_label if l not in report.per_label)
    if len(paired) < 2:
        raise DegenerateInputError(
            f"only {len(paired)} label(s) shared between report and F1 table"
        )
    r = pearson([p[1] for p in paired], [p[2] for p in paired])
    return CorrelationResult(
        r=r,
        paired=tuple(paired),
        only_in_report=only_in_report,
        only_in_f1=only_in_f1,
    )


def f1_table_to_json(table: F1Table) -> dict:
    return {"source": table.source, "per_label": dict(table.per_label)}


def correlation_to_json(result: CorrelationResult) -> dict:
    return {
        "pearson_r": result.r,
        "n": len(result.paired),
        "paired": [
            {"label": label, "familiarity": fam, "f1": f1}
            for label, fam, f1 in result.paired
        ],
        "only_in_report": list(result.only_in_report),
        "only_in_f1": list(result.only_in_f1),
    }
