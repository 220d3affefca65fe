"""Familiarity: support-weighted semantic similarity between label sets.

For one evaluation label the score is a rank-weighted mean over the K
highest clipped cosine similarities between that label and the training
labels, where each training label's similarity is counted once per
mention (its support). Equal similarities form runs, so the repeated
sequence is never materialized; the reduction walks (similarity, count)
pairs and charges each run the cumulative weight of the ranks it spans.
The macro score averages over all evaluation labels.

Weighting schemes for rank r in 1..K: zipf (1/r), linear_decay
((K - r)/K), unweighted (1).
"""

from __future__ import annotations

import concurrent.futures
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .corpus import EvalLabelSet, LabelStats
from .embed import EmbeddingStore, embed_label
from .errors import DegenerateInputError, EmbeddingError

log = logging.getLogger(__name__)

WEIGHTINGS = ("zipf", "linear_decay", "unweighted")

DEFAULT_K = 1000


@dataclass(frozen=True)
class FamiliarityConfig:
    k: int = DEFAULT_K
    weighting: str = "zipf"
    provider_id: str = ""

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(
                f"unknown weighting {self.weighting!r}; expected one of {WEIGHTINGS}"
            )


@dataclass(frozen=True)
class RankedSimilarity:
    """(similarity, support) pairs sorted by similarity descending."""

    pairs: tuple[tuple[float, int], ...]

    def __post_init__(self):
        for (s, c) in self.pairs:
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"similarity out of range: {s}")
            if c < 1:
                raise ValueError(f"count must be >= 1, got {c}")
        sims = [s for s, _ in self.pairs]
        if any(a < b for a, b in zip(sims, sims[1:])):
            raise ValueError("pairs must be sorted by similarity descending")


@dataclass(frozen=True)
class FamiliarityReport:
    per_label: Mapping[str, float]
    macro: float
    effective_k: Mapping[str, int]
    config: FamiliarityConfig
    train_fingerprint: str
    per_benchmark: Mapping[str, float] | None = None
    skipped_train_labels: tuple[str, ...] = ()

    def __post_init__(self):
        for label, score in self.per_label.items():
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"score for {label!r} out of range: {score}")


def weight(k: int, config: FamiliarityConfig) -> float:
    """Weight of rank k under the configured scheme."""
    if not 1 <= k <= config.k:
        raise ValueError(f"rank {k} out of range 1..{config.k}")
    if config.weighting == "zipf":
        return 1.0 / k
    if config.weighting == "linear_decay":
        return (config.k - k) / config.k
    return 1.0


def _train_arrays(
    stats: LabelStats, store: EmbeddingStore
) -> tuple[list[str], np.ndarray, np.ndarray, tuple[str, ...]]:
    """Embed every training label once.

    Labels that cannot be embedded (e.g. all tokens OOV under a word
    vector store) are skipped with a warning rather than poisoning the
    whole run; the skipped list is surfaced in the report.
    """
    if not stats.counts:
        raise DegenerateInputError("no training labels")
    labels: list[str] = []
    counts: list[int] = []
    vectors: list[np.ndarray] = []
    skipped: list[str] = []
    for label in sorted(stats.counts):
        try:
            vectors.append(embed_label(store, label))
        except EmbeddingError as exc:
            log.warning("skipping training label: %s", exc)
            skipped.append(label)
            continue
        labels.append(label)
        counts.append(stats.counts[label])
    if not labels:
        raise EmbeddingError("no training label could be embedded")
    matrix = np.vstack(vectors)
    return labels, np.asarray(counts, dtype=np.int64), matrix, tuple(skipped)


def _clipped_row(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    return np.clip(matrix @ vector, 0.0, 1.0)


def rank_similarities(
    eval_label: str, stats: LabelStats, store: EmbeddingStore
) -> RankedSimilarity:
    """Clipped similarity of one evaluation label against all training labels.

    Ties are ordered by count descending, then label, so the result is
    deterministic; the downstream score does not depend on tie order.
    """
    labels, counts, matrix, _ = _train_arrays(stats, store)
    sims = _clipped_row(matrix, embed_label(store, eval_label))
    triples = sorted(
        zip(sims.tolist(), counts.tolist(), labels), key=lambda t: (-t[0], -t[1], t[2])
    )
    return RankedSimilarity(pairs=tuple((s, c) for s, c, _ in triples))


def _score(sims: np.ndarray, counts: np.ndarray, config: FamiliarityConfig) -> tuple[float, int]:
    try:
        return kernels.weighted_topk_mean(
            sims, counts, config.k, kernels.WEIGHT_CODES[config.weighting]
        )
    except ValueError as exc:
        raise DegenerateInputError(str(exc)) from exc


def familiarity_for_label(
    eval_label: str,
    stats: LabelStats,
    store: EmbeddingStore,
    config: FamiliarityConfig,
) -> tuple[float, int]:
    """Score one evaluation label; returns (score, ranks actually used)."""
    _, counts, matrix, _ = _train_arrays(stats, store)
    sims = _clipped_row(matrix, embed_label(store, eval_label))
    return _score(sims, counts, config)


def familiarity(
    eval_labels: EvalLabelSet,
    stats: LabelStats,
    store: EmbeddingStore,
    config: FamiliarityConfig,
    *,
    threads: int = 1,
) -> FamiliarityReport:
    """Score every evaluation label and macro-average.

    The macro average is the unweighted mean over the union of evaluation
    labels; per-benchmark means are reported when the label set carries a
    benchmark breakdown. Deterministic for identical inputs regardless of
    thread count.
    """
    if not eval_labels.labels:
        raise DegenerateInputError("empty evaluation label set")
    _, counts, matrix, skipped = _train_arrays(stats, store)

    vectors: dict[str, np.ndarray] = {}
    missing: list[str] = []
    for label in eval_labels.labels:
        try:
            vectors[label] = embed_label(store, label)
        except EmbeddingError:
            missing.append(label)
    if missing:
        raise EmbeddingError(
            "evaluation labels not embeddable: " + ", ".join(repr(l) for l in missing)
        )

    def one(label: str) -> tuple[float, int]:
        return _score(_clipped_row(matrix, vectors[label]), counts, config)

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, eval_labels.labels))
    else:
        results = [one(label) for label in eval_labels.labels]

    per_label = {label: score for label, (score, _) in zip(eval_labels.labels, results)}
    effective_k = {label: keff for label, (_, keff) in zip(eval_labels.labels, results)}
    macro = sum(per_label.values()) / len(per_label)

    per_benchmark = None
    if eval_labels.per_benchmark is not None:
        per_benchmark = {
            name: sum(per_label[l] for l in subset) / len(subset)
            for name, subset in eval_labels.per_benchmark.items()
            if subset
        }

    return FamiliarityReport(
        per_label=per_label,
        macro=macro,
        effective_k=effective_k,
        config=config,
        train_fingerprint=stats.fingerprint(),
        per_benchmark=per_benchmark,
        skipped_train_labels=skipped,
    )


def exact_overlap(eval_labels: EvalLabelSet, stats: LabelStats) -> float:
    """Fraction of evaluation labels present verbatim in the training set."""
    if not eval_labels.labels:
        raise DegenerateInputError("empty evaluation label set")
    hits = sum(1 for label in eval_labels.labels if label in stats.counts)
    return hits / len(eval_labels.labels)


def report_to_json(report: FamiliarityReport) -> dict:
    payload: dict = {
        "config": {
            "k": report.config.k,
            "weighting": report.config.weighting,
            "provider_id": report.config.provider_id,
        },
        "macro": report.macro,
        "per_label": dict(report.per_label),
        "effective_k": dict(report.effective_k),
        "train_fingerprint": report.train_fingerprint,
    }
    if report.per_benchmark is not None:
        payload["per_benchmark"] = dict(report.per_benchmark)
    if report.skipped_train_labels:
        payload["skipped_train_labels"] = list(report.skipped_train_labels)
    return payload


def report_from_json(obj: dict) -> FamiliarityReport:
    config = FamiliarityConfig(
        k=obj["config"]["k"],
        weighting=obj["config"]["weighting"],
        provider_id=obj["config"].get("provider_id", ""),
    )
    per_benchmark = obj.get("per_benchmark")
    return FamiliarityReport(
        per_label=dict(obj["per_label"]),
        macro=float(obj["macro"]),
        effective_k={k: int(v) for k, v in obj.get("effective_k", {}).items()},
        config=config,
        train_fingerprint=obj.get("train_fingerprint", ""),
        per_benchmark=dict(per_benchmark) if per_benchmark is not None else None,
        skipped_train_labels=tuple(obj.get("skipped_train_labels", ())),
    )


def report_to_csv(report: FamiliarityReport) -> str:
    """label,score,effective_k rows followed by a macro footer."""
    import csv
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["label", "score", "effective_k"])
    for label, score in report.per_label.items():
        writer.writerow([label, repr(score), report.effective_k[label]])
    writer.writerow(["macro", repr(report.macro), ""])
    return buffer.getvalue()
