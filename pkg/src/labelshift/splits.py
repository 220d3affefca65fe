"""Training splits of controlled transfer difficulty.

Pipeline: build the clipped-cosine similarity matrix between training
and evaluation labels, collapse each training row to one score (its
maximum, or the entropy of a low-temperature softmax over the row), then
select training labels whose score falls inside a quantile band.

Score direction differs by method: high max-similarity means low shift,
while high entropy (similarity spread evenly over evaluation labels)
means high shift. The built-in quantile profiles encode that inversion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels
from .corpus import Corpus, EvalLabelSet, LabelStats, Sentence
from .embed import EmbeddingStore, embed_label
from .errors import DegenerateInputError

MAX_SIM = "max_sim"
ENTROPY = "entropy"
METHODS = (MAX_SIM, ENTROPY)

LOW_SHIFT = "low_shift"
MEDIUM_SHIFT = "medium_shift"
HIGH_SHIFT = "high_shift"
DIFFICULTIES = (LOW_SHIFT, MEDIUM_SHIFT, HIGH_SHIFT)

DEFAULT_TEMPERATURE = 0.01

# quantile bands per (method, profile); medium is profile-independent
QUANTILE_PROFILES: dict[tuple[str, str], dict[str, tuple[float, float]]] = {
    (MAX_SIM, "pilener-like"): {HIGH_SHIFT: (0.0, 0.05), LOW_SHIFT: (0.99, 1.0)},
    (MAX_SIM, "nuner-like"): {HIGH_SHIFT: (0.0, 0.005), LOW_SHIFT: (0.995, 1.0)},
    (ENTROPY, "pilener-like"): {LOW_SHIFT: (0.0, 0.01), HIGH_SHIFT: (0.95, 1.0)},
    (ENTROPY, "nuner-like"): {LOW_SHIFT: (0.0, 0.005), HIGH_SHIFT: (0.995, 1.0)},
}
MEDIUM_QUANTILES = (0.495, 0.505)
PROFILES = ("pilener-like", "nuner-like")


@dataclass(frozen=True)
class SimilarityMatrix:
    """Rows = training labels (sorted), columns = evaluation labels."""

    train_labels: tuple[str, ...]
    eval_labels: tuple[str, ...]
    values: np.ndarray  # shape (train, eval), entries in [0, 1], read-only

    def __post_init__(self):
        if self.values.shape != (len(self.train_labels), len(self.eval_labels)):
            raise ValueError(
                f"matrix shape {self.values.shape} does not match "
                f"{len(self.train_labels)} x {len(self.eval_labels)} labels"
            )


@dataclass(frozen=True)
class AggregatedScores:
    method: str
    scores: Mapping[str, float]  # training label -> score
    temperature: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown aggregation method: {self.method!r}")


@dataclass(frozen=True)
class SplitSpec:
    difficulty: str
    method: str
    quantile_lo: float
    quantile_hi: float
    selected: tuple[str, ...]  # sorted training labels
    thresholds: tuple[float, float]
    temperature: float | None = None
    provider_id: str = ""
    train_fingerprint: str = ""

    def __post_init__(self):
        if not 0.0 <= self.quantile_lo <= self.quantile_hi <= 1.0:
            raise ValueError(
                f"need 0 <= quantile_lo <= quantile_hi <= 1, got "
                f"({self.quantile_lo}, {self.quantile_hi})"
            )


def similarity_matrix(
    stats: LabelStats, eval_labels: EvalLabelSet, store: EmbeddingStore
) -> SimilarityMatrix:
    """values[i][j] = clipped cosine of train_i (sorted) vs eval_j (set order).

    Unlike the metric, split generation needs a score for every training
    label, so embedding failures propagate instead of being skipped.
    """
    if not stats.counts:
        raise DegenerateInputError("no training labels")
    if not eval_labels.labels:
        raise DegenerateInputError("empty evaluation label set")
    train = sorted(stats.counts)
    train_matrix = np.vstack([embed_label(store, label) for label in train])
    eval_matrix = np.vstack([embed_label(store, label) for label in eval_labels.labels])
    values = np.clip(train_matrix @ eval_matrix.T, 0.0, 1.0)
    values.flags.writeable = False
    return SimilarityMatrix(
        train_labels=tuple(train), eval_labels=tuple(eval_labels.labels), values=values
    )


def aggregate_max(m: SimilarityMatrix) -> AggregatedScores:
    """Best similarity of each training label to any evaluation label."""
    if not m.eval_labels:
        raise DegenerateInputError("similarity matrix has no evaluation columns")
    best = m.values.max(axis=1)
    return AggregatedScores(
        method=MAX_SIM, scores=dict(zip(m.train_labels, best.tolist()))
    )


def aggregate_entropy(
    m: SimilarityMatrix, temperature: float = DEFAULT_TEMPERATURE
) -> AggregatedScores:
    """Entropy of each row's softmax at the given temperature.

    Low entropy = similarity concentrated on few evaluation labels; high
    entropy = spread evenly (bounded by ln of the column count).
    """
    if not m.eval_labels:
        raise DegenerateInputError("similarity matrix has no evaluation columns")
    try:
        entropy = kernels.row_entropy(m.values, temperature)
    except ValueError as exc:
        raise DegenerateInputError(str(exc)) from exc
    return AggregatedScores(
        method=ENTROPY,
        scores=dict(zip(m.train_labels, entropy.tolist())),
        temperature=temperature,
    )


def select_quantile(
    scores: AggregatedScores,
    quantile_lo: float,
    quantile_hi: float,
    *,
    difficulty: str = "custom",
) -> SplitSpec:
    """Select labels whose score lies inside the quantile band (inclusive).

    Thresholds interpolate linearly between order statistics. Both bounds
    are inclusive: with heavily tied scores an exclusive bound could
    silently empty a split.
    """
    if not scores.scores:
        raise DegenerateInputError("empty score map")
    if not 0.0 <= quantile_lo <= quantile_hi <= 1.0:
        raise ValueError(
            f"need 0 <= quantile_lo <= quantile_hi <= 1, got ({quantile_lo}, {quantile_hi})"
        )
    values = np.fromiter(scores.scores.values(), dtype=np.float64, count=len(scores.scores))
    lo, hi = np.quantile(values, [quantile_lo, quantile_hi]).tolist()
    selected = tuple(
        sorted(label for label, score in scores.scores.items() if lo <= score <= hi)
    )
    if not selected:
        raise DegenerateInputError(
            f"selection is empty for thresholds [{lo!r}, {hi!r}]"
        )
    return SplitSpec(
        difficulty=difficulty,
        method=scores.method,
        quantile_lo=quantile_lo,
        quantile_hi=quantile_hi,
        selected=selected,
        thresholds=(lo, hi),
        temperature=scores.temperature,
    )


def profile_quantiles(method: str, difficulty: str, dataset_profile: str) -> tuple[float, float]:
    """Quantile band for a built-in dataset profile."""
    if difficulty == MEDIUM_SHIFT:
        return MEDIUM_QUANTILES
    if difficulty not in DIFFICULTIES:
        raise ValueError(f"unknown difficulty: {difficulty!r}")
    bands = QUANTILE_PROFILES.get((method, dataset_profile))
    if bands is None:
        raise ValueError(f"unknown profile: {method}/{dataset_profile}")
    return bands[difficulty]


def make_split(
    stats: LabelStats,
    eval_labels: EvalLabelSet,
    store: EmbeddingStore,
    method: str,
    difficulty: str,
    dataset_profile: str,
    *,
    temperature: float = DEFAULT_TEMPERATURE,
) -> SplitSpec:
    """similarity_matrix -> aggregate -> quantile selection, with provenance."""
    if method not in METHODS:
        raise ValueError(f"unknown aggregation method: {method!r}")
    quantile_lo, quantile_hi = profile_quantiles(method, difficulty, dataset_profile)
    matrix = similarity_matrix(stats, eval_labels, store)
    if method == MAX_SIM:
        scores = aggregate_max(matrix)
    else:
        scores = aggregate_entropy(matrix, temperature)
    spec = select_quantile(scores, quantile_lo, quantile_hi, difficulty=difficulty)
    return SplitSpec(
        difficulty=spec.difficulty,
        method=spec.method,
        quantile_lo=spec.quantile_lo,
        quantile_hi=spec.quantile_hi,
        selected=spec.selected,
        thresholds=spec.thresholds,
        temperature=spec.temperature,
        provider_id=store.provider_id,
        train_fingerprint=stats.fingerprint(),
    )


def filter_corpus(corpus: Corpus, spec: SplitSpec, *, drop_empty: bool = False) -> Corpus:
    """Remove every entity whose label is not selected.

    Sentences left without entities are kept by default; negative
    examples matter for NER training data.
    """
    selected = set(spec.selected)
    sentences = []
    for sentence in corpus.sentences:
        kept = tuple(span for span in sentence.entities if span.label in selected)
        if drop_empty and not kept:
            continue
        sentences.append(Sentence(tokens=sentence.tokens, entities=kept))
    return Corpus(
        sentences=tuple(sentences),
        source_format=corpus.source_format,
        bio_repairs=corpus.bio_repairs,
    )


def split_to_json(spec: SplitSpec) -> dict:
    payload: dict = {
        "method": spec.method,
        "difficulty": spec.difficulty,
        "quantiles": [spec.quantile_lo, spec.quantile_hi],
        "thresholds": list(spec.thresholds),
        "selected": list(spec.selected),
        "provider_id": spec.provider_id,
        "train_fingerprint": spec.train_fingerprint,
    }
    if spec.temperature is not None:
        payload["temperature"] = spec.temperature
    return payload


def split_from_json(obj: dict) -> SplitSpec:
    return SplitSpec(
        difficulty=obj["difficulty"],
        method=obj["method"],
        quantile_lo=float(obj["quantiles"][0]),
        quantile_hi=float(obj["quantiles"][1]),
        selected=tuple(obj["selected"]),
        thresholds=(float(obj["thresholds"][0]), float(obj["thresholds"][1])),
        temperature=obj.get("temperature"),
        provider_id=obj.get("provider_id", ""),
        train_fingerprint=obj.get("train_fingerprint", ""),
    )
