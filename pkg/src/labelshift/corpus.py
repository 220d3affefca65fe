"""Corpus ingestion, label normalization, and label statistics.

Two input formats are supported:

* JSONL spans: one JSON object per line with a token array (default field
  "tokenized_text") and an entity array (default field "ner") of
  [start, end, label] triples. The end index is inclusive.
* CoNLL BIO: whitespace-separated columns, token in column 0, BIO tag in
  the last column, blank line between sentences.

Both parsers produce the same internal model: token tuples plus entity
spans with inclusive end indices and canonical (normalized) labels.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, NamedTuple

from .errors import DegenerateInputError, ParseError

log = logging.getLogger(__name__)

JSONL_SPANS = "jsonl_spans"
CONLL_BIO = "conll_bio"

DEFAULT_TOKEN_FIELD = "tokenized_text"
DEFAULT_ENTITY_FIELD = "ner"


class Span(NamedTuple):
    """Entity span over sentence tokens; end is inclusive."""

    start: int
    end: int
    label: str


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[str, ...]
    entities: tuple[Span, ...]


@dataclass(frozen=True)
class Corpus:
    """Parsed corpus. Immutable after construction; safe to share."""

    sentences: tuple[Sentence, ...]
    source_format: str
    bio_repairs: int = 0  # orphan I- tags promoted to B- during parsing

    def __post_init__(self):
        if self.source_format not in (JSONL_SPANS, CONLL_BIO):
            raise ValueError(f"unknown source format: {self.source_format!r}")


@dataclass(frozen=True)
class LabelStats:
    """Mention counts per canonical training label."""

    counts: Mapping[str, int]
    total_mentions: int

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "LabelStats":
        for label, count in counts.items():
            if not label:
                raise ValueError("empty label in counts")
            if count < 1:
                raise ValueError(f"count for {label!r} must be >= 1, got {count}")
        return cls(counts=dict(counts), total_mentions=sum(counts.values()))

    def fingerprint(self) -> str:
        """Content hash of the counts, stable across key order."""
        payload = json.dumps(
            {"labels": dict(sorted(self.counts.items()))},
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EvalLabelSet:
    """Union of evaluation labels, optionally broken down per benchmark."""

    labels: tuple[str, ...]
    per_benchmark: Mapping[str, tuple[str, ...]] | None = None

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels in evaluation label set")
        if self.per_benchmark is not None:
            union = {l for subset in self.per_benchmark.values() for l in subset}
            if union != set(self.labels):
                raise ValueError(
                    "labels must equal the union of per-benchmark label sets"
                )

    @classmethod
    def from_benchmarks(
        cls, per_benchmark: Mapping[str, Iterable[str]]
    ) -> "EvalLabelSet":
        """Union in first-seen order across benchmarks."""
        seen: dict[str, None] = {}
        frozen: dict[str, tuple[str, ...]] = {}
        for name, subset in per_benchmark.items():
            uniq: dict[str, None] = {}
            for label in subset:
                uniq.setdefault(label, None)
                seen.setdefault(label, None)
            frozen[name] = tuple(uniq)
        return cls(labels=tuple(seen), per_benchmark=frozen)


def normalize_label(raw: str) -> str:
    """Canonicalize a label: lowercase, separators to spaces, collapse runs.

    Idempotent; raises ValueError when nothing is left.
    """
    parts = raw.lower().replace("_", " ").replace("-", " ").split()
    canonical = " ".join(parts)
    if not canonical:
        raise ValueError(f"empty label after normalization: {raw!r}")
    return canonical


def _text_lines(stream: IO) -> Iterable[str]:
    for line in stream:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line


def _canonical(raw: str, normalize: bool, source: str, lineno: int) -> str:
    if not isinstance(raw, str) or not raw.strip():
        raise ParseError("empty label", source, lineno)
    if not normalize:
        return raw
    try:
        return normalize_label(raw)
    except ValueError as exc:
        raise ParseError(str(exc), source, lineno) from exc


def parse_jsonl_spans(
    stream: IO,
    *,
    token_field: str = DEFAULT_TOKEN_FIELD,
    entity_field: str = DEFAULT_ENTITY_FIELD,
    normalize: bool = True,
    source: str = "",
) -> Corpus:
    """Parse a JSONL spans corpus; blank lines are skipped."""
    sentences: list[Sentence] = []
    for lineno, line in enumerate(_text_lines(stream), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", source, lineno) from exc
        if not isinstance(obj, dict):
            raise ParseError("line is not a JSON object", source, lineno)
        tokens = obj.get(token_field)
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise ParseError(f"missing or invalid token field {token_field!r}", source, lineno)
        raw_entities = obj.get(entity_field)
        if raw_entities is None:
            raw_entities = []
        if not isinstance(raw_entities, list):
            raise ParseError(f"invalid entity field {entity_field!r}", source, lineno)
        entities = []
        for triple in raw_entities:
            if not isinstance(triple, (list, tuple)) or len(triple) != 3:
                raise ParseError(f"entity is not a [start, end, label] triple: {triple!r}", source, lineno)
            start, end, raw_label = triple
            if not isinstance(start, int) or not isinstance(end, int):
                raise ParseError(f"non-integer span bounds: {triple!r}", source, lineno)
            if not (0 <= start <= end < len(tokens)):
                raise ParseError(
                    f"span [{start}, {end}] out of range for {len(tokens)} tokens",
                    source,
                    lineno,
                )
            entities.append(Span(start, end, _canonical(raw_label, normalize, source, lineno)))
        sentences.append(Sentence(tokens=tuple(tokens), entities=tuple(entities)))
    return Corpus(sentences=tuple(sentences), source_format=JSONL_SPANS)


def parse_conll(stream: IO, *, normalize: bool = True, source: str = "") -> Corpus:
    """Parse a CoNLL BIO corpus.

    Orphan I- tags (no open span of the same type) are repaired to B- and
    counted in Corpus.bio_repairs.
    """
    sentences: list[Sentence] = []
    tokens: list[str] = []
    tags: list[tuple[str, int]] = []  # (tag, lineno)
    repairs = 0

    def flush():
        nonlocal repairs, tokens, tags
        if not tokens:
            return
        spans, n = _bio_to_spans(tags, normalize, source)
        repairs += n
        sentences.append(Sentence(tokens=tuple(tokens), entities=tuple(spans)))
        tokens, tags = [], []

    for lineno, line in enumerate(_text_lines(stream), 1):
        stripped = line.strip()
        if not stripped:
            flush()
            continue
        columns = stripped.split()
        if columns[0] == "-DOCSTART-":
            continue
        if len(columns) < 2:
            raise ParseError(f"expected token and tag columns, got {stripped!r}", source, lineno)
        tokens.append(columns[0])
        tags.append((columns[-1], lineno))
    flush()
    return Corpus(sentences=tuple(sentences), source_format=CONLL_BIO, bio_repairs=repairs)


def _bio_to_spans(
    tags: list[tuple[str, int]], normalize: bool, source: str
) -> tuple[list[Span], int]:
    spans: list[Span] = []
    repairs = 0
    open_start: int | None = None
    open_label: str | None = None

    def close(idx: int):
        nonlocal open_start, open_label
        if open_start is not None and open_label is not None:
            spans.append(Span(open_start, idx - 1, open_label))
        open_start, open_label = None, None

    for idx, (tag, lineno) in enumerate(tags):
        if tag == "O":
            close(idx)
            continue
        if len(tag) < 3 or tag[1] != "-" or tag[0] not in ("B", "I"):
            raise ParseError(f"not a BIO tag: {tag!r}", source, lineno)
        label = _canonical(tag[2:], normalize, source, lineno)
        if tag[0] == "B":
            close(idx)
            open_start, open_label = idx, label
        else:  # I-
            if open_label != label:
                # orphan continuation: promote to B- rather than drop data
                close(idx)
                open_start, open_label = idx, label
                repairs += 1
    close(len(tags))
    return spans, repairs


def label_stats(corpus: Corpus) -> LabelStats:
    """Count entity mentions per canonical label across all sentences."""
    counts: dict[str, int] = {}
    for sentence in corpus.sentences:
        for span in sentence.entities:
            counts[span.label] = counts.get(span.label, 0) + 1
    return LabelStats(counts=counts, total_mentions=sum(counts.values()))


def merge_label_stats(parts: Iterable[LabelStats]) -> LabelStats:
    """Combine stats from several corpora by summing counts."""
    counts: dict[str, int] = {}
    for part in parts:
        for label, count in part.counts.items():
            counts[label] = counts.get(label, 0) + count
    return LabelStats(counts=counts, total_mentions=sum(counts.values()))


def write_jsonl_spans(
    corpus: Corpus,
    stream: IO[str],
    *,
    token_field: str = DEFAULT_TOKEN_FIELD,
    entity_field: str = DEFAULT_ENTITY_FIELD,
) -> None:
    for sentence in corpus.sentences:
        obj = {
            token_field: list(sentence.tokens),
            entity_field: [[s.start, s.end, s.label] for s in sentence.entities],
        }
        stream.write(json.dumps(obj, ensure_ascii=False) + "\n")


def write_conll(corpus: Corpus, stream: IO[str]) -> None:
    """Write BIO-tagged output; spans must be non-overlapping."""
    for sentence in corpus.sentences:
        tags = ["O"] * len(sentence.tokens)
        for span in sorted(sentence.entities):
            for i in range(span.start, span.end + 1):
                if tags[i] != "O":
                    raise ValueError(
                        f"overlapping spans cannot be written as BIO: {sentence.entities}"
                    )
            tags[span.start] = f"B-{span.label}"
            for i in range(span.start + 1, span.end + 1):
                tags[i] = f"I-{span.label}"
        for token, tag in zip(sentence.tokens, tags):
            stream.write(f"{token} {tag}\n")
        stream.write("\n")


def write_corpus(corpus: Corpus, stream: IO[str], **kwargs) -> None:
    """Write a corpus back in its source format."""
    if corpus.source_format == JSONL_SPANS:
        write_jsonl_spans(corpus, stream, **kwargs)
    else:
        write_conll(corpus, stream)


def label_stats_to_json(stats: LabelStats) -> dict:
    """The {"labels": {...}} exchange schema; keys sorted for determinism."""
    return {"labels": dict(sorted(stats.counts.items()))}


def label_stats_from_json(obj: dict, *, normalize: bool = True, source: str = "") -> LabelStats:
    if not isinstance(obj, dict) or not isinstance(obj.get("labels"), dict):
        raise ParseError('expected a JSON object with a "labels" mapping', source)
    counts: dict[str, int] = {}
    for raw, count in obj["labels"].items():
        if not isinstance(count, int) or count < 1:
            raise ParseError(f"count for {raw!r} must be a positive integer", source)
        label = _canonical(raw, normalize, source, None)
        counts[label] = counts.get(label, 0) + count  # merge spellings
    return LabelStats(counts=counts, total_mentions=sum(counts.values()))


def load_label_stats(stream: IO, *, normalize: bool = True, source: str = "") -> LabelStats:
    data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", source) from exc
    return label_stats_from_json(obj, normalize=normalize, source=source)


def load_eval_labels(stream: IO, *, normalize: bool = True, source: str = "") -> EvalLabelSet:
    """Read evaluation labels from a text or JSON stream.

    Plain text: one label per line. JSON: {"labels": [...]} or
    {"per_benchmark": {"name": [...], ...}}.
    """
    data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    text = data.strip()
    if not text:
        raise ParseError("no evaluation labels", source)
    if text.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", source) from exc
        if "per_benchmark" in obj:
            per = {
                name: [_canonical(l, normalize, source, None) for l in labels]
                for name, labels in obj["per_benchmark"].items()
            }
            return EvalLabelSet.from_benchmarks(per)
        if "labels" in obj:
            labels = [_canonical(l, normalize, source, None) for l in obj["labels"]]
            return EvalLabelSet(labels=tuple(dict.fromkeys(labels)))
        raise ParseError('expected "labels" or "per_benchmark" key', source)
    labels = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip():
            labels.append(_canonical(line.strip(), normalize, source, lineno))
    return EvalLabelSet(labels=tuple(dict.fromkeys(labels)))


def eval_labels_from_corpus(corpus: Corpus) -> list[str]:
    """Distinct labels in corpus order of first appearance."""
    seen: dict[str, None] = {}
    for sentence in corpus.sentences:
        for span in sentence.entities:
            seen.setdefault(span.label, None)
    return list(seen)
