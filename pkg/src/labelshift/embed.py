"""Label embedding stores and clipped cosine similarity.

A store maps canonical label strings to L2-normalized float64 vectors.
Stores come from three places: classical word-vector files (word2vec
text format, composed per label by token averaging), labeled TSV files
(one whole-label vector per row, e.g. exported from a sentence encoder),
or a remote embedding service speaking a small JSON protocol.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import logging
import time
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

import numpy as np
import requests

from .errors import EmbeddingError, ParseError, RemoteError

log = logging.getLogger(__name__)

WORD2VEC_TEXT = "word2vec_text"
LABELED_TSV = "labeled_tsv"

WHOLE_STRING = "whole_string"
TOKEN_AVERAGE = "token_average"

ZERO_NORM = 1e-12


def _unit(vector: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    if norm < ZERO_NORM:
        raise ValueError("zero vector cannot be normalized")
    return vector / norm


@dataclass(frozen=True)
class EmbeddingStore:
    """Immutable label -> unit vector map."""

    dim: int
    vectors: Mapping[str, np.ndarray]
    provider_id: str
    composition: str  # WHOLE_STRING or TOKEN_AVERAGE

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.composition not in (WHOLE_STRING, TOKEN_AVERAGE):
            raise ValueError(f"unknown composition: {self.composition!r}")

    def __len__(self) -> int:
        return len(self.vectors)


def _freeze(vectors: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    for v in vectors.values():
        v.flags.writeable = False
    return vectors


def load_vector_file(
    stream: IO,
    format: str,
    *,
    provider_id: str | None = None,
    source: str = "",
) -> EmbeddingStore:
    """Load a word2vec text or labeled TSV file; vectors are normalized.

    Zero vectors are rejected line by line with a warning. Inconsistent
    dimensions and non-finite values are hard errors. Default provider id
    is derived from the file content hash.
    """
    data = stream.read()
    if isinstance(data, str):
        data = data.encode("utf-8")
    if provider_id is None:
        provider_id = f"{format}:{hashlib.sha256(data).hexdigest()[:12]}"
    text = data.decode("utf-8")

    if format == WORD2VEC_TEXT:
        vectors, dim = _parse_word2vec_text(text, source)
        composition = TOKEN_AVERAGE
    elif format == LABELED_TSV:
        vectors, dim = _parse_labeled_tsv(text, source)
        composition = WHOLE_STRING
    else:
        raise ValueError(f"unknown vector file format: {format!r}")

    if not vectors:
        raise ParseError("no usable vectors in file", source)
    return EmbeddingStore(
        dim=dim, vectors=_freeze(vectors), provider_id=provider_id, composition=composition
    )


def _parse_vector(parts: Sequence[str], source: str, lineno: int) -> np.ndarray:
    try:
        vector = np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"non-numeric vector component: {exc}", source, lineno) from exc
    if not np.isfinite(vector).all():
        raise ParseError("non-finite vector component", source, lineno)
    return vector


def _parse_word2vec_text(text: str, source: str) -> tuple[dict[str, np.ndarray], int]:
    lines = text.splitlines()
    start = 0
    declared_count = None
    declared_dim = None
    if lines:
        head = lines[0].split()
        if len(head) == 2:
            try:
                declared_count, declared_dim = int(head[0]), int(head[1])
                start = 1
            except ValueError:
                pass  # no header; first line is data
    vectors: dict[str, np.ndarray] = {}
    dim = declared_dim
    seen = 0
    for lineno in range(start, len(lines)):
        line = lines[lineno].rstrip("\n")
        if not line.strip():
            continue
        seen += 1
        parts = line.split()
        if len(parts) < 2:
            raise ParseError("expected token followed by vector components", source, lineno + 1)
        token, components = parts[0], parts[1:]
        if dim is None:
            dim = len(components)
        elif len(components) != dim:
            raise ParseError(
                f"dimension mismatch: expected {dim}, got {len(components)}", source, lineno + 1
            )
        vector = _parse_vector(components, source, lineno + 1)
        if float(np.linalg.norm(vector)) < ZERO_NORM:
            log.warning("%s:%d: zero vector for token %r rejected", source or "<stream>", lineno + 1, token)
            continue
        if token in vectors:
            log.warning("%s:%d: duplicate token %r; keeping first occurrence", source or "<stream>", lineno + 1, token)
            continue
        vectors[token] = _unit(vector)
    if declared_count is not None and seen != declared_count:
        raise ParseError(f"count mismatch: header declared {declared_count} vectors, file has {seen}", source)
    return vectors, dim or 0


def _parse_labeled_tsv(text: str, source: str) -> tuple[dict[str, np.ndarray], int]:
    vectors: dict[str, np.ndarray] = {}
    dim = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise ParseError("expected label<TAB>components", source, lineno)
        label, _, rest = line.partition("\t")
        if not label:
            raise ParseError("empty label", source, lineno)
        components = rest.split()
        if not components:
            raise ParseError("empty vector", source, lineno)
        if dim is None:
            dim = len(components)
        elif len(components) != dim:
            raise ParseError(
                f"dimension mismatch: expected {dim}, got {len(components)}", source, lineno
            )
        vector = _parse_vector(components, source, lineno)
        if float(np.linalg.norm(vector)) < ZERO_NORM:
            log.warning("%s:%d: zero vector for label %r rejected", source or "<stream>", lineno, label)
            continue
        if label in vectors:
            raise ParseError(f"duplicate label {label!r}", source, lineno)
        vectors[label] = _unit(vector)
    return vectors, dim or 0


def save_labeled_tsv(store: EmbeddingStore, stream: IO[str]) -> None:
    """Serialize as the labeled TSV cache format (9 significant digits)."""
    for label, vector in store.vectors.items():
        components = " ".join(f"{x:.9g}" for x in vector)
        stream.write(f"{label}\t{components}\n")


def embed_label(store: EmbeddingStore, label: str) -> np.ndarray:
    """Map a canonical label to a unit vector.

    whole_string stores require an exact entry. token_average stores
    average the in-vocabulary token vectors and renormalize; only a label
    with no in-vocabulary token at all is an error.
    """
    if store.composition == WHOLE_STRING:
        vector = store.vectors.get(label)
        if vector is None:
            raise EmbeddingError(f"label not embedded: {label!r}")
        return vector
    tokens = label.split()
    known = [store.vectors[t] for t in tokens if t in store.vectors]
    if not known:
        raise EmbeddingError(f"all tokens OOV for label {label!r}")
    mean = np.mean(known, axis=0)
    try:
        return _unit(mean)
    except ValueError as exc:
        raise EmbeddingError(f"token vectors of {label!r} cancel to zero") from exc


def cosine_clipped(u: np.ndarray, v: np.ndarray) -> float:
    """Clipped cosine of two unit vectors: max(dot, 0), capped at 1."""
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return min(max(float(np.dot(u, v)), 0.0), 1.0)


def fetch_remote_embeddings(
    endpoint: str,
    labels: Sequence[str],
    batch_size: int = 512,
    auth: str | None = None,
    *,
    max_inflight: int = 4,
    timeout: float = 60.0,
    retries: int = 3,
    backoff: float = 0.5,
    provider_id: str | None = None,
    session: requests.Session | None = None,
) -> EmbeddingStore:
    """Fetch whole-string embeddings from a service speaking the protocol

        POST {endpoint}/embed  {"labels": [...]}
        ->  {"dim": d, "vectors": {"label": [floats], ...}}

    Requests go out in batches of batch_size, at most max_inflight in
    flight, each retried up to `retries` times on transient failure with
    exponential backoff. Vectors are unit-normalized client side.
    """
    labels = list(dict.fromkeys(labels))
    if not labels:
        raise ValueError("no labels to fetch")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    url = endpoint.rstrip("/") + "/embed"
    headers = {"Authorization": f"Bearer {auth}"} if auth else {}
    own_session = session is None
    session = session or requests.Session()

    batches = [labels[i : i + batch_size] for i in range(0, len(labels), batch_size)]
    try:
        if max_inflight > 1 and len(batches) > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=max_inflight) as pool:
                responses = list(
                    pool.map(
                        lambda b: _fetch_batch(session, url, headers, b, timeout, retries, backoff),
                        batches,
                    )
                )
        else:
            responses = [
                _fetch_batch(session, url, headers, b, timeout, retries, backoff) for b in batches
            ]
    finally:
        if own_session:
            session.close()

    dim = responses[0][0]
    vectors: dict[str, np.ndarray] = {}
    for batch_dim, batch_vectors in responses:
        if batch_dim != dim:
            raise RemoteError(f"dimension mismatch across batches: {dim} vs {batch_dim}")
        vectors.update(batch_vectors)
    # deterministic store order = requested label order
    ordered = {label: vectors[label] for label in labels}
    if provider_id is None:
        provider_id = f"remote:{endpoint}"
    return EmbeddingStore(
        dim=dim, vectors=_freeze(ordered), provider_id=provider_id, composition=WHOLE_STRING
    )


_TRANSIENT_STATUS = frozenset({429, 500, 502, 503, 504})


def _fetch_batch(
    session: requests.Session,
    url: str,
    headers: dict,
    batch: list[str],
    timeout: float,
    retries: int,
    backoff: float,
) -> tuple[int, dict[str, np.ndarray]]:
    last_error: Exception | None = None
    for attempt in range(retries + 1):
        if attempt:
            time.sleep(backoff * 2 ** (attempt - 1))
        try:
            response = session.post(url, json={"labels": batch}, headers=headers, timeout=timeout)
        except requests.RequestException as exc:
            last_error = exc
            continue
        if response.status_code in _TRANSIENT_STATUS:
            last_error = RemoteError(f"HTTP {response.status_code} from {url}")
            continue
        if response.status_code != 200:
            raise RemoteError(f"HTTP {response.status_code} from {url}: {response.text[:200]}")
        return _parse_batch_response(response, batch, url)
    raise RemoteError(f"giving up on {url} after {retries + 1} attempts: {last_error}")


def _parse_batch_response(
    response: requests.Response, batch: list[str], url: str
) -> tuple[int, dict[str, np.ndarray]]:
    try:
        payload = response.json()
    except (json.JSONDecodeError, requests.exceptions.JSONDecodeError) as exc:
        raise RemoteError(f"non-JSON response from {url}") from exc
    if not isinstance(payload, dict) or "dim" not in payload or "vectors" not in payload:
        raise RemoteError(f'response must carry "dim" and "vectors", got {str(payload)[:200]}')
    dim = payload["dim"]
    raw = payload["vectors"]
    vectors: dict[str, np.ndarray] = {}
    for label in batch:
        if label not in raw:
            raise RemoteError(f"server omitted label {label!r}")
        vector = np.asarray(raw[label], dtype=np.float64)
        if vector.ndim != 1 or vector.shape[0] != dim:
            raise RemoteError(f"vector for {label!r} does not match dim {dim}")
        if not np.isfinite(vector).all():
            raise RemoteError(f"non-finite vector for {label!r}")
        try:
            vectors[label] = _unit(vector)
        except ValueError as exc:
            raise RemoteError(f"zero vector for {label!r}") from exc
    return int(dim), vectors
