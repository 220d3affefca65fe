"""Shared fixtures: store builders, the literal-repeat oracle, a stub
embedding server, and random instance generators."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from labelshift.corpus import LabelStats
from labelshift.embed import TOKEN_AVERAGE, WHOLE_STRING, EmbeddingStore

# (criterion name, outcome) rows filled in by the acceptance suite
ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo one line per acceptance criterion into the run summary."""
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    for name, outcome in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[ACCEPTANCE] {name}: {outcome}")


def unit(components) -> np.ndarray:
    v = np.asarray(components, dtype=np.float64)
    return v / np.linalg.norm(v)


def make_store(vectors: dict, composition: str = WHOLE_STRING, provider_id: str = "test") -> EmbeddingStore:
    """Build a store from raw components; vectors are normalized here."""
    normalized = {}
    dim = None
    for label, components in vectors.items():
        v = unit(components)
        v.flags.writeable = False
        normalized[label] = v
        dim = v.shape[0]
    return EmbeddingStore(dim=dim, vectors=normalized, provider_id=provider_id, composition=composition)


def make_token_store(vectors: dict, provider_id: str = "test-w2v") -> EmbeddingStore:
    return make_store(vectors, composition=TOKEN_AVERAGE, provider_id=provider_id)


def naive_familiarity(pairs, k: int, weighting: str) -> tuple[float, int]:
    """Literal reference: repeat each similarity by its count, sort the
    whole list descending, truncate to k, apply the rank-weighted mean."""
    expanded: list[float] = []
    for sim, count in pairs:
        expanded.extend([sim] * count)
    expanded.sort(reverse=True)
    top = expanded[:k]
    if weighting == "zipf":
        weights = [1.0 / r for r in range(1, len(top) + 1)]
    elif weighting == "linear_decay":
        weights = [(k - r) / k for r in range(1, len(top) + 1)]
    elif weighting == "unweighted":
        weights = [1.0] * len(top)
    else:
        raise ValueError(weighting)
    denominator = sum(weights)
    if denominator <= 0:
        raise ValueError("zero weight")
    numerator = sum(s * w for s, w in zip(top, weights))
    return numerator / denominator, len(top)


def random_whole_instance(rng: np.random.Generator, max_labels=10, max_count=50, dims=(2, 8)):
    """Random training stats + whole-string store + one embedded eval label."""
    n = int(rng.integers(1, max_labels + 1))
    dim = int(rng.integers(dims[0], dims[1] + 1))
    labels = [f"t{i}" for i in range(n)]
    vectors = {label: rng.normal(size=dim) for label in labels}
    vectors["eval label"] = rng.normal(size=dim)
    store = make_store(vectors)
    counts = {label: int(rng.integers(1, max_count + 1)) for label in labels}
    return LabelStats.from_counts(counts), store, "eval label"


class _StubState:
    """Mutable behavior knobs shared between a test and its server."""

    def __init__(self, vectors: dict, dim: int):
        self.vectors = vectors
        self.dim = dim
        self.requests: list[dict] = []
        self.auth_headers: list = []
        self.fail_next = 0  # serve this many transient errors first
        self.fail_status = 503
        self.omit_labels: set = set()
        self.raw_body: bytes | None = None  # overrides the JSON response
        self.lock = threading.Lock()


class _StubHandler(BaseHTTPRequestHandler):
    state: _StubState

    def log_message(self, *args):  # keep test output clean
        pass

    def do_POST(self):
        if self.path != "/embed":
            self.send_error(404)
            return
        body = self.rfile.read(int(self.headers.get("Content-Length", 0)))
        payload = json.loads(body)
        state = self.state
        with state.lock:
            state.requests.append(payload)
            state.auth_headers.append(self.headers.get("Authorization"))
            if state.fail_next > 0:
                state.fail_next -= 1
                self.send_response(state.fail_status)
                self.end_headers()
                return
        if state.raw_body is not None:
            self.send_response(200)
            self.end_headers()
            self.wfile.write(state.raw_body)
            return
        vectors = {
            label: state.vectors[label]
            for label in payload["labels"]
            if label in state.vectors and label not in state.omit_labels
        }
        out = json.dumps({"dim": state.dim, "vectors": vectors}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(out)


class StubEmbedServer:
    """Context manager running the embed protocol on a local port."""

    def __init__(self, vectors: dict, dim: int):
        self.state = _StubState(vectors, dim)

    def __enter__(self):
        handler = type("Handler", (_StubHandler,), {"state": self.state})
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        self.endpoint = f"http://127.0.0.1:{self._server.server_address[1]}"
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)
        return False


@pytest.fixture
def stub_server_factory():
    """Yields a factory so tests can tune vectors before starting."""
    return StubEmbedServer
