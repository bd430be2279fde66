"""Embedding providers: a deterministic offline provider, a remote HTTP
provider, and a content-addressed cache.

The deterministic provider exists so every pipeline stage downstream of
embedding can run reproducibly with no model dependency; the remote
provider speaks a minimal JSON contract ({"texts": [...]} in,
{"vectors": [[...]]} out) so any embedding server can be plugged in.
"""

from __future__ import annotations

import hashlib
import json
import logging
import struct
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

log = logging.getLogger(__name__)

_HASH_BYTES = 32


class EmbeddingError(Exception):
    pass


class DimensionMismatch(EmbeddingError):
    pass


class TransportError(EmbeddingError):
    """Remote call failed after retries; safe to retry later."""


@dataclass(frozen=True)
class Embedding:
    values: np.ndarray
    provider_id: str

    def __post_init__(self):
        vec = np.asarray(self.values, dtype=np.float64)
        if vec.ndim != 1 or vec.size == 0:
            raise ValueError("embedding must be a non-empty 1-d vector")
        if not np.all(np.isfinite(vec)):
            raise ValueError("embedding contains non-finite entries")
        object.__setattr__(self, "values", vec)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


def content_hash(text: str) -> bytes:
    return hashlib.blake2b(text.encode("utf-8"), digest_size=_HASH_BYTES).digest()


class EmbeddingCache:
    """Content-addressed vector cache with an optional binary sidecar.

    Sidecar layout: one UTF-8 JSON header line {provider_id, dim}, then
    fixed-size records of 32-byte content hash + dim little-endian
    float64 values. Writes are serialized; the file is append-only.
    """

    def __init__(self, provider_id: str, dim: int, path=None):
        self.provider_id = provider_id
        self.dim = dim
        self._mem: dict = {}
        self._lock = threading.Lock()
        self._path = Path(path) if path is not None else None
        if self._path is not None and self._path.exists():
            self._load()

    def _record_size(self) -> int:
        return _HASH_BYTES + 8 * self.dim

    def _load(self):
        raw = self._path.read_bytes()
        newline = raw.index(b"\n")
        header = json.loads(raw[:newline].decode("utf-8"))
        if header.get("provider_id") != self.provider_id or header.get("dim") != self.dim:
            raise ValueError(
                f"cache {self._path} belongs to provider "
                f"{header.get('provider_id')!r} dim {header.get('dim')}, "
                f"not {self.provider_id!r} dim {self.dim}"
            )
        body = raw[newline + 1 :]
        size = self._record_size()
        if len(body) % size:
            raise ValueError(f"cache {self._path} is truncated")
        for off in range(0, len(body), size):
            key = body[off : off + _HASH_BYTES]
            vec = np.frombuffer(
                body, dtype="<f8", count=self.dim, offset=off + _HASH_BYTES
            ).copy()
            self._mem[key] = vec
        log.debug("loaded %d cached vectors from %s", len(self._mem), self._path)

    def get(self, key: bytes):
        return self._mem.get(key)

    def put(self, key: bytes, values: np.ndarray):
        vec = np.asarray(values, dtype=np.float64)
        with self._lock:
            if key in self._mem:
                return
            self._mem[key] = vec
            if self._path is None:
                return
            fresh = not self._path.exists()
            with self._path.open("ab") as fh:
                if fresh:
                    header = {"provider_id": self.provider_id, "dim": self.dim}
                    fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
                fh.write(key + vec.astype("<f8").tobytes())

    def __len__(self):
        return len(self._mem)


class EmbeddingProvider:
    """Base provider: caching, batching, and the Embedding wrapper."""

    def __init__(self, provider_id: str, dim: int, cache_path=None):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.provider_id = provider_id
        self.dim = dim
        self.cache = EmbeddingCache(provider_id, dim, cache_path)

    def _compute(self, texts: list) -> list:
        raise NotImplementedError

    def embed(self, text: str) -> Embedding:
        return self.embed_many([text])[0]

    def embed_many(self, texts: list) -> list:
        keys = [content_hash(t) for t in texts]
        missing = {}
        for key, text in zip(keys, texts):
            if self.cache.get(key) is None and key not in missing:
                missing[key] = text
        if missing:
            order = list(missing.items())
            vectors = self._compute([t for _, t in order])
            if len(vectors) != len(order):
                raise EmbeddingError(
                    f"provider returned {len(vectors)} vectors for "
                    f"{len(order)} texts"
                )
            for (key, _), vec in zip(order, vectors):
                vec = np.asarray(vec, dtype=np.float64)
                if vec.shape != (self.dim,):
                    raise DimensionMismatch(
                        f"provider {self.provider_id!r} declared dim "
                        f"{self.dim} but returned {vec.shape}"
                    )
                self.cache.put(key, vec)
        return [Embedding(self.cache.get(k), self.provider_id) for k in keys]


class DeterministicProvider(EmbeddingProvider):
    """Pure function of (seed, text): hash-expanded unit vectors.

    blake2b output is stable across platforms and Python versions, so
    fixtures recorded from this provider never drift.
    """

    def __init__(self, dim: int = 64, seed: int = 0, cache_path=None):
        super().__init__(f"det-{seed}-{dim}", dim, cache_path)
        self._seed = struct.pack("<q", seed)

    def _vector(self, text: str) -> np.ndarray:
        base = hashlib.blake2b(
            text.encode("utf-8"), key=self._seed, digest_size=32
        ).digest()
        out = np.empty(self.dim, dtype=np.float64)
        filled = 0
        counter = 0
        while filled < self.dim:
            block = hashlib.blake2b(
                base + struct.pack("<I", counter), digest_size=64
            ).digest()
            for (word,) in struct.iter_unpack("<Q", block):
                if filled == self.dim:
                    break
                # uniform in [-1, 1)
                out[filled] = word / 2.0**63 - 1.0
                filled += 1
            counter += 1
        norm = float(np.linalg.norm(out))
        if norm == 0.0:
            out[0] = 1.0
            norm = 1.0
        return out / norm

    def _compute(self, texts: list) -> list:
        return [self._vector(t) for t in texts]


class RemoteProvider(EmbeddingProvider):
    """HTTP embedding endpoint speaking the {texts}->{vectors} contract."""

    def __init__(
        self,
        endpoint: str,
        dim: int,
        provider_id: str = "remote",
        auth_token: str = "",
        batch_size: int = 64,
        parallelism: int = 4,
        timeout: float = 30.0,
        retries: int = 2,
        cache_path=None,
        post=None,
    ):
        super().__init__(provider_id, dim, cache_path)
        self.endpoint = endpoint
        self.auth_token = auth_token
        self.batch_size = min(batch_size, 64)
        self.parallelism = max(1, parallelism)
        self.timeout = timeout
        self.retries = retries
        # injectable for tests: post(url, json, headers, timeout) -> dict
        self._post = post if post is not None else self._http_post

    def _http_post(self, url, payload, headers, timeout):
        resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
        resp.raise_for_status()
        return resp.json()

    def _call(self, batch: list) -> list:
        headers = {"Content-Type": "application/json"}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        last = None
        for attempt in range(self.retries + 1):
            try:
                body = self._post(
                    self.endpoint, {"texts": batch}, headers, self.timeout
                )
                vectors = body["vectors"]
                if len(vectors) != len(batch):
                    raise EmbeddingError(
                        f"endpoint returned {len(vectors)} vectors for "
                        f"{len(batch)} texts"
                    )
                return vectors
            except (requests.RequestException, KeyError, ValueError) as exc:
                last = exc
                log.warning(
                    "embedding call failed (attempt %d/%d): %s",
                    attempt + 1,
                    self.retries + 1,
                    exc,
                )
        raise TransportError(f"embedding endpoint failed: {last}") from last

    def _compute(self, texts: list) -> list:
        batches = [
            texts[i : i + self.batch_size]
            for i in range(0, len(texts), self.batch_size)
        ]
        if len(batches) == 1:
            results = [self._call(batches[0])]
        else:
            with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
                results = list(pool.map(self._call, batches))
        out = []
        for chunk in results:
            out.extend(chunk)
        return out


def embed_term(provider: EmbeddingProvider, label: str, description: str = "") -> Embedding:
    """Embed a term as label + ": " + description."""
    if not label:
        raise ValueError("term label must be non-empty")
    return provider.embed(f"{label}: {description}")


def embed_document(provider: EmbeddingProvider, doc) -> Embedding:
    """Embed a document as title plus abstract when present."""
    text = doc.title if not doc.abstract else f"{doc.title} {doc.abstract}"
    return provider.embed(text)


def cosine_distance(a: Embedding, b: Embedding) -> float:
    """1 - cosine similarity, clamped into [0, 2]."""
    va, vb = a.values, b.values
    if va.shape != vb.shape:
        raise DimensionMismatch(f"dims differ: {va.shape} vs {vb.shape}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine distance undefined for zero vectors")
    if np.array_equal(va, vb):
        # equal vectors are exactly at distance zero; the general
        # formula leaves ~1e-16 of rounding residue
        return 0.0
    return min(2.0, max(0.0, 1.0 - float(np.dot(va, vb)) / (na * nb)))


def cosine_similarity(a: Embedding, b: Embedding) -> float:
    return 1.0 - cosine_distance(a, b)
