"""Latent semantic indexing over class documents and change-request text."""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .ingest import tokenize

CACHE_FORMAT = "iiasim-lsi/1"


@dataclass(frozen=True)
class TermDocumentMatrix:
    terms: tuple[str, ...]
    docs: tuple[str, ...]
    cells: np.ndarray  # (len(terms), len(docs))
    idf: np.ndarray  # (len(terms),)

    def __post_init__(self):
        if self.cells.shape != (len(self.terms), len(self.docs)):
            raise ValueError("cell matrix shape does not match terms x docs")

    def term_index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}


def log_tf(count: int) -> float:
    return 1.0 + math.log(count) if count > 0 else 0.0


def smoothed_idf(n_docs: int, doc_freq: int) -> float:
    return math.log(1.0 + n_docs / (1.0 + doc_freq))


def build_tdm(documents: Mapping[str, str] | Sequence[tuple[str, str]]) -> TermDocumentMatrix:
    """tf-idf matrix with log tf and smoothed idf; vocabulary sorted lexicographically.

    ``documents`` maps doc id to raw text; a ``CorpusManifest`` works via ``.texts()``.
    """
    if hasattr(documents, "texts"):
        documents = documents.texts()
    items = sorted(documents.items()) if isinstance(documents, Mapping) else list(documents)
    doc_ids = tuple(d for d, _ in items)
    counts = [Counter(tokenize(text)) for _, text in items]
    vocab = sorted(set().union(*counts)) if counts else []
    if not vocab:
        raise ValueError("corpus has no terms; every document is empty")
    index = {t: i for i, t in enumerate(vocab)}
    df = np.zeros(len(vocab))
    for c in counts:
        for t in c:
            df[index[t]] += 1
    n = len(doc_ids)
    idf = np.log1p(n / (1.0 + df))
    cells = np.zeros((len(vocab), n))
    for j, c in enumerate(counts):
        for t, k in c.items():
            cells[index[t], j] = 1.0 + math.log(k)
    cells *= idf[:, None]
    return TermDocumentMatrix(tuple(vocab), doc_ids, cells, idf)


def default_rank(n_terms: int, n_docs: int) -> int:
    return max(1, min(200, n_docs - 1, n_terms - 1))


def truncated_svd(
    a: np.ndarray,
    k: int,
    seed: int = 0,
    tol: float = 1e-10,
    max_iter: int = 500,
    oversample: int | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rank-``k`` SVD by seeded block subspace iteration with Rayleigh-Ritz extraction.

    Iteration stops once no leading singular value moves by more than
    ``tol`` (relative to the largest) between sweeps.  Returns ``(u, s, vt)``.
    """
    m, n = a.shape
    full = min(m, n)
    if not 1 <= k <= full:
        raise ValueError(f"rank {k} outside 1..{full}")
    if oversample is None:
        oversample = max(10, k // 2)
    width = min(full, k + oversample)
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(a @ rng.standard_normal((n, width)))
    prev = None
    for _ in range(max_iter):
        q, _ = np.linalg.qr(a @ (a.T @ q))
        ub, s, vt = np.linalg.svd(q.T @ a, full_matrices=False)
        cur = s[:k]
        if prev is not None and np.max(np.abs(cur - prev)) <= tol * max(cur[0], 1e-300):
            break
        prev = cur
    u = q @ ub[:, :k]
    s = s[:k]
    vt = vt[:k]
    # Fix the sign of each singular pair so repeated runs agree.
    flip = np.sign(u[np.argmax(np.abs(u), axis=0), np.arange(k)])
    flip[flip == 0] = 1.0
    return u * flip, s, vt * flip[:, None]


@dataclass(frozen=True)
class LsiSpace:
    rank: int
    terms: tuple[str, ...]
    idf: np.ndarray
    projection: np.ndarray  # (len(terms), rank): term space -> concept space
    singular_values: np.ndarray
    doc_ids: tuple[str, ...]
    doc_matrix: np.ndarray  # (len(doc_ids), rank)

    def __post_init__(self):
        object.__setattr__(self, "_index", {d: i for i, d in enumerate(self.doc_ids)})
        object.__setattr__(self, "_term_index", {t: i for i, t in enumerate(self.terms)})
        norms = np.linalg.norm(self.doc_matrix, axis=1)
        unit = np.zeros_like(self.doc_matrix)
        nz = norms > 0
        unit[nz] = self.doc_matrix[nz] / norms[nz, None]
        object.__setattr__(self, "_unit", unit)

    @property
    def doc_vectors(self) -> dict[str, np.ndarray]:
        return {d: self.doc_matrix[i] for d, i in self._index.items()}

    def vector(self, doc_id: str) -> np.ndarray:
        try:
            return self.doc_matrix[self._index[doc_id]]
        except KeyError:
            raise KeyError(f"unknown document {doc_id!r}") from None

    def unit_vector(self, doc_id: str) -> np.ndarray:
        try:
            return self._unit[self._index[doc_id]]
        except KeyError:
            raise KeyError(f"unknown document {doc_id!r}") from None

    def __contains__(self, doc_id):
        return doc_id in self._index


def lsi_project(tdm: TermDocumentMatrix, k: int | None = None, seed: int = 0) -> LsiSpace:
    if k is None:
        k = default_rank(len(tdm.terms), len(tdm.docs))
    full = min(len(tdm.terms), len(tdm.docs))
    if not 1 <= k <= full:
        raise ValueError(f"LSI rank {k} outside 1..{full}")
    u, s, _ = truncated_svd(tdm.cells, k, seed=seed)
    # Document coordinates U^T a_j equal V_k * S_k; queries fold in the same way.
    docs = tdm.cells.T @ u
    return LsiSpace(k, tdm.terms, tdm.idf, u, s, tdm.docs, docs)


def _clamped_cos(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, max(0.0, float(np.dot(a, b) / (na * nb))))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [0, 1]; zero vectors give 0."""
    return _clamped_cos(np.asarray(a, float), np.asarray(b, float))


def cosine_sim(space: LsiSpace, a: str, b: str) -> float:
    ua, ub = space.unit_vector(a), space.unit_vector(b)
    return min(1.0, max(0.0, float(np.dot(ua, ub))))


def query_term_vector(space: LsiSpace, text: str) -> np.ndarray:
    index = space._term_index
    counts = Counter(t for t in tokenize(text) if t in index)
    q = np.zeros(len(space.terms))
    for t, c in counts.items():
        i = index[t]
        q[i] = log_tf(c) * space.idf[i]
    return q


def fold_in_query(space: LsiSpace, text: str) -> np.ndarray:
    return query_term_vector(space, text) @ space.projection


def query_sim(space: LsiSpace, qv: np.ndarray, doc_id: str) -> float:
    n = np.linalg.norm(qv)
    if n == 0.0:
        return 0.0
    return min(1.0, max(0.0, float(np.dot(qv / n, space.unit_vector(doc_id)))))


def frobenius_error(tdm: TermDocumentMatrix, space: LsiSpace) -> float:
    """||A - U_k U_k^T A||_F, the rank-k reconstruction error of the tf-idf matrix."""
    u = space.projection
    a = tdm.cells
    return float(np.linalg.norm(a - u @ (u.T @ a)))


# ---------------------------------------------------------------------------
# Vector cache
# ---------------------------------------------------------------------------

def corpus_digest(documents: Mapping[str, str]) -> str:
    h = hashlib.sha256()
    for d in sorted(documents):
        h.update(d.encode())
        h.update(b"\0")
        h.update(documents[d].encode())
        h.update(b"\0")
    return h.hexdigest()


def cache_key(digest: str, k: int | None, seed: int) -> str:
    return f"{digest}:{k if k is not None else 'auto'}:{seed}"


def save_space(space: LsiSpace, path: str | Path, key: str) -> None:
    data = {
        "format": CACHE_FORMAT,
        "key": key,
        "rank": space.rank,
        "terms": list(space.terms),
        "idf": space.idf.tolist(),
        "projection": space.projection.tolist(),
        "singular_values": space.singular_values.tolist(),
        "doc_ids": list(space.doc_ids),
        "doc_vectors": space.doc_matrix.tolist(),
    }
    Path(path).write_text(json.dumps(data), encoding="utf-8")


def load_space(path: str | Path, key: str | None = None) -> LsiSpace | None:
    """Load a cached space; ``None`` when the file is missing, foreign, or keyed differently."""
    path = Path(path)
    if not path.is_file():
        return None
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return None
    if data.get("format") != CACHE_FORMAT or (key is not None and data.get("key") != key):
        return None
    rank = int(data["rank"])
    return LsiSpace(
        rank,
        tuple(data["terms"]),
        np.asarray(data["idf"], float),
        np.asarray(data["projection"], float).reshape(len(data["terms"]), rank),
        np.asarray(data["singular_values"], float),
        tuple(data["doc_ids"]),
        np.asarray(data["doc_vectors"], float).reshape(len(data["doc_ids"]), rank),
    )
