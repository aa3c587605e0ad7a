"""Bit-exact embedding store, cosine similarity, and task-to-patent matching.

The store's binary format (magic ``EMB1``) keeps vectors exactly as 32-bit
floats; nothing is renormalized on load, so a file written by any producer
round-trips byte-identically. Similarities are accumulated in 64-bit
arithmetic over the stored 32-bit components, which keeps results
reproducible run to run.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .disruption import PatentClass
from .percentile import nearest_rank

log = logging.getLogger(__name__)

MAGIC = b"EMB1"


class TaskImpactLabel(Enum):
    IMPACTED_DISRUPTIVE = "impacted_disruptive"
    IMPACTED_CONSOLIDATING = "impacted_consolidating"
    IMPACTED_MIDDLE = "impacted_middle"
    NOT_IMPACTED = "not_impacted"

    @property
    def impacted(self) -> bool:
        return self is not TaskImpactLabel.NOT_IMPACTED


_CLASS_TO_LABEL = {
    PatentClass.DISRUPTIVE: TaskImpactLabel.IMPACTED_DISRUPTIVE,
    PatentClass.CONSOLIDATING: TaskImpactLabel.IMPACTED_CONSOLIDATING,
    PatentClass.MIDDLE: TaskImpactLabel.IMPACTED_MIDDLE,
}


@dataclass(frozen=True)
class MatchResult:
    task_id: str
    best_patent_id: str
    best_similarity: float


class EmbeddingStore:
    """Ordered id -> float32 vector map with a fixed dimension."""

    def __init__(self, ids: Sequence[str], vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.ndim != 2:
            raise DataError(f"embedding matrix must be 2-D, got shape {vectors.shape}")
        if vectors.shape[1] < 1:
            raise DataError("embedding dimension must be positive")
        if len(ids) != vectors.shape[0]:
            raise DataError(f"{len(ids)} ids but {vectors.shape[0]} vectors")
        if len(set(ids)) != len(ids):
            raise DataError("duplicate ids in embedding store")
        self.ids: list[str] = list(ids)
        self.vectors: np.ndarray = vectors
        self._index = {i: n for n, i in enumerate(self.ids)}

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, id_: str) -> bool:
        return id_ in self._index

    def vector(self, id_: str) -> np.ndarray:
        try:
            return self.vectors[self._index[id_]]
        except KeyError:
            raise DataError(f"id {id_!r} not in embedding store") from None

    def subset(self, keep: Iterable[str]) -> "EmbeddingStore":
        """Rows whose id is in ``keep``, preserving store order."""
        keep = set(keep)
        missing = sorted(keep - set(self.ids))
        if missing:
            raise DataError("ids missing from embedding store: " + ", ".join(missing))
        rows = [n for n, i in enumerate(self.ids) if i in keep]
        return EmbeddingStore([self.ids[n] for n in rows], self.vectors[rows].copy())

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingStore":
        data = Path(path).read_bytes()
        if data[:4] != MAGIC:
            raise DataError(f"{path}: bad magic bytes, not an embedding file")
        try:
            dim = struct.unpack_from("<I", data, 4)[0]
            count = struct.unpack_from("<Q", data, 8)[0]
        except struct.error as exc:
            raise DataError(f"{path}: truncated embedding header: {exc}") from None
        if dim < 1:
            raise DataError(f"{path}: embedding dimension must be positive, got {dim}")
        try:
            off = 16
            ids: list[str] = []
            vectors = np.empty((count, dim), dtype="<f4")
            for n in range(count):
                (id_len,) = struct.unpack_from("<I", data, off)
                off += 4
                ids.append(data[off : off + id_len].decode("utf-8"))
                off += id_len
                vectors[n] = np.frombuffer(data, dtype="<f4", count=dim, offset=off)
                off += 4 * dim
        except (struct.error, ValueError) as exc:
            raise DataError(f"{path}: truncated or corrupt embedding file: {exc}") from None
        if off != len(data):
            raise DataError(f"{path}: {len(data) - off} trailing bytes after {count} entries")
        store = cls(ids, vectors)
        log.info("loaded %d vectors of dim %d from %s", count, dim, path)
        return store

    def save(self, path: str | Path) -> None:
        parts = [MAGIC, struct.pack("<I", self.dim), struct.pack("<Q", len(self.ids))]
        for id_, vec in zip(self.ids, self.vectors):
            raw = id_.encode("utf-8")
            parts.append(struct.pack("<I", len(raw)))
            parts.append(raw)
            parts.append(vec.astype("<f4").tobytes())
        Path(path).write_bytes(b"".join(parts))


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """dot(u, v) / (|u| |v|) accumulated in float64, clamped to [-1, 1]."""
    u64 = np.asarray(u, dtype=np.float64)
    v64 = np.asarray(v, dtype=np.float64)
    if u64.shape != v64.shape:
        raise DataError(f"dimension mismatch: {u64.shape} vs {v64.shape}")
    nu = float(np.linalg.norm(u64))
    nv = float(np.linalg.norm(v64))
    if nu == 0.0 or nv == 0.0:
        raise DataError("cosine of an all-zero vector is undefined")
    sim = float(np.dot(u64, v64)) / (nu * nv)
    return min(1.0, max(-1.0, sim))


def match_tasks(tasks: EmbeddingStore, patents: EmbeddingStore) -> list[MatchResult]:
    """Best-matching patent for every task, ties broken by smallest patent_id.

    The scan over patents is a fixed sequential reduction per task, so
    results do not depend on how tasks are distributed over workers.
    """
    if tasks.dim != patents.dim:
        raise DataError(f"dimension mismatch: tasks dim {tasks.dim}, patents dim {patents.dim}")
    if len(tasks) == 0 or len(patents) == 0:
        raise DataError("both embedding stores must be non-empty")
    pmat = patents.vectors.astype(np.float64)
    pnorm = np.linalg.norm(pmat, axis=1)
    if np.any(pnorm == 0.0):
        zero = [patents.ids[i] for i in np.flatnonzero(pnorm == 0.0)]
        raise DataError("all-zero patent vectors: " + ", ".join(zero))
    results: list[MatchResult] = []
    for tid, tvec in zip(tasks.ids, tasks.vectors):
        t64 = tvec.astype(np.float64)
        tnorm = float(np.linalg.norm(t64))
        if tnorm == 0.0:
            raise DataError(f"all-zero task vector: {tid}")
        sims = np.clip((pmat @ t64) / (pnorm * tnorm), -1.0, 1.0)
        best = float(sims.max())
        tied = np.flatnonzero(sims == best)
        best_id = min(patents.ids[i] for i in tied)
        results.append(MatchResult(tid, best_id, best))
    return results


def impact_threshold(results: Sequence[MatchResult], pct: float = 90.0) -> float:
    """Nearest-rank percentile of the per-task best similarities."""
    if len(results) < 10:
        raise DataError(f"need at least 10 match results for a percentile threshold, got {len(results)}")
    return nearest_rank([r.best_similarity for r in results], pct)


def classify_tasks(
    results: Iterable[MatchResult],
    threshold: float,
    patent_classes: Mapping[str, PatentClass],
) -> dict[str, TaskImpactLabel]:
    """Strictly above the threshold inherits the matched patent's class; at or
    below is not impacted."""
    labels: dict[str, TaskImpactLabel] = {}
    for r in results:
        if r.best_similarity > threshold:
            try:
                cls = patent_classes[r.best_patent_id]
            except KeyError:
                raise DataError(
                    f"task {r.task_id!r} matched patent {r.best_patent_id!r} which has no class"
                ) from None
            labels[r.task_id] = _CLASS_TO_LABEL[cls]
        else:
            labels[r.task_id] = TaskImpactLabel.NOT_IMPACTED
    return labels
