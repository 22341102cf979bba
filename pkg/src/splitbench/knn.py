"""K-nearest-neighbor classifier with fully specified tie-breaking.

Neighbors are ranked by squared Euclidean distance; equal distances rank the
lower training-row index first.  Votes are majority over the k neighbors; a
vote tie goes to the tied class whose nearest member comes first in that
ranking.  No feature scaling is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_CHUNK_ROWS = 256


@dataclass(frozen=True)
class KnnModel:
    k: int
    features: np.ndarray
    labels: np.ndarray
    class_count: int


def knn_fit(train_features, train_labels, k: int, class_count: int | None = None) -> KnnModel:
    """Store the training data verbatim (lazy learner)."""
    features = np.ascontiguousarray(np.asarray(train_features, dtype=np.float64))
    labels = np.ascontiguousarray(np.asarray(train_labels, dtype=np.int64))
    if features.ndim != 2 or features.shape[1] < 1:
        raise ValueError("training features must be a 2-D matrix with >= 1 column")
    if labels.shape != (features.shape[0],):
        raise ValueError("training labels must align with feature rows")
    if features.shape[0] == 0:
        raise ValueError("training set is empty")
    if not 1 <= k <= features.shape[0]:
        raise ValueError(f"k={k} must be in [1, {features.shape[0]}]")
    if class_count is None:
        class_count = int(labels.max()) + 1
    features.setflags(write=False)
    labels.setflags(write=False)
    return KnnModel(k=k, features=features, labels=labels, class_count=class_count)


def knn_predict(model: KnnModel, query_features) -> np.ndarray:
    queries = np.ascontiguousarray(np.asarray(query_features, dtype=np.float64))
    if queries.ndim != 2 or queries.shape[1] != model.features.shape[1]:
        raise ValueError(
            f"query feature dimension {queries.shape[1] if queries.ndim == 2 else '?'} "
            f"does not match training dimension {model.features.shape[1]}"
        )
    out = np.empty(queries.shape[0], dtype=np.int64)
    train_sq = np.einsum("ij,ij->i", model.features, model.features)
    for start in range(0, queries.shape[0], _CHUNK_ROWS):
        chunk = queries[start : start + _CHUNK_ROWS]
        out[start : start + chunk.shape[0]] = _predict_chunk(model, chunk, train_sq)
    return out


def _predict_chunk(model: KnnModel, chunk: np.ndarray, train_sq: np.ndarray) -> np.ndarray:
    k = model.k
    n_train = model.features.shape[0]
    query_sq = np.einsum("ij,ij->i", chunk, chunk)
    dist = query_sq[:, None] + train_sq[None, :] - 2.0 * (chunk @ model.features.T)
    np.maximum(dist, 0.0, out=dist)

    if k == n_train:
        candidates = np.broadcast_to(np.arange(n_train), dist.shape).copy()
    else:
        candidates = np.argpartition(dist, kth=k - 1, axis=1)[:, :k]
    cand_dist = np.take_along_axis(dist, candidates, axis=1)
    # order candidates by (distance, training index)
    order = np.lexsort((candidates, cand_dist), axis=1)
    neighbors = np.take_along_axis(candidates, order, axis=1)[:, :k]
    neighbor_dist = np.take_along_axis(cand_dist, order, axis=1)[:, :k]

    # argpartition may cut a tie group at the k-th distance arbitrarily; rows
    # where equal-distance rivals were excluded get an exact per-row rebuild
    boundary = neighbor_dist[:, k - 1]
    eq_total = (dist == boundary[:, None]).sum(axis=1)
    eq_kept = (neighbor_dist == boundary[:, None]).sum(axis=1)
    for row in np.flatnonzero(eq_total != eq_kept):
        full_order = np.argsort(dist[row], kind="stable")
        neighbors[row] = full_order[:k]

    labels = model.labels[neighbors]
    counts = np.zeros((chunk.shape[0], model.class_count), dtype=np.int64)
    np.add.at(counts, (np.arange(chunk.shape[0])[:, None], labels), 1)
    top = counts.max(axis=1)

    # winner: nearest neighbor whose class ties for the top vote count
    pred = np.full(chunk.shape[0], -1, dtype=np.int64)
    unresolved = np.ones(chunk.shape[0], dtype=bool)
    for j in range(model.k):
        lab = labels[:, j]
        hit = unresolved & (counts[np.arange(chunk.shape[0]), lab] == top)
        pred[hit] = lab[hit]
        unresolved &= ~hit
        if not unresolved.any():
            break
    return pred
