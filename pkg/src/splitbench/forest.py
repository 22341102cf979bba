"""Random forest built from scratch on a numba-compiled CART tree builder.

Trees grow greedily on Gini impurity over a per-node random feature subset,
with candidate thresholds at midpoints between consecutive distinct sorted
feature values, until nodes are pure or smaller than ``min_samples_split``
(no depth cap).  Each tree trains on a bootstrap resample of the same size as
the training set (a flag disables the bootstrap for exactness tests).

Determinism: tree ``t`` seeds its own SplitMix64 stream with
``derive_subseed(seed, t)`` and consumes it for the bootstrap draw then the
per-node feature subsets, so fits are bit-identical regardless of how callers
schedule the per-tree work.  When several candidate splits score equally, the
first one encountered wins (features in drawn order, thresholds ascending).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .sampling import derive_subseed

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1E4357B2)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _next_u64(state):
    state = state + _GOLDEN
    return _mix64(state), state


@njit(cache=True, inline="always")
def _randbelow(n, state):
    if n <= 1:
        return np.int64(0), state
    un = np.uint64(n)
    threshold = (np.uint64(0) - un) % un
    while True:
        r, state = _next_u64(state)
        if r >= threshold:
            return np.int64(r % un), state


@njit(cache=True, inline="always")
def _insertion_argsort(vals, order, m):
    for i in range(1, m):
        oi = order[i]
        v = vals[oi]
        j = i - 1
        while j >= 0 and vals[order[j]] > v:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = oi


@njit(cache=True)
def _fit_tree(X, y, n_classes, max_features, min_samples_split, bootstrap, tree_seed):
    state = tree_seed
    n = X.shape[0]
    d = X.shape[1]

    sample_idx = np.empty(n, np.int64)
    if bootstrap:
        for i in range(n):
            r, state = _randbelow(n, state)
            sample_idx[i] = r
    else:
        for i in range(n):
            sample_idx[i] = i

    cap = 2 * n + 1
    feat = np.full(cap, -1, np.int64)
    thr = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    counts = np.zeros((cap, n_classes), np.int64)

    samples = sample_idx
    stack = np.empty((n + 2, 3), np.int64)
    pool = np.arange(d)
    vals = np.empty(n, np.float64)
    labs = np.empty(n, np.int64)
    order = np.empty(n, np.int64)
    lcnt = np.empty(n_classes, np.int64)
    rcnt = np.empty(n_classes, np.int64)
    tmp = np.empty(n, np.int64)

    node_count = 1
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    sp = 1
    while sp > 0:
        sp -= 1
        nid = stack[sp, 0]
        s = stack[sp, 1]
        e = stack[sp, 2]
        m_node = e - s

        top = 0
        for i in range(s, e):
            c = y[samples[i]]
            counts[nid, c] += 1
        for c in range(n_classes):
            if counts[nid, c] > top:
                top = counts[nid, c]
        if top == m_node or m_node < min_samples_split:
            continue

        best_score = -1.0
        best_f = -1
        best_thr = 0.0
        for j in range(max_features):
            r, state = _randbelow(d - j, state)
            k = j + r
            pool[j], pool[k] = pool[k], pool[j]
            f = pool[j]

            for i in range(m_node):
                idx = samples[s + i]
                vals[i] = X[idx, f]
                labs[i] = y[idx]
            # tiny nodes dominate call counts; argsort's per-call overhead is
            # worth dodging there (tie order inside equal values is irrelevant:
            # candidate thresholds sit only between distinct values)
            if m_node <= 48:
                for i in range(m_node):
                    order[i] = i
                _insertion_argsort(vals, order, m_node)
            else:
                srt = np.argsort(vals[:m_node], kind="quicksort")
                for i in range(m_node):
                    order[i] = srt[i]

            for c in range(n_classes):
                lcnt[c] = 0
                rcnt[c] = counts[nid, c]
            ssl = 0
            ssr = 0
            for c in range(n_classes):
                ssr += rcnt[c] * rcnt[c]
            nl = 0
            nr = m_node
            for i in range(m_node - 1):
                oi = order[i]
                c = labs[oi]
                ssl += 2 * lcnt[c] + 1
                lcnt[c] += 1
                ssr -= 2 * rcnt[c] - 1
                rcnt[c] -= 1
                nl += 1
                nr -= 1
                v_here = vals[oi]
                v_next = vals[order[i + 1]]
                if v_here < v_next:
                    score = ssl / nl + ssr / nr
                    if score > best_score:
                        best_score = score
                        best_f = f
                        mid = 0.5 * (v_here + v_next)
                        if mid >= v_next:
                            # midpoint rounded up to the right value; fall back
                            # so the left branch stays strictly below v_next
                            mid = v_here
                        best_thr = mid

        if best_f == -1:
            continue

        n_left = 0
        n_right = 0
        for i in range(s, e):
            idx = samples[i]
            if X[idx, best_f] <= best_thr:
                samples[s + n_left] = idx
                n_left += 1
            else:
                tmp[n_right] = idx
                n_right += 1
        for i in range(n_right):
            samples[s + n_left + i] = tmp[i]

        lid = node_count
        rid = node_count + 1
        node_count += 2
        feat[nid] = best_f
        thr[nid] = best_thr
        left[nid] = lid
        right[nid] = rid
        stack[sp, 0] = rid
        stack[sp, 1] = s + n_left
        stack[sp, 2] = e
        sp += 1
        stack[sp, 0] = lid
        stack[sp, 1] = s
        stack[sp, 2] = s + n_left
        sp += 1

    return (
        feat[:node_count].copy(),
        thr[:node_count].copy(),
        left[:node_count].copy(),
        right[:node_count].copy(),
        counts[:node_count].copy(),
    )


@njit(cache=True)
def _apply_trees(Xq, feat, thr, left, right, leaf_class, offsets, n_classes):
    nq = Xq.shape[0]
    votes = np.zeros((nq, n_classes), np.int64)
    for t in range(offsets.shape[0] - 1):
        base = offsets[t]
        for i in range(nq):
            nid = base
            while feat[nid] >= 0:
                if Xq[i, feat[nid]] <= thr[nid]:
                    nid = base + left[nid]
                else:
                    nid = base + right[nid]
            votes[i, leaf_class[nid]] += 1
    return votes


@dataclass(frozen=True)
class ForestParams:
    tree_count: int = 100
    max_features: int | None = None  # None -> floor(sqrt(feature count)), min 1
    min_samples_split: int = 2
    seed: int = 0
    bootstrap: bool = True

    def resolve_max_features(self, feature_count: int) -> int:
        if self.max_features is None:
            return max(1, math.isqrt(feature_count))
        return max(1, min(self.max_features, feature_count))


@dataclass(frozen=True)
class ForestModel:
    """Fitted forest; trees stored as flat arrays concatenated per tree."""

    feature: np.ndarray  # split feature per node, -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray  # child ids local to each tree
    right: np.ndarray
    node_counts: np.ndarray  # per-node class distribution
    leaf_class: np.ndarray
    tree_offsets: np.ndarray
    class_count: int
    feature_count: int
    params: ForestParams

    @property
    def tree_count(self) -> int:
        return int(self.tree_offsets.size - 1)

    def tree_nodes(self, t: int) -> slice:
        return slice(int(self.tree_offsets[t]), int(self.tree_offsets[t + 1]))

    def to_json(self, indent: int | None = None) -> str:
        """Debug dump of the forest structure; not a stable format."""
        trees = []
        for t in range(self.tree_count):
            nodes = self.tree_nodes(t)
            trees.append(
                {
                    "feature": self.feature[nodes].tolist(),
                    "threshold": self.threshold[nodes].tolist(),
                    "left": self.left[nodes].tolist(),
                    "right": self.right[nodes].tolist(),
                    "counts": self.node_counts[nodes].tolist(),
                }
            )
        payload = {
            "class_count": self.class_count,
            "feature_count": self.feature_count,
            "params": {
                "tree_count": self.params.tree_count,
                "max_features": self.params.max_features,
                "min_samples_split": self.params.min_samples_split,
                "seed": self.params.seed,
                "bootstrap": self.params.bootstrap,
            },
            "trees": trees,
        }
        return json.dumps(payload, indent=indent)


def forest_fit(train_features, train_labels, params: ForestParams | None = None,
               class_count: int | None = None) -> ForestModel:
    params = params or ForestParams()
    X = np.ascontiguousarray(np.asarray(train_features, dtype=np.float64))
    y = np.ascontiguousarray(np.asarray(train_labels, dtype=np.int64))
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("training features must be a 2-D matrix with >= 1 column")
    if y.shape != (X.shape[0],):
        raise ValueError("training labels must align with feature rows")
    if X.shape[0] == 0:
        raise ValueError("training set is empty")
    if params.tree_count < 1:
        raise ValueError(f"tree_count must be >= 1, got {params.tree_count}")
    if params.min_samples_split < 2:
        raise ValueError("min_samples_split must be >= 2")
    if class_count is None:
        class_count = int(y.max()) + 1

    max_features = params.resolve_max_features(X.shape[1])
    pieces = []
    for t in range(params.tree_count):
        tree_seed = np.uint64(derive_subseed(params.seed, t))
        pieces.append(
            _fit_tree(
                X, y, class_count, max_features, params.min_samples_split,
                params.bootstrap, tree_seed,
            )
        )

    sizes = [p[0].size for p in pieces]
    offsets = np.zeros(len(pieces) + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    counts = np.concatenate([p[4] for p in pieces])
    return ForestModel(
        feature=np.concatenate([p[0] for p in pieces]),
        threshold=np.concatenate([p[1] for p in pieces]),
        left=np.concatenate([p[2] for p in pieces]),
        right=np.concatenate([p[3] for p in pieces]),
        node_counts=counts,
        leaf_class=np.argmax(counts, axis=1).astype(np.int64),
        tree_offsets=offsets,
        class_count=class_count,
        feature_count=X.shape[1],
        params=replace(params, max_features=max_features),
    )


def forest_predict(model: ForestModel, query_features) -> np.ndarray:
    Xq = np.ascontiguousarray(np.asarray(query_features, dtype=np.float64))
    if Xq.ndim != 2 or Xq.shape[1] != model.feature_count:
        raise ValueError(
            f"query feature dimension {Xq.shape[1] if Xq.ndim == 2 else '?'} "
            f"does not match training dimension {model.feature_count}"
        )
    votes = _apply_trees(
        Xq, model.feature, model.threshold, model.left, model.right,
        model.leaf_class, model.tree_offsets, model.class_count,
    )
    # plurality over trees; ties resolve to the smallest class index
    return np.argmax(votes, axis=1).astype(np.int64)
