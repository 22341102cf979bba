"""Accuracy, per-class precision/recall/F1, and support-weighted F1."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    """Evaluation summary for one prediction vector.

    ``confusion[i, j]`` counts samples with true class i predicted as j.
    ``weighted_f1`` is the support-weighted mean of per-class F1 scores.
    """

    accuracy: float
    per_class: dict[int, ClassMetrics]
    weighted_f1: float
    confusion: np.ndarray

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "weighted_f1": self.weighted_f1,
            "per_class": {
                str(c): {
                    "precision": cm.precision,
                    "recall": cm.recall,
                    "f1": cm.f1,
                    "support": cm.support,
                }
                for c, cm in self.per_class.items()
            },
            "confusion": self.confusion.tolist(),
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.as_dict(), indent=indent)


def evaluate(true_labels, predicted_labels, class_count: int) -> MetricsReport:
    """Score predictions against truth over classes 0..class_count-1.

    Precision, recall, and F1 fall back to 0 where their denominators are 0.
    """
    y_true = np.asarray(true_labels, dtype=np.int64)
    y_pred = np.asarray(predicted_labels, dtype=np.int64)
    if y_true.ndim != 1 or y_pred.ndim != 1:
        raise ValueError("label vectors must be one-dimensional")
    if y_true.size == 0:
        raise ValueError("cannot evaluate an empty label vector")
    if y_true.shape != y_pred.shape:
        raise ValueError(
            f"length mismatch: {y_true.size} true vs {y_pred.size} predicted labels"
        )
    n = int(class_count)
    if n < 1:
        raise ValueError("class_count must be >= 1")
    for name, vec in (("true", y_true), ("predicted", y_pred)):
        if vec.min() < 0 or vec.max() >= n:
            raise ValueError(f"{name} labels outside [0, {n})")

    confusion = np.bincount(y_true * n + y_pred, minlength=n * n).reshape(n, n)
    tp = np.diag(confusion).astype(np.float64)
    support = confusion.sum(axis=1)
    predicted_count = confusion.sum(axis=0)

    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted_count > 0, tp / predicted_count, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        pr_sum = precision + recall
        f1 = np.where(pr_sum > 0, 2.0 * precision * recall / pr_sum, 0.0)

    total = y_true.size
    accuracy = float(tp.sum() / total)
    weighted_f1 = float(np.sum((support / total) * f1))

    per_class = {
        c: ClassMetrics(
            precision=float(precision[c]),
            recall=float(recall[c]),
            f1=float(f1[c]),
            support=int(support[c]),
        )
        for c in range(n)
    }
    return MetricsReport(
        accuracy=accuracy,
        per_class=per_class,
        weighted_f1=weighted_f1,
        confusion=confusion,
    )
