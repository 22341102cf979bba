"""Tabular dataset loading, preprocessing, and synthetic generation.

A loaded :class:`Dataset` is immutable: arrays are marked read-only so it can
be shared freely across threads and splitter calls.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

MISSING_TOKENS = ("", "NaN")


class DatasetError(ValueError):
    """Raised for unloadable or structurally invalid dataset inputs."""


@dataclass(frozen=True)
class PreprocessSpec:
    """Column handling for :func:`load_csv`.

    categorical_columns are label-encoded (distinct values sorted
    lexicographically map to 0,1,2,...).  impute_mode_columns have missing
    entries replaced by the column mode before any encoding.  drop_columns are
    removed outright (identifiers and such).  Every other non-target column
    must parse as numeric.
    """

    categorical_columns: tuple[str, ...] = ()
    impute_mode_columns: tuple[str, ...] = ()
    target_column: str = "label"
    drop_columns: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "categorical_columns", tuple(self.categorical_columns))
        object.__setattr__(self, "impute_mode_columns", tuple(self.impute_mode_columns))
        object.__setattr__(self, "drop_columns", tuple(self.drop_columns))
        listed = set(self.categorical_columns) | set(self.impute_mode_columns) | set(self.drop_columns)
        if self.target_column in listed:
            raise DatasetError(
                f"target column {self.target_column!r} cannot also be a feature column"
            )


#: Column roles for the Kaggle customer-segmentation file (Train.csv).
CUSTOMER_PREPROCESS = PreprocessSpec(
    categorical_columns=(
        "Gender",
        "Ever_Married",
        "Graduated",
        "Profession",
        "Spending_Score",
        "Var_1",
    ),
    impute_mode_columns=("Work_Experience", "Family_Size"),
    target_column="Segmentation",
)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus dense integer labels and the class census."""

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        features = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        if features.ndim != 2:
            raise DatasetError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise DatasetError("labels must be a vector with one entry per feature row")
        n = len(self.class_names)
        if n < 2:
            raise DatasetError(f"dataset must have at least 2 classes, found {n}")
        if labels.size == 0:
            raise DatasetError("dataset has no samples")
        if labels.min() < 0 or labels.max() >= n:
            raise DatasetError("labels contain values outside the class index range")
        counts = np.bincount(labels, minlength=n)
        if (counts == 0).any():
            empty = [self.class_names[i] for i in np.flatnonzero(counts == 0)]
            raise DatasetError(f"classes with zero samples: {empty}")
        if not self.feature_names:
            object.__setattr__(
                self, "feature_names", tuple(f"f{i}" for i in range(features.shape[1]))
            )
        if len(self.feature_names) != features.shape[1]:
            raise DatasetError("feature_names length must match feature column count")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(str(c) for c in self.class_names))

    @property
    def sample_count(self) -> int:
        return int(self.labels.shape[0])

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    @property
    def counts(self) -> np.ndarray:
        """Per-class sample counts indexed by class index."""
        return np.bincount(self.labels, minlength=self.class_count)

    @property
    def class_counts(self) -> dict[str, int]:
        counts = self.counts
        return {name: int(counts[i]) for i, name in enumerate(self.class_names)}

    def indices_of_class(self, class_index: int) -> np.ndarray:
        return np.flatnonzero(self.labels == class_index)


def label_encode(column) -> np.ndarray:
    """Encode category strings as integers, lexicographic order -> 0,1,2,..."""
    values = [str(v) for v in column]
    if not values:
        raise DatasetError("cannot label-encode an empty column")
    mapping = {v: i for i, v in enumerate(sorted(set(values)))}
    return np.array([mapping[v] for v in values], dtype=np.int64)


def _is_missing(value) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    return isinstance(value, str) and value in MISSING_TOKENS


def impute_mode(column) -> list:
    """Replace missing entries by the column mode; ties go to the smallest value."""
    values = list(column)
    present = [v for v in values if not _is_missing(v)]
    if not present:
        raise DatasetError("cannot impute a column whose values are all missing")
    freq = Counter(present)
    best_count = max(freq.values())
    mode = min(v for v, c in freq.items() if c == best_count)
    return [mode if _is_missing(v) else v for v in values]


def _parse_numeric(raw: list, column: str) -> list[float]:
    out = []
    for row, value in enumerate(raw):
        if _is_missing(value):
            out.append(math.nan)
            continue
        try:
            out.append(float(value))
        except (TypeError, ValueError):
            raise DatasetError(
                f"column {column!r}, row {row}: cannot parse {value!r} as a number"
            ) from None
    return out


def load_csv(path, spec: PreprocessSpec, delimiter: str = ",") -> Dataset:
    """Load a headered CSV into a Dataset per the preprocessing spec.

    Missing cells are empty strings or the literal "NaN".  Categorical columns
    outside the impute list keep missing entries as their own (empty-string)
    category so no rows are dropped.  Numeric columns outside the impute list
    must parse completely.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    frame = pd.read_csv(
        path,
        sep=delimiter,
        dtype=str,
        keep_default_na=False,
        na_values=list(MISSING_TOKENS),
        skipinitialspace=True,
    )
    if frame.shape[0] == 0:
        raise DatasetError(f"{path}: no data rows")

    columns = list(frame.columns)
    for col in (spec.target_column, *spec.categorical_columns, *spec.impute_mode_columns, *spec.drop_columns):
        if col not in columns:
            raise DatasetError(f"{path}: column {col!r} not present (have {columns})")

    target_raw = frame[spec.target_column].tolist()
    for row, value in enumerate(target_raw):
        if _is_missing(value):
            raise DatasetError(f"{path}: missing label in row {row}")
    class_names = tuple(sorted(set(str(v) for v in target_raw)))
    if len(class_names) < 2:
        raise DatasetError(
            f"{path}: need at least 2 classes, found {list(class_names)}"
        )
    label_index = {name: i for i, name in enumerate(class_names)}
    labels = np.array([label_index[str(v)] for v in target_raw], dtype=np.int64)

    feature_names = [
        c for c in columns if c != spec.target_column and c not in spec.drop_columns
    ]
    encoded = {}
    for col in feature_names:
        raw = frame[col].tolist()
        categorical = col in spec.categorical_columns
        imputed = col in spec.impute_mode_columns
        if categorical:
            values = ["" if _is_missing(v) else str(v) for v in raw]
            if imputed:
                values = impute_mode([v if v else None for v in values])
            encoded[col] = label_encode(values).astype(np.float64)
        else:
            values = _parse_numeric(raw, col)
            if imputed:
                values = impute_mode([None if math.isnan(v) else v for v in values])
            elif any(math.isnan(v) for v in values):
                row = next(i for i, v in enumerate(values) if math.isnan(v))
                raise DatasetError(
                    f"{path}: column {col!r}, row {row}: missing value in a "
                    "non-imputed numeric column"
                )
            encoded[col] = np.asarray(values, dtype=np.float64)

    features = np.column_stack([encoded[c] for c in feature_names])
    return Dataset(
        features=features,
        labels=labels,
        class_names=class_names,
        feature_names=tuple(feature_names),
    )


def synthesize_dataset(
    class_counts: dict[str, int],
    feature_dim: int,
    seed: int,
    cluster_std: float = 1.0,
) -> Dataset:
    """Generate isotropic Gaussian clusters matching a class census.

    Class means sit on a line with unit separation between adjacent classes
    (class order follows sorted class names), so classifiers beat chance while
    neighbouring classes still overlap.  Deterministic per seed.
    """
    if feature_dim < 1:
        raise DatasetError(f"feature_dim must be >= 1, got {feature_dim}")
    names = sorted(str(k) for k in class_counts)
    if len(names) < 2:
        raise DatasetError(f"need at least 2 classes, got {names}")
    counts = [int(class_counts[k]) for k in names]
    for name, count in zip(names, counts):
        if count < 1:
            raise DatasetError(f"class {name!r} has non-positive count {count}")

    direction = np.ones(feature_dim) / math.sqrt(feature_dim)
    rng = np.random.Generator(np.random.PCG64(seed))
    blocks = []
    labels = []
    for index, count in enumerate(counts):
        center = index * direction
        blocks.append(rng.normal(loc=center, scale=cluster_std, size=(count, feature_dim)))
        labels.append(np.full(count, index, dtype=np.int64))
    return Dataset(
        features=np.vstack(blocks),
        labels=np.concatenate(labels),
        class_names=tuple(names),
    )


def dataset_to_csv(dataset: Dataset, path, delimiter: str = ",") -> None:
    """Write a Dataset as a headered CSV with a trailing string label column."""
    frame = pd.DataFrame(dataset.features, columns=list(dataset.feature_names))
    frame["label"] = [dataset.class_names[i] for i in dataset.labels]
    frame.to_csv(path, sep=delimiter, index=False)
