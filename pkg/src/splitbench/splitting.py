"""Train/test splitting strategies: random, stratified, and balanced.

The balanced strategy places an identical number of samples from every class
into the training partition: with train ratio ``tr``, ``m`` samples, and ``N``
classes, each class contributes ``floor(tr*m/N)`` training samples.  That
quota is only feasible while it does not exceed the smallest class, which
caps the usable train ratio at ``N * min_class_count / m`` (exposed exactly by
:func:`upper_limit_train_ratio`).

Train ratios are interpreted as exact decimals: a ratio written ``0.7`` means
7/10, so quota arithmetic matches hand calculation instead of drifting on
binary floating point (``floor(0.7*1800/2)`` is 630, not 629).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dataset import Dataset
from .sampling import SplitMix64, derive_subseed, sample_without_replacement

RANDOM = "random"
STRATIFIED = "stratified"
BALANCED = "balanced"
STRATEGIES = (RANDOM, STRATIFIED, BALANCED)


class InfeasibleBalancedSplit(ValueError):
    """Balanced quota exceeds the smallest class.

    Carries the exact feasibility limit so callers can report how far the
    requested ratio overshoots.
    """

    def __init__(self, train_ratio, quota: int, min_class: str, min_count: int, upper_limit: Fraction):
        self.train_ratio = train_ratio
        self.quota = quota
        self.min_class = min_class
        self.min_count = min_count
        self.upper_limit = upper_limit
        super().__init__(
            f"balanced split infeasible at train ratio {train_ratio}: per-class "
            f"quota {quota} exceeds smallest class {min_class!r} ({min_count} "
            f"samples); the train ratio upper limit is {float(upper_limit):.2f} "
            f"(exactly {upper_limit})"
        )


class EmptyTestClassWarning(UserWarning):
    """A class contributes every sample to train, leaving its test slice empty."""


def exact_ratio(train_ratio) -> Fraction:
    """Train ratio as an exact fraction.

    Floats are read back through their shortest decimal representation, so a
    ratio entered as 0.55 is exactly 55/100.  Strings and Fractions pass
    through exactly (use a Fraction for non-decimal ratios such as 8/9).
    """
    if isinstance(train_ratio, Fraction):
        return train_ratio
    if isinstance(train_ratio, str):
        return Fraction(train_ratio)
    return Fraction(str(float(train_ratio)))


@dataclass(frozen=True)
class SplitConfig:
    strategy: str
    train_ratio: float
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        ratio = exact_ratio(self.train_ratio)
        if not 0 < ratio < 1:
            raise ValueError(f"train_ratio must be in (0, 1), got {self.train_ratio}")

    @property
    def ratio(self) -> Fraction:
        return exact_ratio(self.train_ratio)


@dataclass(frozen=True)
class SplitPlan:
    """Resolved train quotas.

    ``per_class_train`` is None for a freshly planned random split (the random
    strategy has no per-class quota; realized counts are filled in after
    sampling).  ``upper_limit`` is the balanced-feasibility bound and is set
    whenever the dataset census is known.
    """

    total_train: int
    per_class_train: dict[str, int] | None
    upper_limit: Fraction | None = None

    def __post_init__(self):
        if self.per_class_train is not None:
            quota_sum = sum(self.per_class_train.values())
            if quota_sum != self.total_train:
                raise ValueError(
                    f"per-class quotas sum to {quota_sum}, expected {self.total_train}"
                )


@dataclass(frozen=True)
class SplitResult:
    train_indices: np.ndarray
    test_indices: np.ndarray
    plan: SplitPlan
    config: SplitConfig
    per_class_test: dict[str, int]

    def __post_init__(self):
        train = np.asarray(self.train_indices, dtype=np.int64)
        test = np.asarray(self.test_indices, dtype=np.int64)
        train.setflags(write=False)
        test.setflags(write=False)
        object.__setattr__(self, "train_indices", train)
        object.__setattr__(self, "test_indices", test)
        if train.size != self.plan.total_train:
            raise ValueError(
                f"train partition has {train.size} indices, plan says {self.plan.total_train}"
            )

    @property
    def sample_count(self) -> int:
        return int(self.train_indices.size + self.test_indices.size)


def upper_limit_train_ratio(dataset: Dataset) -> Fraction:
    """Largest usable balanced-split train ratio, as an exact fraction.

    Equals ``N * min_class_count / m``; rounding is left to presentation code.
    """
    counts = dataset.counts
    return Fraction(dataset.class_count * int(counts.min()), dataset.sample_count)


def plan_split(dataset: Dataset, config: SplitConfig) -> SplitPlan:
    """Compute train quotas for a split without sampling anything.

    Raises :class:`InfeasibleBalancedSplit` when the balanced quota exceeds
    the smallest class.  Warns with :class:`EmptyTestClassWarning` when a
    class's whole population lands in train (quota equal to its size): the
    split is produced, but that class cannot be evaluated.
    """
    m = dataset.sample_count
    counts = dataset.counts
    names = dataset.class_names
    ratio = config.ratio
    limit = upper_limit_train_ratio(dataset)

    if config.strategy == RANDOM:
        return SplitPlan(total_train=int(ratio * m), per_class_train=None, upper_limit=limit)

    if config.strategy == STRATIFIED:
        total = int(ratio * m)
        base = [int(ratio * int(c)) for c in counts]
        remainders = [ratio * int(c) - b for c, b in zip(counts, base)]
        deficit = total - sum(base)
        # largest fractional remainder first, ties broken by class index
        order = sorted(range(len(names)), key=lambda i: (-remainders[i], i))
        quotas = list(base)
        for i in order[:deficit]:
            quotas[i] += 1
        per_class = {name: q for name, q in zip(names, quotas)}
        _warn_exhausted_classes(per_class, dataset)
        return SplitPlan(total_train=total, per_class_train=per_class, upper_limit=limit)

    # balanced
    quota = int(ratio * m / dataset.class_count)
    min_index = int(np.argmin(counts))
    min_count = int(counts[min_index])
    if quota > min_count:
        raise InfeasibleBalancedSplit(
            train_ratio=config.train_ratio,
            quota=quota,
            min_class=names[min_index],
            min_count=min_count,
            upper_limit=limit,
        )
    per_class = {name: quota for name in names}
    _warn_exhausted_classes(per_class, dataset)
    return SplitPlan(
        total_train=quota * dataset.class_count,
        per_class_train=per_class,
        upper_limit=limit,
    )


def _warn_exhausted_classes(per_class: dict[str, int], dataset: Dataset) -> None:
    census = dataset.class_counts
    exhausted = [name for name, q in per_class.items() if q == census[name]]
    if exhausted:
        warnings.warn(
            f"classes {exhausted} contribute all of their samples to the "
            "training partition; their test partition is empty",
            EmptyTestClassWarning,
            stacklevel=3,
        )


def split(dataset: Dataset, config: SplitConfig) -> SplitResult:
    """Materialize a split: deterministic in (dataset, config) including seed.

    Random strategy: one whole-pool Fisher-Yates shuffle (sub-stream 0), first
    ``total_train`` indices to train.  Stratified/balanced: each class is
    sampled without replacement under its own sub-stream (class index), so a
    class's selection does not depend on the other classes.
    """
    plan = plan_split(dataset, config)
    names = dataset.class_names

    if config.strategy == RANDOM:
        rng = SplitMix64(derive_subseed(config.seed, 0))
        pool = np.arange(dataset.sample_count, dtype=np.int64)
        train, test = sample_without_replacement(pool, plan.total_train, rng)
        realized = np.bincount(dataset.labels[train], minlength=dataset.class_count)
        plan = SplitPlan(
            total_train=plan.total_train,
            per_class_train={name: int(realized[i]) for i, name in enumerate(names)},
            upper_limit=plan.upper_limit,
        )
        _warn_exhausted_classes(plan.per_class_train, dataset)
    else:
        train_parts = []
        test_parts = []
        for index, name in enumerate(names):
            pool = dataset.indices_of_class(index)
            rng = SplitMix64(derive_subseed(config.seed, index))
            picked, rest = sample_without_replacement(pool, plan.per_class_train[name], rng)
            train_parts.append(picked)
            test_parts.append(rest)
        train = np.sort(np.concatenate(train_parts))
        test = np.sort(np.concatenate(test_parts))

    census = dataset.class_counts
    per_class_test = {
        name: census[name] - plan.per_class_train[name] for name in names
    }
    return SplitResult(
        train_indices=train,
        test_indices=test,
        plan=plan,
        config=config,
        per_class_test=per_class_test,
    )


def describe(result: SplitResult) -> dict:
    """Structured summary: per-class counts, realized ratio, train imbalance."""
    per_class = {
        name: {
            "train": result.plan.per_class_train[name],
            "test": result.per_class_test[name],
        }
        for name in result.plan.per_class_train
    }
    quotas = list(result.plan.per_class_train.values())
    largest, smallest = max(quotas), min(quotas)
    if largest == 0:
        imbalance = 1.0
    elif smallest == 0:
        imbalance = math.inf
    else:
        imbalance = largest / smallest
    return {
        "strategy": result.config.strategy,
        "train_ratio": float(result.config.train_ratio),
        "seed": result.config.seed,
        "train_size": int(result.train_indices.size),
        "test_size": int(result.test_indices.size),
        "realized_train_ratio": result.train_indices.size / result.sample_count,
        "per_class": per_class,
        "train_imbalance_ratio": imbalance,
    }


def format_summary(summary: dict) -> str:
    lines = [
        f"strategy={summary['strategy']} train_ratio={summary['train_ratio']} "
        f"seed={summary['seed']}",
        f"train={summary['train_size']} test={summary['test_size']} "
        f"realized_train_ratio={summary['realized_train_ratio']:.4f}",
        f"train imbalance ratio (max/min class count): {summary['train_imbalance_ratio']:.4f}",
        "per-class counts (train/test):",
    ]
    for name, counts in summary["per_class"].items():
        lines.append(f"  {name}: {counts['train']}/{counts['test']}")
    return "\n".join(lines)


def result_to_json(result: SplitResult, indent: int | None = None) -> str:
    """Canonical JSON form; index lists are sorted ascending."""
    payload = {
        "strategy": result.config.strategy,
        "train_ratio": float(result.config.train_ratio),
        "seed": result.config.seed,
        "train_indices": result.train_indices.tolist(),
        "test_indices": result.test_indices.tolist(),
        "per_class_counts": {
            "train": result.plan.per_class_train,
            "test": result.per_class_test,
        },
    }
    return json.dumps(payload, indent=indent)
