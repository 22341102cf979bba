"""Deterministic sampling primitives shared by every splitter and classifier.

Reproducibility contract (stable across platforms and Python/numpy versions):

* The generator is SplitMix64.  State advances by the 64-bit golden-ratio
  constant and outputs are produced by the standard SplitMix64 finalizer.
* Sub-streams: ``derive_subseed(seed, s)`` is the ``(s + 1)``-th raw output of
  SplitMix64 seeded with ``seed``.  Splitters seed the per-class generator
  with ``derive_subseed(seed, class_index)``; the whole-pool shuffle used by
  the random strategy uses stream 0; forests seed tree ``t`` with
  ``derive_subseed(seed, t)``.
* ``randbelow`` draws an unbiased integer in ``[0, n)`` by rejection.
* ``partial_shuffle`` runs the first ``k`` steps of a Fisher-Yates shuffle,
  so elements ``[:k]`` are a uniform sample without replacement and ``[k:]``
  hold the remainder.

Changing any of the above changes every downstream split, so treat this file
as frozen behaviour, not an implementation detail.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1E4357B2
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 output finalizer: a 64-bit bijective scramble."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_subseed(seed: int, stream: int) -> int:
    """Seed for sub-stream ``stream``: the (stream+1)-th SplitMix64 output."""
    if stream < 0:
        raise ValueError(f"stream must be non-negative, got {stream}")
    return mix64((seed + (stream + 1) * _GOLDEN) & _MASK)


class SplitMix64:
    """Minimal deterministic PRNG; see module docstring for the contract."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return mix64(self.state)

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError(f"n must be positive, got {n}")
        if n == 1:
            return 0
        # draws below 2^64 mod n are rejected so every residue is equally likely
        threshold = ((1 << 64) - n) % n
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % n


def partial_shuffle(values: np.ndarray, k: int, rng: SplitMix64) -> np.ndarray:
    """First k Fisher-Yates steps on a copy of ``values``.

    Returns the permuted copy; ``[:k]`` is a uniform k-subset in random order,
    ``[k:]`` is the rest.  ``k == len(values)`` yields a full shuffle (the last
    step is a no-op, so k and k-1 are equivalent there).
    """
    n = len(values)
    if not 0 <= k <= n:
        raise ValueError(f"k must be in [0, {n}], got {k}")
    out = np.array(values, copy=True)
    for i in range(min(k, n - 1)):
        j = i + rng.randbelow(n - i)
        out[i], out[j] = out[j], out[i]
    return out


def sample_without_replacement(values: np.ndarray, k: int, rng: SplitMix64) -> tuple[np.ndarray, np.ndarray]:
    """Split ``values`` into a uniform k-subset and the remainder.

    Both halves are returned sorted ascending so downstream output is
    canonical regardless of the internal swap order.
    """
    shuffled = partial_shuffle(values, k, rng)
    picked = np.sort(shuffled[:k])
    rest = np.sort(shuffled[k:])
    return picked, rest
