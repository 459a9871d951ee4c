"""Spatial-modulation codebook: which antenna groups each scheme activates.

With n_m groups and n_rf chains there are C(n_m, n_rf) possible activation
patterns; the codebook keeps the first M = 2^floor(log2(C(n_m, n_rf))) of
them in lexicographic order, so log2(M) bits ride on the pattern choice.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .params import FeasibilityError, SystemGeometry


def num_spatial_schemes(n_m: int, n_rf: int) -> int:
    """Codebook size M: the largest power of two not exceeding C(n_m, n_rf)."""
    if not 1 <= n_rf < n_m:
        raise FeasibilityError(
            f"spatial modulation requires 1 <= n_rf < n_m (got n_rf={n_rf}, n_m={n_m})")
    count = math.comb(n_m, n_rf)
    return 1 << (count.bit_length() - 1)


@dataclass(frozen=True)
class SpatialCodebook:
    """The M activation patterns, each n_rf strictly-increasing group indices."""

    patterns: np.ndarray   # (M, n_rf) int
    n_m: int
    n_rf: int
    n_k: int
    n_t: int

    @property
    def m_count(self) -> int:
        return self.patterns.shape[0]

    def pattern(self, m: int) -> tuple[int, ...]:
        return tuple(int(g) for g in self.patterns[m])

    def active_antennas(self, m: int) -> np.ndarray:
        """Indices of the n_rf*n_k antennas scheme m activates."""
        groups = self.patterns[m]
        return (groups[:, None] * self.n_k + np.arange(self.n_k)).ravel()

    def activation_onehot(self) -> np.ndarray:
        """(M, n_m) 0/1 matrix; row m marks the groups scheme m activates."""
        onehot = np.zeros((self.m_count, self.n_m))
        rows = np.repeat(np.arange(self.m_count), self.n_rf)
        onehot[rows, self.patterns.ravel()] = 1.0
        return onehot

    def describe(self) -> str:
        lines = [f"M={self.m_count} patterns of {self.n_rf} groups out of {self.n_m}:"]
        lines += [f"  {m:4d}: {self.pattern(m)}" for m in range(self.m_count)]
        return "\n".join(lines)


def build_codebook(geom: SystemGeometry) -> SpatialCodebook:
    """Enumerate the first M lexicographic n_rf-subsets of {0..n_m-1}."""
    geom.require_valid()
    m_count = num_spatial_schemes(geom.n_m, geom.n_rf)
    combos = itertools.islice(itertools.combinations(range(geom.n_m), geom.n_rf), m_count)
    patterns = np.fromiter(itertools.chain.from_iterable(combos),
                           dtype=np.int64).reshape(m_count, geom.n_rf)
    return SpatialCodebook(patterns=patterns, n_m=geom.n_m, n_rf=geom.n_rf,
                           n_k=geom.n_k, n_t=geom.n_t)


def selection_matrix(book: SpatialCodebook, m: int) -> np.ndarray:
    """The N_T x N_RF 0/1 matrix routing chain j to the n_k antennas of its group."""
    if not 0 <= m < book.m_count:
        raise IndexError(f"scheme index {m} out of range [0, {book.m_count})")
    c_m = np.zeros((book.n_t, book.n_rf))
    for j, g in enumerate(book.pattern(m)):
        c_m[g * book.n_k:(g + 1) * book.n_k, j] = 1.0
    return c_m
