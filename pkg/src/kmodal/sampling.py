"""Seeded sample access to a distribution, with an exact draw meter.

Every sample a learner sees comes from :class:`SampleOracle`.  Oracles form
a tree: ``oracle.child("step3")`` is an independent stream derived from
``(seed, path)`` that reports into the same :class:`Meter`, so each step of
an algorithm has its own reproducible randomness regardless of how many
draws earlier steps made.

Most consumers only need the empirical count vector of a batch, never the
order of the draws.  :meth:`SampleOracle.draw_counts` produces it directly
from a multinomial, which has exactly the law of binning ``m`` i.i.d.
inverse-cdf draws but costs O(n) instead of O(m log n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import Pmf, SampleSet, as_array


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    # stable across processes, unlike hash()
    h = 2166136261
    for ch in str(part).encode():
        h = ((h ^ ch) * 16777619) & 0xFFFFFFFF
    return h


def stream(seed: int, *path) -> np.random.Generator:
    """Counter-based generator for the substream ``(seed, *path)``."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(_key(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class Meter:
    """Running total of draws made through a family of oracles."""

    count: int = 0


class SampleOracle:
    """Metered sample access to a fixed distribution.

    Parameters
    ----------
    dist : Pmf or array-like
        The distribution to sample.  Sub-normalized vectors are sampled
        after normalization.
    seed : int
        64-bit seed of the root stream.
    path : tuple
        Substream path below the seed; use :meth:`child` instead of
        passing it directly.
    meter : Meter, optional
        Shared draw counter.
    """

    def __init__(self, dist, seed: int, path: tuple = (), meter: Meter | None = None):
        probs = np.asarray(as_array(dist), dtype=np.float64)
        self._probs = probs
        self.n = probs.size
        self.seed = int(seed)
        self.path = tuple(path)
        self.meter = meter if meter is not None else Meter()
        self._rng = None
        self._cdf = None
        self._pvals = None

    # the generator and tables are built on first use so that oracles that
    # never draw cost nothing
    @property
    def rng(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = stream(self.seed, *self.path)
        return self._rng

    def child(self, *key) -> "SampleOracle":
        """Independent substream sharing this oracle's meter."""
        kid = SampleOracle.__new__(SampleOracle)
        kid._probs = self._probs
        kid.n = self.n
        kid.seed = self.seed
        kid.path = self.path + tuple(key)
        kid.meter = self.meter
        kid._rng = None
        kid._cdf = self._cdf
        kid._pvals = self._pvals
        return kid

    @property
    def samples_drawn(self) -> int:
        return self.meter.count

    def _table(self):
        if self._cdf is None:
            c = np.cumsum(self._probs)
            c /= c[-1]
            c[-1] = 1.0
            self._cdf = c
        return self._cdf

    def draw_points(self, m: int) -> np.ndarray:
        """``m`` i.i.d. points by inverse-cdf lookup, in draw order."""
        if m < 0:
            raise ValueError("cannot draw a negative number of samples")
        self.meter.count += m
        if m == 0:
            return np.zeros(0, dtype=np.int64)
        u = self.rng.random(m)
        return np.searchsorted(self._table(), u, side="right").astype(np.int64) + 1

    def draw(self, m: int) -> SampleSet:
        return SampleSet(self.n, self.draw_points(m), seed=self.seed)

    def draw_counts(self, m: int) -> np.ndarray:
        """Per-point counts of ``m`` i.i.d. draws."""
        if m < 0:
            raise ValueError("cannot draw a negative number of samples")
        self.meter.count += m
        if m == 0:
            return np.zeros(self.n, dtype=np.int64)
        if self._pvals is None:
            p = np.clip(self._probs, 0.0, None)
            self._pvals = p / p.sum()
        return self.rng.multinomial(m, self._pvals).astype(np.int64)


class RecordedSample:
    """A fixed, already-drawn batch presented through the oracle interface.

    Every request returns the same recorded counts, whatever ``m`` is asked
    for.  Used to replay one sample through several competitions, and to
    feed pool-restricted samples to subroutines.
    """

    def __init__(self, counts):
        self.counts = np.asarray(counts, dtype=np.int64)
        self.n = self.counts.size
        self.requests = 0

    def draw_counts(self, m: int) -> np.ndarray:
        self.requests += 1
        return self.counts


def draw_samples(p: Pmf, m: int, seed: int) -> SampleSet:
    """``m`` i.i.d. draws from ``p`` using the root stream of ``seed``."""
    return SampleOracle(p, seed).draw(m)
