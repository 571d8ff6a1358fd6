"""Exact distribution arithmetic over the domain {1, ..., n}.

Points are 1-based throughout the public API; arrays are 0-based
internally, so ``probs[i - 1]`` is the mass of point ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainMismatch

INPUT_TOL = 1e-9
RENORM_TOL = 1e-12


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Interval:
    """The inclusive integer interval ``[lo, hi]``."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 1 or self.hi < self.lo:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    def __len__(self):
        return self.hi - self.lo + 1

    def __contains__(self, i):
        return self.lo <= i <= self.hi

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __repr__(self):
        return f"[{self.lo},{self.hi}]"


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over ``{1, ..., n}``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("a pmf needs a non-empty 1-d array of masses")
        if not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0 + INPUT_TOL:
            raise ValueError("pmf entries must lie in [0, 1]")
        total = math.fsum(p)
        if abs(total - 1.0) > INPUT_TOL:
            raise ValueError(f"pmf sums to {total!r}, not 1")
        object.__setattr__(self, "probs", _frozen(p))

    @classmethod
    def from_weights(cls, weights) -> "Pmf":
        """Normalize non-negative weights into a pmf."""
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a non-empty array of finite non-negative reals")
        total = math.fsum(w)
        if total <= 0:
            raise ValueError("weights sum to zero")
        p = w / total
        # one renormalization pass absorbs the rounding of the division
        p = p / math.fsum(p)
        return cls(p)

    @classmethod
    def uniform(cls, n: int) -> "Pmf":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, i: int) -> "Pmf":
        p = np.zeros(n)
        p[i - 1] = 1.0
        return cls(p)

    @property
    def n(self) -> int:
        return self.probs.size

    def __len__(self):
        return self.n

    def __call__(self, i: int) -> float:
        return float(self.probs[i - 1])

    def __eq__(self, other):
        if not isinstance(other, Pmf):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.probs, other.probs))

    __hash__ = None

    def mass(self, interval: Interval) -> float:
        return math.fsum(self.probs[interval.lo - 1 : interval.hi])

    def cdf(self) -> np.ndarray:
        """``cdf()[j - 1]`` is ``P(j)``; the last entry is pinned to 1."""
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c

    def reverse(self) -> "Pmf":
        return Pmf(self.probs[::-1].copy())

    def to_array(self) -> np.ndarray:
        return self.probs


def as_array(d) -> np.ndarray:
    """Dense mass vector of a Pmf, Hypothesis, EmpiricalPmf or raw array."""
    if isinstance(d, np.ndarray):
        return d
    if hasattr(d, "to_array"):
        return d.to_array()
    return np.asarray(d, dtype=np.float64)


def _pair(a, b):
    x, y = as_array(a), as_array(b)
    if x.shape != y.shape:
        raise DomainMismatch(f"domain sizes differ: {x.size} vs {y.size}")
    return x, y


def tv_distance(a, b) -> float:
    """Total variation distance, half the L1 norm of the difference."""
    x, y = _pair(a, b)
    return min(1.0, 0.5 * math.fsum(np.abs(x - y)))


def kolmogorov_distance(a, b) -> float:
    """Largest absolute difference between the two cumulative functions."""
    x, y = _pair(a, b)
    return float(np.max(np.abs(np.cumsum(x - y))))


# --------------------------------------------------------------------------
# samples and empirical distributions


@dataclass(frozen=True, eq=False)
class SampleSet:
    """A sorted multiset of draws from a distribution over ``[n]``."""

    n: int
    points: np.ndarray
    seed: int = 0

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=np.int64))
        if pts.size and (pts[0] < 1 or pts[-1] > self.n):
            raise ValueError("sample points must lie in [1, n]")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def m(self) -> int:
        return int(self.points.size)

    def __len__(self):
        return self.m

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (
            self.n == other.n
            and self.seed == other.seed
            and bool(np.array_equal(self.points, other.points))
        )

    __hash__ = None

    def counts(self) -> np.ndarray:
        return np.bincount(self.points - 1, minlength=self.n).astype(np.int64)


class EmpiricalPmf:
    """Empirical distribution ``count(i) / m`` backed by exact integer counts.

    Interval queries use a prefix-count table, so ``count(I)`` is exact and
    O(1); ``mass(I)`` is the float ratio.  Threshold comparisons in the
    learners go through :meth:`count` to avoid rounding ties.
    """

    def __init__(self, counts, samples: SampleSet | None = None):
        c = np.asarray(counts, dtype=np.int64)
        if c.ndim != 1 or c.size < 1 or np.any(c < 0):
            raise ValueError("counts must be a non-empty array of non-negative integers")
        m = int(c.sum())
        if m == 0:
            raise ValueError("empirical distribution of zero samples is undefined")
        self.counts = _frozen(c)
        self.m = m
        self.samples = samples
        prefix = np.zeros(c.size + 1, dtype=np.int64)
        np.cumsum(c, out=prefix[1:])
        self._prefix = _frozen(prefix)

    @property
    def n(self) -> int:
        return self.counts.size

    def count(self, lo: int, hi: int) -> int:
        """Number of samples in ``[lo, hi]`` (empty when ``hi < lo``)."""
        if hi < lo:
            return 0
        return int(self._prefix[hi] - self._prefix[lo - 1])

    def mass(self, lo: int, hi: int) -> float:
        return self.count(lo, hi) / self.m

    def fraction(self, lo: int, hi: int) -> Fraction:
        return Fraction(self.count(lo, hi), self.m)

    def __call__(self, i: int) -> float:
        return int(self.counts[i - 1]) / self.m

    def to_array(self) -> np.ndarray:
        return self.counts / self.m

    def to_pmf(self) -> Pmf:
        return Pmf(self.to_array())


def empirical(s: SampleSet | np.ndarray, n: int | None = None) -> EmpiricalPmf:
    """Empirical distribution of a sample set (or a raw count vector)."""
    if isinstance(s, SampleSet):
        if n is not None and n != s.n:
            raise DomainMismatch(f"sample set lives on [{s.n}], not [{n}]")
        if s.m == 0:
            raise ValueError("empirical distribution of zero samples is undefined")
        return EmpiricalPmf(s.counts(), samples=s)
    return EmpiricalPmf(s)


def dkw_sample_size(eps: float, fail: float) -> int:
    """Smallest m with ``2 exp(-2 m eps^2) <= fail``."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if not 0.0 < fail < 1.0:
        raise ValueError("fail must lie in (0, 1)")
    return max(1, math.ceil(math.log(2.0 / fail) / (2.0 * eps * eps)))


# --------------------------------------------------------------------------
# modality


@dataclass(frozen=True)
class ModalityReport:
    extreme_intervals: tuple = field(default_factory=tuple)

    @property
    def mode_count(self) -> int:
        return len(self.extreme_intervals)

    @property
    def left_extreme_points(self) -> list[int]:
        return [iv.lo for iv, _ in self.extreme_intervals]

    def is_kmodal(self, k: int) -> bool:
        return self.mode_count <= k


def _runs(values: np.ndarray):
    """Maximal runs of exactly equal values as 0-based (start, stop) pairs."""
    if values.size == 0:
        return []
    change = np.flatnonzero(values[1:] != values[:-1]) + 1
    starts = np.concatenate(([0], change))
    stops = np.concatenate((change, [values.size]))
    return list(zip(starts.tolist(), stops.tolist()))


def modality(p) -> ModalityReport:
    """All max- and min-intervals of ``p``.

    An extreme interval is a maximal plateau strictly inside ``[2, n-1]``
    that sits strictly above (max) or strictly below (min) both neighbours.
    Plateaus touching point 1 or point n never count.
    """
    x = as_array(p)
    n = x.size
    out = []
    for start, stop in _runs(x):
        if start == 0 or stop == n:
            continue
        c, left, right = x[start], x[start - 1], x[stop]
        if left < c and right < c:
            out.append((Interval(start + 1, stop), "max"))
        elif left > c and right > c:
            out.append((Interval(start + 1, stop), "min"))
    return ModalityReport(tuple(out))


def is_nondecreasing(p, tol: float = 0.0) -> bool:
    x = as_array(p)
    return bool(np.all(np.diff(x) >= -tol))


def is_nonincreasing(p, tol: float = 0.0) -> bool:
    x = as_array(p)
    return bool(np.all(np.diff(x) <= tol))


# --------------------------------------------------------------------------
# restriction, flattening and reduction


def _region_indices(region, n: int) -> np.ndarray:
    if isinstance(region, Interval):
        region = [region]
    idx = []
    for iv in region:
        if iv.hi > n:
            raise ValueError(f"interval {iv!r} exceeds the domain [1, {n}]")
        idx.append(np.arange(iv.lo - 1, iv.hi))
    if not idx:
        raise ValueError("empty region")
    out = np.unique(np.concatenate(idx))
    return out


def conditional(p: Pmf, region) -> Pmf:
    """Conditional distribution on ``region``, renumbered ``1..|region|``."""
    idx = _region_indices(region, p.n)
    sub = p.probs[idx]
    total = math.fsum(sub)
    if total <= 0:
        raise ValueError("conditioning on a region of zero mass")
    return Pmf.from_weights(sub)


def check_partition(partition: Sequence[Interval], n: int) -> None:
    """Raise unless ``partition`` covers ``[1, n]`` with consecutive intervals."""
    expect = 1
    for iv in partition:
        if iv.lo != expect:
            raise ValueError(f"partition is not a consecutive cover at {iv!r}")
        expect = iv.hi + 1
    if expect != n + 1:
        raise ValueError(f"partition covers [1, {expect - 1}], not [1, {n}]")


def _bounds(partition: Sequence[Interval]) -> np.ndarray:
    return np.array([iv.lo - 1 for iv in partition] + [partition[-1].hi], dtype=np.int64)


def reduce(p, partition: Sequence[Interval]) -> Pmf:
    """Distribution over ``[len(partition)]`` carrying one interval's mass each."""
    x = as_array(p)
    check_partition(partition, x.size)
    b = _bounds(partition)
    sums = np.add.reduceat(x, b[:-1])
    return Pmf.from_weights(sums)


def flatten(p, partition: Sequence[Interval]) -> Pmf:
    """Spread each interval's mass uniformly over the interval."""
    x = as_array(p)
    check_partition(partition, x.size)
    b = _bounds(partition)
    lengths = np.diff(b)
    sums = np.add.reduceat(x, b[:-1])
    return Pmf.from_weights(np.repeat(sums / lengths, lengths))


def reverse_intervals(partition: Iterable[Interval], n: int) -> list[Interval]:
    """Mirror a list of intervals under ``i -> n + 1 - i`` (order reversed)."""
    return [Interval(n + 1 - iv.hi, n + 1 - iv.lo) for iv in reversed(list(partition))]
