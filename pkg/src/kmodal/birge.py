"""Monotone learning on an oblivious geometric partition.

The partition depends only on the domain size and the sample count.  The
learner estimates the mass of each interval by its empirical frequency and
spreads it uniformly over the interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dist import Interval, SampleSet
from .hypothesis import Hypothesis
from .selection import tournament

NONINCREASING = "down"
NONDECREASING = "up"


@dataclass(frozen=True)
class ObliviousPartition:
    intervals: tuple
    bounds: np.ndarray  # 0-based start of each interval, for np.add.reduceat

    @property
    def count(self) -> int:
        return len(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __getitem__(self, j):
        return self.intervals[j]

    def lengths(self) -> list[int]:
        return [len(iv) for iv in self.intervals]


def target_count(n: int, m: int, const: float = 1.0) -> int:
    """Target number of intervals, capped at ``n``."""
    ell = math.ceil(const * m ** (1.0 / 3.0) * math.log2(n + 1) ** (2.0 / 3.0))
    return max(1, min(n, ell))


def _geometric_lengths(n: int, alpha: float) -> list[int]:
    """Lengths floor((1+alpha)^j) until they cover ``n``.

    The truncated last interval is merged into its predecessor whenever it
    would be shorter, so lengths never decrease.
    """
    g = 1.0 + alpha
    jmax = n if alpha <= 0 else min(n, int(math.log(n) / math.log1p(alpha)) + 2)
    j = np.arange(jmax + 1, dtype=np.float64)
    with np.errstate(over="ignore"):
        raw = np.floor(np.power(g, j))
    raw = np.minimum(raw, n).astype(np.int64)
    raw = np.maximum(raw, 1)
    csum = np.cumsum(raw)
    last = int(np.searchsorted(csum, n))  # first index covering n
    lengths = raw[: last + 1].tolist()
    lengths[-1] = n - (int(csum[last - 1]) if last > 0 else 0)
    if len(lengths) > 1 and lengths[-1] < lengths[-2]:
        tail = lengths.pop()
        lengths[-1] += tail
    return lengths


@lru_cache(maxsize=256)
def _partition(n: int, ell: int) -> ObliviousPartition:
    if ell >= n:
        lengths = [1] * n
    else:
        lo, hi = 0.0, float(n)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if len(_geometric_lengths(n, mid)) > ell:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        lengths = _geometric_lengths(n, hi)
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1])).astype(np.int64)
    intervals = tuple(Interval(int(s) + 1, int(s) + L) for s, L in zip(starts, lengths))
    starts.flags.writeable = False
    return ObliviousPartition(intervals, starts)


def oblivious_partition(n: int, m: int, const: float = 1.0) -> ObliviousPartition:
    """Geometric partition of ``[n]`` sized for ``m`` samples.

    Parameters
    ----------
    n : int
        Domain size.
    m : int
        Number of samples the partition is built for.
    const : float
        Multiplier on the target interval count.

    Returns
    -------
    ObliviousPartition
        Consecutive intervals with non-decreasing lengths.  About
        ``m^(1/3) log2(n+1)^(2/3)`` of them, all singletons when that
        target reaches ``n``.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be at least 1")
    return _partition(int(n), target_count(n, m, const))


def fit_counts(counts, orientation: str = NONINCREASING, const: float = 1.0) -> Hypothesis:
    """Flattened empirical hypothesis from a count vector.

    Non-decreasing fits reverse the domain, fit, and reverse back.
    """
    c = np.asarray(counts, dtype=np.int64)
    m = int(c.sum())
    if m <= 0:
        raise ValueError("cannot learn from an empty sample")
    if orientation == NONDECREASING:
        return fit_counts(c[::-1], NONINCREASING, const).reversed()
    if orientation != NONINCREASING:
        raise ValueError(f"unknown orientation {orientation!r}")
    part = oblivious_partition(c.size, m, const)
    masses = np.add.reduceat(c, part.bounds) / m
    return Hypothesis.from_partition(part.intervals, masses, c.size)


def learn_nonincreasing(s: SampleSet, n: int | None = None, const: float = 1.0) -> Hypothesis:
    """Learn a non-increasing distribution from a sample.

    Examples
    --------
    >>> from kmodal.dist import SampleSet
    >>> h = learn_nonincreasing(SampleSet(4, [1, 1, 1, 2]), 4)
    >>> round(h(1), 2)
    0.75
    """
    n = s.n if n is None else n
    if s.m == 0:
        raise ValueError("cannot learn from an empty sample")
    return fit_counts(np.bincount(np.asarray(s.points) - 1, minlength=n), NONINCREASING, const)


def learn_nondecreasing(s: SampleSet, n: int | None = None, const: float = 1.0) -> Hypothesis:
    n = s.n if n is None else n
    if s.m == 0:
        raise ValueError("cannot learn from an empty sample")
    return fit_counts(np.bincount(np.asarray(s.points) - 1, minlength=n), NONDECREASING, const)


def boost_runs(delta: float, const: float = 8.0) -> int:
    return max(1, math.ceil(const * math.log(1.0 / delta)))


def boost_batch(n: int, eps: float) -> int:
    return max(1, math.ceil(math.log2(n) / eps**3)) if n > 1 else 1


def learn_monotone_boosted(
    source,
    n: int,
    eps: float,
    delta: float,
    orientation: str = NONINCREASING,
    *,
    boost_const: float = 8.0,
    partition_const: float = 1.0,
):
    """Confidence-boosted monotone learner.

    Fits ``boost_runs(delta)`` candidates on independent batches of
    ``boost_batch(n, eps)`` draws, each from its own substream, then keeps
    the tournament winner at accuracy ``eps`` and confidence ``delta / 2``.
    Raises :class:`~kmodal.errors.TournamentFailure` if no candidate
    survives.
    """
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ValueError("eps and delta must lie in (0, 1)")
    R = boost_runs(delta, boost_const)
    batch = boost_batch(n, eps)
    cands = [fit_counts(source.child("boost", r).draw_counts(batch), orientation, partition_const) for r in range(R)]
    return tournament(source.child("boost", "select"), cands, eps, delta / 2)


def boosted_from_pool(batches, select_counts, eps: float, delta: float, orientation: str, partition_const: float = 1.0):
    """Boosted learner fed from pre-drawn batches instead of a live source.

    ``batches`` holds one count vector per candidate; empty batches give a
    uniform candidate.  ``select_counts`` is the recorded sample used by the
    tournament.  Returns ``(hypothesis, eps_used)`` where ``eps_used`` is the
    tournament accuracy that the available selection sample supports.
    """
    from .sampling import RecordedSample

    L = len(select_counts)
    cands = []
    for c in batches:
        c = np.asarray(c)
        cands.append(fit_counts(c, orientation, partition_const) if c.sum() > 0 else Hypothesis.uniform(L))
    N = len(cands)
    m_t = int(np.sum(select_counts))
    eps_t = eps if m_t == 0 else max(eps, math.sqrt(2.0 * math.log(4.0 * N / delta) / m_t))
    eps_t = min(eps_t, 0.999)
    return tournament(RecordedSample(select_counts), cands, eps_t, delta / 2), eps_t
