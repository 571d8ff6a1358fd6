"""Monotonicity testing for distributions known to be k-modal.

The single-shot test draws a batch, and answers "no" when some triple
``a <= b < c`` drawn from the support of the batch (plus both endpoints)
shows an interval average on ``[a, b]`` that exceeds the average on
``[b+1, c]`` by more than the allowed slack.

Scanning all triples costs O(d^3) in the number ``d`` of distinct points.
The condition rearranges to a comparison of two slopes on the empirical
cdf ``G``::

    (G(b) - G(a-1) - T) / (b - a + 1)  >=  (G(c) - G(b) + T) / (c - b)

The left side is maximised over ``a`` by a tangent query against the lower
convex hull of the points ``(a-1, G(a-1) + T)``; the right side is
minimised over ``c`` by a tangent query against the lower hull of
``(c, G(c))``.  Both hulls are built incrementally, so the scan is
O(d log d).  :func:`scan_exhaustive` keeps the direct triple loop for
cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .dist import EmpiricalPmf
from .errors import InsufficientSamples

YES = "yes"
NO = "no"


@dataclass(frozen=True)
class TripleWitness:
    a: int
    b: int
    c: int
    e_hat: float
    threshold: float
    direction: str = "up"  # coordinates are those of the reversed domain when "down"

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "e_hat": self.e_hat, "threshold": self.threshold, "direction": self.direction}


@dataclass(frozen=True)
class Verdict:
    answer: str
    witness: TripleWitness | None = None
    samples: int = 0
    votes: tuple = ()  # (yes, no) counts for majority verdicts

    @property
    def yes(self) -> bool:
        return self.answer == YES

    def to_dict(self) -> dict:
        d = {"answer": self.answer, "samples": self.samples}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        if self.votes:
            d["votes"] = {"yes": self.votes[0], "no": self.votes[1]}
        return d


def estimator(q_hat: EmpiricalPmf, a: int, b: int, c: int) -> float:
    """Average mass on ``[a, b]`` minus average mass on ``[b+1, c]``.

    Evaluated exactly on the counts and returned as a float.

    >>> from kmodal.dist import EmpiricalPmf
    >>> estimator(EmpiricalPmf([5, 3, 1, 1]), 1, 2, 4)
    0.3
    """
    return float(estimator_exact(q_hat, a, b, c))


def estimator_exact(q_hat: EmpiricalPmf, a: int, b: int, c: int) -> Fraction:
    if not (1 <= a <= b < c <= q_hat.n):
        raise ValueError(f"need 1 <= a <= b < c <= n, got ({a}, {b}, {c})")
    return q_hat.fraction(a, b) / (b - a + 1) - q_hat.fraction(b + 1, c) / (c - b)


def threshold(t: float, a: int, b: int, c: int) -> float:
    """Right-hand side of the triple condition, rounded from its exact value."""
    tf = Fraction(t)
    return float(tf / (b - a + 1) + tf / (c - b))


# -- sample sizes -----------------------------------------------------------


def single_shot_samples(k: int, tau: float, slack: float = 100.0) -> int:
    """DKW size for accuracy ``tau / (slack k)`` at failure 1/3."""
    d = tau / (slack * k)
    return math.ceil(math.log(6.0) / (2.0 * d * d))


def repetitions(delta: float, rep_const: float = 18.0) -> int:
    return 2 * math.ceil(rep_const * math.log(1.0 / delta)) + 1


def _check(k, tau):
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")


# -- scan kernels -------------------------------------------------------------


@numba.njit(cache=True)
def _tangent(hx, hy, m, qx, qy):
    # index on the lower hull maximising the slope to (qx, qy), which lies
    # strictly right of every hull vertex; slope along the hull is unimodal
    lo, hi = 0, m - 1
    while lo < hi:
        mid = (lo + hi) // 2
        s0 = (qy - hy[mid]) / (qx - hx[mid])
        s1 = (qy - hy[mid + 1]) / (qx - hx[mid + 1])
        if s1 <= s0:
            hi = mid
        else:
            lo = mid + 1
    return lo


@numba.njit(cache=True)
def _push(hx, hy, hi_idx, m, x, y, idx):
    while m >= 2:
        ax, ay = hx[m - 2], hy[m - 2]
        bx, by = hx[m - 1], hy[m - 1]
        cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
        if cross <= 0.0:
            m -= 1
        else:
            break
    hx[m] = x
    hy[m] = y
    hi_idx[m] = idx
    return m + 1


@numba.njit(cache=True)
def _hull_scan(xs, g_at, g_before, T):
    """Best left and right slopes at every candidate ``b``.

    ``xs`` are the sorted candidate points, ``g_at[j] = G(xs[j])`` and
    ``g_before[j] = G(xs[j] - 1)``, all on the count scale.  Returns
    ``(up, up_arg, down, down_arg)``: ``up[j]`` is the largest left side
    over ``a <= xs[j]`` and ``down[j]`` the smallest right side over
    ``c > xs[j]`` (undefined for the last point).
    """
    d = xs.size
    hx = np.empty(d)
    hy = np.empty(d)
    hidx = np.empty(d, np.int64)
    up = np.empty(d)
    up_arg = np.empty(d, np.int64)
    m = 0
    for j in range(d):
        m = _push(hx, hy, hidx, m, xs[j] - 1.0, g_before[j] + T, j)
        i = _tangent(hx, hy, m, xs[j], g_at[j])
        up[j] = (g_at[j] - hy[i]) / (xs[j] - hx[i])
        up_arg[j] = hidx[i]
    # right side on the mirrored axis: max slope there is minus the min slope
    down = np.full(d, np.inf)
    down_arg = np.full(d, -1, np.int64)
    m = 0
    for j in range(d - 1, -1, -1):
        if m > 0:
            qx = -xs[j]
            qy = g_at[j] - T
            i = _tangent(hx, hy, m, qx, qy)
            down[j] = -(qy - hy[i]) / (qx - hx[i])
            down_arg[j] = hidx[i]
        m = _push(hx, hy, hidx, m, -xs[j], g_at[j], j)
    return up, up_arg, down, down_arg


def _candidates(counts: np.ndarray):
    L = counts.size
    G = np.concatenate(([0], np.cumsum(counts)))
    pts = np.flatnonzero(counts) + 1
    xs = np.union1d(pts, [1, L]).astype(np.int64)
    return xs, G


def violates(G, N: int, t: Fraction, a: int, b: int, c: int) -> bool:
    """Exact test of the triple condition on integer prefix counts ``G``.

    Clearing denominators turns it into
    ``(G(b)-G(a-1))(c-b) - (G(c)-G(b))(b-a+1) >= t N (c-a+1)``.
    """
    left = int(G[b] - G[a - 1]) * (c - b) - int(G[c] - G[b]) * (b - a + 1)
    return left >= t * N * (c - a + 1)


def _exact_at(G, N, t, xs, j, T_float):
    # near-optimal a and c by float value, then settle exactly
    b = int(xs[j])
    aa = xs[: j + 1]
    cc = xs[j + 1 :]
    lv = (G[b] - G[aa - 1] - T_float) / (b - aa + 1)
    rv = (G[cc] - G[b] + T_float) / (cc - b)
    tol = 1e-9 * (1.0 + abs(lv.max()) + abs(rv.min()))
    T = t * N
    best_a = max((int(a) for a in aa[lv >= lv.max() - tol]), key=lambda a: (int(G[b] - G[a - 1]) - T) / (b - a + 1))
    best_c = min((int(c) for c in cc[rv <= rv.min() + tol]), key=lambda c: (int(G[c] - G[b]) + T) / (c - b))
    if violates(G, N, t, best_a, b, best_c):
        return best_a, b, best_c
    return None


def scan_counts(counts, t: float):
    """Violating triple ``(a, b, c)`` for slack ``t`` on a count vector, or None.

    The float hull scan flags near-violations; each flagged ``b`` is then
    settled in exact rational arithmetic, so ties are decided exactly.
    """
    counts = np.asarray(counts, dtype=np.int64)
    L = counts.size
    N = int(counts.sum())
    if L < 2 or N == 0:
        return None
    xs, G = _candidates(counts)
    T = t * N
    up, _, down, _ = _hull_scan(xs.astype(np.float64), G[xs].astype(np.float64), G[xs - 1].astype(np.float64), T)
    tol = 1e-9 * (1.0 + np.abs(up) + np.abs(np.where(np.isfinite(down), down, 0.0)))
    flagged = np.flatnonzero(up[:-1] >= down[:-1] - tol[:-1])
    tf = Fraction(t)
    for j in flagged:
        hit = _exact_at(G, N, tf, xs, int(j), T)
        if hit is not None:
            return hit
    return None


def scan_exhaustive(counts, t: float):
    """Direct O(d^3) triple loop in exact arithmetic over the same points."""
    counts = np.asarray(counts, dtype=np.int64)
    L = counts.size
    N = int(counts.sum())
    if L < 2 or N == 0:
        return None
    xs, G = _candidates(counts)
    q = EmpiricalPmf(counts)
    tf = Fraction(t)
    for b in xs:
        for a in xs[xs <= b]:
            for c in xs[xs > b]:
                a_, b_, c_ = int(a), int(b), int(c)
                if estimator_exact(q, a_, b_, c_) >= tf / (b_ - a_ + 1) + tf / (c_ - b_):
                    return a_, b_, c_
    return None


# -- testers --------------------------------------------------------------------


def _verdict_from_counts(counts, k: int, tau: float, direction: str, debug: bool = False) -> Verdict:
    t = tau / (4.0 * k)
    counts = np.asarray(counts, dtype=np.int64)
    hit = scan_counts(counts, t)
    if debug:
        ref = scan_exhaustive(counts, t)
        assert (hit is None) == (ref is None), "hull scan disagrees with the exhaustive scan"
    N = int(counts.sum())
    if hit is None:
        return Verdict(YES, None, N)
    a, b, c = hit
    e = estimator(EmpiricalPmf(counts), a, b, c)
    return Verdict(NO, TripleWitness(a, b, c, e, threshold(t, a, b, c), direction), N)


def decide_up(counts, k: int, tau: float, debug: bool = False) -> Verdict:
    """Single-shot non-decreasing decision on a recorded count vector."""
    _check(k, tau)
    return _verdict_from_counts(counts, k, tau, "up", debug)


def decide_down(counts, k: int, tau: float, debug: bool = False) -> Verdict:
    """Non-increasing decision: the non-decreasing rule on the reversed counts."""
    _check(k, tau)
    return _verdict_from_counts(np.asarray(counts)[::-1], k, tau, "down", debug)


def test_nondecreasing_once(source, n: int, k: int, tau: float, *, slack: float = 100.0, debug: bool = False) -> Verdict:
    """One run of the non-decreasing tester on a fresh batch from ``source``."""
    _check(k, tau)
    return decide_up(source.draw_counts(single_shot_samples(k, tau, slack)), k, tau, debug)


def test_nonincreasing_once(source, n: int, k: int, tau: float, *, slack: float = 100.0, debug: bool = False) -> Verdict:
    _check(k, tau)
    return decide_down(source.draw_counts(single_shot_samples(k, tau, slack)), k, tau, debug)


def _majority(verdicts) -> Verdict:
    yes = sum(v.yes for v in verdicts)
    no = len(verdicts) - yes
    total = sum(v.samples for v in verdicts)
    if yes > no:
        return Verdict(YES, None, total, (yes, no))
    witness = next(v.witness for v in verdicts if not v.yes)
    return Verdict(NO, witness, total, (yes, no))


def _amplified(source, n, k, tau, delta, once, slack, rep_const):
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    R = repetitions(delta, rep_const)
    return _majority([once(source.child("rep", i), n, k, tau, slack=slack) for i in range(R)])


def test_nondecreasing(source, n: int, k: int, tau: float, delta: float, *, slack: float = 100.0, rep_const: float = 18.0) -> Verdict:
    """Majority vote over independent single-shot runs.

    ``source`` must support ``child``; run ``i`` uses substream ``("rep", i)``.
    """
    return _amplified(source, n, k, tau, delta, test_nondecreasing_once, slack, rep_const)


def test_nonincreasing(source, n: int, k: int, tau: float, delta: float, *, slack: float = 100.0, rep_const: float = 18.0) -> Verdict:
    return _amplified(source, n, k, tau, delta, test_nonincreasing_once, slack, rep_const)


def test_on_samples(batches, k: int, tau: float, delta: float, *, direction: str = "up", slack: float = 100.0, rep_const: float = 18.0, required: int | None = None) -> Verdict:
    """Majority vote over pre-drawn batches restricted to a region.

    Parameters
    ----------
    batches : sequence of count vectors
        One per repetition, indexed by the renumbered region.  Only the
        first ``repetitions(delta, rep_const)`` are used.
    required : int, optional
        Minimum samples per batch; defaults to the single-shot size.

    Raises
    ------
    InsufficientSamples
        If there are too few batches or some batch is short.
    """
    _check(k, tau)
    R = repetitions(delta, rep_const)
    need = single_shot_samples(k, tau, slack) if required is None else required
    if len(batches) < R:
        raise InsufficientSamples(f"need {R} batches, got {len(batches)}", have=len(batches), need=R)
    decide = decide_up if direction == "up" else decide_down
    verdicts = []
    for counts in batches[:R]:
        have = int(np.sum(counts))
        if have == 0 or have < need:
            raise InsufficientSamples(f"region batch has {have} samples, needs {need}", have=have, need=need)
        verdicts.append(decide(counts, k, tau))
    return _majority(verdicts)


# keep pytest from collecting these when imported into test modules
for _f in (test_nondecreasing_once, test_nonincreasing_once, test_nondecreasing, test_nonincreasing, test_on_samples):
    _f.__test__ = False
