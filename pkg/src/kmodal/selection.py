"""Choose-Hypothesis competitions and the never-loser tournament."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import as_array
from .errors import DomainMismatch, TournamentFailure
from .sampling import RecordedSample

WINNER_FIRST = "winner_first"
WINNER_SECOND = "winner_second"
DRAW = "draw"


@dataclass(frozen=True)
class CompetitionOutcome:
    verdict: str
    tau_hat: float  # fraction of samples in W1 = {h1 > h2}; nan when none drawn
    p1: float  # h1(W1)
    q1: float  # h2(W1)
    samples: int = 0


def competition_samples(eps: float, delta: float) -> int:
    """Draws needed so each one-sided Chernoff failure is at most delta / 2."""
    return math.ceil(2.0 * math.log(2.0 / delta) / (eps * eps))


def _check_params(eps, delta):
    if not 0.0 < eps < 1.0 or not 0.0 < delta < 1.0:
        raise ValueError("eps and delta must lie in (0, 1)")


def _decide(p1, q1, tau1, p2, q2, tau2, eps):
    """Winner rule applied from both sides of the pair.

    Side one wins when the sample puts more than ``p1 - 1.5 eps`` of its mass
    on ``W1``; side two likewise on ``W2 = {h2 > h1}``.  For normalized
    hypotheses without ties ``tau2 > p2 - 1.5 eps`` is the same event as
    ``tau1 < q1 + 1.5 eps``; evaluating it on ``W2`` keeps the verdict
    exactly independent of argument order when ties or missing mass exist.
    """
    first = tau1 > p1 - 1.5 * eps
    second = tau2 > p2 - 1.5 * eps
    if first and not second:
        return WINNER_FIRST
    if second and not first:
        return WINNER_SECOND
    return DRAW


def choose_hypothesis(source, h1, h2, eps: float, delta: float):
    """Pick one of two hypotheses using samples from ``source``.

    Returns ``(chosen, outcome)``.  When the two hypotheses are within
    ``5 eps`` in total variation the result is a draw and nothing is drawn
    from ``source``.  A draw returns ``h1``.
    """
    _check_params(eps, delta)
    x, y = as_array(h1), as_array(h2)
    if x.shape != y.shape:
        raise DomainMismatch("hypotheses live on different domains")
    w1 = x > y
    p1, q1 = math.fsum(x[w1]), math.fsum(y[w1])
    dist = 0.5 * math.fsum(np.abs(x - y))
    if dist <= 5.0 * eps:
        return h1, CompetitionOutcome(DRAW, float("nan"), p1, q1, 0)

    m = competition_samples(eps, delta)
    counts = source.draw_counts(m)
    total = int(counts.sum())
    w2 = y > x
    p2 = math.fsum(y[w2])
    q2 = math.fsum(x[w2])
    tau1 = int(counts[w1].sum()) / total if total else 0.0
    tau2 = int(counts[w2].sum()) / total if total else 0.0
    verdict = _decide(p1, q1, tau1, p2, q2, tau2, eps) if total else DRAW
    chosen = h2 if verdict == WINNER_SECOND else h1
    return chosen, CompetitionOutcome(verdict, tau1, p1, q1, total)


def _chunk_rows(N: int, L: int, budget: int = 1 << 22) -> int:
    return max(1, budget // max(1, N * L))


def _pair_distances(dense: np.ndarray) -> np.ndarray:
    N, L = dense.shape
    out = np.empty((N, N))
    step = _chunk_rows(N, L)
    for s in range(0, N, step):
        out[s : s + step] = 0.5 * np.abs(dense[s : s + step, None, :] - dense[None, :, :]).sum(axis=2)
    return out


def _pair_losses(dense: np.ndarray, dist: np.ndarray, counts, eps: float) -> np.ndarray:
    """Loss matrix for all ordered pairs on a shared recorded sample.

    ``lost[i, j]`` is True when candidate ``i`` loses to candidate ``j``.
    Same rule as :func:`choose_hypothesis`, vectorized over pairs.
    """
    N, L = dense.shape
    lost = np.zeros((N, N), dtype=bool)
    total = int(counts.sum()) if counts is not None else 0
    if total == 0:
        return lost
    c = counts.astype(np.float64)
    step = _chunk_rows(N, L)
    for s in range(0, N, step):
        a = dense[s : s + step, None, :]
        b = dense[None, :, :]
        gt = a > b  # W1 for (i, j)
        lt = a < b  # W2 for (i, j)
        p1 = np.where(gt, a, 0.0).sum(axis=2)
        p2 = np.where(lt, b, 0.0).sum(axis=2)
        tau1 = (gt @ c) / total
        tau2 = (lt @ c) / total
        first = tau1 > p1 - 1.5 * eps
        second = tau2 > p2 - 1.5 * eps
        lost[s : s + step] = (dist[s : s + step] > 5.0 * eps) & second & ~first
    return lost


def tournament(source, candidates, eps: float, delta: float, *, return_index: bool = False):
    """Return the first candidate that never loses a pairwise competition.

    All competitions share one recorded sample of
    ``competition_samples(eps, delta / (2N))`` draws, taken only if some pair
    is more than ``5 eps`` apart.  Raises :class:`TournamentFailure` when
    every candidate loses at least once.
    """
    _check_params(eps, delta)
    cands = list(candidates)
    N = len(cands)
    if N == 0:
        raise ValueError("tournament needs at least one candidate")
    if N == 1:
        return (cands[0], 0) if return_index else cands[0]
    arrays = [as_array(h) for h in cands]
    if len({x.shape for x in arrays}) != 1:
        raise DomainMismatch("candidates live on different domains")
    dense = np.stack(arrays)

    dist = _pair_distances(dense)
    counts = None
    if (dist > 5.0 * eps).any():
        counts = source.draw_counts(competition_samples(eps, delta / (2 * N)))
    lost = _pair_losses(dense, dist, counts, eps)
    winners = np.flatnonzero(~lost.any(axis=1))
    if winners.size == 0:
        raise TournamentFailure(f"all {N} candidates lost at least one competition")
    i = int(winners[0])
    return (cands[i], i) if return_index else cands[i]


def tournament_pairwise(source, candidates, eps: float, delta: float):
    """Reference tournament that calls :func:`choose_hypothesis` per pair.

    Slower than :func:`tournament`; kept for cross-checking.  Uses the same
    shared-sample convention.
    """
    cands = list(candidates)
    N = len(cands)
    if N == 1:
        return cands[0]
    m = competition_samples(eps, delta / (2 * N))
    recorded = None
    lost = [False] * N
    for i in range(N):
        for j in range(i + 1, N):
            if recorded is None and 0.5 * np.abs(as_array(cands[i]) - as_array(cands[j])).sum() > 5 * eps:
                recorded = RecordedSample(source.draw_counts(m))
            src = recorded if recorded is not None else _NoDraw()
            _, out = choose_hypothesis(src, cands[i], cands[j], eps, delta / (2 * N))
            if out.verdict == WINNER_FIRST:
                lost[j] = True
            elif out.verdict == WINNER_SECOND:
                lost[i] = True
    for i in range(N):
        if not lost[i]:
            return cands[i]
    raise TournamentFailure(f"all {N} candidates lost at least one competition")


class _NoDraw:
    def draw_counts(self, m):
        raise AssertionError("a draw was requested for a pair within 5 eps")
