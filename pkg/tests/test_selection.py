import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmodal.dist import Pmf, tv_distance
from kmodal.errors import DomainMismatch, TournamentFailure
from kmodal.hypothesis import Hypothesis, Piece
from kmodal.sampling import RecordedSample, SampleOracle
from kmodal.selection import (
    DRAW,
    WINNER_FIRST,
    WINNER_SECOND,
    choose_hypothesis,
    competition_samples,
    tournament,
    tournament_pairwise,
)

MIRROR = {WINNER_FIRST: WINNER_SECOND, WINNER_SECOND: WINNER_FIRST, DRAW: DRAW}


class Forbidden:
    """A source that fails the test if anything is drawn from it."""

    def draw_counts(self, m):
        raise AssertionError("unexpected draw")


def test_competition_sample_size():
    assert competition_samples(0.05, 0.1) == 2397
    assert competition_samples(0.5, 0.5) == 12


def test_identical_candidates_draw_without_sampling():
    h = Pmf.from_weights([1, 2, 3])
    chosen, out = choose_hypothesis(Forbidden(), h, h, 0.1, 0.1)
    assert chosen is h and out.verdict == DRAW and out.samples == 0
    assert out.p1 == out.q1 == 0.0


@given(st.floats(0.0, 0.25), st.floats(0.01, 0.2))
@settings(max_examples=60, deadline=None)
def test_close_pairs_never_sample(shift, eps):
    # half-L1 between the pair is exactly `shift`
    h1 = np.array([0.5, 0.5])
    h2 = np.array([0.5 + shift, 0.5 - shift])
    src = SampleOracle(Pmf.uniform(2), 0)
    chosen, out = choose_hypothesis(src, h1, h2, eps, 0.1)
    if shift <= 5 * eps:
        assert out.verdict == DRAW and src.samples_drawn == 0 and chosen is h1
    else:
        assert src.samples_drawn == competition_samples(eps, 0.1)


def test_domain_mismatch():
    with pytest.raises(DomainMismatch):
        choose_hypothesis(Forbidden(), Pmf.uniform(2), Pmf.uniform(3), 0.1, 0.1)


def test_winner_first_when_target_is_first():
    eps, delta = 0.05, 0.1
    h1 = Pmf.uniform(10)
    h2 = Pmf(np.r_[np.full(5, 0.2), np.zeros(5)])
    assert tv_distance(h1, h2) == pytest.approx(10 * eps)
    o = SampleOracle(h1, 31)
    wins = sum(choose_hypothesis(o.child(t), h1, h2, eps, delta)[1].verdict == WINNER_FIRST for t in range(500))
    assert wins / 500 >= 1 - delta - 0.02


def test_close_candidate_rarely_loses():
    eps, delta = 0.05, 0.1
    p = Pmf(np.array([0.46, 0.54]))
    h1 = Pmf(np.array([0.5, 0.5]))
    h2 = Pmf(np.array([0.2, 0.8]))
    assert tv_distance(p, h1) <= eps and tv_distance(p, h2) > 4 * eps and tv_distance(h1, h2) > 5 * eps
    o = SampleOracle(p, 32)
    losses = sum(choose_hypothesis(o.child(t), h1, h2, eps, delta)[1].verdict == WINNER_SECOND for t in range(500))
    assert losses / 500 <= delta + 0.02


def _random_hypothesis(rng, n):
    # piecewise constant with a point mass, sometimes sub-normalized
    cut = int(rng.integers(1, n - 1))
    point = n
    w = rng.dirichlet(np.ones(3)) * (1.0 if rng.random() < 0.5 else 0.9)
    return Hypothesis(n, (Piece(1, cut, w[0]), Piece(cut + 1, n - 1, w[1])), ((point, w[2]),))


def test_order_invariance_on_recorded_streams():
    rng = np.random.default_rng(3)
    eps, delta = 0.02, 0.1
    seen = set()
    for t in range(100):
        n = int(rng.integers(4, 30))
        h1, h2 = _random_hypothesis(rng, n), _random_hypothesis(rng, n)
        target = Pmf.from_weights(rng.random(n) + 0.1)
        rec = RecordedSample(SampleOracle(target, t).draw_counts(competition_samples(eps, delta)))
        c12, o12 = choose_hypothesis(rec, h1, h2, eps, delta)
        c21, o21 = choose_hypothesis(rec, h2, h1, eps, delta)
        assert o21.verdict == MIRROR[o12.verdict]
        if o12.verdict != DRAW:
            assert c12 is c21
        seen.add(o12.verdict)
    assert {WINNER_FIRST, WINNER_SECOND} <= seen


# -- tournament -----------------------------------------------------------------


def test_single_candidate_needs_no_samples():
    h = Pmf.uniform(4)
    assert tournament(Forbidden(), [h], 0.1, 0.1) is h


def test_identical_pool_returns_first():
    pool = [Pmf.uniform(5) for _ in range(4)]
    assert tournament(Forbidden(), pool, 0.1, 0.1) is pool[0]


def test_tournament_failure_is_raised():
    # a cyclic pool (found by random search) where every candidate loses once
    a = np.array([0.2, 0.06, 0.01, 0.681, 0.049])
    b = np.array([0.004, 0.125, 0.06, 0.753, 0.058])
    c = np.array([0.03, 0.142, 0.001, 0.75, 0.077])
    rec = [0, 1, 2, 1, 3]
    with pytest.raises(TournamentFailure):
        tournament(RecordedSample(rec), [a, b, c], 0.01, 0.1)
    with pytest.raises(TournamentFailure):
        tournament_pairwise(RecordedSample(rec), [a, b, c], 0.01, 0.1)


def _far_pool(p, rng, size, eps):
    # candidates at distance >= 8 eps from p
    out = []
    while len(out) < size:
        r = Pmf.from_weights(rng.random(p.n) ** 4)
        lam = min(1.0, 8 * eps / max(tv_distance(p, r), 1e-12))
        q = Pmf.from_weights((1 - lam) * p.probs + lam * r.probs)
        if tv_distance(p, q) >= 8 * eps:
            out.append(q)
    return out


def test_pool_with_one_good_candidate():
    eps, delta = 0.05, 0.1
    rng = np.random.default_rng(8)
    p = Pmf.from_weights(rng.random(50))
    src = SampleOracle(p, 40)
    ok = 0
    for t in range(200):
        pool = _far_pool(p, rng, 9, eps)
        pool.insert(t % 10, p)
        try:
            ok += tv_distance(p, tournament(src.child(t), pool, eps, delta)) <= 6 * eps
        except TournamentFailure:
            pass
    assert ok / 200 >= 0.88


@given(st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_vectorized_and_pairwise_tournaments_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 15))
    N = int(rng.integers(2, 8))
    pool = [Pmf.from_weights(rng.random(n) ** 3 + 1e-3) for _ in range(N)]
    if rng.random() < 0.3:
        pool.append(pool[0])
    eps = float(rng.uniform(0.01, 0.1))
    target = pool[int(rng.integers(len(pool)))]
    counts = SampleOracle(target, seed).draw_counts(int(rng.integers(1, 500)))
    outcomes = []
    for run in (tournament, tournament_pairwise):
        try:
            outcomes.append(run(RecordedSample(counts), pool, eps, 0.1))
        except TournamentFailure:
            outcomes.append(None)
    assert outcomes[0] is outcomes[1]
    if outcomes[0] is not None:
        assert any(outcomes[0] is h for h in pool)


def test_tournament_shares_one_sample():
    rng = np.random.default_rng(1)
    pool = [Pmf.from_weights(rng.random(20) ** 4) for _ in range(6)]
    src = SampleOracle(pool[2], 0)
    tournament(src, pool, 0.05, 0.1)
    assert src.samples_drawn == competition_samples(0.05, 0.1 / 12)
