import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmodal.birge import (
    NONDECREASING,
    NONINCREASING,
    boost_batch,
    boost_runs,
    fit_counts,
    learn_monotone_boosted,
    learn_nondecreasing,
    learn_nonincreasing,
    oblivious_partition,
    target_count,
)
from kmodal.dist import Pmf, SampleSet, flatten, tv_distance
from kmodal.sampling import SampleOracle


def geometric(n, scale):
    return Pmf.from_weights(np.exp(-np.arange(n) / scale))


def perturbed_geometric(n, tau):
    # (1 - tau) * geometric + tau * bump on the last tenth; the geometric
    # part alone is non-increasing, so the mixture is tau-close to it
    geo = geometric(n, n / 5).probs
    bump = np.zeros(n)
    bump[n - n // 10 :] = 1.0 / (n // 10)
    return Pmf.from_weights((1 - tau) * geo + tau * bump)


# -- partition --------------------------------------------------------------


def test_partition_examples():
    for m in (512, 1000, 10**6):
        assert [len(iv) for iv in oblivious_partition(8, m)] == [1] * 8
    n, m = 10**4, 10**3
    part = oblivious_partition(n, m)
    cap = 4 * math.ceil(m ** (1 / 3) * math.log2(n) ** (2 / 3))
    assert 10 <= part.count <= cap
    lengths = part.lengths()
    assert all(a <= b for a, b in zip(lengths, lengths[1:]))


@given(st.integers(1, 5000), st.integers(1, 10**6))
@settings(max_examples=150, deadline=None)
def test_partition_invariants(n, m):
    part = oblivious_partition(n, m)
    assert part[0].lo == 1 and part[-1].hi == n
    assert all(a.hi + 1 == b.lo for a, b in zip(part, part[1:]))
    lengths = part.lengths()
    assert all(a <= b for a, b in zip(lengths, lengths[1:]))
    target = target_count(n, m)
    if target >= n:
        assert part.count == n
    else:
        assert target / 2 <= part.count <= 2 * target


def test_partition_is_oblivious():
    p = geometric(2000, 300)
    before = oblivious_partition(2000, 5000)
    counts = SampleOracle(p, 1).draw_counts(5000)
    after = oblivious_partition(2000, int(counts.sum()))
    assert before.intervals == after.intervals
    h = fit_counts(counts)
    assert [(pc.lo, pc.hi) for pc in h.pieces] == [(iv.lo, iv.hi) for iv in before]


# -- base learner -------------------------------------------------------------


def test_learn_rejects_empty_sample():
    with pytest.raises(ValueError):
        learn_nonincreasing(SampleSet(5, []), 5)


def test_point_mass_at_one():
    p = Pmf.point_mass(1000, 1)
    o = SampleOracle(p, 3)
    ok = sum(tv_distance(p, learn_nonincreasing(o.child(t).draw(1000), 1000)) <= 0.1 for t in range(100))
    assert ok >= 95


@pytest.mark.parametrize("m", [1, 10, 100, 1000, 10_000])
def test_uniform_error_is_reduced_sampling_error(m):
    n = 1000
    p = Pmf.uniform(n)
    ell = oblivious_partition(n, m).count
    o = SampleOracle(p, 5)
    mean = np.mean([tv_distance(p, learn_nonincreasing(o.child(t).draw(m), n)) for t in range(100)])
    assert mean <= 2 * math.sqrt(ell / m) + 0.01


def test_semi_agnostic_bound():
    n, m, tau = 10**4, 10**5, 0.05
    p = perturbed_geometric(n, tau)
    o = SampleOracle(p, 9)
    mean = np.mean([tv_distance(p, fit_counts(o.child(t).draw_counts(m))) for t in range(100)])
    assert mean <= 2 * tau + 4 * (math.log2(n) / m) ** (1 / 3)


@pytest.mark.parametrize("tau", [0.0, 0.02, 0.05, 0.1])
@pytest.mark.parametrize("m", [100, 10**3, 10**5])
def test_flattening_error(tau, m):
    n = 10**4
    p = perturbed_geometric(n, tau)
    part = oblivious_partition(n, m)
    assert tv_distance(flatten(p, list(part)), p) <= 2 * tau + 4 * (math.log2(n) / (m + 1)) ** (1 / 3)


def test_error_scales_like_cube_root():
    n, m = 10**4, 10**3
    p = geometric(n, n / 5)
    o = SampleOracle(p, 12)
    med = [np.median([tv_distance(p, fit_counts(o.child(mm, t).draw_counts(mm))) for t in range(50)]) for mm in (m, 8 * m)]
    assert 0.35 <= med[1] / med[0] <= 0.75


def test_nondecreasing_is_the_mirror():
    p = geometric(300, 40)
    s = SampleOracle(p, 2).draw(2000)
    down = learn_nonincreasing(s, 300)
    up = learn_nondecreasing(SampleSet(300, 301 - np.asarray(s.points)), 300)
    assert np.array_equal(up.to_array(), down.to_array()[::-1])


def test_hypothesis_mass_is_exact():
    counts = SampleOracle(geometric(777, 50), 4).draw_counts(3333)
    for orient in (NONINCREASING, NONDECREASING):
        h = fit_counts(counts, orient)
        assert abs(h.to_array().sum() - h.total_mass) <= 1e-12
        assert h.total_mass == pytest.approx(1.0, abs=1e-12)


# -- boosted ----------------------------------------------------------------------


def test_boost_run_count():
    assert boost_runs(0.5) == 6
    assert boost_runs(0.05) == math.ceil(8 * math.log(20))


def test_boosted_success_rate():
    n, eps, delta = 1000, 0.1, 0.05
    p = geometric(n, 100)
    o = SampleOracle(p, 21)
    ok = 0
    for t in range(200):
        h = learn_monotone_boosted(o.child(t), n, eps, delta, NONINCREASING)
        ok += tv_distance(p, h) <= 6 * eps
    assert ok / 200 >= 0.95


def test_boosted_returns_a_candidate_verbatim():
    n, eps, delta = 500, 0.2, 0.5
    p = Pmf.from_weights(np.r_[np.ones(250), 3 * np.ones(250)])  # two levels, far from flat
    o = SampleOracle(p, 77)
    h = learn_monotone_boosted(o, n, eps, delta, NONDECREASING)
    batch = boost_batch(n, eps)
    replay = SampleOracle(p, 77)
    cands = [fit_counts(replay.child("boost", r).draw_counts(batch), NONDECREASING) for r in range(boost_runs(delta))]
    assert len(cands) == 6
    assert any(np.array_equal(h.to_array(), c.to_array()) for c in cands)


def test_boosted_repetitions_do_not_depend_on_order():
    p = geometric(400, 30)
    batch = 1000
    fwd = [SampleOracle(p, 5).child("boost", r).draw_counts(batch) for r in range(6)]
    o = SampleOracle(p, 5)
    rev = [o.child("boost", r).draw_counts(batch) for r in reversed(range(6))][::-1]
    assert all(np.array_equal(a, b) for a, b in zip(fwd, rev))
