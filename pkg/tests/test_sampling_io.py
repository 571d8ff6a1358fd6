import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from kmodal import io as kio
from kmodal.dist import Interval, Pmf, SampleSet, tv_distance
from kmodal.hypothesis import Hypothesis, Piece, combine
from kmodal.sampling import RecordedSample, SampleOracle


def test_children_are_reproducible_and_independent_of_order():
    p = Pmf.from_weights(np.arange(1, 11))
    a = SampleOracle(p, 3)
    first = a.child("x").draw_counts(1000)
    a.child("y").draw_counts(5000)
    b = SampleOracle(p, 3)
    b.child("y").draw_counts(17)
    assert np.array_equal(b.child("x").draw_counts(1000), first)
    assert not np.array_equal(a.child("z").draw_counts(1000), first)


def test_meter_counts_every_draw_path():
    o = SampleOracle(Pmf.uniform(5), 1)
    o.draw(10)
    o.draw_points(3)
    o.child("c").draw_counts(7)
    o.child("c", 2).child("d").draw(4)
    assert o.samples_drawn == 24


def test_counts_have_the_law_of_binned_draws():
    # counts drawn directly must match counts of inverse-cdf draws in law
    p = Pmf.from_weights([5, 1, 3, 1])
    o = SampleOracle(p, 8)
    direct = np.sum([o.child("m", t).draw_counts(50) for t in range(400)], axis=0)
    binned = np.sum([o.child("i", t).draw(50).counts() for t in range(400)], axis=0)
    _, pval, _, _ = stats.chi2_contingency(np.vstack([direct, binned]))
    assert pval > 1e-3
    expected = 20_000 * p.probs
    assert stats.chisquare(direct, expected).pvalue > 1e-3


def test_recorded_sample_replays():
    rec = RecordedSample([3, 0, 1])
    assert rec.draw_counts(100).tolist() == [3, 0, 1]
    assert rec.draw_counts(5).tolist() == [3, 0, 1]
    assert rec.requests == 2


# -- hypotheses ---------------------------------------------------------------


def test_hypothesis_dense_view_and_mass():
    h = Hypothesis(6, (Piece(1, 2, 0.4), Piece(4, 6, 0.3)), ((3, 0.2),))
    assert h.to_array().tolist() == pytest.approx([0.2, 0.2, 0.2, 0.1, 0.1, 0.1])
    assert h.total_mass == pytest.approx(0.9)
    assert h(3) == 0.2
    assert abs(h.to_array().sum() - h.total_mass) <= 1e-12
    # half-L1 against (2,2,2,1,1,1)/9: three gaps of 2/90 and three of 1/90
    assert tv_distance(h, Pmf.from_weights([2, 2, 2, 1, 1, 1])) == pytest.approx(0.05, abs=1e-12)


def test_hypothesis_rejects_overlap_and_excess_mass():
    with pytest.raises(ValueError):
        Hypothesis(4, (Piece(1, 3, 0.5), Piece(3, 4, 0.5)))
    with pytest.raises(ValueError):
        Hypothesis(4, (Piece(1, 2, 0.5),), ((2, 0.1),))
    with pytest.raises(ValueError):
        Hypothesis(2, (Piece(1, 2, 1.5),))


def test_hypothesis_reverse_and_embed():
    h = Hypothesis(4, (Piece(1, 3, 0.6),), ((4, 0.4),))
    assert h.reversed().to_array().tolist() == pytest.approx(h.to_array()[::-1].tolist())
    e = h.embedded(2, 8, 0.5)
    assert e.to_array().tolist() == pytest.approx([0, 0, 0.1, 0.1, 0.1, 0.2, 0, 0])
    both = combine(8, [e, Hypothesis(8, (Piece(7, 8, 0.5),))])
    assert both.total_mass == pytest.approx(1.0)


def test_sampling_from_hypothesis_converges():
    h = Hypothesis(50, (Piece(1, 10, 0.5), Piece(11, 50, 0.5)))
    q = h.to_pmf()
    errs = [tv_distance(q, h.sample(m, seed=4).counts() / m) for m in (1000, 100_000)]
    assert errs[1] < errs[0] and errs[1] < 0.02


# -- file formats -----------------------------------------------------------------


@given(st.lists(st.floats(0.001, 1.0), min_size=1, max_size=20))
def test_pmf_json_round_trip_is_byte_stable(w):
    p = Pmf.from_weights(w)
    text = kio.dumps(p)
    q = kio.pmf_from_dict(json.loads(text))
    assert q == p
    assert kio.dumps(q) == text


def test_samples_and_hypothesis_round_trip():
    s = SampleSet(9, [4, 1, 9, 4], seed=2**63 + 5)
    text = kio.dumps(s)
    assert json.loads(text) == {"n": 9, "seed": 2**63 + 5, "points": [1, 4, 4, 9]}
    assert kio.dumps(kio.samples_from_dict(json.loads(text))) == text
    h = Hypothesis.from_partition([Interval(1, 3), Interval(4, 5)], [0.25, 0.5], 6)
    h = combine(6, [h, Hypothesis(6, (), ((6, 0.25),))])
    text = kio.dumps(h)
    assert set(json.loads(text)) == {"n", "pieces", "points"}
    assert kio.dumps(kio.hypothesis_from_dict(json.loads(text))) == text


def test_pmf_file_rejects_length_mismatch():
    with pytest.raises(ValueError):
        kio.pmf_from_dict({"n": 3, "probs": [0.5, 0.5]})
