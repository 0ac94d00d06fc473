import math

import numpy as np
import pytest

import transferlab as tl
from transferlab.procedures import near_optimal_mask
from transferlab.hypotheses import member_risks

import oracles


CONF = tl.ConfidenceParams(c=1.0, delta=0.1)


def make_sample(xs, ys, discrete=True):
    dtype = np.int64 if discrete else np.float64
    return tl.LabeledSample(np.asarray(xs, dtype=dtype), np.asarray(ys), seed=0)


def empty():
    return make_sample([], [])


def random_finite_instance(rng, max_members=32, max_points=6, max_n=64):
    s = int(rng.integers(2, max_points + 1))
    n_members = int(rng.integers(2, max_members + 1))
    seen, patterns = set(), []
    while len(patterns) < n_members:
        pat = tuple(int(b) for b in rng.integers(0, 2, s))
        if pat not in seen:
            seen.add(pat)
            patterns.append(pat)
        if len(seen) == 2 ** s:
            break
    cls = tl.finite_class(patterns, vc_dim=max(1, int(np.log2(len(patterns)))))
    def sample(n):
        return make_sample(rng.integers(0, s, n), rng.integers(0, 2, n))
    n_p = int(rng.integers(0, max_n + 1))
    n_q = int(rng.integers(0, max_n + 1))
    return cls, sample(n_p), sample(n_q)


# ---------------------------------------------------------------------------
# widths


def test_width_zero_at_matching_size_and_unit_delta():
    assert tl.confidence_width(10, 10, 1.0) == 0.0


def test_width_frozen_value():
    assert tl.confidence_width(100, 10, 0.1) == pytest.approx(0.2532843602293451, abs=1e-15)


def test_width_sentinel_and_monotone_tail():
    assert tl.confidence_width(0, 5, 0.1) == math.inf
    # the log term activates at n = 2d, so the decrease is monotone only from
    # n >= e*d onward; check the tail and the vanishing limit
    vals = [tl.confidence_width(n, 8, 0.05) for n in (24, 48, 96, 512, 4096, 2 ** 20)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-4


def test_width_anytime_identity():
    for n in (1, 7, 100, 4096):
        diff = tl.confidence_width_anytime(n, 6, 0.2) - tl.confidence_width(n, 6, 0.2)
        assert diff == pytest.approx((1.0 / n) * math.log(2.0 * n * n), abs=1e-12)


def test_width_weighted_reduces_to_basic():
    for n in (1, 10, 1000):
        assert tl.confidence_width_weighted(n, 7, 0, 0.05) == tl.confidence_width(n, 7, 0.05)


def test_width_weighted_frozen_value():
    assert tl.confidence_width_weighted(1000, 5, 3, 0.05) == pytest.approx(
        0.041622242171972405, abs=1e-15)


# ---------------------------------------------------------------------------
# constrained procedures


def test_transfer_erm_without_target_data_is_source_erm():
    cls = tl.full_cube_class(3)
    sp = make_sample([0, 1, 2, 0], [1, 0, 1, 1])
    got = tl.transfer_erm(sp, empty(), cls, CONF)
    assert got is tl.erm(cls, sp)


def test_transfer_erm_empty_source_lowest_feasible():
    cls = tl.full_cube_class(3)
    sq = make_sample([0, 1, 2], [1, 1, 1])
    got = tl.transfer_erm(empty(), sq, cls, CONF)
    mask = near_optimal_mask(cls, sq, CONF)
    assert got is cls.members[int(np.flatnonzero(mask)[0])]


def test_transfer_erm_output_feasible_and_dominant():
    rng = np.random.default_rng(2)
    for _ in range(30):
        cls, sp, sq = random_finite_instance(rng)
        h = tl.transfer_erm(sp, sq, cls, CONF)
        mask = near_optimal_mask(cls, sq, CONF)
        i = cls.members.index(h)
        assert mask[i]
        risks_p = member_risks(cls, sp)
        assert all(risks_p[i] <= risks_p[j] + 1e-15
                   for j in np.flatnonzero(mask))


def test_reverse_transfer_is_mirror():
    rng = np.random.default_rng(3)
    cls, sp, sq = random_finite_instance(rng)
    assert tl.reverse_transfer_erm(sp, sq, cls, CONF) is tl.transfer_erm(sq, sp, cls, CONF)


def test_selector_no_target_data_returns_source_erm():
    cls = tl.full_cube_class(3)
    sp = make_sample([0, 0, 1], [1, 1, 0])
    assert tl.select_source_or_target(sp, empty(), cls, CONF) is tl.erm(cls, sp)


def test_selector_identical_distributions_accepts_source():
    joint = tl.DiscreteJoint(np.arange(3.0), [0.4, 0.3, 0.3], [1.0, 0.0, 1.0])
    cls = tl.full_cube_class(3)
    sp = tl.sample_labeled(joint, 200, seed=1)
    sq = tl.sample_labeled(joint, 200, seed=2)
    got = tl.select_source_or_target(sp, sq, cls, CONF)
    assert got is tl.erm(cls, sp)


def test_selector_rejects_misleading_source():
    # large source sample from a pair whose source optimum is bad on the target
    pair, cls = tl.rcs_violating_pair(0.15)
    rejections = 0
    for t in range(40):
        sp = tl.sample_labeled(pair.p, 4096, seed=100 + t)
        sq = tl.sample_labeled(pair.q, 512, seed=200 + t)
        h = tl.select_source_or_target(sp, sq, cls, CONF)
        rejections += tl.excess_risk(pair.q, h, cls) < 0.1
    assert rejections >= 32  # most runs fall back to the target ERM


def test_procedures_match_oracles_randomized():
    rng = np.random.default_rng(11)
    for _ in range(150):
        cls, sp, sq = random_finite_instance(rng)
        c = float(rng.choice([0.5, 1.0, 2.0]))
        delta = float(rng.choice([0.05, 0.1, 0.3]))
        conf = tl.ConfidenceParams(c=c, delta=delta)
        got = tl.transfer_erm(sp, sq, cls, conf)
        want = cls.members[oracles.transfer_erm_index(cls.members, sp, sq, c,
                                                      delta, cls.vc_dim)]
        assert got is want
        got_sel = tl.select_source_or_target(sp, sq, cls, conf)
        want_sel = cls.members[oracles.selector_index(cls.members, sp, sq, c,
                                                      delta, cls.vc_dim)]
        assert got_sel is want_sel


def test_transfer_erm_threshold_class_projection():
    pair = tl.example_scenario(2)
    sp = tl.sample_labeled(pair.p, 60, seed=5)
    sq = tl.sample_labeled(pair.q, 40, seed=6)
    h = tl.transfer_erm(sp, sq, tl.threshold_class(), CONF)
    points = np.concatenate([sp.xs, sq.xs])
    proj = tl.project_class(tl.threshold_class(), points)
    want = proj.members[oracles.transfer_erm_index(proj.members, sp, sq, CONF.c,
                                                   CONF.delta, proj.vc_dim)]
    assert h == want


def test_scaled_confidence():
    conf = tl.ConfidenceParams(c=1.0, delta=0.2)
    assert conf.scaled(4).delta == pytest.approx(0.05)
    with pytest.raises(ValueError):
        tl.ConfidenceParams(c=0.0)
    with pytest.raises(ValueError):
        tl.ConfidenceParams(delta=1.0)
