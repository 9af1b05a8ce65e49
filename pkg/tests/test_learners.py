import random
from fractions import Fraction

import pytest

from vslab.concept import axis_rectangles, singletons, thresholds
from vslab.errors import DomainError
from vslab.learners import (algorithm1_schedule, closure_predict, erm_set, mistake_counts, round_deltas,
                            rule_region, run_algorithm1, run_cal, run_monotone_rule)
from vslab.noise import NoiseModel, bounded_noise_from, error_rates
from vslab.version_space import Distribution, LabeledSample, VersionSpaceView, version_space

U5 = Distribution.uniform(5)


def test_monotone_rule_length_one():
    tr = run_monotone_rule("dis_version_space", thresholds(5), U5, 2, 1, seed=1)
    assert len(tr.regions) == 1
    assert not tr.regions[0] >> tr.points[0] & 1


def test_dis_rule_collapses_after_all_points():
    t = thresholds(5)
    tr = run_monotone_rule("dis_version_space", t, U5, 2, 6, points=[4, 0, 3, 1, 2, 2])
    assert tr.all_ok
    assert tr.masses[4] == 0 and tr.masses[5] == 0


@pytest.mark.parametrize("seed", range(5))
def test_closure_region_inside_dis(seed):
    c = axis_rectangles(3, 3)
    d = Distribution.uniform(9)
    target = seed * 7 % len(c)
    a = run_monotone_rule("closure_error_region", c, d, target, 40, seed=seed, track_nhat=True)
    b = run_monotone_rule("dis_version_space", c, d, target, 40, seed=seed)
    assert a.all_ok and b.all_ok
    for ra, rb in zip(a.regions, b.regions):
        assert ra & ~rb == 0
    assert a.to_csv().splitlines()[0] == "step,mass,consistent,monotone,nhat"


def test_monotone_rule_errors():
    with pytest.raises(DomainError):
        run_monotone_rule("closure_error_region", singletons(5), U5, 0, 3)
    with pytest.raises(DomainError):
        rule_region("unknown", [0], 0)


def test_closure_predict_examples():
    t = thresholds(5)
    assert closure_predict(t, LabeledSample(((3, 1),))) == 0b11000
    assert closure_predict(t, LabeledSample(())) == 0
    full = LabeledSample.from_target(range(5), t.hypotheses[2])
    assert closure_predict(t, full) == t.hypotheses[2]
    with pytest.raises(DomainError):
        closure_predict(singletons(4), LabeledSample(()))


def test_closure_predict_is_intersection_of_version_space():
    c = axis_rectangles(3, 3)
    r = random.Random(4)
    for _ in range(30):
        target = r.choice(c.hypotheses)
        s = LabeledSample.from_target([r.randrange(9) for _ in range(6)], target)
        pred = closure_predict(c, s)
        # never a false positive and always consistent
        assert pred & ~target == 0
        assert version_space(c, s).indices and pred in c.hypotheses


def test_cal_examples():
    t = thresholds(5)
    rec = run_cal(t, U5, 2, 0, seed=3)
    assert rec.labels == 0 and rec.hypothesis == 0
    rec = run_cal(t, U5, 2, 10, seed=3)
    assert rec.final_error == 0 and rec.final_dis == 0
    assert all(b <= a for a, b in zip(rec.dis_trace, rec.dis_trace[1:]))
    assert rec.queries == sorted(rec.queries) and len(rec.queries) == rec.labels


def test_cal_queries_lie_in_disagreement_region():
    # replay the same stream and check each query sat in DIS of the version space before it
    from vslab.rng import as_generator, draw_points
    from vslab.version_space import disagreement_region
    t = thresholds(8)
    d = Distribution.uniform(8)
    rec = run_cal(t, d, 3, 6, seed=11, chunk=10 ** 6)
    pts = draw_points(d, min(10 ** 6, 1 << 6), as_generator(11)).tolist()
    target = t.hypotheses[3]
    labeled = []
    for q in rec.queries:
        x = pts[q - 1]
        v = version_space(t, LabeledSample.from_target(labeled, target))
        assert disagreement_region(v) >> x & 1
        labeled.append(x)


def test_erm_set_examples():
    t = thresholds(5)
    s = LabeledSample.from_target([0, 3], t.hypotheses[2])
    assert erm_set(t, s) == version_space(t, s)
    assert erm_set(t, LabeledSample(())) == VersionSpaceView.full(t)
    split = erm_set(t, LabeledSample(((0, 1), (0, -1))))
    assert split == VersionSpaceView.full(t)
    assert mistake_counts(t, LabeledSample(((0, 1), (0, -1)))).tolist() == [1] * 6


def test_round_structure():
    assert len(round_deltas(8, 0.1)) == 3
    t = thresholds(5)
    noise = bounded_noise_from(t.hypotheses[2], Fraction(1, 10), 0b11111, 5)
    rec = run_algorithm1(t, U5, noise, 8, 0.1, Fraction(5, 4), 1, 2, seed=0)
    assert [r.k for r in rec.rounds] == [0, 1, 2]


def test_algorithm1_realizable_keeps_consistent():
    t = thresholds(5)
    h2 = t.hypotheses[2]
    for seed in range(5):
        rec = run_algorithm1(t, U5, NoiseModel.deterministic(h2, 5), 64, 0.1, 1, 1, 2, seed=seed)
        assert rec.final_members >> 2 & 1


def test_algorithm1_keeps_best_in_class_under_bounded_noise():
    t = thresholds(5)
    beta = Fraction(1, 10)
    noise = bounded_noise_from(t.hypotheses[2], beta, 0b11111, 5)
    a = 1 / (1 - 2 * beta)
    sched = algorithm1_schedule(t, U5, 256, 0.1, a, 1, 2)
    hits = sum(run_algorithm1(t, U5, noise, 256, 0.1, a, 1, 2, seed=s, schedule=sched).final_members >> 2 & 1
               for s in range(100))
    assert hits >= 90
