import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from vslab.concept import ConceptClass, InstanceSpace, singletons, thresholds
from vslab.errors import BudgetExceeded, DomainError, ParseError
from vslab.version_space import (Distribution, LabeledSample, VersionSpaceView, compression_set_size,
                                 disagreement_region, dumps_dist, loads_dist, prefix_max_nhat,
                                 prefix_nhats, region_mass, running_max, version_space,
                                 worst_consistent_error)

from conftest import random_class
from oracles import label_rows, nhat_brute, version_space_brute


def sample(*pairs):
    return LabeledSample(tuple(pairs))


def test_version_space_examples():
    t = thresholds(5)
    assert len(version_space(t, sample())) == 6
    assert version_space(t, sample((1, -1), (3, 1))).indices == (2, 3)
    assert not version_space(t, sample((0, 1), (0, -1)))


def test_disagreement_region_examples():
    t = thresholds(5)
    assert disagreement_region(VersionSpaceView.of(t, [3])) == 0
    assert disagreement_region(VersionSpaceView.full(t)) == 0b11111
    assert disagreement_region(VersionSpaceView.of(t, [2, 3])) == 1 << 2
    with pytest.raises(DomainError):
        disagreement_region(VersionSpaceView(t, 0))


def test_region_mass_examples():
    u = Distribution.uniform(5)
    assert region_mass(u, 0) == 0
    assert region_mass(u, 0b11111) == 1
    assert region_mass(u, [2]) == Fraction(1, 5)


def test_distribution_renormalizes_exactly():
    d = Distribution.from_masses([0.1] * 10)
    assert sum(d.masses) == 1
    assert d.masses[0] == Fraction(1, 10)
    with pytest.raises(DomainError):
        Distribution.from_masses([0.5, 0.4])
    with pytest.raises(DomainError):
        Distribution.from_masses([1.5, -0.5])


def test_distribution_file_roundtrip():
    d = Distribution.from_masses(["1/3", "1/3", "1/3"])
    assert loads_dist(dumps_dist(d)) == d
    e = Distribution.from_masses([0.25, 0.5, 0.25])
    assert loads_dist(dumps_dist(e)) == e
    with pytest.raises(ParseError):
        loads_dist("vslab-dist v1\n2\n0.5 x\n")


def test_compression_examples():
    t = thresholds(5)
    r = compression_set_size(t, sample((1, -1), (3, 1)))
    assert r.size == 2 and r.exact
    assert compression_set_size(t, sample()).size == 0
    assert compression_set_size(singletons(5), sample((0, -1), (1, -1), (2, -1))).size == 3


def test_compression_contradictory_sample():
    with pytest.raises(DomainError):
        compression_set_size(thresholds(5), sample((0, 1), (0, -1)))


def test_compression_budget():
    s = LabeledSample.from_target(range(11), 1 << 11)
    # negatives on singletons force every point, so no search is needed
    assert compression_set_size(singletons(12), s, budget=0).size == 11
    # no contradiction set is a single point here, so a search is needed
    c = ConceptClass(InstanceSpace(("a", "b", "c")), (0, 0b011, 0b111))
    with pytest.raises(BudgetExceeded):
        compression_set_size(c, LabeledSample.from_target(range(3), 0), budget=0)
    assert compression_set_size(c, LabeledSample.from_target(range(3), 0), budget=1).size == 1


def test_prefix_max_nhat_examples():
    s = singletons(5)
    assert prefix_max_nhat(s, [0, 1, 2], 1 << 4) == 3
    assert prefix_max_nhat(thresholds(5), [4], thresholds(5).hypotheses[2]) <= 2
    with pytest.raises(DomainError):
        prefix_max_nhat(s, [0], 0b11)


def test_thresholds_nhat_at_most_two():
    t = thresholds(5)
    r = random.Random(3)
    for _ in range(200):
        target = r.choice(t.hypotheses)
        seq = [r.randrange(5) for _ in range(r.randint(1, 8))]
        assert max(prefix_nhats(t, seq, target)) <= 2


def test_worst_consistent_error_examples():
    t, u = thresholds(5), Distribution.uniform(5)
    h2 = t.hypotheses[2]
    assert worst_consistent_error(VersionSpaceView.of(t, [2]), u, h2) == 0
    assert worst_consistent_error(VersionSpaceView.full(t), u, t.hypotheses[0]) == 1
    assert worst_consistent_error(VersionSpaceView.of(t, [2, 3]), u, h2) == Fraction(1, 5)


def test_running_max():
    assert running_max([1, 0, 2, 1, 3]) == [1, 1, 2, 2, 3]


realizable = st.integers(0, 2 ** 32 - 1).map(random.Random)


def _realizable_case(r):
    c = random_class(r)
    target = r.choice(c.hypotheses)
    pts = [r.randrange(c.n) for _ in range(r.randint(0, 9))]
    return c, target, pts


@settings(max_examples=150, deadline=None)
@given(realizable)
def test_version_space_and_nhat_match_brute_force(r):
    c, target, pts = _realizable_case(r)
    s = LabeledSample.from_target(pts, target)
    rows = label_rows(c)
    assert set(version_space(c, s).indices) == version_space_brute(rows, s.pairs)
    res = compression_set_size(c, s)
    assert res.size == nhat_brute(rows, s.pairs)
    # the witness really induces the same version space
    assert version_space(c, LabeledSample(res.witness)) == version_space(c, s)
    greedy = compression_set_size(c, s, "greedy")
    assert version_space(c, LabeledSample(greedy.witness)) == version_space(c, s)
    assert res.size <= greedy.size


@settings(max_examples=80, deadline=None)
@given(realizable)
def test_nhat_order_invariant(r):
    c, target, pts = _realizable_case(r)
    shuffled = pts[:]
    r.shuffle(shuffled)
    a = compression_set_size(c, LabeledSample.from_target(pts, target)).size
    b = compression_set_size(c, LabeledSample.from_target(shuffled, target)).size
    assert a == b


@settings(max_examples=80, deadline=None)
@given(realizable)
def test_version_space_shrinks_with_prefix(r):
    c, target, pts = _realizable_case(r)
    s = LabeledSample.from_target(pts, target)
    prev = None
    for m in range(len(s) + 1):
        v = version_space(c, s.prefix(m))
        assert c.index_of(target) in v
        if prev is not None:
            assert v.members & ~prev.members == 0
        prev = v
