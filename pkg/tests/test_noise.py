import random
from fractions import Fraction

import numpy as np
import pytest

from vslab.concept import star, thresholds
from vslab.errors import DomainError, ParseError
from vslab.noise import (LowerBoundScenario, NoiseModel, bernstein_check, best_in_class, bounded_noise_from,
                         dumps_noise, error_rates, is_beta_bounded, loads_noise, lower_bound_construction,
                         noisy_star, realizable_star, sample_arrays, sample_labeled)
from vslab.rng import derive_seed, draw_points, splitmix64, stream
from vslab.version_space import Distribution

U5 = Distribution.uniform(5)


def test_bounded_noise_examples():
    t = thresholds(5)
    h2 = t.hypotheses[2]
    assert bounded_noise_from(h2, 0, 0b11111, 5) == NoiseModel.deterministic(h2, 5)
    q = Fraction(1, 4)
    assert bounded_noise_from(h2, q, 0b11111, 5).eta_plus == (q, q, 1 - q, 1 - q, 1 - q)
    with pytest.raises(DomainError):
        bounded_noise_from(h2, Fraction(1, 2), 0b11111, 5)


def test_bounded_noise_is_bounded():
    r = random.Random(2)
    for _ in range(50):
        target, flips = r.randrange(32), r.randrange(32)
        beta = Fraction(r.randrange(50), 100)
        assert is_beta_bounded(bounded_noise_from(target, beta, flips, 5), target, beta)


def test_noise_file_roundtrip():
    n = NoiseModel.of(["0.25", "1/3", 1])
    assert loads_noise(dumps_noise(n)) == n
    with pytest.raises(ParseError) as e:
        loads_noise("vslab-noise v1\n0.5\n1.5\n")
    assert e.value.line == 3


def test_error_rates_and_best():
    t = thresholds(5)
    noise = bounded_noise_from(t.hypotheses[2], Fraction(1, 10), 0b11111, 5)
    er = error_rates(t, U5, noise)
    assert er[2] == Fraction(1, 10)
    assert best_in_class(t, U5, noise) == 2
    assert er[3] == Fraction(1, 10) + Fraction(1, 5) * Fraction(8, 10)


def test_bernstein_examples():
    t = thresholds(5)
    beta = Fraction(1, 10)
    noise = bounded_noise_from(t.hypotheses[2], beta, 0b11111, 5)
    assert bernstein_check(t, U5, noise, 1 / (1 - 2 * beta), 1).holds
    assert bernstein_check(t, U5, NoiseModel.deterministic(t.hypotheses[2], 5), 1, 1).holds
    # near-coin-flip labels on one point make distance far exceed excess error there
    bad = NoiseModel.of([0, 0, Fraction(49, 100), 1, 1])
    res = bernstein_check(t, U5, bad, 1, 1)
    assert not res.holds and res.violator is not None


def test_realizable_star_construction():
    sc = realizable_star(star(10), Fraction(1, 64))
    masses = sorted(sc.dist.masses, reverse=True)
    assert masses[1:] == [Fraction(1, 64)] * 9
    assert masses[0] == 1 - Fraction(9, 64)
    assert sc.threshold == Fraction(1, 64)


def test_noisy_star_construction():
    sc = noisy_star(3, Fraction(1, 5), Fraction(2, 5), 2)
    assert sorted(sc.dist.masses) == [Fraction(1, 5)] * 3 + [Fraction(2, 5)]
    pts = sc.metadata["points"][:3]
    h = sc.cls.hypotheses[sc.target]
    for x in pts:
        assert sc.noise.eta_plus[x] in (Fraction(2, 5), Fraction(3, 5))
        assert (sc.noise.eta_plus[x] > Fraction(1, 2)) == bool(h >> x & 1)
    # the scenario's target is the risk minimizer
    assert best_in_class(sc.cls, sc.dist, sc.noise) == sc.target


def test_noisy_star_scenarios_share_marginal():
    a = noisy_star(4, Fraction(1, 8), Fraction(1, 5), 1)
    b = noisy_star(4, Fraction(1, 8), Fraction(1, 5), 3)
    assert a.dist == b.dist and a.noise != b.noise


def test_scenario_json_roundtrip():
    for sc in (realizable_star(star(6), Fraction(1, 64)), lower_bound_construction(
            "noisy_star", k=3, zeta="0.2", beta="0.4", t=2)):
        again = LowerBoundScenario.from_json(sc.to_json())
        assert again.dist == sc.dist and again.cls.hypotheses == sc.cls.hypotheses
        assert again.noise == sc.noise and again.threshold == sc.threshold


def test_sampling_examples():
    t = thresholds(5)
    h2 = t.hypotheses[2]
    assert len(sample_labeled(U5, h2, 0, stream(1))) == 0
    a = sample_labeled(U5, h2, 200, stream(7, 3))
    b = sample_labeled(U5, NoiseModel.deterministic(h2, 5), 200, stream(7, 3))
    assert a == b


def test_sampling_frequencies():
    d = Distribution.from_masses([0.1, 0.2, 0.3, 0.4])
    m = 10 ** 5
    counts = np.bincount(draw_points(d, m, stream(42)), minlength=4)
    p = np.array([0.1, 0.2, 0.3, 0.4])
    assert np.all(np.abs(counts / m - p) <= 3 * np.sqrt(p * (1 - p) / m))
    pts, ys = sample_arrays(d, NoiseModel.of([0.5] * 4), m, stream(43))
    assert abs((ys == 1).mean() - 0.5) <= 3 * 0.5 / np.sqrt(m)


def test_streams_are_deterministic_and_distinct():
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert derive_seed(1, 0) != derive_seed(1, 1) != derive_seed(2, 1)
    assert stream(5, 2).random() == stream(5, 2).random()
    assert stream(5, 2).random() != stream(5, 3).random()
