import math
from fractions import Fraction

import pytest
from scipy.stats import binomtest

from vslab.concept import singletons, star, thresholds
from vslab.errors import ParameterError
from vslab.harness import (ExperimentConfig, cal_curve, clopper_pearson, estimate_M, quantile_nhat,
                           run_lower_bound, run_trials, run_validation, validate)
from vslab.noise import noisy_star, realizable_star
from vslab.version_space import Distribution

U5 = Distribution.uniform(5)


def test_clopper_pearson_matches_scipy():
    for k, n in [(0, 2000), (3, 2000), (1000, 2000), (2000, 2000), (7, 20)]:
        ci = binomtest(k, n).proportion_ci(0.99, "exact")
        lo, hi = clopper_pearson(k, n)
        assert lo == pytest.approx(ci.low, abs=1e-12) and hi == pytest.approx(ci.high, abs=1e-12)


def _cfg(**kw):
    base = dict(cls="thresholds(5)", m_grid=[4, 16], target=2, trials=200, seed=9,
                quantities=["sup_er", "pdis", "nhat"],
                bounds=[{"name": "pdis_nhat", "quantity": "pdis"},
                        {"name": "monotone_vc_expectation", "quantity": "sup_er"}])
    base.update(kw)
    return ExperimentConfig(**base)


def test_validation_passes_on_thresholds():
    rep = run_validation(_cfg())
    assert rep.passed
    assert {c.verdict for c in rep.checks} == {"PASS-quantile", "PASS-mean"}


def test_validation_is_deterministic_and_worker_independent(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_validation(_cfg(), workers=1, out=str(a))
    run_validation(_cfg(), workers=3, out=str(b))
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("# vslab validate\n# rng: ")


def test_verdicts_recomputable_from_csv(tmp_path):
    cfg = _cfg()
    path = tmp_path / "v.csv"
    rep = run_validation(cfg, out=str(path))
    rows = [l.split(",") for l in path.read_text().splitlines() if not l.startswith("#")]
    head, body = rows[0], rows[1:]
    col = head.index("violated0")
    for check in rep.checks:
        if check.bound != "pdis_nhat":
            continue
        viol = sum(int(r[col]) for r in body if int(r[2]) == check.m)
        assert viol == check.violations


def test_degenerate_distribution():
    cfg = _cfg(dist=[0, 0, 0, 0, 1], target=5)
    recs = run_trials(cfg)
    assert all(r.values[4]["pdis"] == 0 for r in recs)
    rep, _ = validate(cfg, recs)
    assert rep.passed


def test_config_errors():
    with pytest.raises(ParameterError):
        _cfg(quantities=["bogus"])
    with pytest.raises(ParameterError):
        _cfg(bounds=[{"name": "closure", "quantity": "closure_er"}])
    with pytest.raises(ParameterError):
        ExperimentConfig.from_dict({"class": "thresholds(5)", "m_grid": [1], "colour": 1})
    with pytest.raises(ParameterError):
        _cfg(delta=1.0)


def test_estimate_M():
    assert estimate_M(thresholds(5), U5, 2, 1, 0.1, 50).estimate == 1
    fine = estimate_M(thresholds(5), U5, 2, Fraction(1, 20), 0.1, 200, seed=3)
    coarse = estimate_M(thresholds(5), U5, 2, Fraction(1, 10), 0.1, 200, seed=3)
    assert coarse.estimate <= fine.estimate < math.inf
    # below 1/5 only a collapsed version space qualifies
    assert fine.estimate == coarse.estimate


def test_quantile_nhat():
    assert quantile_nhat(thresholds(5), U5, 2, 30, 0.1, 50).estimate <= 2
    q = quantile_nhat(singletons(5), U5, 4, 3, 0.05, 200, seed=1)
    assert all(v <= 3 for v in q.values)
    # as delta approaches 1 the quantile degenerates to the smallest observed value
    loose = quantile_nhat(singletons(5), U5, 4, 3, 0.999, 200, seed=1)
    assert loose.estimate == min(loose.values)


def test_cal_curve_columns():
    csv = cal_curve(thresholds(5), U5, 2, [0, 1, 2, 4, 8], 200, seed=2)
    rows = [l.split(",") for l in csv.splitlines()[2:]]
    assert rows[0][2] == "0.0"
    for r in rows:
        assert float(r[6]) == pytest.approx(1 - float(r[5]), abs=1e-15)
    errs = [float(r[3]) for r in rows]
    ses = [float(r[4]) for r in rows]
    for (e1, s1), (e2, s2) in zip(zip(errs, ses), zip(errs[1:], ses[1:])):
        assert e2 <= e1 + 3 * (s1 + s2)


def test_lower_bound_realizable():
    sc = realizable_star(star(16), Fraction(1, 64))
    inside = int(0.5 * sc.regime_bound)
    rows = run_lower_bound(sc, [inside, 4000], 300, seed=1)
    assert rows[0].verdict == "PASS"
    assert rows[1].verdict == "INFO" and rows[1].frequency < rows[0].frequency


def test_lower_bound_noisy():
    sc = noisy_star(3, Fraction(1, 5), Fraction(2, 5), 2)
    rows = run_lower_bound(sc, [10, 40], 300, seed=1, delta=0.1)
    assert rows[0].verdict == "PASS"
