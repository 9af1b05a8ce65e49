"""Closed-form error-bound evaluators.

``Log(x) = ln(max(x, e))`` and ``Log2(x) = log2(max(x, 2))``; ``x/0 = inf``
and ``0 * Log(inf) = 0``.  Bounds stated only up to a universal constant
require that constant as an explicit ``const`` parameter.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import ParameterError

E = math.e
INF = math.inf


def Log(x: float) -> float:
    return INF if x == INF else math.log(max(x, E))


def Log2(x: float) -> float:
    return INF if x == INF else math.log2(max(x, 2.0))


def div(a: float, b: float) -> float:
    if b == 0:
        return INF if a > 0 else 0.0
    return a / b


def times_log(coef: float, x: float, log=Log) -> float:
    """coef * log(x) with 0 * log(inf) = 0."""
    if coef == 0:
        return 0.0
    return coef * log(x)


@dataclass(frozen=True)
class BoundResult:
    name: str
    params: dict
    value: float
    clamped: bool
    form: str = "quantile"

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "form": self.form, "params": self.params,
                           "value": self.value, "clamped": self.clamped}, sort_keys=True)


@dataclass(frozen=True)
class _Spec:
    params: tuple[str, ...]
    quantile: Callable | None
    expectation: Callable | None = None
    expectation_params: tuple[str, ...] | None = None
    optional: tuple[str, ...] = ()


def _monotone_vc(p):
    return 4 / p["m"] * (17 * p["vc"] + 4 * math.log(4 / p["delta"]))


def _monotone_vc_exp(p):
    return 68 * (p["vc"] + 1) / p["m"]


def _classic_vapnik(p):
    vc, m = p["vc"], p["m"]
    return 2 / m * (times_log(vc, div(2 * E * m, vc), Log2) + Log2(2 / p["delta"]))


def _compression_lemma(p):
    n, m = p["n"], p["m"]
    if not n < m:
        raise ParameterError("compression_lemma requires n < m (field 'n')")
    return 1 / (m - n) * (times_log(n, div(E * m, n)) + Log(1 / p["delta"]))


def _monotone_compression(p):
    return (21 * p["n"] + 16 * math.log(3 / p["delta"])) / p["m"]


def _monotone_compression_exp(p):
    return (21 * p["n"] + 34) / p["m"]


def _closure(p):
    return (21 * p["d"] + 16 * math.log(3 / p["delta"])) / p["m"]


def _closure_exp(p):
    return (21 * p["d"] + 34) / p["m"]


def _pdis_nhat(p):
    return 16 / p["m"] * (2 * p["nhat"] + math.log(3 / p["delta"]))


def _pdis_star(p):
    return (21 * p["s"] + 16 * math.log(3 / p["delta"])) / p["m"]


def _erm_nhat(p):
    d = p["d"]
    inner = 0.0 if d == 0 else d * math.log(49 * E * p["nhat"] / d + 37)
    return 8 / p["m"] * (inner + 8 * math.log(6 / p["delta"]))


def _erm_star(p):
    d, m = p["d"], p["m"]
    return p["const"] / m * (times_log(d, div(min(p["s"], m), d)) + Log(1 / p["delta"]))


def _erm_star_exp(p):
    d, m = p["d"], p["m"]
    return p["const"] / m * times_log(d, div(min(p["s"], m), d))


def _erm_star_dist_free(p):
    d, m = p["d"], p["m"]
    return p["const"] / m * (times_log(d, div(min(p["s"] * d, m), d)) + Log(1 / p["delta"]))


def _erm_subregion(p):
    return 21 / p["m"] * (p["d"] * math.log(83 * p["phi"]) + 3 * math.log(4 / p["delta"]))


def _cal_labels(p):
    M = p["M"]
    return p["const"] * (p["ntilde"] + Log(Log(M) / p["delta"])) * Log(M)


def _bernstein_x(p):
    a, alpha, d, m = p["a"], p["alpha"], p["d"], p["m"]
    return div(1, a) * div(m, a * d) ** (alpha / (2 - alpha)) if d > 0 else INF


def _bernstein(p):
    a, alpha, d, m = p["a"], p["alpha"], p["d"], p["m"]
    variant = p.get("variant", "mn")
    if variant == "mn":
        x = _bernstein_x(p)
    elif variant == "gk":
        if "theta" not in p:
            raise ParameterError("bernstein_erm variant gk requires field 'theta'")
        x = p["theta"]
    elif variant == "star":
        if "s" not in p:
            raise ParameterError("bernstein_erm variant star requires field 's'")
        x = min(p["s"], _bernstein_x(p))
    else:
        raise ParameterError(f"unknown bernstein_erm variant {variant!r} (field 'variant')")
    inner = a * (times_log(d, x) + Log(1 / p["delta"])) / m
    return p["const"] * inner ** (1 / (2 - alpha))


def _bernstein_exp(p):
    a, alpha, d, m = p["a"], p["alpha"], p["d"], p["m"]
    if p.get("variant", "star") != "star" or "s" not in p:
        raise ParameterError("bernstein_erm expectation form needs variant=star and field 's'")
    x = min(p["s"], _bernstein_x(p))
    return p["const"] * (a * times_log(d, x) / m) ** (1 / (2 - alpha))


def _erm_lower(p):
    m = p["m"]
    return p["const"] * min((p["d"] + Log(min(p["s"], m)) + Log(1 / p["delta"])) / m, 1.0)


def _erm_lower_exp(p):
    m = p["m"]
    return p["const"] * min((p["d"] + Log(min(p["s"], m))) / m, 1.0)


def _bounded_lower(p, with_delta=True):
    m, beta = p["m"], p["beta"]
    g = 1 - 2 * beta
    num = p["d"] + beta * Log(min(p["s"], g * g * m))
    if with_delta:
        num += Log(1 / p["delta"])
    return p["const"] * min(num / (g * m), g)


def _zc_noise(p):
    a, alpha = p["a"], p["alpha"]
    inner = a * (p["d"] * Log(p["phi_hat"]) + Log(1 / p["delta"])) / p["m"]
    return p["const"] * inner ** (1 / (2 - alpha))


def log_factors_sides(a, b, c1, c2) -> tuple[float, float]:
    """Both sides of a ln(c1 (c2 + b/a)) <= a ln(c1 (c2 + e)) + b/e."""
    a, b, c1, c2 = float(a), float(b), float(c1), float(c2)
    if a < 1 or b < 1 or c1 < 1 or c2 < 0:
        raise ParameterError("need a, b, c1 >= 1 and c2 >= 0")
    return a * math.log(c1 * (c2 + b / a)), a * math.log(c1 * (c2 + E)) + b / E


def log_factors_lemma_check(a, b, c1, c2) -> bool:
    lhs, rhs = log_factors_sides(a, b, c1, c2)
    return lhs <= rhs


BOUNDS: dict[str, _Spec] = {
    "monotone_vc": _Spec(("vc", "m", "delta"), _monotone_vc, _monotone_vc_exp, ("vc", "m")),
    "classic_vapnik": _Spec(("vc", "m", "delta"), _classic_vapnik),
    "compression_lemma": _Spec(("n", "m", "delta"), _compression_lemma),
    "monotone_compression": _Spec(("n", "m", "delta"), _monotone_compression, _monotone_compression_exp, ("n", "m")),
    "closure": _Spec(("d", "m", "delta"), _closure, _closure_exp, ("d", "m")),
    "pdis_nhat": _Spec(("nhat", "m", "delta"), _pdis_nhat),
    "pdis_star": _Spec(("s", "m", "delta"), _pdis_star),
    "erm_nhat": _Spec(("d", "nhat", "m", "delta"), _erm_nhat),
    "erm_star": _Spec(("d", "s", "m", "delta", "const"), _erm_star, _erm_star_exp, ("d", "s", "m", "const")),
    "erm_star_dist_free": _Spec(("d", "s", "m", "delta", "const"), _erm_star_dist_free),
    "erm_subregion": _Spec(("d", "phi", "m", "delta"), _erm_subregion),
    "cal_labels": _Spec(("ntilde", "M", "delta", "const"), _cal_labels),
    "bernstein_erm": _Spec(("a", "alpha", "d", "m", "delta", "const"), _bernstein, _bernstein_exp,
                           ("a", "alpha", "d", "m", "const"), ("variant", "theta", "s")),
    "erm_lower": _Spec(("d", "s", "m", "delta", "const"), _erm_lower, _erm_lower_exp, ("d", "s", "m", "const")),
    "bounded_lower": _Spec(("d", "s", "beta", "m", "delta", "const"), _bounded_lower,
                           lambda p: _bounded_lower(p, False), ("d", "s", "beta", "m", "const")),
    "zc_noise": _Spec(("a", "alpha", "d", "phi_hat", "m", "delta", "const"), _zc_noise),
}

_COUNTS = {"vc", "n", "d", "nhat", "s", "ntilde"}


def _coerce(key: str, value):
    if key == "variant":
        return str(value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return value
    if isinstance(value, Fraction):
        return float(value)
    try:
        s = str(value).strip()
        if "/" in s:
            return float(Fraction(s))
        v = float(s)
        return int(v) if v.is_integer() and "." not in s and "e" not in s.lower() else v
    except (TypeError, ValueError, ZeroDivisionError):
        raise ParameterError(f"field {key!r}: not a number: {value!r}") from None


def _check_domain(p: dict) -> None:
    for k in _COUNTS & p.keys():
        if p[k] < 0:
            raise ParameterError(f"field {k!r} must be >= 0")
    if "m" in p and p["m"] < 1:
        raise ParameterError("field 'm' must be >= 1")
    if "M" in p and p["M"] < 1:
        raise ParameterError("field 'M' must be >= 1")
    if "delta" in p and not 0 < p["delta"] < 1:
        raise ParameterError("field 'delta' must lie in (0, 1)")
    if "const" in p and not p["const"] > 0:
        raise ParameterError("field 'const' must be > 0")
    if "a" in p and p["a"] < 1:
        raise ParameterError("field 'a' must be >= 1")
    if "alpha" in p and not 0 < p["alpha"] <= 1:
        raise ParameterError("field 'alpha' must lie in (0, 1]")
    if "beta" in p and not 0 <= p["beta"] < 0.5:
        raise ParameterError("field 'beta' must lie in [0, 1/2)")
    for k in ("phi", "phi_hat", "theta"):
        if k in p and p[k] < 1:
            raise ParameterError(f"field {k!r} must be >= 1")


def evaluate_bound(name: str, params: dict | None = None, **kw) -> BoundResult:
    """Evaluate a named bound. ``form`` is 'quantile' (default) or 'expectation';
    a ``_expectation`` suffix on the name selects the expectation form too."""
    p = dict(params or {})
    p.update(kw)
    form = str(p.pop("form", "quantile"))
    if name.endswith("_expectation"):
        name, form = name[: -len("_expectation")], "expectation"
    if name not in BOUNDS:
        raise ParameterError(f"unknown bound {name!r}; known: {', '.join(sorted(BOUNDS))}")
    spec = BOUNDS[name]
    if form == "quantile":
        func, required = spec.quantile, spec.params
    elif form == "expectation":
        if spec.expectation is None:
            raise ParameterError(f"bound {name!r} has no expectation form")
        func, required = spec.expectation, spec.expectation_params
    else:
        raise ParameterError(f"field 'form' must be quantile or expectation, got {form!r}")
    missing = [k for k in required if k not in p]
    if missing:
        raise ParameterError(f"bound {name!r} is missing field {missing[0]!r}")
    allowed = set(spec.params) | set(spec.optional)
    unknown = sorted(set(p) - allowed)
    if unknown:
        raise ParameterError(f"bound {name!r} does not take field {unknown[0]!r}")
    vals = {k: _coerce(k, v) for k, v in p.items()}
    _check_domain(vals)
    value = float(func(vals))
    return BoundResult(name, vals, value, value > 1, form)
