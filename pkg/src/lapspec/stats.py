"""Fixed-level goodness-of-fit tests used by the acceptance suites.

Every test returns a :class:`TestReport` whose ``passed`` flag is exactly
``statistic <= threshold``. Composite tests (several sub-tests) report the
largest ratio ``sub_statistic / sub_threshold`` against a threshold of 1.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats as _st
from scipy.special import kolmogi

from .errors import InvalidArgumentError

__all__ = [
    "EmpiricalCDF",
    "TestReport",
    "ks_critical_value",
    "ks_one_sample",
    "ks_two_sample",
    "poisson_count_test",
    "count_homogeneity_test",
    "exponential_tail_test",
    "combine_reports",
]

DEFAULT_ALPHA = 0.01


class EmpiricalCDF:
    """Right-continuous step function ``#{x_i <= x} / size``."""

    def __init__(self, sample):
        values = np.sort(np.asarray(sample, dtype=float).ravel())
        if values.size == 0:
            raise InvalidArgumentError("empirical CDF of an empty sample")
        self.sortedValues = values
        self.size = values.size

    def __call__(self, x):
        out = np.searchsorted(self.sortedValues, np.asarray(x, dtype=float), side="right") / self.size
        return float(out) if np.ndim(out) == 0 else out


@dataclass
class TestReport:
    statistic: float
    threshold: float
    sizes: tuple
    description: str
    status: str = ""
    details: dict = field(default_factory=dict)

    __test__ = False  # keep pytest from collecting this as a test class

    def __post_init__(self):
        self.statistic = float(self.statistic)
        self.threshold = float(self.threshold)
        self.sizes = tuple(int(s) for s in self.sizes)
        if not self.status:
            self.status = "pass" if self.passed else "fail"

    @property
    def passed(self) -> bool:
        return bool(self.statistic <= self.threshold)

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, (float, np.floating)):
                v = float(v)
                return v if math.isfinite(v) else None
            if isinstance(v, (np.integer,)):
                return int(v)
            if isinstance(v, (np.bool_, bool)):
                return bool(v)
            if isinstance(v, np.ndarray):
                return [clean(x) for x in v.tolist()]
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            if isinstance(v, dict):
                return {str(k): clean(x) for k, x in v.items()}
            return v

        return {
            "statistic": clean(self.statistic),
            "threshold": clean(self.threshold),
            "pass": self.passed,
            "status": self.status,
            "sizes": list(self.sizes),
            "description": self.description,
            "details": clean(self.details),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def summary(self) -> str:
        return f"[{self.status.upper():>4}] {self.description}: {self.statistic:.4g} <= {self.threshold:.4g}"


def _inconclusive(description: str, sizes, minimum: int) -> TestReport:
    return TestReport(
        math.nan, 0.0, sizes, description, status="inconclusive",
        details={"reason": f"sample size below minimum {minimum}"},
    )


def ks_critical_value(alpha: float = DEFAULT_ALPHA) -> float:
    """Asymptotic Kolmogorov quantile ``c`` with ``P(K > c) = alpha``."""
    if not 0 < alpha < 1:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    return float(kolmogi(alpha))


def _fmean(x) -> float:
    # exactly rounded, hence independent of sample order
    return math.fsum(np.asarray(x, dtype=float).tolist()) / len(x)


def _sample(x, name="sample") -> np.ndarray:
    a = np.asarray(x, dtype=float).ravel()
    if a.size == 0:
        raise InvalidArgumentError(f"{name} is empty")
    if np.isnan(a).any():
        raise InvalidArgumentError(f"{name} contains NaN")
    return a


def ks_one_sample(sample, cdf: Callable, alpha: float = DEFAULT_ALPHA,
                  description: str = "one-sample KS", min_size: int = 1) -> TestReport:
    x = np.sort(_sample(sample))
    m = x.size
    if m < min_size:
        return _inconclusive(description, (m,), min_size)
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    stat = max(float(np.max(i / m - f)), float(np.max(f - (i - 1) / m)), 0.0)
    return TestReport(stat, ks_critical_value(alpha) / math.sqrt(m), (m,), description,
                      details={"alpha": alpha})


def ks_two_sample(a, b, alpha: float = DEFAULT_ALPHA,
                  description: str = "two-sample KS", min_size: int = 1) -> TestReport:
    xa = np.sort(_sample(a, "first sample"))
    xb = np.sort(_sample(b, "second sample"))
    m, k = xa.size, xb.size
    if min(m, k) < min_size:
        return _inconclusive(description, (m, k), min_size)
    pooled = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, pooled, side="right") / m
    fb = np.searchsorted(xb, pooled, side="right") / k
    stat = float(np.max(np.abs(fa - fb)))
    thr = ks_critical_value(alpha) * math.sqrt((m + k) / (m * k))
    return TestReport(stat, thr, (m, k), description,
                      details={"alpha": alpha, "mean_difference": _fmean(xa) - _fmean(xb)})


def _pooled_bins(expected: np.ndarray, floor: float = 5.0) -> list:
    """Group adjacent bins (from the right) until every group expects >= floor."""
    groups, cur, acc = [], [], 0.0
    for j in range(expected.size - 1, -1, -1):
        cur.append(j)
        acc += expected[j]
        if acc >= floor:
            groups.append(cur)
            cur, acc = [], 0.0
    if cur:
        if groups:
            groups[-1].extend(cur)
        else:
            groups.append(cur)
    return groups


def _counts_table(counts: np.ndarray, top: int = 3) -> np.ndarray:
    c = np.minimum(counts, top)
    return np.bincount(c, minlength=top + 1).astype(float)


def poisson_count_test(counts: Sequence[int], mean: float, alpha: float = DEFAULT_ALPHA,
                       description: str = "Poisson counts", dispersion_window=(0.9, 1.1),
                       window_min_trials: int = 10_000) -> TestReport:
    """Dispersion and chi-square goodness of fit of counts against Poisson(mean).

    Dispersion: the index ``var/mean`` (both empirical) must lie in ``dispersion_window`` once
    there are at least ``window_min_trials`` counts; for fewer counts the
    classical two-sided dispersion test ``(N-1) var / mean ~ chi2(N-1)`` is
    used at level ``alpha``. Goodness of fit uses the bins {0, 1, 2, >=3},
    merging bins whose expected count is below 5.
    """
    c = np.asarray(counts)
    if c.size == 0:
        raise InvalidArgumentError("no counts")
    if not mean > 0:
        raise InvalidArgumentError(f"mean must be positive, got {mean}")
    if np.any(c < 0) or np.any(c != np.round(c)):
        raise InvalidArgumentError("counts must be non-negative integers")
    c = c.astype(np.int64)
    n = c.size
    emp_mean = math.fsum(c.tolist()) / n
    emp_var = math.fsum(((c - emp_mean) ** 2).tolist()) / (n - 1) if n > 1 else 0.0
    # classical index of dispersion; the target mean enters through the fit below
    index = emp_var / emp_mean if emp_mean > 0 else 0.0
    details = {"alpha": alpha, "mean": emp_mean, "variance": emp_var,
               "target_mean": float(mean), "dispersion_index": index}

    if n >= window_min_trials:
        lo, hi = dispersion_window
        centre, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        disp_ratio = abs(index - centre) / half
        details["dispersion_rule"] = f"index in [{lo}, {hi}]"
    else:
        df = max(n - 1, 1)
        q = (n - 1) * index
        qlo, qhi = _st.chi2.ppf(alpha / 2, df), _st.chi2.ppf(1 - alpha / 2, df)
        # distance outside the acceptance band, scaled so the boundary maps to 1
        mid, half = 0.5 * (qlo + qhi), 0.5 * (qhi - qlo)
        disp_ratio = abs(q - mid) / half
        details["dispersion_rule"] = "two-sided chi-square dispersion test"

    observed = _counts_table(c)
    pmf = _st.poisson.pmf(np.arange(3), mean)
    expected = n * np.append(pmf, max(1.0 - pmf.sum(), 0.0))
    groups = _pooled_bins(expected)
    obs_g = np.array([observed[g].sum() for g in groups])
    exp_g = np.array([expected[g].sum() for g in groups])
    if len(groups) < 2:
        gof_ratio = 0.0
        details["gof"] = "skipped: fewer than two bins with expected count >= 5"
    else:
        chi2 = float(np.sum((obs_g - exp_g) ** 2 / exp_g))
        crit = float(_st.chi2.ppf(1 - alpha, len(groups) - 1))
        gof_ratio = chi2 / crit
        details.update(gof_statistic=chi2, gof_threshold=crit, gof_bins=len(groups))
    details.update(dispersion_ratio=disp_ratio, gof_ratio=gof_ratio)
    return TestReport(max(disp_ratio, gof_ratio), 1.0, (n,), description, details=details)


def count_homogeneity_test(a: Sequence[int], b: Sequence[int], alpha: float = DEFAULT_ALPHA,
                           description: str = "count homogeneity", top: int = 3) -> TestReport:
    """Two-sample chi-square homogeneity test on the bins {0, 1, ..., >=top}."""
    ca = np.asarray(a, dtype=np.int64)
    cb = np.asarray(b, dtype=np.int64)
    if ca.size == 0 or cb.size == 0:
        raise InvalidArgumentError("empty count sample")
    ta, tb = _counts_table(ca, top), _counts_table(cb, top)
    na, nb = ca.size, cb.size
    pooled = (ta + tb) / (na + nb)
    groups = _pooled_bins(pooled * min(na, nb))
    oa = np.array([ta[g].sum() for g in groups])
    ob = np.array([tb[g].sum() for g in groups])
    if len(groups) < 2:
        return TestReport(0.0, 1.0, (na, nb), description, details={"reason": "single bin"})
    p = (oa + ob) / (na + nb)
    chi2 = float(np.sum((oa - na * p) ** 2 / (na * p)) + np.sum((ob - nb * p) ** 2 / (nb * p)))
    crit = float(_st.chi2.ppf(1 - alpha, len(groups) - 1))
    return TestReport(chi2, crit, (na, nb), description,
                      details={"alpha": alpha, "bins": len(groups),
                               "mean_a": _fmean(ca), "mean_b": _fmean(cb)})


def exponential_tail_test(sample, rate: float = 1.0, alpha: float = DEFAULT_ALPHA,
                          description: str = "exponential tail") -> TestReport:
    x = _sample(sample)
    if np.any(x < 0):
        raise InvalidArgumentError("exponential tail test needs non-negative values")
    if not rate > 0:
        raise InvalidArgumentError("rate must be positive")
    rep = ks_one_sample(x, lambda t: -np.expm1(-rate * t), alpha, description)
    rep.details["mean"] = _fmean(x)
    rep.details["expected_mean"] = 1.0 / rate
    return rep


def combine_reports(reports: Sequence[TestReport], description: str) -> TestReport:
    """Joint report that passes iff every component passes."""
    if not reports:
        raise InvalidArgumentError("nothing to combine")
    if any(r.status == "inconclusive" for r in reports):
        return TestReport(math.nan, 0.0, reports[0].sizes, description, status="inconclusive",
                          details={"components": [r.to_dict() for r in reports]})
    ratio = max(r.statistic / r.threshold for r in reports)
    return TestReport(ratio, 1.0, reports[0].sizes, description,
                      details={"components": [r.to_dict() for r in reports]})
