"""The eight acceptance criteria, runnable as ``full`` or ``quick`` profiles.

``quick`` keeps every size and threshold and only cuts trial counts, so a
quick pass is a low-power version of the same assertion rather than a
different one.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import defaults as dft
from . import freeconv
from .eigensolve import eigenvalues
from .harness import ExperimentConfig, report_gumbel, simulate, summarize
from .locallaw import count_large_diagonal
from .rand_models import SeedPath, build_reducer, laplacian_of, sample_goe, sigma_and_sqrt
from .stats import TestReport, combine_reports

PROFILES = ("quick", "full")


@dataclass
class CriterionResult:
    number: int
    title: str
    report: TestReport
    seconds: float
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.report.passed

    def line(self) -> str:
        r = self.report
        verdict = {"pass": "PASS", "fail": "FAIL"}.get(r.status, r.status.upper())
        return (f"criterion {self.number} [{verdict}] {self.title}: "
                f"statistic {r.statistic:.4g} vs threshold {r.threshold:.4g} ({self.seconds:.1f}s)")


def _check(value: float, limit: float, description: str, **details) -> TestReport:
    return TestReport(float(value), float(limit), (1,), description, details=details)


def _param(profile: str, quick_key: str, full_value):
    return dft.QUICK[quick_key] if profile == "quick" else full_value


# -- 1: deterministic algebra ------------------------------------------------

def criterion_algebra(profile: str = "full", seed: int = dft.DEFAULT_SEED) -> TestReport:
    n = dft.ALGEBRA_N
    A = sample_goe(n, SeedPath(seed, (100,)))
    lap = laplacian_of(A).entries
    ones = lap @ np.ones(n)
    full = build_reducer(n).conjugate(lap)
    spec_l = eigenvalues(lap).values
    spec_c = eigenvalues(full).values
    sigma, root = sigma_and_sqrt(n)
    sq = root.entries @ root.entries
    sig_eigs = np.sort(eigenvalues(sigma.entries).values)
    expected = np.append(np.full(n - 1, (n - 2) / n), (2 * n - 2) / n)
    return combine_reports([
        _check(np.max(np.abs(ones)), 1e-13 * n, "Laplacian annihilates the ones vector"),
        _check(np.max(np.abs(spec_l - spec_c)), 1e-10, "orthogonal conjugation preserves the spectrum"),
        _check(np.max(np.abs(sq - sigma.entries)), 1e-12, "square root squares back to the covariance"),
        _check(np.max(np.abs(sig_eigs - expected)), 1e-12, "covariance eigenvalues in closed form"),
    ], f"deterministic algebra (n={n})")


# -- 2: analytic layer -------------------------------------------------------

def criterion_analytic(profile: str = "full", seed: int = dft.DEFAULT_SEED) -> TestReport:
    rng = SeedPath(seed, (101,)).generator()
    pts = dft.ANALYTIC_POINTS
    z = rng.uniform(-6, 6, pts) + 1j * np.exp(rng.uniform(math.log(1e-3), math.log(10), pts))
    m = freeconv.solve_m(z)
    resid = np.max(np.abs(m - freeconv.gaussian_stieltjes(z + m)))

    r = np.exp(rng.uniform(math.log(10), math.log(1000), pts))
    theta = rng.uniform(0.01, math.pi - 0.01, pts)
    zf = r * np.exp(1j * theta)
    far = np.max(np.abs(freeconv.solve_m(zf) + 1 / zf) * np.abs(zf) ** 2)

    grid = freeconv.density_grid()
    xs = np.linspace(-4, 4, 801)
    inv = np.max(np.abs(grid(xs) - freeconv.solve_m(xs + 1j * dft.INVERSION_ETA).imag / np.pi))

    us = np.array([0.5, 1.0, 2.0, 3.0, 4.0, 5.0])
    v_pos = np.array([freeconv.biane_v(u) for u in us])
    v_neg = np.array([freeconv.biane_v(-u) for u in us])
    even = np.max(np.abs(v_pos - v_neg) / v_pos)
    tail = v_pos[3:] * np.exp(us[3:] ** 2 / 2)
    return combine_reports([
        _check(resid, dft.FIXED_POINT_TOL, "fixed-point residual |m - s(z + m)|"),
        _check(far, 2.0, "|m(z) + 1/z| |z|^2 for |z| >= 10"),
        _check(abs(grid.mass() - 1), dft.DENSITY_MASS_TOL, "density mass"),
        _check(inv, dft.INVERSION_TOL, "density vs Stieltjes inversion at eta=1e-3 on [-4, 4]"),
        _check(even, 1e-10, "v is even (relative)"),
        # v(u) e^{u^2/2} tends to sqrt(pi/2); require it bounded by 2 at u = 3, 4, 5
        _check(float(np.max(tail)), 2.0, "sub-Gaussian decay of v at u = 3, 4, 5",
               scaled=tail.tolist()),
    ], "analytic layer")


# -- 3: limit-law oracle equivalence -----------------------------------------

def criterion_limit_laws(profile: str = "full", seed: int = dft.DEFAULT_SEED, threads: int = 1):
    n = dft.LIMIT_N
    trials = _param(profile, "limit_trials", dft.LIMIT_TRIALS)
    parts, extra = [], {}
    gumbel_cfg = ExperimentConfig("gumbel", n, trials, masterSeed=seed, threads=threads,
                                  options={"centering": "eigen"})
    gumbel_records = simulate(gumbel_cfg)
    parts.append(summarize(gumbel_cfg, gumbel_records).report)
    for exp in ("joint-k", "gaps", "diag-max"):
        cfg = ExperimentConfig(exp, n, trials, k=3, masterSeed=seed, threads=threads)
        parts.append(summarize(cfg, simulate(cfg)).report)

    swapped = report_gumbel(gumbel_cfg, gumbel_records, centering="iid")
    shift = swapped.details["mean_statistic"] - swapped.details["mean_oracle"]
    parts.append(_check(abs(shift - dft.CENTERING_SWAP_SHIFT), dft.CENTERING_SWAP_TOL,
                        "swapped centering shifts the mean by 1", shift=shift))
    # the swapped KS must fail: 1 / (stat/threshold) <= 1 iff stat >= threshold
    parts.append(_check(swapped.threshold / max(swapped.statistic, 1e-300), 1.0,
                        "swapped centering is rejected by KS",
                        ks=swapped.statistic, ks_threshold=swapped.threshold))
    extra["components"] = [p.summary() for p in parts]
    return combine_reports(parts, f"limit-law oracle equivalence (n={n}, trials={trials})"), extra


# -- 4: Poisson process ------------------------------------------------------

def criterion_poisson(profile: str = "full", seed: int = dft.DEFAULT_SEED, threads: int = 1):
    trials = _param(profile, "poisson_trials", dft.POISSON_TRIALS)
    cfg = ExperimentConfig("poisson", dft.POISSON_N, trials, masterSeed=seed, threads=threads)
    rep = summarize(cfg, simulate(cfg)).report
    return rep, {"components": [c["description"] + f": {c['statistic']:.4g} <= {c['threshold']:.4g}"
                                for c in rep.details.get("components", [])]}


# -- 5: eigenvalue location --------------------------------------------------

def criterion_location(profile: str = "full", seed: int = dft.DEFAULT_SEED, threads: int = 1):
    trials = _param(profile, "location_trials", dft.LOCATION_TRIALS)
    cfg = ExperimentConfig("predict-location", dft.LOCATION_N, trials, k=2, masterSeed=seed,
                           threads=threads)
    rep = summarize(cfg, simulate(cfg)).report
    comps = rep.details["components"]
    return rep, {"median_error": rep.details["median_error"], "eta": rep.details["eta"],
                 "mean_shift": comps[1]["details"]["mean_shift"],
                 "target_shift": comps[1]["details"]["target"]}


# -- 6: local law and concentration trend ------------------------------------

def criterion_locallaw(profile: str = "full", seed: int = dft.DEFAULT_SEED, threads: int = 1):
    reps = _param(profile, "locallaw_repetitions", dft.LOCALLAW_REPETITIONS)
    resamples = _param(profile, "locallaw_resamples", dft.LOCALLAW_RESAMPLES)
    top = max(dft.LOCALLAW_SIZES)
    opts = {"resamples": resamples, "grid": dft.LOCALLAW_GRID}
    cfg = ExperimentConfig("locallaw", top, reps, masterSeed=seed, threads=threads, options=opts)
    records = simulate(cfg)
    law = summarize(cfg, records).report
    conc = summarize(replace(cfg, experiment="concentration"), records).report
    extra = {}
    for name, rep in (("locallaw", law), ("concentration", conc)):
        for c in rep.details["components"]:
            extra[f"{name} {c['description']}"] = c["details"]["decreasing"]
    return combine_reports([law, conc], f"local law and concentration trend ({reps} repetitions)"), extra


# -- 7: reduction chain ------------------------------------------------------

def criterion_reduction(profile: str = "full", seed: int = dft.DEFAULT_SEED, threads: int = 1):
    trials = _param(profile, "reduction_trials", dft.REDUCTION_TRIALS)
    cfg = ExperimentConfig("reduction-equivalence", dft.REDUCTION_N, trials, k=dft.REDUCTION_K,
                           masterSeed=seed, threads=threads)
    rep = summarize(cfg, simulate(cfg)).report
    return rep, {c["description"]: c["details"].get("fraction", c["statistic"])
                 for c in rep.details["components"]}


# -- 8: diagonal count -------------------------------------------------------

def criterion_diag_count(profile: str = "full", seed: int = dft.DEFAULT_SEED) -> TestReport:
    n, delta = dft.DIAGCOUNT_N, dft.DIAGCOUNT_DELTA
    seeds = _param(profile, "diagcount_seeds", dft.DIAGCOUNT_SEEDS)
    counts = [count_large_diagonal(SeedPath(seed, (108, s)).generator().standard_normal(n), delta)
              for s in range(seeds)]
    med = float(np.median(counts))
    lo = n ** (delta / 2) / (2 * math.log(n))
    hi = 2 * n ** (delta / 2)
    centre, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return TestReport(abs(med - centre) / half, 1.0, (seeds,),
                      f"median large-diagonal count in [{lo:.3g}, {hi:.3g}]",
                      details={"median": med, "window": [lo, hi]})


CRITERIA: dict = {
    1: ("deterministic algebra", criterion_algebra, False),
    2: ("analytic layer", criterion_analytic, False),
    3: ("limit-law oracle equivalence", criterion_limit_laws, True),
    4: ("Poisson point process counts", criterion_poisson, True),
    5: ("eigenvalue location", criterion_location, True),
    6: ("local law and concentration trend", criterion_locallaw, True),
    7: ("reduction chain windows", criterion_reduction, True),
    8: ("diagonal count window", criterion_diag_count, False),
}


def run_criterion(number: int, profile: str = "full", seed: int = dft.DEFAULT_SEED,
                  threads: int = 1) -> CriterionResult:
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}")
    title, fn, parallel = CRITERIA[number]
    t0 = time.perf_counter()
    out = fn(profile, seed, threads) if parallel else fn(profile, seed)
    report, extra = out if isinstance(out, tuple) else (out, {})
    return CriterionResult(number, title, report, time.perf_counter() - t0, extra)


def verify_all(profile: str = "full", seed: int = dft.DEFAULT_SEED, threads: int = 1,
               only: Optional[list] = None, echo: Optional[Callable[[str], None]] = None) -> list:
    results = []
    for number in (only or sorted(CRITERIA)):
        res = run_criterion(number, profile, seed, threads)
        if echo:
            echo(res.line())
        results.append(res)
    return results
