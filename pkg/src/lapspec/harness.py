"""Experiment orchestration.

Each experiment is a per-trial function ``(cfg, index) -> payload`` plus a
report function over the ordered payloads. Trials draw from seed lanes
``(experiment_id, 0, trial)``; the Gaussian order-statistics oracle uses
lane ``(experiment_id, 1)``. Output is therefore a pure function of the
config, whatever the worker count.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import defaults as dft
from . import evt, freeconv, locallaw
from .eigensolve import eigenvalues, top_k_eigenvalues, tridiagonalize, count_above
from .errors import InvalidArgumentError, LapspecError, TrialFailure
from .rand_models import (
    SeedPath, _goe_array, laplacian_of, sample_reduction_chain, sample_surrogate, sigma_and_sqrt,
)
from .stats import (
    TestReport, combine_reports, count_homogeneity_test, exponential_tail_test, ks_one_sample,
    ks_two_sample, poisson_count_test,
)

EXPERIMENTS = (
    "gumbel", "joint-k", "gaps", "poisson", "diag-max", "predict-location",
    "locallaw", "concentration", "fc-density", "reduction-equivalence",
)
# locallaw and concentration share lanes so one sweep can serve both
_LANE = {name: i for i, name in enumerate(EXPERIMENTS)}
_LANE["concentration"] = _LANE["locallaw"]


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int
    trials: int
    k: int = dft.DEFAULT_K
    delta: float = dft.DEFAULT_DELTA
    masterSeed: int = dft.DEFAULT_SEED
    outPath: Optional[str] = None
    threads: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgumentError(f"unknown experiment {self.experiment!r}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidArgumentError(f"trials must be >= 1, got {self.trials}")
        if int(self.n) != self.n or self.n < 3:
            raise InvalidArgumentError(f"n must be >= 3, got {self.n}")
        if int(self.k) != self.k or self.k < 1:
            raise InvalidArgumentError(f"k must be >= 1, got {self.k}")
        if self.threads < 0:
            raise InvalidArgumentError("threads must be >= 0")
        SeedPath(self.masterSeed)  # range check

    @property
    def configHash(self) -> str:
        """sha256 over every field that affects results (not output path or workers)."""
        key = {
            "experiment": self.experiment, "n": int(self.n), "trials": int(self.trials),
            "k": int(self.k), "delta": float(self.delta), "masterSeed": int(self.masterSeed),
            "options": self.options, "defaults": dft.DEFAULTS_VERSION,
        }
        blob = json.dumps(key, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def lane(self, *idx) -> SeedPath:
        return SeedPath(self.masterSeed, (_LANE[self.experiment],) + tuple(int(i) for i in idx))

    def option(self, name, default):
        return self.options.get(name, default)


@dataclass
class ExperimentRecord:
    configHash: str
    trialIndex: int
    payload: dict
    wallTimeMs: int = 0


@dataclass
class RunResult:
    config: ExperimentConfig
    report: TestReport
    records: list
    artifacts: dict = field(default_factory=dict)


# -- serialization ---------------------------------------------------------

def _encode(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if v is None:
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_encode(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_encode(x)}" for k, x in sorted(v.items())) + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def record_line(rec: ExperimentRecord) -> str:
    """One JSONL line; wall time is excluded so reruns are byte-identical."""
    return _encode({"configHash": rec.configHash, "trialIndex": rec.trialIndex, "payload": rec.payload})


def write_jsonl(path, records) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(record_line(rec) + "\n")
    return path


def read_jsonl(path) -> list:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _persist(cfg: ExperimentConfig, report: TestReport, records: list) -> dict:
    if not cfg.outPath:
        return {}
    out = Path(cfg.outPath)
    write_jsonl(out, records)
    rep = _sidecar(out, ".report.json")
    rep.write_text(_encode({"configHash": cfg.configHash, "config": _config_dict(cfg),
                            "report": report.to_dict()}) + "\n", encoding="utf-8")
    timing = _sidecar(out, ".timing.jsonl")
    with timing.open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(_encode({"trialIndex": r.trialIndex, "wallTimeMs": r.wallTimeMs}) + "\n")
    return {"jsonl": str(out), "report": str(rep), "timing": str(timing)}


def _config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d.pop("outPath")
    d.pop("threads")
    return d


# -- trial execution -------------------------------------------------------

def _workers(cfg: ExperimentConfig) -> int:
    return (os.cpu_count() or 1) if cfg.threads == 0 else cfg.threads


def _timed(args):
    fn, cfg, i = args
    t0 = time.perf_counter()
    try:
        payload = fn(cfg, i)
    except LapspecError as exc:
        raise TrialFailure(i, exc) from exc
    return payload, int(round(1000 * (time.perf_counter() - t0)))


def run_trials(cfg: ExperimentConfig, fn: Callable, count: Optional[int] = None) -> list:
    """Run ``fn(cfg, i)`` for ``i < count`` and return records in index order."""
    count = cfg.trials if count is None else count
    jobs = [(fn, cfg, i) for i in range(count)]
    workers = min(_workers(cfg), count)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_timed, jobs, chunksize=max(1, count // (4 * workers))))
    else:
        results = [_timed(j) for j in jobs]
    h = cfg.configHash
    return [ExperimentRecord(h, i, p, ms) for i, (p, ms) in enumerate(results)]


def _column(records, key) -> np.ndarray:
    return np.array([r.payload[key] for r in records], dtype=float)


def _oracle_topk(cfg: ExperimentConfig, k: int, trials: Optional[int] = None) -> np.ndarray:
    return evt.gaussian_topk_batch(cfg.n, k, cfg.trials if trials is None else trials, cfg.lane(1))


def _ks2(a, b, description) -> TestReport:
    return ks_two_sample(a, b, dft.ALPHA, description, min_size=dft.MIN_TEST_SAMPLES)


# -- limit laws ------------------------------------------------------------

def _topk_trial(cfg, i):
    k = {"gaps": max(cfg.k, 2), "joint-k": cfg.k}.get(cfg.experiment, 1)
    _, _, L = sample_surrogate(cfg.n, cfg.lane(0, i))
    lam = top_k_eigenvalues(L, min(k, cfg.n), backend=dft.REDUCTION_BACKEND).values
    return {"lambda": lam.tolist()}


def _lambdas(records) -> np.ndarray:
    return np.array([r.payload["lambda"] for r in records], dtype=float)


def report_gumbel(cfg, records, centering: str = "eigen") -> TestReport:
    c = evt.constants(cfg.n)
    stat = c.rescale(_lambdas(records)[:, 0], centering)
    oracle = c.rescale(_oracle_topk(cfg, 1, len(records))[:, 0], "iid")
    rep = _ks2(stat, oracle, f"largest eigenvalue vs Gaussian maxima (centering {centering})")
    info = ks_one_sample(stat, evt.gumbel_cdf, dft.ALPHA, "informational: vs Gumbel")
    rep.details.update(centering=centering, mean_statistic=float(np.mean(stat)),
                       mean_oracle=float(np.mean(oracle)), one_sample_gumbel=info.to_dict())
    return rep


def run_gumbel(cfg: ExperimentConfig) -> TestReport:
    return execute(cfg).report


def report_joint_k(cfg, records) -> TestReport:
    c = evt.constants(cfg.n)
    lam = c.rescale(_lambdas(records), "eigen")
    k = lam.shape[1]
    oracle = c.rescale(_oracle_topk(cfg, k, len(records)), "iid")
    parts = [_ks2(lam[:, j], oracle[:, j], f"coordinate {j + 1}") for j in range(k)]
    rep = combine_reports(parts, f"top-{k} joint law vs Gaussian order statistics")
    rep.details["descending_every_trial"] = bool(np.all(np.diff(lam, axis=1) <= 0))
    return rep


def run_joint_k(cfg: ExperimentConfig) -> TestReport:
    return execute(cfg).report


def report_gaps(cfg, records) -> TestReport:
    c = evt.constants(cfg.n)
    lam = _lambdas(records)
    gaps = c.a_n * (lam[:, 0] - lam[:, 1])
    xi = _oracle_topk(cfg, 2, len(records))
    ogaps = c.a_n * (xi[:, 0] - xi[:, 1])
    ks = _ks2(gaps, ogaps, "first gap vs Gaussian order-statistic gap")
    lo, hi = dft.GAP_MEAN_WINDOW
    mean = float(np.mean(gaps))
    centre, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    window = TestReport(abs(mean - centre) / half, 1.0, (gaps.size,),
                        f"mean rescaled gap in [{lo}, {hi}]", details={"mean": mean})
    if ks.status == "inconclusive":
        return ks
    rep = combine_reports([ks, window], "rescaled first gap")
    rep.details.update(nonnegative=bool(np.all(gaps >= 0)), mean_gap=mean,
                       exponential=exponential_tail_test(gaps).to_dict())
    return rep


def run_gaps(cfg: ExperimentConfig) -> TestReport:
    return execute(cfg).report


def _poisson_thresholds(n) -> np.ndarray:
    c = evt.constants(n)
    return c.b_n + np.asarray(dft.POISSON_LEVELS) / c.a_n


def _poisson_trial(cfg, i):
    _, _, L = sample_surrogate(cfg.n, cfg.lane(0, i))
    t = tridiagonalize(L, backend=dft.REDUCTION_BACKEND)
    return {"counts": count_above(t, _poisson_thresholds(cfg.n)).tolist()}


def report_poisson(cfg, records) -> TestReport:
    """Per level ``a``: mean within tolerance of ``e^-a``, dispersion, and a
    homogeneity chi-square against the Gaussian order-statistic process."""
    counts = np.array([r.payload["counts"] for r in records], dtype=np.int64)
    c = evt.constants(cfg.n)
    xi = c.rescale(_oracle_topk(cfg, dft.POISSON_ORACLE_K, len(records)), "iid")
    parts, info = [], {}
    if len(records) < dft.MIN_TEST_SAMPLES:
        return TestReport(math.nan, 0.0, (len(records),), "Poisson process counts",
                          status="inconclusive", details={"reason": "too few trials"})
    for j, a in enumerate(dft.POISSON_LEVELS):
        cnt = counts[:, j]
        ocnt = (xi >= a).sum(axis=1)
        if np.any(ocnt == dft.POISSON_ORACLE_K):
            raise LapspecError("Gaussian oracle count saturated; raise POISSON_ORACLE_K")
        target = evt.ppp_interval_mean(a)
        mean = math.fsum(cnt.tolist()) / cnt.size
        parts.append(TestReport(abs(mean / target - 1) / dft.POISSON_MEAN_RTOL, 1.0, (cnt.size,),
                                f"a={a:g}: mean within {dft.POISSON_MEAN_RTOL:.0%} of e^-a",
                                details={"mean": mean, "target": target}))
        pct = poisson_count_test(cnt, target, dft.ALPHA, f"a={a:g}: Poisson fit",
                                 dft.DISPERSION_WINDOW, dft.DISPERSION_WINDOW_MIN_TRIALS)
        parts.append(TestReport(pct.details["dispersion_ratio"], 1.0, (cnt.size,),
                                f"a={a:g}: dispersion", details={"index": pct.details["dispersion_index"]}))
        parts.append(count_homogeneity_test(cnt, ocnt, dft.ALPHA, f"a={a:g}: counts vs Gaussian process"))
        info[f"a={a:g}"] = {"one_sample_fit": pct.to_dict(), "oracle_mean": float(ocnt.mean())}
    rep = combine_reports(parts, "Poisson process counts")
    rep.details["informational"] = info
    return rep


def run_poisson(cfg: ExperimentConfig) -> TestReport:
    return execute(cfg).report


def _diag_trial(cfg, i):
    a = _goe_array(cfg.n, cfg.lane(0, i).generator())
    # diagonal of the Laplacian: off-diagonal row sums
    diag = a.sum(axis=1) - np.diagonal(a)
    return {"max_diagonal": float(diag.max())}


def diag_reconstruction(n: int = dft.DIAG_RECON_N, draws: int = dft.DIAG_RECON_DRAWS,
                        seed: SeedPath = SeedPath(dft.DEFAULT_SEED, (_LANE["diag-max"], 2))) -> TestReport:
    """``v = Sigma^{1/2} g`` against the Laplacian diagonal covariance.

    Checks each coordinate's variance against ``(n-1)/n`` within 3 standard
    errors and the exact split ``max v = sqrt((n-2)/n) max g + c sum g``.
    """
    _, root = sigma_and_sqrt(n)
    g = seed.generator().standard_normal((draws, n))
    v = g @ root.entries
    var = v.var(axis=0, ddof=1)
    target = (n - 1) / n
    se = target * math.sqrt(2.0 / (draws - 1))
    var_dev = float(np.max(np.abs(var - target)) / se)
    scale = math.sqrt((n - 2) / n)
    off = float(root.entries[0, 1])
    split = np.max(np.abs(v.max(axis=1) - (scale * g.max(axis=1) + off * g.sum(axis=1))))
    parts = [
        TestReport(var_dev, 3.0, (draws,), "coordinate variance within 3 SE of (n-1)/n",
                   details={"max_abs_deviation": float(np.max(np.abs(var - target))), "se": se}),
        TestReport(float(split), 1e-12 * max(1.0, float(np.max(np.abs(v)))), (draws,),
                   "max split into scaled max plus common shift"),
    ]
    return combine_reports(parts, f"covariance square-root reconstruction (n={n})")


def report_diag_max(cfg, records, centering: str = "iid") -> TestReport:
    c = evt.constants(cfg.n)
    stat = c.rescale(_column(records, "max_diagonal"), centering)
    oracle = c.rescale(_oracle_topk(cfg, 1, len(records))[:, 0], "iid")
    rep = _ks2(stat, oracle, f"Laplacian max diagonal vs Gaussian maxima (centering {centering})")
    rep.details.update(centering=centering, mean_statistic=float(np.mean(stat)),
                       mean_oracle=float(np.mean(oracle)))
    return rep


def run_diag_max(cfg: ExperimentConfig) -> TestReport:
    return execute(cfg).report


# -- eigenvalue location ---------------------------------------------------

def _location_trial(cfg, i):
    k = max(2, min(cfg.k, cfg.n))
    D, _, L = sample_surrogate(cfg.n, cfg.lane(0, i))
    lam = top_k_eigenvalues(L, k, backend=dft.REDUCTION_BACKEND).values
    d = np.sort(D.values)[::-1][:k]
    eta = cfg.n ** -0.25
    E = [freeconv.predict_location(float(x), eta) for x in d]
    return {"lambda": lam.tolist(), "D": d.tolist(), "E": E}


def report_predict_location(cfg, records) -> TestReport:
    lam = _lambdas(records)
    E = np.array([r.payload["E"] for r in records])
    D = np.array([r.payload["D"] for r in records])
    eta = cfg.n ** -0.25
    err = np.abs(lam[:, 0] - E[:, 0])
    med = float(np.median(err))
    shift_target = 1.0 / math.sqrt(2.0 * math.log(cfg.n))
    shift = math.fsum((E[:, 0] - D[:, 0]).tolist()) / len(records)
    parts = [
        TestReport(med, eta, (err.size,), "median |lambda_1 - E_1| <= n^(-1/4)"),
        TestReport(abs(shift / shift_target - 1) / dft.LOCATION_SHIFT_RTOL, 1.0, (err.size,),
                   f"mean(E_1 - D_1) within {dft.LOCATION_SHIFT_RTOL:.0%} of 1/sqrt(2 log n)",
                   details={"mean_shift": shift, "target": shift_target}),
    ]
    rep = combine_reports(parts, "eigenvalue location prediction")
    rep.details.update(
        median_error=med, eta=eta, fraction_below_eta=float(np.mean(err < eta)),
        ordered_predictions=bool(np.all(np.diff(E, axis=1) < 0)),
    )
    return rep


def run_predict_location(cfg: ExperimentConfig) -> TestReport:
    return execute(cfg).report


# -- reduction chain -------------------------------------------------------

def _reduction_trial(cfg, i):
    s = sample_reduction_chain(cfg.n, cfg.lane(0, i))
    k = min(cfg.k, cfg.n - 1)
    top = lambda m: top_k_eigenvalues(m, k, backend=dft.REDUCTION_BACKEND).values
    out = {
        "diff_w": np.abs(top(s.W) - top(s.W_prime)).tolist(),
        "diff_surrogate": np.abs(top(s.truncated) - top(s.augmented)).tolist(),
        "identity_error": None,
    }
    if i < dft.REDUCTION_IDENTITY_TRIALS:
        lap = laplacian_of(s.A).entries
        full = eigenvalues(lap, backend=dft.REDUCTION_BACKEND).values
        reduced = eigenvalues(s.reducer.reduce(lap), backend=dft.REDUCTION_BACKEND).values
        merged = np.sort(np.append(reduced, 0.0))[::-1]
        out["identity_error"] = float(np.max(np.abs(full - merged)))
    return out


def _fraction_report(frac: float, required: float, size: int, description: str) -> TestReport:
    # (1 - frac) / (1 - required) <= 1  iff  frac >= required
    return TestReport((1.0 - frac) / (1.0 - required), 1.0, (size,), description,
                      details={"fraction": frac, "required": required})


def report_reduction(cfg, records) -> TestReport:
    n = cfg.n
    dw = np.array([r.payload["diff_w"] for r in records])
    ds = np.array([r.payload["diff_surrogate"] for r in records])
    win_w = 2.0 * math.sqrt(math.log(n) / n)
    win_s = math.log(math.log(n)) / math.log(n)
    ident = [r.payload["identity_error"] for r in records if r.payload["identity_error"] is not None]
    parts = [
        TestReport(max(ident), dft.REDUCTION_IDENTITY_TOL, (len(ident),),
                   "spectrum(L_A) = spectrum(reduced) + {0}"),
        _fraction_report(float(np.mean(dw.max(axis=1) < win_w)), dft.REDUCTION_FRACTION_II,
                         len(records), "|lambda_k(W) - lambda_k(W')| < 2 sqrt(log n / n)"),
        _fraction_report(float(np.mean(ds.max(axis=1) < win_s)), dft.REDUCTION_FRACTION_III,
                         len(records), "surrogate coupling within log log n / log n"),
    ]
    rep = combine_reports(parts, "reduction chain")
    rep.details.update(window_w=win_w, window_surrogate=win_s,
                       max_diff_w=float(dw.max()), max_diff_surrogate=float(ds.max()))
    return rep


def run_reduction_equivalence(cfg: ExperimentConfig) -> TestReport:
    return execute(cfg).report


# -- bulk density ----------------------------------------------------------

def _fc_edges():
    lo, hi = dft.FC_WINDOW
    w = dft.FC_BIN_WIDTH
    return np.linspace(lo, hi, int(round((hi - lo) / w)) + 1)


def _fc_trial(cfg, i):
    _, _, L = sample_surrogate(cfg.n, cfg.lane(0, i))
    lam = eigenvalues(L, backend=dft.REDUCTION_BACKEND).values
    hist, _ = np.histogram(lam, bins=_fc_edges())
    return {"counts": hist.tolist()}


def report_fc_density(cfg, records, grid: Optional[freeconv.DensityGrid] = None):
    grid = grid or freeconv.density_grid()
    edges = _fc_edges()
    counts = np.array([r.payload["counts"] for r in records]).sum(axis=0)
    width = np.diff(edges)
    hist = counts / (len(records) * cfg.n * width)
    centres = 0.5 * (edges[:-1] + edges[1:])
    # compare against the bin-averaged density (Simpson on each bin)
    p = (grid(edges[:-1]) + 4 * grid(centres) + grid(edges[1:])) / 6.0
    sup = float(np.max(np.abs(hist - p)))
    mass = grid.mass()
    parts = [
        TestReport(sup, dft.FC_SUP_TOL, (len(records),), "histogram vs density sup mismatch",
                   details={"bin_width": dft.FC_BIN_WIDTH}),
        TestReport(abs(mass - 1.0), dft.FC_MASS_TOL, (grid.x_nodes.size,), "density mass"),
    ]
    rep = combine_reports(parts, "bulk density of the surrogate spectrum")
    rep.details.update(sup_mismatch=sup, mass=mass)
    idx = np.clip(np.searchsorted(edges, grid.x_nodes, side="right") - 1, 0, centres.size - 1)
    inside = (grid.x_nodes >= edges[0]) & (grid.x_nodes < edges[-1])
    overlay = np.where(inside, hist[idx], np.nan)
    return rep, grid, overlay


def run_fc_density(cfg: ExperimentConfig) -> TestReport:
    return execute(cfg).report


# -- local law ---------------------------------------------------------------

def _local_sizes(cfg) -> tuple:
    if not cfg.option("sweep", True):
        return (cfg.n,)
    if cfg.option("sizes", None):
        return tuple(sorted(int(n) for n in cfg.option("sizes", None)))
    return tuple(sorted({max(3, cfg.n // 4), max(3, cfg.n // 2), cfg.n}))


def _local_deltas(cfg) -> tuple:
    return tuple(dft.LOCALLAW_DELTAS) if cfg.option("sweep", True) else (cfg.delta,)


def _local_trial(cfg, rep):
    """One repetition: per size, a fixed diagonal and shared redraw spectra."""
    resamples = cfg.option("resamples", dft.LOCALLAW_RESAMPLES)
    grid = cfg.option("grid", dft.LOCALLAW_GRID)
    rows = []
    for n in _local_sizes(cfg):
        seed = cfg.lane(0, rep, n)
        D = seed.child(0).generator().standard_normal(n)
        spectra = locallaw.sample_spectra(D, resamples, seed.child(1), dft.REDUCTION_BACKEND)
        for delta in _local_deltas(cfg):
            dom = [locallaw.build_domain(delta, n, kind, grid) for kind in ("S-tilde", "S-hat")]
            for functional in locallaw.FUNCTIONALS:
                d = locallaw.diagnostic_from_spectra(D, spectra, dom, functional)
                rows.append({
                    "n": n, "delta": delta, "functional": functional,
                    "supValue": d.supValue, "loo_median": d.loo_median,
                    "resamples": d.resamples, "gridSize": d.gridSize,
                    "E": d.points.real.tolist(), "eta": d.points.imag.tolist(),
                    "values": d.values.tolist(),
                })
    return {"rows": rows}


def _local_records(cfg, records, functional) -> list:
    """Flatten to one record per (repetition, size, delta, grid point)."""
    out, idx = [], 0
    for r in records:
        for row in r.payload["rows"]:
            if row["functional"] != functional:
                continue
            for E, eta, v in zip(row["E"], row["eta"], row["values"]):
                out.append(ExperimentRecord(cfg.configHash, idx, {
                    "repetition": r.trialIndex, "n": row["n"], "delta": row["delta"],
                    "kind": "S-tilde" if eta < 1.2 * row["n"] ** -0.25 else "S-hat",
                    "functional": functional, "E": E, "eta": eta, "value": v,
                    "supValue": row["supValue"], "loo_median": row["loo_median"],
                    "resamples": row["resamples"], "gridSize": row["gridSize"],
                    "seed": cfg.masterSeed,
                }, r.wallTimeMs))
                idx += 1
    return out


def report_local(cfg, records, functional) -> TestReport:
    sizes, deltas = _local_sizes(cfg), _local_deltas(cfg)
    table = {}
    for r in records:
        for row in r.payload["rows"]:
            if row["functional"] == functional:
                table[(r.trialIndex, row["n"], row["delta"])] = row["loo_median"]
    reps = len(records)
    details = {"sizes": list(sizes), "deltas": list(deltas), "repetitions": reps}
    if len(sizes) < 2:
        details["medians"] = {str(d): [table[(i, sizes[0], d)] for i in range(reps)] for d in deltas}
        return TestReport(math.nan, 0.0, (reps,), f"{functional} diagnostics (no trend)",
                          status="inconclusive", details=details)
    required = max(1, math.ceil(dft.LOCALLAW_MIN_DECREASING / dft.LOCALLAW_REPETITIONS * reps))
    parts = []
    for d in deltas:
        per_rep = np.array([[table[(i, n, d)] for n in sizes] for i in range(reps)])
        decreasing = int(np.sum(np.all(np.diff(per_rep, axis=1) < 0, axis=1)))
        # (required + 1) / (decreasing + 1) <= 1  iff  decreasing >= required
        parts.append(TestReport((required + 1.0) / (decreasing + 1.0), 1.0, (reps,),
                                f"delta={d:g}: strictly decreasing in >= {required}/{reps} repetitions",
                                details={"decreasing": decreasing, "required": required,
                                         "per_repetition": per_rep,
                                         "across_repetition_median": np.median(per_rep, axis=0)}))
    return combine_reports(parts, f"{functional} trend across n = {list(sizes)}")


def run_locallaw(cfg: ExperimentConfig) -> TestReport:
    return execute(cfg).report


def run_concentration(cfg: ExperimentConfig) -> TestReport:
    return execute(cfg).report


# -- dispatch ----------------------------------------------------------------

_TRIALS = {
    "gumbel": _topk_trial, "joint-k": _topk_trial, "gaps": _topk_trial,
    "poisson": _poisson_trial, "diag-max": _diag_trial, "predict-location": _location_trial,
    "locallaw": _local_trial, "concentration": _local_trial, "fc-density": _fc_trial,
    "reduction-equivalence": _reduction_trial,
}


def simulate(cfg: ExperimentConfig) -> list:
    """Raw per-trial records (no report, nothing written)."""
    return run_trials(cfg, _TRIALS[cfg.experiment])


def summarize(cfg: ExperimentConfig, records: list) -> RunResult:
    """Report for already simulated records; also writes outputs if configured."""
    exp = cfg.experiment
    artifacts = {}
    out_records = records
    if exp == "gumbel":
        report = report_gumbel(cfg, records, cfg.option("centering", "eigen"))
    elif exp == "joint-k":
        report = report_joint_k(cfg, records)
    elif exp == "gaps":
        report = report_gaps(cfg, records)
    elif exp == "poisson":
        report = report_poisson(cfg, records)
    elif exp == "diag-max":
        report = report_diag_max(cfg, records, cfg.option("centering", "iid"))
        if cfg.option("reconstruction", True):
            recon = diag_reconstruction()
            report.details["reconstruction"] = recon.to_dict()
            report = combine_reports([report, recon], report.description + " + reconstruction")
    elif exp == "predict-location":
        report = report_predict_location(cfg, records)
    elif exp in ("locallaw", "concentration"):
        report = report_local(cfg, records, exp)
        out_records = _local_records(cfg, records, exp)
    elif exp == "fc-density":
        report, grid, overlay = report_fc_density(cfg, records)
        if cfg.outPath:
            csv_path = _sidecar(Path(cfg.outPath), ".density.csv")
            csv_path.parent.mkdir(parents=True, exist_ok=True)
            grid.write_csv(csv_path, {"histogram": overlay})
            artifacts["csv"] = str(csv_path)
    elif exp == "reduction-equivalence":
        report = report_reduction(cfg, records)
    else:  # pragma: no cover - guarded by ExperimentConfig
        raise InvalidArgumentError(exp)
    report.details["configHash"] = cfg.configHash
    artifacts.update(_persist(cfg, report, out_records))
    return RunResult(cfg, report, out_records, artifacts)


def execute(cfg: ExperimentConfig) -> RunResult:
    return summarize(cfg, simulate(cfg))


RUNNERS = {
    "gumbel": run_gumbel, "joint-k": run_joint_k, "gaps": run_gaps, "poisson": run_poisson,
    "diag-max": run_diag_max, "predict-location": run_predict_location, "locallaw": run_locallaw,
    "concentration": run_concentration, "fc-density": run_fc_density,
    "reduction-equivalence": run_reduction_equivalence,
}
