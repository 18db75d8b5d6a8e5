"""Replicated simulation studies: estimator bias, dispersion, coverage, width.

Each replication simulates one path at the true parameters, runs the full
estimation pipeline, and contributes to per-``(estimator, n)`` cell summaries.
Replication ``r`` draws from ``RandomSource(seed, stream_id=r)``, so results
are bit-identical for any degree of parallel fan-out, and a replication that
fails (singular design, degenerate slope, unavailable interval) is dropped
and counted rather than propagated.

Dispersion is summarized by MAD.  The default ``mad="scaled"`` is the R
convention ``1.4826 * median(|v - median(v)|)``, a robust estimate on the
standard-deviation scale; ``mad="from-truth"`` gives the unscaled
``median(|v - true|)`` variant instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .estimation import ci_bootstrap_rate, ci_ls, ci_res, ls_fit, point_estimates, build_design
from .processes import (
    ProcessKind,
    simulate_linear_death,
    simulate_sublinear_death,
    simulate_yule,
)
from .variates import RandomSource

__all__ = [
    "StudyConfig",
    "CellResult",
    "StudyResult",
    "point_study",
    "interval_study",
    "summarize",
    "study_from_summary_json",
    "PAPER_PAIRS",
    "PAPER_SIZES",
    "paper_preset",
]

POINT_ESTIMATORS = ("nu_ls", "nu_res", "rate_ls", "rate_res")
INTERVAL_ESTIMATORS = ("nu_ls", "rate_ls", "nu_res", "rate_res", "rate_boot")
POINT_METRICS = ("mean", "mad", "rf_percent")
INTERVAL_METRICS = ("mean_lo", "mean_hi", "coverage", "mean_width")

# The study grid shipped as the "paper" preset: five (nu, rate) pairs by five
# sample sizes (interval studies skip nothing here; all sizes are >= 15).
PAPER_PAIRS = ((0.1, 1.0), (0.25, 0.1), (0.5, 0.5), (0.75, 0.25), (0.95, 5.0))
PAPER_SIZES = (15, 30, 100, 500, 1000)


@dataclass(frozen=True)
class StudyConfig:
    """One study cell-row: a process, its true parameters, and the protocol.

    For the death processes each entry of ``n_list`` is the initial
    population ``n0`` (the path then has exactly ``n`` events).
    """

    kind: ProcessKind
    true_nu: float
    true_rate: float
    n_list: tuple[int, ...]
    reps: int = 1000
    alpha: float = 0.05
    n_boot: int = 500
    seed: int = 0
    jobs: int = 1
    mad: str = "scaled"

    def __post_init__(self):
        object.__setattr__(self, "kind", ProcessKind(self.kind))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "true_nu", float(self.true_nu))
        object.__setattr__(self, "true_rate", float(self.true_rate))
        if not (0.0 < self.true_nu <= 1.0):
            raise ValueError(f"true_nu must be in (0, 1], got {self.true_nu}")
        if not self.true_rate > 0.0:
            raise ValueError(f"true_rate must be positive, got {self.true_rate}")
        if not self.n_list or any(n < 3 for n in self.n_list):
            raise ValueError("n_list must be nonempty with every n >= 3")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if self.mad not in ("scaled", "from-truth"):
            raise ValueError(f"mad must be 'scaled' or 'from-truth', got {self.mad!r}")


@dataclass(frozen=True)
class CellResult:
    """Summary of one (estimator, n) cell."""

    process: str
    true_nu: float
    true_rate: float
    n: int
    estimator: str
    study: str
    reps: int
    failures: int
    mean: Optional[float] = None
    mad: Optional[float] = None
    rf_percent: Optional[float] = None
    mean_lo: Optional[float] = None
    mean_hi: Optional[float] = None
    coverage: Optional[float] = None
    mean_width: Optional[float] = None


@dataclass(frozen=True)
class StudyResult:
    config: StudyConfig
    study: str
    cells: tuple[CellResult, ...]

    def rows(self):
        """Long-format rows: one per (cell, metric)."""
        metrics = POINT_METRICS if self.study == "point" else INTERVAL_METRICS
        out = []
        for cell in self.cells:
            for metric in metrics:
                out.append(
                    {
                        "process": cell.process,
                        "true_nu": cell.true_nu,
                        "true_rate": cell.true_rate,
                        "n": cell.n,
                        "estimator": cell.estimator,
                        "metric": metric,
                        "value": getattr(cell, metric),
                        "reps": cell.reps,
                        "failures": cell.failures,
                    }
                )
        return out


def _simulate(kind: ProcessKind, nu: float, rate: float, n: int, rng: RandomSource):
    if kind is ProcessKind.YULE:
        return simulate_yule(nu, rate, n, rng)
    if kind is ProcessKind.LINEAR_DEATH:
        return simulate_linear_death(nu, rate, n, rng)
    return simulate_sublinear_death(nu, rate, n, rng)


_FAILURE_EXCEPTIONS = (ValueError, ArithmeticError)


def _point_replication(args):
    kind, nu, rate, n, seed, rep = args
    rng = RandomSource(seed, rep)
    try:
        path = _simulate(ProcessKind(kind), nu, rate, n, rng)
        pe = point_estimates(ls_fit(build_design(path)))
    except _FAILURE_EXCEPTIONS:
        return {name: None for name in POINT_ESTIMATORS}
    out = pe._asdict()
    return {k: (out[k] if math.isfinite(out[k]) else None) for k in POINT_ESTIMATORS}


def _interval_replication(args):
    kind, nu, rate, n, seed, rep, alpha, n_boot = args
    rng = RandomSource(seed, rep)
    out = {name: None for name in INTERVAL_ESTIMATORS}
    try:
        path = _simulate(ProcessKind(kind), nu, rate, n, rng)
        fit = ls_fit(build_design(path))
        point_estimates(fit)
    except _FAILURE_EXCEPTIONS:
        return out
    def keep(iv):
        if iv is None or not (math.isfinite(iv.lo) and math.isfinite(iv.hi)):
            return None
        return (iv.lo, iv.hi)

    try:
        nu_iv, rate_iv, _ = ci_ls(fit, alpha)
        out["nu_ls"] = keep(nu_iv)
        out["rate_ls"] = keep(rate_iv)
    except _FAILURE_EXCEPTIONS:
        pass
    try:
        nu_iv, rate_iv, _ = ci_res(fit, alpha)
        out["nu_res"] = keep(nu_iv)
        out["rate_res"] = keep(rate_iv)
    except _FAILURE_EXCEPTIONS:
        pass
    try:
        out["rate_boot"] = keep(ci_bootstrap_rate(fit, alpha, n_boot, rng))
    except _FAILURE_EXCEPTIONS:
        pass
    return out


def _map_replications(worker, arglist, jobs):
    if jobs <= 1 or len(arglist) < 2:
        return [worker(a) for a in arglist]
    import multiprocessing

    chunk = max(1, len(arglist) // (4 * jobs))
    with multiprocessing.get_context("fork").Pool(processes=jobs) as pool:
        return pool.map(worker, arglist, chunksize=chunk)


def _mad(values: np.ndarray, truth: float, mode: str) -> float:
    if mode == "from-truth":
        return float(np.median(np.abs(values - truth)))
    return float(1.4826 * np.median(np.abs(values - np.median(values))))


def point_study(config: StudyConfig) -> StudyResult:
    """Mean, MAD, and relative fluctuation of the four point estimators."""
    cells = []
    for n in config.n_list:
        args = [
            (config.kind.value, config.true_nu, config.true_rate, n, config.seed, rep)
            for rep in range(config.reps)
        ]
        results = _map_replications(_point_replication, args, config.jobs)
        for name in POINT_ESTIMATORS:
            truth = config.true_nu if name.startswith("nu") else config.true_rate
            vals = np.array([r[name] for r in results if r[name] is not None])
            failures = config.reps - vals.size
            if vals.size == 0:
                cells.append(
                    CellResult(
                        process=config.kind.value,
                        true_nu=config.true_nu,
                        true_rate=config.true_rate,
                        n=n,
                        estimator=name,
                        study="point",
                        reps=config.reps,
                        failures=failures,
                    )
                )
                continue
            mean = float(vals.mean())
            mad = _mad(vals, truth, config.mad)
            rf = 100.0 * mad / mean if mean != 0.0 else None
            cells.append(
                CellResult(
                    process=config.kind.value,
                    true_nu=config.true_nu,
                    true_rate=config.true_rate,
                    n=n,
                    estimator=name,
                    study="point",
                    reps=config.reps,
                    failures=failures,
                    mean=mean,
                    mad=mad,
                    rf_percent=rf,
                )
            )
    return StudyResult(config=config, study="point", cells=tuple(cells))


def interval_study(config: StudyConfig) -> StudyResult:
    """Mean bounds, coverage, and mean width of the five interval estimators.

    All interval methods are evaluated on the same simulated path per
    replication (paired comparison).
    """
    if any(n < 15 for n in config.n_list):
        raise ValueError("interval studies require every n >= 15")
    cells = []
    for n in config.n_list:
        args = [
            (
                config.kind.value,
                config.true_nu,
                config.true_rate,
                n,
                config.seed,
                rep,
                config.alpha,
                config.n_boot,
            )
            for rep in range(config.reps)
        ]
        results = _map_replications(_interval_replication, args, config.jobs)
        for name in INTERVAL_ESTIMATORS:
            truth = config.true_nu if name.startswith("nu") else config.true_rate
            ivs = [r[name] for r in results if r[name] is not None]
            failures = config.reps - len(ivs)
            base = dict(
                process=config.kind.value,
                true_nu=config.true_nu,
                true_rate=config.true_rate,
                n=n,
                estimator=name,
                study="interval",
                reps=config.reps,
                failures=failures,
            )
            if not ivs:
                cells.append(CellResult(**base))
                continue
            lo = np.array([iv[0] for iv in ivs])
            hi = np.array([iv[1] for iv in ivs])
            covered = int(np.count_nonzero((lo <= truth) & (truth <= hi)))
            cells.append(
                CellResult(
                    **base,
                    mean_lo=float(lo.mean()),
                    mean_hi=float(hi.mean()),
                    coverage=covered / len(ivs),
                    mean_width=float((hi - lo).mean()),
                )
            )
    return StudyResult(config=config, study="interval", cells=tuple(cells))


def summarize(result: StudyResult, fmt: str = "csv") -> str:
    """Render a study as long-format CSV or its JSON mirror."""
    rows = result.rows()
    if fmt == "csv":
        header = "process,true_nu,true_rate,n,estimator,metric,value,reps,failures"
        lines = [header]
        for r in rows:
            value = "" if r["value"] is None else repr(r["value"])
            lines.append(
                f"{r['process']},{r['true_nu']!r},{r['true_rate']!r},{r['n']},"
                f"{r['estimator']},{r['metric']},{value},{r['reps']},{r['failures']}"
            )
        return "\n".join(lines) + "\n"
    if fmt == "json":
        cfg = asdict(result.config)
        cfg["kind"] = result.config.kind.value
        return json.dumps(
            {"study": result.study, "config": cfg, "rows": rows}, indent=2
        ) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def study_from_summary_json(text: str) -> StudyResult:
    """Rebuild a StudyResult from its JSON summary (round-trip inverse)."""
    obj = json.loads(text)
    cfg = dict(obj["config"])
    cfg["n_list"] = tuple(cfg["n_list"])
    config = StudyConfig(**cfg)
    study = obj["study"]
    grouped: dict[tuple, dict] = {}
    order: list[tuple] = []
    for r in obj["rows"]:
        key = (r["process"], r["true_nu"], r["true_rate"], r["n"], r["estimator"])
        if key not in grouped:
            grouped[key] = {
                "process": r["process"],
                "true_nu": r["true_nu"],
                "true_rate": r["true_rate"],
                "n": r["n"],
                "estimator": r["estimator"],
                "study": study,
                "reps": r["reps"],
                "failures": r["failures"],
            }
            order.append(key)
        grouped[key][r["metric"]] = r["value"]
    cells = tuple(CellResult(**grouped[k]) for k in order)
    return StudyResult(config=config, study=study, cells=cells)


def paper_preset(
    study: str = "point",
    seed: int = 0,
    reps: int = 1000,
    n_boot: int = 500,
    jobs: int = 1,
    alpha: float = 0.05,
    mad: str = "scaled",
) -> list[StudyConfig]:
    """One StudyConfig per (nu, rate) pair of the reference grid."""
    if study not in ("point", "interval"):
        raise ValueError(f"study must be 'point' or 'interval', got {study!r}")
    return [
        StudyConfig(
            kind=ProcessKind.YULE,
            true_nu=nu,
            true_rate=rate,
            n_list=PAPER_SIZES,
            reps=reps,
            alpha=alpha,
            n_boot=n_boot,
            seed=seed,
            jobs=jobs,
            mad=mad,
        )
        for nu, rate in PAPER_PAIRS
    ]
