"""Command-line interface.

Subcommands
-----------
ml-eval    evaluate the two-parameter Mittag-Leffler function
simulate   write one sample path (inter-times CSV + step-function CSV)
estimate   run the full estimation pipeline on an input data file
mc         run Monte Carlo point/interval studies (preset or custom)

Every command is deterministic given its full flag set; the seed comes from
``--seed``, falling back to the ``FRACBD_SEED`` environment variable, then 0.
Exit codes: 0 success, 1 runtime/numerical failure, 2 usage/domain error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .datasets import InputDataset, Interpretation, load_values, summary_stats
from .estimation import estimate_design, ls_fit, residual_records
from .mittag import ml
from .montecarlo import (
    StudyConfig,
    interval_study,
    paper_preset,
    point_study,
    summarize,
)
from .processes import (
    ProcessKind,
    simulate_linear_death,
    simulate_sublinear_death,
    simulate_yule,
    step_rows,
)
from .variates import RandomSource

__all__ = ["main", "entry", "build_parser"]

_PROCESS_CHOICES = [k.value for k in ProcessKind]
_INTERP_CHOICES = [i.value for i in Interpretation]


def _resolve_seed(value):
    if value is not None:
        return int(value)
    env = os.environ.get("FRACBD_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"FRACBD_SEED must be an integer, got {env!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracbd",
        description="Fractional Yule / fractional death processes: "
        "simulation and parameter estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p =  sub.add_parser("ml-eval", help="evaluate E_{delta,beta}(x)")
    p.add_argument("delta", type=float)
    p.add_argument("beta", type=float)
    p.add_argument("x", type=float)

    p = sub.add_parser("simulate", help="simulate one sample path to CSV")
    p.add_argument("--process", choices=_PROCESS_CHOICES, default="yule")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--n", type=int, help="number of births (Yule)")
    p.add_argument("--n0", type=int, help="initial population (death processes)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--stream", "--streams", dest="stream", type=int, default=0)
    p.add_argument("--out", default="path", help="output file prefix")

    p = sub.add_parser("estimate", help="estimate (nu, rate) from a data file")
    p.add_argument("--input", required=True)
    p.add_argument("--interpretation", choices=_INTERP_CHOICES,
                   default=Interpretation.INTER_EVENT.value)
    p.add_argument("--process", choices=_PROCESS_CHOICES, default="yule")
    p.add_argument("--start-index", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bootstrap-b", type=int, default=500)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="estimate", help="output file prefix")
    p.add_argument(
        "--clip-at-zero",
        action="store_true",
        help="truncate negative interval lower bounds at 0 in the printed "
        "table (presentation only; the JSON report keeps them as-is)",
    )

    p = sub.add_parser("mc", help="Monte Carlo estimator studies")
    p.add_argument("study", choices=["point", "interval"])
    p.add_argument("--preset", choices=["paper"], default=None)
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--process", choices=_PROCESS_CHOICES, default="yule")
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--rate", type=float, default=None)
    p.add_argument("--n", default=None, help="comma-separated sample sizes")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bootstrap-b", type=int, default=500)
    p.add_argument("--mad", choices=["scaled", "from-truth"], default="scaled")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default="study", help="output file prefix")
    return parser


def _cmd_ml_eval(args) -> int:
    print(repr(ml(args.delta, args.beta, args.x)))
    return 0


def _cmd_simulate(args) -> int:
    kind = ProcessKind(args.process)
    rng = RandomSource(_resolve_seed(args.seed), args.stream)
    if kind is ProcessKind.YULE:
        if args.n is None:
            raise ValueError("--n (number of births) is required for the Yule process")
        path = simulate_yule(args.nu, args.rate, args.n, rng)
    else:
        if args.n0 is None:
            raise ValueError("--n0 (initial population) is required for death processes")
        sim = simulate_linear_death if kind is ProcessKind.LINEAR_DEATH else simulate_sublinear_death
        path = sim(args.nu, args.rate, args.n0, rng)

    inter_file = Path(f"{args.out}_intertimes.csv")
    lines = ["index,inter_time,event_time"]
    for i, (dt, t) in enumerate(zip(path.inter_times, path.event_times), start=1):
        lines.append(f"{i},{float(dt)!r},{float(t)!r}")
    inter_file.write_text("\n".join(lines) + "\n")

    step_file = Path(f"{args.out}_steps.csv")
    lines = ["event_time,population"]
    for t, pop in step_rows(path):
        lines.append(f"{t!r},{pop}")
    step_file.write_text("\n".join(lines) + "\n")

    print(f"wrote {inter_file} and {step_file} ({path.n_events} events)")
    return 0


def _fmt(v):
    return "n/a" if v is None else f"{v:.6g}"


def _fmt_iv(iv, clip_at_zero=False):
    if iv is None:
        return "unavailable"
    lo = max(iv.lo, 0.0) if clip_at_zero else iv.lo
    return f"({lo:.6g}, {iv.hi:.6g})"


def _cmd_estimate(args) -> int:
    values = load_values(args.input)
    dataset = InputDataset(
        values=values,
        interpretation=Interpretation(args.interpretation),
        start_index=args.start_index,
    )
    inter = dataset.inter_event_times()
    design = dataset.design(ProcessKind(args.process))
    rng = RandomSource(_resolve_seed(args.seed), 0)
    report = estimate_design(design, alpha=args.alpha, n_boot=args.bootstrap_b, rng=rng)
    fit = ls_fit(design)

    raw_stats = summary_stats(values)
    inter_stats = summary_stats(inter)

    pct = 100.0 * (1.0 - args.alpha)
    clip = args.clip_at_zero
    print(f"n = {report.n} inter-event times ({args.interpretation} input)")
    print("input values   : " + ", ".join(f"{k}={_fmt(v)}" for k, v in raw_stats.items()))
    print("inter-times    : " + ", ".join(f"{k}={_fmt(v)}" for k, v in inter_stats.items()))
    print(f"{'estimator':<10} {'point':>10}   {pct:.0f}% interval")
    print(f"{'nu_ls':<10} {report.nu_ls:>10.6g}   {_fmt_iv(report.ci_nu_ls, clip)}")
    print(f"{'nu_res':<10} {report.nu_res:>10.6g}   {_fmt_iv(report.ci_nu_res, clip)}")
    print(f"{'rate_ls':<10} {report.rate_ls:>10.6g}   {_fmt_iv(report.ci_rate_ls, clip)}")
    print(f"{'rate_res':<10} {report.rate_res:>10.6g}   {_fmt_iv(report.ci_rate_res, clip)}")
    print(f"{'rate_boot':<10} {'':>10}   {_fmt_iv(report.ci_rate_boot, clip)}")
    for w in report.warnings:
        print(f"warning: {w}")

    obj = report.to_dict()
    obj["input"] = {
        "file": str(args.input),
        "interpretation": args.interpretation,
        "start_index": args.start_index,
        "process": args.process,
        "raw_summary": raw_stats,
        "inter_event_summary": inter_stats,
    }
    json_file = Path(f"{args.out}.json")
    json_file.write_text(json.dumps(obj, indent=2) + "\n")

    resid_file = Path(f"{args.out}_residuals.csv")
    lines = ["index,x,y,fitted,residual,leverage"]
    for rec in residual_records(fit):
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in rec))
    resid_file.write_text("\n".join(lines) + "\n")
    print(f"wrote {json_file} and {resid_file}")
    return 0


def _parse_config_file(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _mc_configs(args) -> list[StudyConfig]:
    seed = _resolve_seed(args.seed)
    if args.preset == "paper":
        return paper_preset(
            study=args.study,
            seed=seed,
            reps=args.reps,
            n_boot=args.bootstrap_b,
            jobs=args.jobs,
            alpha=args.alpha,
            mad=args.mad,
        )
    base = {
        "kind": args.process,
        "nu": args.nu,
        "rate": args.rate,
        "n": args.n,
        "reps": args.reps,
        "alpha": args.alpha,
        "bootstrap_b": args.bootstrap_b,
        "seed": seed,
        "jobs": args.jobs,
        "mad": args.mad,
    }
    if args.config:
        raw = _parse_config_file(args.config)
        for key in raw:
            if key not in base:
                raise ValueError(f"unknown config key {key!r}")
        base.update(raw)
    if base["nu"] is None or base["rate"] is None or base["n"] is None:
        raise ValueError("either --preset paper, a config file, or --nu/--rate/--n is required")
    n_list = tuple(int(s) for s in str(base["n"]).split(",") if s)
    return [
        StudyConfig(
            kind=ProcessKind(base["kind"]),
            true_nu=float(base["nu"]),
            true_rate=float(base["rate"]),
            n_list=n_list,
            reps=int(base["reps"]),
            alpha=float(base["alpha"]),
            n_boot=int(base["bootstrap_b"]),
            seed=int(base["seed"]),
            jobs=int(base["jobs"]),
            mad=str(base["mad"]),
        )
    ]


def _cmd_mc(args) -> int:
    configs = _mc_configs(args)
    run = point_study if args.study == "point" else interval_study
    results = [run(cfg) for cfg in configs]
    out = Path(f"{args.out}.{args.format}")
    if args.format == "csv":
        texts = []
        for i, res in enumerate(results):
            text = summarize(res, "csv")
            if i > 0:
                text = text.split("\n", 1)[1]  # drop repeated header
            texts.append(text)
        out.write_text("".join(texts))
    else:
        if len(results) == 1:
            out.write_text(summarize(results[0], "json"))
        else:
            payload = [json.loads(summarize(r, "json")) for r in results]
            out.write_text(json.dumps({"studies": payload}, indent=2) + "\n")
    print(f"wrote {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "ml-eval": _cmd_ml_eval,
        "simulate": _cmd_simulate,
        "estimate": _cmd_estimate,
        "mc": _cmd_mc,
    }
    try:
        return handlers[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
