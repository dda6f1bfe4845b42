"""Command-line entry point.

Subcommands write comma-separated files whose first line is a ``#`` comment
recording every input parameter (seed included), followed by a header row.
Exit status is 1 on validation or I/O errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from anchoring import analytic, backtest, simulation
from anchoring.price_models import (
    DriftingTwoPointModel,
    PriceSeries,
    TwoPointModel,
    sample_drifting_series,
    sample_random_walk,
)
from anchoring.strategy import Mode


def _fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy)


def _emit(rows, header, params, out) -> None:
    if out:
        path = backtest.write_table(out, header, rows, params)
        print(f"wrote {path}")
    else:
        print(backtest.preamble(params))
        print(",".join(header))
        for row in rows:
            print(",".join(backtest.format_number(v) for v in row))


def cmd_analytic(args) -> int:
    m1 = TwoPointModel(args.anchor1, args.spread1)
    m2 = TwoPointModel(args.anchor2, args.spread2)
    exact = analytic.analyze(m1, m2)
    closed_mean = analytic.closed_form_binomial_return(m1, m2)
    printed_var = analytic.closed_form_binomial_variance_as_printed(m1, m2)
    rows = [
        ("mean_return_engine", exact.mean_return_per_step),
        ("mean_return_closed_form", closed_mean),
        ("mean_return_difference", exact.mean_return_per_step - closed_mean),
        ("variance_engine", exact.variance_per_step),
        ("variance_closed_form_as_printed", printed_var),
        ("variance_difference", printed_var - exact.variance_per_step),
        ("variance_closed_form_log_product", analytic.binomial_variance_log_product(m1, m2)),
    ]
    params = dict(command="analytic", anchor1=args.anchor1, spread1=args.spread1,
                  anchor2=args.anchor2, spread2=args.spread2)
    _emit(rows, ("quantity", "value"), params, args.out)
    return 0


def cmd_simulate(args) -> int:
    if args.steps < 1:
        raise ValueError(f"--steps must be >= 1, got {args.steps}")
    if args.every < 1:
        raise ValueError(f"--every must be >= 1, got {args.every}")
    seed = _fresh_seed() if args.seed is None else args.seed
    m1 = TwoPointModel(args.anchor1, args.spread1)
    m2 = TwoPointModel(args.anchor2, args.spread2)
    models = (m1, m2)
    if args.drift:
        models = (DriftingTwoPointModel(m1, args.drift), DriftingTwoPointModel(m2, args.drift))
    sim = simulation.simulate(*models, args.memory, args.steps, seed, args.mode)
    steady = float("nan")
    if Mode(args.mode) is Mode.LONG_ONLY and not args.drift:
        steady = analytic.analyze(m1, m2).mean_return_per_step
    running = sim.running_mean()
    t = np.arange(1, len(running) + 1)
    keep = (t % args.every == 0) | (t == len(running))
    rows = ((int(k), r, steady) for k, r in zip(t[keep], running[keep]))
    params = dict(command="simulate", anchor1=args.anchor1, spread1=args.spread1,
                  anchor2=args.anchor2, spread2=args.spread2, drift=args.drift,
                  memory=args.memory, steps=args.steps, seed=seed, mode=Mode(args.mode).value)
    _emit(rows, ("t", "running_mean_return", "analytic_mean_return"), params, args.out)
    return 0


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def cmd_sweep(args) -> int:
    if args.spread1_range:
        start, stop, num = args.spread1_range
        grid = list(np.linspace(float(start), float(stop), int(num)))
    else:
        grid = _parse_floats(args.spread1)
    if not grid:
        raise ValueError("empty spread1 grid")
    for s in grid:
        if not 0 < s < args.anchor1:
            raise ValueError(f"spread1 {s} outside (0, anchor1={args.anchor1})")
    if args.steps < 1:
        raise ValueError(f"--steps must be >= 1, got {args.steps}")
    seed = _fresh_seed() if args.seed is None else args.seed
    result = simulation.sweep_spread(grid, args.anchor1, args.anchor2, args.spread2,
                                     args.memory, args.steps, seed, workers=args.workers)
    rows = [
        (r.spread1, r.sim_mean, r.sim_mean_se, r.sim_variance, r.sim_variance_se,
         r.analytic_mean, r.analytic_variance)
        for r in result
    ]
    header = ("spread1", "sim_mean_return", "sim_mean_return_se", "sim_variance",
              "sim_variance_se", "analytic_mean_return", "analytic_variance")
    params = dict(command="sweep", grid=";".join(backtest.format_number(g) for g in grid),
                  anchor1=args.anchor1, anchor2=args.anchor2, spread2=args.spread2,
                  memory=args.memory, steps=args.steps, seed=seed)
    _emit(rows, header, params, args.out)
    return 0


def cmd_backtest(args) -> int:
    config = backtest.BacktestConfig(
        mode=args.mode,
        memory_grid=tuple(_parse_ints(args.memory_grid)),
        cost_rate=args.cost_rate,
        split_fraction=args.split,
        cadence=args.cadence,
        resample=args.resample,
    )
    a = backtest.load_price_series(args.file1, args.date_column, args.price_column)
    b = backtest.load_price_series(args.file2, args.date_column, args.price_column)
    pair = backtest.align(a, b)
    if config.resample == "weekly":
        pair = backtest.resample_pair_weekly(pair)
    selection = backtest.select_memory_in_sample(pair, config)
    params = dict(command="backtest", file1=args.file1, file2=args.file2,
                  mode=config.mode.value,
                  memory_grid=";".join(str(m) for m in config.memory_grid),
                  cost_rate=config.cost_rate, split=config.split_fraction,
                  cadence=config.cadence, resample=config.resample)
    out = Path(args.out_dir)
    backtest.write_equity_curve(out / "equity_in_sample.csv", selection.in_sample, params)
    backtest.write_equity_curve(out / "equity_out_of_sample.csv", selection.out_of_sample, params)
    backtest.write_summary(out / "summary.csv", selection, params)
    for key, value in backtest.summary_items(selection):
        print(f"{key}={backtest.format_number(value)}")
    print(f"wrote {out}")
    return 0


def cmd_synth(args) -> int:
    seed = _fresh_seed() if args.seed is None else args.seed
    if args.kind == "random-walk":
        series = sample_random_walk(args.initial, args.step_vol, args.steps, seed)
    else:
        model = DriftingTwoPointModel(TwoPointModel(args.anchor, args.spread),
                                      args.drift if args.kind == "drifting" else 0.0)
        series = sample_drifting_series(model, args.steps, seed)
    start = np.datetime64(args.start_date, "D")
    days = np.busday_offset(start, np.arange(len(series)), roll="forward")
    series = PriceSeries(days, series.prices)
    params = dict(command="synth", kind=args.kind, anchor=args.anchor, spread=args.spread,
                  drift=args.drift, initial=args.initial, step_vol=args.step_vol,
                  steps=args.steps, seed=seed, start_date=args.start_date)
    _emit(zip(series.timestamps, series.prices), ("date", "close"), params, args.out)
    return 0


def _add_pair_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--anchor1", type=float, default=1.0)
    p.add_argument("--spread1", type=float, default=0.11)
    p.add_argument("--anchor2", type=float, default=1.0)
    p.add_argument("--spread2", type=float, default=0.11)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anchoring", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="exact steady-state mean and variance, two-point prices")
    _add_pair_model(p)
    p.add_argument("--out", help="write report here instead of stdout")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="running mean return of a Monte Carlo run")
    _add_pair_model(p)
    p.add_argument("--memory", type=int, default=5)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.LONG_ONLY.value)
    p.add_argument("--drift", type=float, default=0.0, help="common additive anchor drift per step")
    p.add_argument("--every", type=int, default=1, help="emit every n-th step")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="simulated vs exact mean/variance across spread1")
    grid = p.add_mutually_exclusive_group()
    grid.add_argument("--spread1", default="0.02,0.05,0.08,0.11,0.14,0.17,0.2",
                      help="comma-separated half-spreads for asset 1")
    grid.add_argument("--spread1-range", nargs=3, metavar=("START", "STOP", "NUM"))
    p.add_argument("--anchor1", type=float, default=1.0)
    p.add_argument("--anchor2", type=float, default=1.0)
    p.add_argument("--spread2", type=float, default=0.11)
    p.add_argument("--memory", type=int, default=5)
    p.add_argument("--steps", type=int, default=100_000, help="steps per grid point")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("backtest", help="in/out-of-sample backtest on two price files")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--date-column", default="date")
    p.add_argument("--price-column", default="close")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.MARKET_NEUTRAL.value)
    p.add_argument("--memory-grid", default="5,10,15")
    p.add_argument("--cost-rate", type=float, default=backtest.DEFAULT_COST_RATE)
    p.add_argument("--split", type=float, default=0.5)
    p.add_argument("--cadence", type=int, default=252, help="periods per year (252 daily, 52 weekly)")
    p.add_argument("--resample", choices=["none", "weekly"], default="none")
    p.add_argument("--out-dir", default="backtest_out")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("synth", help="write a synthetic daily price file")
    p.add_argument("--kind", choices=["anchored", "drifting", "random-walk"], default="anchored")
    p.add_argument("--anchor", type=float, default=1.0)
    p.add_argument("--spread", type=float, default=0.05)
    p.add_argument("--drift", type=float, default=0.0)
    p.add_argument("--initial", type=float, default=100.0)
    p.add_argument("--step-vol", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=1500)
    p.add_argument("--seed", type=int)
    p.add_argument("--start-date", default="2000-01-03")
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
