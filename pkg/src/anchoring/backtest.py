"""Backtesting harness: ingestion, alignment, accounting and evaluation."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from anchoring.price_models import PriceSeries
from anchoring.strategy import Mode, run_policy

DEFAULT_MEMORY_GRID = (5, 10, 15)
DEFAULT_COST_RATE = 0.001


class ParseError(ValueError):
    pass


class EmptySeries(ValueError):
    pass


class InsufficientOverlap(ValueError):
    pass


class SeriesTooShort(ValueError):
    pass


def load_price_series(
    path: str | Path, date_column: str = "date", price_column: str = "close"
) -> PriceSeries:
    """Read a comma-separated file with a header row into a date-sorted series.

    Dates must be ISO-8601 (``YYYY-MM-DD``); lines starting with ``#`` are
    skipped. Every bad row is reported in a single :class:`ParseError` with
    its line number.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"price file not found: {path}")
    dates: list[dt.date] = []
    prices: list[float] = []
    problems: list[str] = []
    with path.open(newline="") as fh:
        numbered = [
            (k, text) for k, text in enumerate(fh, start=1) if not text.lstrip().startswith("#")
        ]
    rows = csv.reader(text for _, text in numbered)
    header = next(rows, None)
    if header is None:
        raise EmptySeries(f"{path}: file is empty")
    header = [h.strip() for h in header]
    for col in (date_column, price_column):
        if col not in header:
            raise ParseError(f"{path}: column {col!r} not in header {header}")
    di, pi = header.index(date_column), header.index(price_column)
    for (line, _), row in zip(numbered[1:], rows):
        if not row:
            continue
        raw_date = row[di].strip() if di < len(row) else ""
        raw_price = row[pi].strip() if pi < len(row) else ""
        try:
            day = dt.date.fromisoformat(raw_date)
        except ValueError:
            problems.append(f"line {line}: bad date {raw_date!r}")
            continue
        try:
            price = float(raw_price)
        except ValueError:
            problems.append(f"line {line}: missing or non-numeric price {raw_price!r}")
            continue
        if not math.isfinite(price) or price <= 0:
            problems.append(f"line {line}: non-positive price {raw_price!r}")
            continue
        dates.append(day)
        prices.append(price)
    if problems:
        raise ParseError(f"{path}: " + "; ".join(problems))
    if not dates:
        raise EmptySeries(f"{path}: no price rows")
    ts = np.array(dates, dtype="datetime64[D]")
    order = np.argsort(ts, kind="stable")
    ts, px = ts[order], np.asarray(prices)[order]
    dup = np.nonzero(ts[1:] == ts[:-1])[0]
    if len(dup):
        raise ParseError(f"{path}: duplicate date {ts[dup[0]]}")
    return PriceSeries(ts, px, name=path.stem)


@dataclass(frozen=True)
class AlignedPair:
    first: PriceSeries
    second: PriceSeries

    def __post_init__(self) -> None:
        if len(self.first) < 2:
            raise InsufficientOverlap("aligned pair needs at least 2 common timestamps")
        if not np.array_equal(self.first.timestamps, self.second.timestamps):
            raise ValueError("series in an aligned pair must share timestamps")

    def __len__(self) -> int:
        return len(self.first)

    @property
    def timestamps(self) -> np.ndarray:
        return self.first.timestamps

    def slice(self, start: int | None = None, stop: int | None = None) -> "AlignedPair":
        return AlignedPair(self.first.slice(start, stop), self.second.slice(start, stop))


def align(a: PriceSeries, b: PriceSeries) -> AlignedPair:
    """Restrict both series to their common timestamps."""
    if a.timestamps.dtype != b.timestamps.dtype:
        raise TypeError("cannot align dated and undated series")
    common, ia, ib = np.intersect1d(a.timestamps, b.timestamps, return_indices=True)
    if len(common) < 2:
        raise InsufficientOverlap(
            f"only {len(common)} common timestamps between {a.name or 'a'} and {b.name or 'b'}"
        )
    return AlignedPair(
        PriceSeries(common, a.prices[ia], a.name), PriceSeries(common, b.prices[ib], b.name)
    )


def _week_ids(ts: np.ndarray) -> np.ndarray:
    # 1970-01-01 was a Thursday; shifting by 3 days puts week boundaries on Mondays.
    days = ts.astype("datetime64[D]").astype(np.int64)
    return (days + 3) // 7


def resample_weekly(series: PriceSeries) -> PriceSeries:
    """Keep the last observation of each Monday-to-Sunday week."""
    if not series.is_dated:
        raise TypeError("weekly resampling needs dated timestamps")
    weeks = _week_ids(series.timestamps)
    keep = np.append(weeks[1:] != weeks[:-1], True)
    return PriceSeries(series.timestamps[keep], series.prices[keep], series.name)


def resample_pair_weekly(pair: AlignedPair) -> AlignedPair:
    return AlignedPair(resample_weekly(pair.first), resample_weekly(pair.second))


@dataclass(frozen=True)
class BacktestConfig:
    mode: Mode = Mode.MARKET_NEUTRAL
    memory_grid: tuple[int, ...] = DEFAULT_MEMORY_GRID
    cost_rate: float = DEFAULT_COST_RATE
    split_fraction: float = 0.5
    cadence: int = 252
    resample: str = "none"

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "memory_grid", tuple(int(m) for m in self.memory_grid))
        if not self.memory_grid or min(self.memory_grid) < 1:
            raise ValueError(f"memory_grid must be nonempty with m >= 1: {self.memory_grid}")
        if not (0.0 <= self.cost_rate < 1.0):
            raise ValueError(f"cost_rate must be in [0, 1): {self.cost_rate}")
        if not (0.0 < self.split_fraction < 1.0):
            raise ValueError(f"split_fraction must be in (0, 1): {self.split_fraction}")
        if self.cadence < 1:
            raise ValueError(f"cadence must be >= 1: {self.cadence}")
        if self.resample not in ("none", "weekly"):
            raise ValueError(f"resample must be 'none' or 'weekly': {self.resample!r}")


@dataclass(frozen=True)
class BacktestResult:
    """Outcome of one backtest over a pair.

    ``per_step_returns`` are net log-returns, one per input observation;
    ``total_cost`` is the summed log cost, ``n_trades * ln(1 - cost_rate)``,
    so it is never positive.
    """

    timestamps: np.ndarray
    per_step_returns: np.ndarray
    gross_returns: np.ndarray
    equity_curve: np.ndarray
    trades: np.ndarray
    n_trades: int
    total_cost: float
    sharpe: float
    memory: int
    cadence: int
    chosen_m: int | None = None

    @property
    def evaluated_returns(self) -> np.ndarray:
        """Net returns after the ``memory``-step warm-up."""
        return self.per_step_returns[self.memory :]

    @property
    def final_equity(self) -> float:
        return float(self.equity_curve[-1])


def sharpe_ratio(returns, cadence: int) -> float:
    """Annualized mean/stdev (unbiased), zero risk-free rate; NaN if flat."""
    r = np.asarray(returns, dtype=float)
    if len(r) < 2:
        return math.nan
    sd = r.std(ddof=1)
    if sd == 0.0 or not math.isfinite(sd):
        return math.nan
    return float(r.mean() / sd * math.sqrt(cadence))


def compensated_cumsum(values) -> np.ndarray:
    """Running sum with Neumaier compensation, accurate to about one ulp."""
    out = np.empty(len(values))
    total = comp = 0.0
    for k, v in enumerate(np.asarray(values, dtype=float).tolist()):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[k] = total + comp
    return out


def run(pair: AlignedPair, config: BacktestConfig, m: int) -> BacktestResult:
    if len(pair) <= m + 1:
        raise SeriesTooShort(f"need more than {m + 1} observations for m={m}, got {len(pair)}")
    policy_run = run_policy(pair.first.prices, pair.second.prices, m, config.mode)
    leg_cost = math.log1p(-config.cost_rate)
    net = policy_run.gross_returns + policy_run.trades * leg_cost
    n_trades = int(policy_run.trades.sum())
    return BacktestResult(
        timestamps=pair.timestamps,
        per_step_returns=net,
        gross_returns=policy_run.gross_returns,
        equity_curve=compensated_cumsum(net),
        trades=policy_run.trades,
        n_trades=n_trades,
        total_cost=n_trades * leg_cost,
        sharpe=sharpe_ratio(net[m:], config.cadence),
        memory=m,
        cadence=config.cadence,
    )


@dataclass(frozen=True)
class Selection:
    chosen_m: int
    in_sample: BacktestResult
    out_of_sample: BacktestResult
    in_sample_sharpes: dict[int, float] = field(default_factory=dict)
    split_index: int = 0


def select_memory_in_sample(pair: AlignedPair, config: BacktestConfig) -> Selection:
    """Pick ``m`` by in-sample Sharpe, then rerun it on the held-out tail.

    The tail run starts with empty anchor buffers. NaN Sharpes rank last;
    ties go to the smallest ``m``.
    """
    split = math.floor(config.split_fraction * len(pair))
    need = max(config.memory_grid) + 1
    if split <= need or len(pair) - split <= need:
        raise SeriesTooShort(
            f"both segments must exceed {need} observations; "
            f"got {split} and {len(pair) - split}"
        )
    head, tail = pair.slice(None, split), pair.slice(split, None)
    results = {m: run(head, config, m) for m in sorted(set(config.memory_grid))}
    sharpes = {m: r.sharpe for m, r in results.items()}
    best = None
    for m, s in sharpes.items():
        score = -math.inf if math.isnan(s) else s
        if best is None or score > best[1]:
            best = (m, score)
    chosen = best[0]
    in_sample = _with_choice(results[chosen], chosen)
    out_of_sample = _with_choice(run(tail, config, chosen), chosen)
    return Selection(chosen, in_sample, out_of_sample, sharpes, split)


def _with_choice(result: BacktestResult, m: int) -> BacktestResult:
    return replace(result, chosen_m=m)


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else f"{float(x):.12g}"
    return str(x)


def preamble(params: Mapping[str, object]) -> str:
    return "# " + " ".join(f"{k}={format_number(v)}" for k, v in params.items())


def write_table(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    params: Mapping[str, object],
) -> Path:
    """Write a parameter preamble line, a header row, then comma-separated rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(preamble(params) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    return path


def write_equity_curve(path, result: BacktestResult, params: Mapping[str, object]) -> Path:
    rows = zip(result.timestamps, result.per_step_returns, result.equity_curve)
    return write_table(path, ("timestamp", "net_return", "equity"), rows, params)


def summary_items(selection: Selection) -> list[tuple[str, object]]:
    items: list[tuple[str, object]] = [
        ("chosen_m", selection.chosen_m),
        ("sharpe_in", selection.in_sample.sharpe),
        ("sharpe_out", selection.out_of_sample.sharpe),
        ("n_trades_in", selection.in_sample.n_trades),
        ("n_trades_out", selection.out_of_sample.n_trades),
        ("n_trades", selection.in_sample.n_trades + selection.out_of_sample.n_trades),
        ("total_cost_in", selection.in_sample.total_cost),
        ("total_cost_out", selection.out_of_sample.total_cost),
        ("total_cost", selection.in_sample.total_cost + selection.out_of_sample.total_cost),
        ("final_equity_in", selection.in_sample.final_equity),
        ("final_equity_out", selection.out_of_sample.final_equity),
        ("split_index", selection.split_index),
    ]
    items += [(f"sharpe_in_m{m}", s) for m, s in selection.in_sample_sharpes.items()]
    return items


def write_summary(path, selection: Selection, params: Mapping[str, object]) -> Path:
    return write_table(path, ("key", "value"), summary_items(selection), params)
