import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anchoring import backtest
from anchoring.backtest import (
    AlignedPair,
    BacktestConfig,
    EmptySeries,
    InsufficientOverlap,
    ParseError,
    SeriesTooShort,
    align,
    load_price_series,
    resample_weekly,
    run,
    select_memory_in_sample,
    sharpe_ratio,
)
from anchoring.price_models import PriceSeries, TwoPointModel, sample_pair, sample_random_walk
from anchoring.strategy import Mode


def dated(days, prices, start="2000-01-03"):
    ts = np.datetime64(start) + np.asarray(days)
    return PriceSeries(ts, prices)


def synthetic_pair(n, seed, spread=0.05):
    a, b = sample_pair(TwoPointModel(1, spread), TwoPointModel(1, spread), n, seed)
    return AlignedPair(a, b)


def write(tmp_path, text, name="p.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_two_rows(tmp_path):
    s = load_price_series(write(tmp_path, "date,close\n2000-01-03,100.0\n2000-01-04,101.0\n"))
    assert len(s) == 2
    assert s.prices.tolist() == [100.0, 101.0]
    assert str(s.timestamps[0]) == "2000-01-03"


def test_load_rejects_negative_price_with_line(tmp_path):
    path = write(tmp_path, "date,close\n2000-01-03,100.0\n2000-01-04,-5\n")
    with pytest.raises(ParseError, match="line 3"):
        load_price_series(path)


def test_load_reports_every_bad_row(tmp_path):
    path = write(tmp_path, "date,close\n2000-01-03,\n2000-01-04,1\nnot-a-date,2\n2000-01-06,0\n")
    with pytest.raises(ParseError) as err:
        load_price_series(path)
    msg = str(err.value)
    assert "line 2" in msg and "line 4" in msg and "line 5" in msg and "line 3" not in msg


def test_load_sorts_dates(tmp_path):
    path = write(tmp_path, "date,close\n2000-01-05,3\n2000-01-03,1\n2000-01-04,2\n")
    s = load_price_series(path)
    assert s.prices.tolist() == [1.0, 2.0, 3.0]


def test_load_custom_columns_and_comments(tmp_path):
    path = write(tmp_path, "# made by hand\nDay,Open,Adj Close\n2000-01-03,5,1.5\n2000-01-04,5,1.6\n")
    s = load_price_series(path, "Day", "Adj Close")
    assert s.prices.tolist() == [1.5, 1.6]


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.csv"):
        load_price_series(tmp_path / "nope.csv")


def test_load_empty(tmp_path):
    with pytest.raises(EmptySeries):
        load_price_series(write(tmp_path, ""))
    with pytest.raises(EmptySeries):
        load_price_series(write(tmp_path, "date,close\n", "h.csv"))


def test_load_missing_column(tmp_path):
    with pytest.raises(ParseError, match="close"):
        load_price_series(write(tmp_path, "date,price\n2000-01-03,1\n"))


def test_load_duplicate_dates(tmp_path):
    with pytest.raises(ParseError, match="duplicate"):
        load_price_series(write(tmp_path, "date,close\n2000-01-03,1\n2000-01-03,2\n"))


def test_align_identical():
    a = dated([0, 1, 2], [1.0, 2.0, 3.0])
    b = dated([0, 1, 2], [4.0, 5.0, 6.0])
    pair = align(a, b)
    np.testing.assert_array_equal(pair.first.prices, a.prices)
    np.testing.assert_array_equal(pair.second.prices, b.prices)


def test_align_disjoint():
    with pytest.raises(InsufficientOverlap):
        align(dated([0, 1], [1.0, 2.0]), dated([5, 6], [1.0, 2.0]))


def test_align_drops_missing_date():
    a = dated([0, 1, 3], [1.0, 2.0, 4.0])
    b = dated([0, 1, 2, 3], [5.0, 6.0, 7.0, 8.0])
    pair = align(a, b)
    assert pair.second.prices.tolist() == [5.0, 6.0, 8.0]
    assert pair.first.prices.tolist() == [1.0, 2.0, 4.0]


def test_resample_two_weeks_of_weekdays():
    # 2000-01-03 is a Monday
    days = [0, 1, 2, 3, 4, 7, 8, 9, 10, 11]
    s = resample_weekly(dated(days, np.arange(1.0, 11.0)))
    assert s.prices.tolist() == [5.0, 10.0]
    assert [str(t) for t in s.timestamps] == ["2000-01-07", "2000-01-14"]


def test_resample_weekly_is_idempotent():
    s = dated([4, 11, 18], [1.0, 2.0, 3.0])
    r = resample_weekly(s)
    np.testing.assert_array_equal(r.prices, s.prices)
    np.testing.assert_array_equal(resample_weekly(r).timestamps, r.timestamps)


def test_resample_single_observation_week():
    s = resample_weekly(dated([0, 1, 9], [1.0, 2.0, 3.0]))
    assert s.prices.tolist() == [2.0, 3.0]


def test_resample_sunday_closes_week():
    # Sunday 2000-01-09 belongs with Monday 2000-01-03
    s = resample_weekly(dated([0, 6, 7], [1.0, 2.0, 3.0]))
    assert s.prices.tolist() == [2.0, 3.0]


def test_config_validation():
    for bad in (
        dict(cost_rate=-0.1),
        dict(memory_grid=()),
        dict(memory_grid=(0,)),
        dict(split_fraction=1.0),
        dict(resample="monthly"),
    ):
        with pytest.raises(ValueError):
            BacktestConfig(**bad)


def test_run_too_short():
    with pytest.raises(SeriesTooShort):
        run(synthetic_pair(6, 0), BacktestConfig(), 5)


def test_run_zero_cost_fig1_long_only():
    n = 10**5
    a, b = sample_pair(TwoPointModel(1, 0.11), TwoPointModel(1, 0.11), n, seed=2)
    res = run(AlignedPair(a, b), BacktestConfig(mode=Mode.LONG_ONLY, cost_rate=0.0), 5)
    r = res.evaluated_returns
    se = r.std(ddof=1) / math.sqrt(len(r))
    assert abs(r.mean() - 0.0552235) < 3 * se
    assert res.total_cost == 0.0


def test_cost_accounting():
    res = run(synthetic_pair(2000, 3), BacktestConfig(cost_rate=0.001), 5)
    assert res.n_trades > 0
    assert res.total_cost == pytest.approx(res.n_trades * math.log(0.999), abs=1e-12)
    assert -res.total_cost == pytest.approx(-res.n_trades * math.log(0.999), abs=1e-12)
    assert abs(res.final_equity - (res.gross_returns.sum() + res.total_cost)) < 1e-10
    np.testing.assert_allclose(res.equity_curve, np.cumsum(res.per_step_returns), atol=1e-12)
    assert len(res.equity_curve) == 2000


def test_constant_prices():
    n = 50
    pair = AlignedPair(PriceSeries(np.arange(n), np.ones(n)), PriceSeries(np.arange(n), np.ones(n) * 2))
    res = run(pair, BacktestConfig(), 5)
    assert res.n_trades == 0
    assert np.all(res.per_step_returns == 0)
    assert math.isnan(res.sharpe)


def test_sharpe_convention():
    r = np.array([0.01, 0.02, -0.005, 0.0])
    expected = r.mean() / r.std(ddof=1) * math.sqrt(52)
    assert sharpe_ratio(r, 52) == pytest.approx(expected)
    assert math.isnan(sharpe_ratio([0.1], 252))


def test_sharpe_excludes_warmup():
    res = run(synthetic_pair(500, 4), BacktestConfig(cadence=252), 10)
    assert res.sharpe == pytest.approx(sharpe_ratio(res.per_step_returns[10:], 252))


@settings(max_examples=20)
@given(st.integers(0, 2**31), st.sampled_from(list(Mode)), st.integers(1, 12))
def test_cost_monotonicity(seed, mode, m):
    pair = synthetic_pair(400, seed)
    ends = [run(pair, BacktestConfig(mode=mode, cost_rate=c), m).final_equity for c in (0, 0.0005, 0.001, 0.01)]
    assert all(x >= y for x, y in zip(ends, ends[1:]))


@settings(max_examples=20)
@given(st.integers(0, 2**31), st.sampled_from(list(Mode)), st.floats(0.0, 0.05))
def test_accounting_identity(seed, mode, cost):
    res = run(synthetic_pair(300, seed), BacktestConfig(mode=mode, cost_rate=cost), 5)
    assert abs(res.final_equity - (res.gross_returns.sum() + res.total_cost)) < 1e-10
    assert abs(res.total_cost - res.n_trades * math.log1p(-cost)) < 1e-12


def test_select_runs_grid_and_split(monkeypatch):
    calls = []
    real_run = backtest.run

    def spy(pair, config, m):
        calls.append((len(pair), m, pair.timestamps[0]))
        return real_run(pair, config, m)

    monkeypatch.setattr(backtest, "run", spy)
    pair = synthetic_pair(1001, 5)
    sel = select_memory_in_sample(pair, BacktestConfig(memory_grid=(5, 10, 15)))
    assert [c[1] for c in calls[:3]] == [5, 10, 15]
    assert len(calls) == 4
    assert calls[3][1] == sel.chosen_m
    assert calls[3][0] == 1001 - 500 and calls[3][2] == 500
    assert sel.split_index == 500
    assert sel.chosen_m == max(sel.in_sample_sharpes, key=lambda m: (sel.in_sample_sharpes[m], -m))


def test_select_tie_prefers_smallest_m():
    n = 200
    flat = AlignedPair(PriceSeries(np.arange(n), np.ones(n)), PriceSeries(np.arange(n), np.ones(n)))
    sel = select_memory_in_sample(flat, BacktestConfig(memory_grid=(15, 5, 10)))
    assert sel.chosen_m == 5


def test_select_single_grid_value():
    sel = select_memory_in_sample(synthetic_pair(300, 6), BacktestConfig(memory_grid=(7,)))
    assert sel.chosen_m == 7
    assert sel.out_of_sample.chosen_m == 7
    assert len(sel.out_of_sample.per_step_returns) == 150


def test_select_too_short():
    with pytest.raises(SeriesTooShort):
        select_memory_in_sample(synthetic_pair(30, 0), BacktestConfig(memory_grid=(5, 10, 15)))


def test_out_of_sample_ignores_in_sample_prices():
    pair = synthetic_pair(600, 8)
    sel = select_memory_in_sample(pair, BacktestConfig(memory_grid=(5,)))
    p1 = pair.first.prices.copy()
    p1[:300] *= 3.0
    altered = AlignedPair(PriceSeries(pair.timestamps, p1), pair.second)
    sel2 = select_memory_in_sample(altered, BacktestConfig(memory_grid=(5,)))
    np.testing.assert_array_equal(sel.out_of_sample.per_step_returns, sel2.out_of_sample.per_step_returns)
    assert np.all(sel.out_of_sample.per_step_returns[:5] == 0)


def test_null_model_small_sample_costs_negative():
    a = sample_random_walk(1.0, 0.01, 20_000, seed=1)
    b = sample_random_walk(1.0, 0.01, 20_000, seed=2)
    res = run(AlignedPair(a, b), BacktestConfig(mode=Mode.MARKET_NEUTRAL, cost_rate=0.001), 5)
    assert res.evaluated_returns.mean() < 0


def test_writers(tmp_path):
    sel = select_memory_in_sample(synthetic_pair(300, 6), BacktestConfig(memory_grid=(5,)))
    params = {"seed": 6, "cost_rate": 0.001}
    path = backtest.write_equity_curve(tmp_path / "eq.csv", sel.out_of_sample, params)
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed=6 cost_rate=0.001"
    assert lines[1] == "timestamp,net_return,equity"
    assert len(lines) == 2 + 150
    summary = backtest.write_summary(tmp_path / "s.csv", sel, params).read_text().splitlines()
    keys = [line.split(",")[0] for line in summary[2:]]
    for k in ("chosen_m", "sharpe_in", "sharpe_out", "n_trades", "total_cost"):
        assert k in keys


def test_format_number():
    assert backtest.format_number(0.1 + 0.2) == "0.3"
    assert backtest.format_number(1 / 3) == "0.333333333333"
    assert backtest.format_number(float("nan")) == "nan"
    assert backtest.format_number(np.int64(5)) == "5"


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200))
def test_compensated_cumsum_matches_exact_prefix_sums(xs):
    out = backtest.compensated_cumsum(xs)
    for k in (0, len(xs) // 2, len(xs) - 1):
        exact = math.fsum(xs[: k + 1])
        assert abs(out[k] - exact) <= 1e-15 * max(1.0, sum(abs(x) for x in xs[: k + 1]))
