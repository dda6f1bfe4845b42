"""Monte Carlo runs of the strategy on synthetic two-point prices.

Provides the convergence experiment (running mean of the realized return),
the sweep over one asset's half-spread, and the three-way variance
reconciliation. Standard errors use batch means, which stay valid when the
per-step returns are autocorrelated (they are: the position persists).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from anchoring import analytic
from anchoring.price_models import (
    DriftingTwoPointModel,
    Seed,
    TwoPointModel,
    sample_pair,
    spawn_seeds,
)
from anchoring.strategy import Mode, run_policy

DEFAULT_BATCHES = 100


def batch_means_se(x, n_batches: int = DEFAULT_BATCHES) -> float:
    """Standard error of ``mean(x)`` from the spread of batch means."""
    x = np.asarray(x, dtype=float)
    size = len(x) // n_batches
    if size < 1:
        raise ValueError(f"need at least {n_batches} samples, got {len(x)}")
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def variance_se(x, n_batches: int = DEFAULT_BATCHES) -> float:
    """Standard error of the sample variance of ``x`` (batch means on squared deviations)."""
    x = np.asarray(x, dtype=float)
    return batch_means_se((x - x.mean()) ** 2, n_batches)


@dataclass(frozen=True)
class SimulationRun:
    """Per-step returns after warm-up, ``steps`` of them."""

    returns: np.ndarray
    memory: int
    mode: Mode
    seed: int | None

    @property
    def mean(self) -> float:
        return float(self.returns.mean())

    @property
    def variance(self) -> float:
        return float(self.returns.var())

    @property
    def mean_se(self) -> float:
        return batch_means_se(self.returns)

    @property
    def variance_se(self) -> float:
        return variance_se(self.returns)

    def running_mean(self) -> np.ndarray:
        return np.cumsum(self.returns) / np.arange(1, len(self.returns) + 1)


def simulate(
    model1: TwoPointModel | DriftingTwoPointModel,
    model2: TwoPointModel | DriftingTwoPointModel,
    memory: int,
    steps: int,
    seed: Seed,
    mode: Mode | str = Mode.LONG_ONLY,
) -> SimulationRun:
    """Draw ``steps + memory`` prices per asset and run the strategy.

    The first ``memory`` steps fill the anchor buffers and are dropped, so
    exactly ``steps`` returns are kept.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    s1, s2 = sample_pair(model1, model2, steps + memory, seed)
    run = run_policy(s1.prices, s2.prices, memory, mode)
    return SimulationRun(
        run.gross_returns[memory:], memory, Mode(mode), seed if isinstance(seed, int) else None
    )


@dataclass(frozen=True)
class SweepRow:
    spread1: float
    sim_mean: float
    sim_mean_se: float
    sim_variance: float
    sim_variance_se: float
    analytic_mean: float
    analytic_variance: float

    @property
    def mean_z(self) -> float:
        return (self.sim_mean - self.analytic_mean) / self.sim_mean_se

    @property
    def variance_z(self) -> float:
        return (self.sim_variance - self.analytic_variance) / self.sim_variance_se


def _sweep_point(args) -> SweepRow:
    spread1, anchor1, anchor2, spread2, memory, steps, seed = args
    m1, m2 = TwoPointModel(anchor1, spread1), TwoPointModel(anchor2, spread2)
    sim = simulate(m1, m2, memory, steps, seed)
    exact = analytic.analyze(m1, m2)
    return SweepRow(
        spread1,
        sim.mean,
        sim.mean_se,
        sim.variance,
        sim.variance_se,
        exact.mean_return_per_step,
        exact.variance_per_step,
    )


def sweep_spread(
    spreads1: Sequence[float],
    anchor1: float,
    anchor2: float,
    spread2: float,
    memory: int,
    steps: int,
    seed: Seed,
    workers: int = 1,
) -> list[SweepRow]:
    """Simulated vs exact mean and variance across asset 1's half-spread.

    Each grid point gets its own child seed, so results do not depend on
    ``workers``. Rows come back in grid order.
    """
    for s in spreads1:
        TwoPointModel(anchor1, s)
    seeds = spawn_seeds(seed, len(spreads1))
    jobs = [(s, anchor1, anchor2, spread2, memory, steps, ss) for s, ss in zip(spreads1, seeds)]
    if workers <= 1:
        return [_sweep_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_point, jobs))


@dataclass(frozen=True)
class VarianceReconciliation:
    engine: float
    as_printed: float
    log_product: float
    monte_carlo: float
    monte_carlo_se: float

    @property
    def engine_z(self) -> float:
        return (self.monte_carlo - self.engine) / self.monte_carlo_se

    @property
    def as_printed_z(self) -> float:
        return (self.monte_carlo - self.as_printed) / self.monte_carlo_se

    def report(self) -> str:
        rows = [
            ("engine", self.engine),
            ("closed_form_as_printed", self.as_printed),
            ("closed_form_log_product", self.log_product),
            ("monte_carlo", self.monte_carlo),
            ("monte_carlo_se", self.monte_carlo_se),
            ("engine_minus_monte_carlo_in_se", -self.engine_z),
            ("as_printed_minus_monte_carlo_in_se", -self.as_printed_z),
            ("as_printed_minus_engine", self.as_printed - self.engine),
        ]
        return "\n".join(f"{k},{v:.12g}" for k, v in rows)


def reconcile_variance(
    m1: TwoPointModel, m2: TwoPointModel, memory: int, steps: int, seed: Seed
) -> VarianceReconciliation:
    sim = simulate(m1, m2, memory, steps, seed)
    return VarianceReconciliation(
        engine=analytic.analyze(m1, m2).variance_per_step,
        as_printed=analytic.closed_form_binomial_variance_as_printed(m1, m2),
        log_product=analytic.binomial_variance_log_product(m1, m2),
        monte_carlo=sim.variance,
        monte_carlo_se=sim.variance_se,
    )
