"""Price distributions and synthetic price series generators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

Seed = Union[int, np.random.SeedSequence]

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite-support distribution over strictly positive prices.

    Atoms are stored sorted ascending by price; prices must be distinct and
    probabilities must sum to one.
    """

    prices: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        prices = tuple(float(p) for p in self.prices)
        probs = tuple(float(q) for q in self.probs)
        if len(prices) == 0 or len(prices) != len(probs):
            raise ValueError("need a nonempty, equal number of prices and probabilities")
        if any(not math.isfinite(p) or p <= 0.0 for p in prices):
            raise ValueError(f"prices must be finite and strictly positive: {prices}")
        if any(not math.isfinite(q) or q < 0.0 for q in probs):
            raise ValueError(f"probabilities must be nonnegative: {probs}")
        if abs(math.fsum(probs) - 1.0) > _PROB_TOL:
            raise ValueError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        order = sorted(range(len(prices)), key=prices.__getitem__)
        prices = tuple(prices[i] for i in order)
        probs = tuple(probs[i] for i in order)
        if any(a == b for a, b in zip(prices, prices[1:])):
            raise ValueError(f"prices must be distinct: {prices}")
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_atoms(cls, atoms: Sequence[tuple[float, float]]) -> "DiscreteDistribution":
        return cls(tuple(a for a, _ in atoms), tuple(q for _, q in atoms))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.prices, self.probs))

    def mass_above(self, level: float) -> float:
        return math.fsum(q for p, q in self.atoms if p > level)

    def mass_below(self, level: float) -> float:
        return math.fsum(q for p, q in self.atoms if p < level)

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class TwoPointModel:
    """Price fluctuating around a fixed anchor: ``anchor +/- half_spread``."""

    anchor: float
    half_spread: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.anchor) and self.anchor > 0):
            raise ValueError(f"anchor must be positive, got {self.anchor}")
        if not (math.isfinite(self.half_spread) and self.half_spread > 0):
            raise ValueError(f"half_spread must be positive, got {self.half_spread}")
        if self.half_spread >= self.anchor:
            raise ValueError(
                f"half_spread ({self.half_spread}) must be below anchor ({self.anchor})"
            )

    @property
    def low(self) -> float:
        return self.anchor - self.half_spread

    @property
    def high(self) -> float:
        return self.anchor + self.half_spread

    @property
    def log_ratio(self) -> float:
        """``ln(high / low)``, the log gain of buying low and selling high."""
        return math.log(self.high / self.low)


@dataclass(frozen=True)
class DriftingTwoPointModel:
    """Two-point model whose anchor moves linearly, ``drift_per_step`` per step."""

    base: TwoPointModel
    drift_per_step: float = 0.0

    def anchor_at(self, t):
        return self.base.anchor + np.asarray(t, dtype=float) * self.drift_per_step

    def check_horizon(self, steps: int) -> None:
        # Linear in t, so the extreme is at one of the endpoints.
        last = self.base.anchor + (steps - 1) * self.drift_per_step
        lowest = min(self.base.anchor, last) - self.base.half_spread
        if lowest <= 0:
            raise ValueError(
                f"anchor path crosses positivity bound within {steps} steps "
                f"(lowest price {lowest:.6g})"
            )


@dataclass(frozen=True)
class PriceSeries:
    """Strictly time-ordered positive prices.

    ``timestamps`` is either an integer step index or ``datetime64[D]``.
    """

    timestamps: np.ndarray
    prices: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        ts = np.asarray(self.timestamps)
        if ts.dtype.kind == "M":
            ts = ts.astype("datetime64[D]")
        elif ts.dtype.kind in "iu":
            ts = ts.astype(np.int64)
        else:
            raise TypeError(f"timestamps must be integers or dates, got {ts.dtype}")
        px = np.asarray(self.prices, dtype=float)
        if ts.ndim != 1 or px.ndim != 1 or len(ts) != len(px):
            raise ValueError("timestamps and prices must be 1-d and of equal length")
        if len(px) == 0:
            raise ValueError("price series must hold at least one observation")
        if not np.all(np.isfinite(px)) or np.any(px <= 0):
            raise ValueError("prices must be finite and strictly positive")
        if len(ts) > 1 and not np.all(ts[1:] > ts[:-1]):
            raise ValueError("timestamps must be strictly increasing")
        ts.setflags(write=False)
        px.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)

    def __len__(self) -> int:
        return len(self.prices)

    @property
    def is_dated(self) -> bool:
        return self.timestamps.dtype.kind == "M"

    def slice(self, start: int | None = None, stop: int | None = None) -> "PriceSeries":
        return PriceSeries(self.timestamps[start:stop], self.prices[start:stop], self.name)


def two_point_distribution(model: TwoPointModel) -> DiscreteDistribution:
    return DiscreteDistribution((model.low, model.high), (0.5, 0.5))


def _signs(steps: int, seed: Seed) -> np.ndarray:
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    rng = np.random.default_rng(seed)
    return 2.0 * rng.integers(0, 2, size=steps) - 1.0


def sample_anchored_series(model: TwoPointModel, steps: int, seed: Seed) -> PriceSeries:
    """I.i.d. draws of ``anchor +/- half_spread`` with a fair sign each step."""
    prices = model.anchor + model.half_spread * _signs(steps, seed)
    return PriceSeries(np.arange(steps), prices)


def sample_drifting_series(
    model: DriftingTwoPointModel, steps: int, seed: Seed
) -> PriceSeries:
    """Like :func:`sample_anchored_series` but around ``anchor + t * drift``.

    With zero drift this reproduces :func:`sample_anchored_series` exactly
    for the same seed.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    model.check_horizon(steps)
    t = np.arange(steps)
    signs = _signs(steps, seed)
    prices = model.anchor_at(t) + model.base.half_spread * signs
    return PriceSeries(t, prices)


def sample_random_walk(
    initial: float, step_vol: float, steps: int, seed: Seed
) -> PriceSeries:
    """Log-price walk with i.i.d. symmetric ``+/- step_vol`` increments.

    The first observation is ``initial``; each later one applies one
    increment, so the series has no memory of any reference level.
    """
    if initial <= 0:
        raise ValueError(f"initial price must be positive, got {initial}")
    if step_vol < 0:
        raise ValueError(f"step_vol must be nonnegative, got {step_vol}")
    signs = _signs(steps, seed)
    increments = step_vol * signs
    increments[0] = 0.0
    prices = initial * np.exp(np.cumsum(increments))
    return PriceSeries(np.arange(steps), prices)


def spawn_seeds(seed: Seed, n: int) -> list[np.random.SeedSequence]:
    """Independent child seeds, e.g. one per asset or per grid point."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return ss.spawn(n)


def sample_pair(model1, model2, steps: int, seed: Seed) -> tuple[PriceSeries, PriceSeries]:
    """Two independent synthetic series sharing one seed.

    Each model is a :class:`TwoPointModel` or :class:`DriftingTwoPointModel`.
    """
    s1, s2 = spawn_seeds(seed, 2)

    def draw(model, s):
        if isinstance(model, DriftingTwoPointModel):
            return sample_drifting_series(model, steps, s)
        return sample_anchored_series(model, steps, s)

    return draw(model1, s1), draw(model2, s2)
