"""Online anchoring strategy.

Each step the prices of both assets are compared against trailing means of
their previous ``memory`` prices. When asset 1 is above its anchor and asset 2
below (``x1``) the strategy goes long asset 2; in the mirror case (``x4``) it
goes long asset 1; otherwise it keeps its position. The market-neutral
variant additionally shorts the other asset with equal notional.

Two equivalent drivers are provided: :class:`StrategyState` processes one
observation at a time, and :func:`run_policy` processes whole arrays at once.
Both compute anchors with the same left-to-right summation, so they make
bit-identical decisions.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from anchoring.analytic import Configuration, policy

# Relative tolerance under which a price counts as equal to its anchor.
TIE_RTOL = 1e-12

_CODES = {None: 0, **{c: k for k, c in enumerate(Configuration, start=1)}}


class Mode(str, enum.Enum):
    LONG_ONLY = "long-only"
    MARKET_NEUTRAL = "market-neutral"

    @property
    def legs(self) -> int:
        return 1 if self is Mode.LONG_ONLY else 2


class Action(str, enum.Enum):
    HOLD = "hold"
    SWITCH = "switch"
    SET_PAIR = "set-pair"


class AnchorEstimator:
    """Trailing arithmetic mean of the last ``memory`` observed prices."""

    def __init__(self, memory: int):
        if memory < 1:
            raise ValueError(f"memory must be >= 1, got {memory}")
        self.memory = memory
        self.buffer: deque[float] = deque(maxlen=memory)

    def push(self, price: float) -> "AnchorEstimator":
        if not price > 0:
            raise ValueError(f"price must be positive, got {price}")
        self.buffer.append(float(price))
        return self

    @property
    def ready(self) -> bool:
        return len(self.buffer) == self.memory

    @property
    def anchor(self) -> float | None:
        if not self.ready:
            return None
        return sum(self.buffer) / self.memory

    def __repr__(self) -> str:
        return f"AnchorEstimator(memory={self.memory}, buffer={list(self.buffer)})"


def update_anchor(estimator: AnchorEstimator, price: float) -> AnchorEstimator:
    return estimator.push(price)


def _side(price: float, anchor: float) -> int:
    diff = price - anchor
    if diff > TIE_RTOL * anchor:
        return 1
    if diff < -TIE_RTOL * anchor:
        return -1
    return 0


def classify(
    price1: float, price2: float, anchor1: float, anchor2: float
) -> Configuration | None:
    """Configuration of the two prices, or ``None`` if either sits on its anchor."""
    s1, s2 = _side(price1, anchor1), _side(price2, anchor2)
    if s1 == 0 or s2 == 0:
        return None
    if s1 > 0:
        return Configuration.X1 if s2 < 0 else Configuration.X2
    return Configuration.X3 if s2 < 0 else Configuration.X4


@dataclass(frozen=True)
class StepDecision:
    configuration: Configuration | None
    action: Action
    long_asset: int | None
    trades_executed: int

    @property
    def short_asset(self) -> int | None:
        return None if self.long_asset is None else 3 - self.long_asset


@dataclass
class StrategyState:
    """Sequential state of one strategy instance.

    ``long_asset`` is the asset held long (``None`` while flat). In
    market-neutral mode the other asset is held short.
    """

    memory: int
    mode: Mode = Mode.LONG_ONLY
    long_asset: int | None = None
    estimators: tuple[AnchorEstimator, AnchorEstimator] = field(init=False)
    _last: tuple[float, float] | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        self.mode = Mode(self.mode)
        self.estimators = (AnchorEstimator(self.memory), AnchorEstimator(self.memory))

    @property
    def anchors(self) -> tuple[float | None, float | None]:
        return self.estimators[0].anchor, self.estimators[1].anchor

    def step(self, price1: float, price2: float) -> tuple["StrategyState", StepDecision, float]:
        """Accrue the return of the current position, then react to the new prices.

        The anchors used for classification exclude ``price1``/``price2``;
        those enter the buffers only after the decision.
        """
        ret = 0.0
        if self.long_asset is not None and self._last is not None:
            r1 = math.log(price1 / self._last[0])
            r2 = math.log(price2 / self._last[1])
            ret = position_return(self.long_asset, r1, r2, self.mode)

        a1, a2 = self.anchors
        config = None
        if a1 is not None and a2 is not None:
            config = classify(price1, price2, a1, a2)

        target = policy(config, self.long_asset) if config is not None else self.long_asset
        trades = 0
        action = Action.HOLD
        if target != self.long_asset:
            trades = self.mode.legs
            action = Action.SWITCH if self.mode is Mode.LONG_ONLY else Action.SET_PAIR
            self.long_asset = target

        self.estimators[0].push(price1)
        self.estimators[1].push(price2)
        self._last = (float(price1), float(price2))
        return self, StepDecision(config, action, self.long_asset, trades), ret


def long_only_step(state: StrategyState, price1: float, price2: float):
    if state.mode is not Mode.LONG_ONLY:
        raise ValueError("state is not in long-only mode")
    return state.step(price1, price2)


def market_neutral_step(state: StrategyState, price1: float, price2: float):
    if state.mode is not Mode.MARKET_NEUTRAL:
        raise ValueError("state is not in market-neutral mode")
    return state.step(price1, price2)


def position_return(long_asset, r1, r2, mode: Mode):
    """Log-return of a position given each asset's log-return.

    Works elementwise on arrays; ``long_asset`` of 0 or ``None`` means flat.
    """
    mode = Mode(mode)
    if np.ndim(long_asset) == 0:
        if long_asset in (None, 0):
            return 0.0
        long_r, short_r = (r1, r2) if long_asset == 1 else (r2, r1)
        return long_r if mode is Mode.LONG_ONLY else long_r - short_r
    long_asset = np.asarray(long_asset)
    r1, r2 = np.asarray(r1, dtype=float), np.asarray(r2, dtype=float)
    long_r = np.where(long_asset == 1, r1, np.where(long_asset == 2, r2, 0.0))
    if mode is Mode.LONG_ONLY:
        return long_r
    short_r = np.where(long_asset == 1, r2, np.where(long_asset == 2, r1, 0.0))
    return long_r - short_r


def trailing_anchor(prices: np.ndarray, memory: int) -> np.ndarray:
    """Anchor used at each step: mean of the ``memory`` preceding prices.

    NaN for the first ``memory`` steps.
    """
    prices = np.asarray(prices, dtype=float)
    n = len(prices)
    out = np.full(n, np.nan)
    if n <= memory:
        return out
    windows = np.lib.stride_tricks.sliding_window_view(prices, memory)[:-1]
    total = windows[:, 0].copy()
    for k in range(1, memory):
        total += windows[:, k]
    out[memory:] = total / memory
    return out


@dataclass(frozen=True)
class PolicyRun:
    """Per-step output of :func:`run_policy`.

    ``gross_returns[t]`` accrues over ``(t-1, t]`` on the position held after
    step ``t-1``; ``gross_returns[0]`` is zero. ``long_asset[t]`` is the
    position after the decision at ``t`` (0 when flat).
    """

    configs: np.ndarray
    long_asset: np.ndarray
    trades: np.ndarray
    gross_returns: np.ndarray
    memory: int
    mode: Mode

    def decision_configurations(self) -> list[Configuration | None]:
        lookup = {v: k for k, v in _CODES.items()}
        return [lookup[int(c)] for c in self.configs]


def run_policy(prices1, prices2, memory: int, mode: Mode | str = Mode.LONG_ONLY) -> PolicyRun:
    """Run the strategy over two aligned price arrays in one pass."""
    mode = Mode(mode)
    if memory < 1:
        raise ValueError(f"memory must be >= 1, got {memory}")
    p1 = np.asarray(prices1, dtype=float)
    p2 = np.asarray(prices2, dtype=float)
    if p1.shape != p2.shape or p1.ndim != 1:
        raise ValueError("price arrays must be 1-d and of equal length")
    if np.any(p1 <= 0) or np.any(p2 <= 0):
        raise ValueError("prices must be positive")
    n = len(p1)

    a1, a2 = trailing_anchor(p1, memory), trailing_anchor(p2, memory)
    with np.errstate(invalid="ignore"):
        d1, d2 = p1 - a1, p2 - a2
        s1 = np.where(d1 > TIE_RTOL * a1, 1, np.where(d1 < -TIE_RTOL * a1, -1, 0))
        s2 = np.where(d2 > TIE_RTOL * a2, 1, np.where(d2 < -TIE_RTOL * a2, -1, 0))
    configs = np.zeros(n, dtype=np.int8)
    configs[(s1 > 0) & (s2 < 0)] = _CODES[Configuration.X1]
    configs[(s1 > 0) & (s2 > 0)] = _CODES[Configuration.X2]
    configs[(s1 < 0) & (s2 < 0)] = _CODES[Configuration.X3]
    configs[(s1 < 0) & (s2 > 0)] = _CODES[Configuration.X4]

    signal = np.zeros(n, dtype=np.int8)
    signal[configs == _CODES[Configuration.X1]] = 2
    signal[configs == _CODES[Configuration.X4]] = 1
    # forward-fill the most recent forcing signal
    last = np.where(signal > 0, np.arange(n), -1)
    np.maximum.accumulate(last, out=last)
    long_asset = np.where(last >= 0, signal[np.maximum(last, 0)], 0).astype(np.int8)

    prev = np.concatenate(([0], long_asset[:-1]))
    trades = (long_asset != prev).astype(np.int64) * mode.legs

    gross = np.zeros(n)
    if n > 1:
        gross[1:] = position_return(
            long_asset[:-1], np.log(p1[1:] / p1[:-1]), np.log(p2[1:] / p2[:-1]), mode
        )
    return PolicyRun(configs, long_asset, trades, gross, memory, mode)
