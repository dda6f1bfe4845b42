"""Exact steady-state return and variance of the anchoring strategy.

The strategy is described by a Markov chain over (configuration, holding)
pairs. Configurations classify the two prices against their anchors; the
holding is the asset owned after the policy reacted to the current
configuration. Next configurations are drawn independently of the past, so
the only memory in the chain is the holding.

Expected log-return and its variance are evaluated as explicit sums over
chain states, next configurations, and the atoms of the held asset's
conditional price distributions before and after the transition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from anchoring.price_models import DiscreteDistribution, TwoPointModel, two_point_distribution

STATIONARY_TOL = 1e-13
MAX_ITERATIONS = 1_000_000


class EmptySide(ValueError):
    """No atom lies strictly on the requested side of the anchor."""


class SolverFailure(RuntimeError):
    pass


class NegativeVariance(ArithmeticError):
    pass


class Side(enum.Enum):
    ABOVE = "above"
    BELOW = "below"


class Configuration(enum.Enum):
    """Joint above/below pattern of (asset 1, asset 2) against their anchors."""

    X1 = (Side.ABOVE, Side.BELOW)
    X2 = (Side.ABOVE, Side.ABOVE)
    X3 = (Side.BELOW, Side.BELOW)
    X4 = (Side.BELOW, Side.ABOVE)

    def side(self, asset: int) -> Side:
        return self.value[asset - 1]

    @property
    def label(self) -> str:
        return self.name.lower()


CONFIGURATIONS = tuple(Configuration)
ASSETS = (1, 2)


def policy(config: Configuration, held: int | None) -> int | None:
    """Asset held after reacting to ``config``.

    Buy the asset that is below its anchor while the other is above it;
    otherwise keep whatever is held.
    """
    if config is Configuration.X1:
        return 2
    if config is Configuration.X4:
        return 1
    return held


@dataclass(frozen=True)
class ConditionalDistribution:
    """A price distribution truncated to one side of its anchor and renormalized."""

    base: DiscreteDistribution
    anchor: float
    side: Side

    def __post_init__(self) -> None:
        if self.side is Side.ABOVE:
            ok = all(p > self.anchor for p in self.base.prices)
        else:
            ok = all(p < self.anchor for p in self.base.prices)
        if not ok:
            raise ValueError(f"support is not strictly {self.side.value} {self.anchor}")

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return self.base.atoms


@dataclass(frozen=True)
class JointChain:
    """Transition matrix and stationary vector over (configuration, holding)."""

    states: tuple[tuple[Configuration, int], ...]
    transition: np.ndarray
    stationary: np.ndarray
    config_probs: dict[Configuration, float]

    def index(self, config: Configuration, held: int) -> int:
        return self.states.index((config, held))

    def config_marginal(self, config: Configuration) -> float:
        return float(sum(self.stationary[self.index(config, s)] for s in ASSETS))

    def holding_given(self, config: Configuration, held: int) -> float:
        """Stationary probability of holding ``held`` while in ``config``."""
        marginal = self.config_marginal(config)
        if marginal == 0.0:
            return 0.0
        return float(self.stationary[self.index(config, held)]) / marginal

    def config_transition(self, src: Configuration, dst: Configuration) -> float:
        i = self.index(src, ASSETS[0])
        return float(sum(self.transition[i, self.index(dst, s)] for s in ASSETS))

    def fixed_point_residual(self) -> float:
        return float(np.max(np.abs(self.stationary @ self.transition - self.stationary)))


@dataclass(frozen=True)
class AnalyticResult:
    mean_return_per_step: float
    variance_per_step: float

    @property
    def std_per_step(self) -> float:
        return math.sqrt(self.variance_per_step)


def _check_no_ties(dist: DiscreteDistribution, anchor: float) -> None:
    if anchor in dist.prices:
        raise ValueError(f"atom exactly at anchor {anchor}; above/below is undefined")


def conditional_distribution(
    dist: DiscreteDistribution, anchor: float, side: Side | str
) -> ConditionalDistribution:
    side = Side(side)
    if side is Side.ABOVE:
        kept = [(p, q) for p, q in dist.atoms if p > anchor]
    else:
        kept = [(p, q) for p, q in dist.atoms if p < anchor]
    mass = math.fsum(q for _, q in kept)
    if not kept or mass == 0.0:
        raise EmptySide(f"no probability mass strictly {side.value} anchor {anchor}")
    base = DiscreteDistribution(tuple(p for p, _ in kept), tuple(q / mass for _, q in kept))
    return ConditionalDistribution(base, anchor, side)


def configuration_probability(
    dist1: DiscreteDistribution,
    dist2: DiscreteDistribution,
    anchor1: float,
    anchor2: float,
    config: Configuration,
) -> float:
    """Probability of ``config`` for independently drawn prices."""
    prob = 1.0
    for asset, dist, anchor in ((1, dist1, anchor1), (2, dist2, anchor2)):
        # raises EmptySide when either side is unpopulated
        conditional_distribution(dist, anchor, Side.ABOVE)
        conditional_distribution(dist, anchor, Side.BELOW)
        if config.side(asset) is Side.ABOVE:
            prob *= dist.mass_above(anchor)
        else:
            prob *= dist.mass_below(anchor)
    return prob


def stationary_vector(
    transition: np.ndarray, tol: float = STATIONARY_TOL, maxiter: int = MAX_ITERATIONS
) -> np.ndarray:
    """Left fixed point of a row-stochastic matrix by power iteration.

    Starts from the uniform vector and stops when successive iterates differ
    by less than ``tol`` in max norm.
    """
    n = transition.shape[0]
    pi = np.full(n, 1.0 / n)
    for _ in range(maxiter):
        nxt = pi @ transition
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt
        pi = nxt
    raise SolverFailure(f"power iteration did not converge to {tol} in {maxiter} steps")


def build_joint_chain(
    dist1: DiscreteDistribution,
    dist2: DiscreteDistribution,
    anchor1: float,
    anchor2: float,
) -> JointChain:
    _check_no_ties(dist1, anchor1)
    _check_no_ties(dist2, anchor2)
    probs = {
        c: configuration_probability(dist1, dist2, anchor1, anchor2, c) for c in CONFIGURATIONS
    }
    states = tuple((c, s) for c in CONFIGURATIONS for s in ASSETS)
    index = {state: k for k, state in enumerate(states)}
    transition = np.zeros((len(states), len(states)))
    for (src, held), i in index.items():
        for dst in CONFIGURATIONS:
            transition[i, index[(dst, policy(dst, held))]] += probs[dst]
    if np.max(np.abs(transition.sum(axis=1) - 1.0)) > 1e-12:
        raise SolverFailure("transition rows do not sum to one")
    stationary = stationary_vector(transition)
    return JointChain(states, transition, stationary, probs)


def _conditionals(dist1, dist2, anchor1, anchor2):
    dists = {1: (dist1, anchor1), 2: (dist2, anchor2)}
    return {
        (asset, side): conditional_distribution(dist, anchor, side)
        for asset, (dist, anchor) in dists.items()
        for side in Side
    }


def _terms(chain: JointChain, conditionals) -> Iterator[tuple[float, float, float]]:
    """Yield (weight, price_before, price_after) over every path of one step.

    The weight is P(x_i) P(x_i -> x_j) P(s | x_i) times the conditional atom
    probabilities of the held asset ``s`` in ``x_i`` (before) and ``x_j``
    (after).
    """
    for src in CONFIGURATIONS:
        p_src = chain.config_marginal(src)
        if p_src == 0.0:
            continue
        for dst in CONFIGURATIONS:
            p_move = chain.config_transition(src, dst)
            for held in ASSETS:
                p_hold = chain.holding_given(src, held)
                w = p_src * p_move * p_hold
                if w == 0.0:
                    continue
                before = conditionals[(held, src.side(held))]
                after = conditionals[(held, dst.side(held))]
                for a, qa in before.atoms:
                    for b, qb in after.atoms:
                        yield w * qa * qb, a, b


def expected_return(
    chain: JointChain,
    dist1: DiscreteDistribution,
    dist2: DiscreteDistribution,
    anchor1: float,
    anchor2: float,
) -> float:
    """Steady-state mean log-return per step."""
    conds = _conditionals(dist1, dist2, anchor1, anchor2)
    return math.fsum(w * math.log(b / a) for w, a, b in _terms(chain, conds))


def return_variance(
    chain: JointChain,
    dist1: DiscreteDistribution,
    dist2: DiscreteDistribution,
    anchor1: float,
    anchor2: float,
) -> float:
    """Steady-state variance of the per-step log-return."""
    conds = _conditionals(dist1, dist2, anchor1, anchor2)
    second = math.fsum(w * math.log(b / a) ** 2 for w, a, b in _terms(chain, conds))
    mean = expected_return(chain, dist1, dist2, anchor1, anchor2)
    var = second - mean * mean
    if var < -1e-12:
        raise NegativeVariance(f"variance {var!r} is negative")
    return max(var, 0.0)


def analyze(
    dist1: DiscreteDistribution | TwoPointModel,
    dist2: DiscreteDistribution | TwoPointModel,
    anchor1: float | None = None,
    anchor2: float | None = None,
) -> AnalyticResult:
    """Mean and variance for two distributions, or two two-point models.

    Two-point models carry their own anchors.
    """
    if isinstance(dist1, TwoPointModel):
        anchor1 = dist1.anchor if anchor1 is None else anchor1
        dist1 = two_point_distribution(dist1)
    if isinstance(dist2, TwoPointModel):
        anchor2 = dist2.anchor if anchor2 is None else anchor2
        dist2 = two_point_distribution(dist2)
    if anchor1 is None or anchor2 is None:
        raise ValueError("anchors are required for plain distributions")
    chain = build_joint_chain(dist1, dist2, anchor1, anchor2)
    return AnalyticResult(
        expected_return(chain, dist1, dist2, anchor1, anchor2),
        return_variance(chain, dist1, dist2, anchor1, anchor2),
    )


def closed_form_binomial_return(m1: TwoPointModel, m2: TwoPointModel) -> float:
    return (m1.log_ratio + m2.log_ratio) / 8.0


def closed_form_binomial_variance_as_printed(m1: TwoPointModel, m2: TwoPointModel) -> float:
    """Published two-point variance formula, evaluated literally.

    Its last term is ``-1/32 * ln(r2 * r1)``, linear in the logs while the
    other terms are quadratic. Kept verbatim; compare against
    :func:`return_variance` before relying on it.
    """
    l1, l2 = m1.log_ratio, m2.log_ratio
    return 15.0 / 64.0 * l1**2 + 15.0 / 64.0 * l2**2 - math.log(
        (m2.high / m2.low) * (m1.high / m1.low)
    ) / 32.0


def binomial_variance_log_product(m1: TwoPointModel, m2: TwoPointModel) -> float:
    """Two-point variance with the cross term read as ``ln(r1) * ln(r2)``.

    Reported next to the literal formula in variance reconciliations; it is
    not used by the engine.
    """
    l1, l2 = m1.log_ratio, m2.log_ratio
    return 15.0 / 64.0 * (l1**2 + l2**2) - l1 * l2 / 32.0
