"""Running mean of the realized return against the exact steady-state value.

Writes results/convergence.csv (t, running mean, exact mean, 3-sigma band).
"""

import argparse
from pathlib import Path

import numpy as np

from anchoring import analytic, simulation
from anchoring.backtest import write_table
from anchoring.price_models import TwoPointModel


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--anchor", type=float, default=1.0)
    parser.add_argument("--spread", type=float, default=0.11)
    parser.add_argument("--memory", type=int, default=5)
    parser.add_argument("--steps", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--every", type=int, default=100)
    parser.add_argument("--out", default="results/convergence.csv")
    args = parser.parse_args()

    model = TwoPointModel(args.anchor, args.spread)
    exact = analytic.analyze(model, model)
    sim = simulation.simulate(model, model, args.memory, args.steps, args.seed)
    running = sim.running_mean()
    t = np.arange(1, len(running) + 1)
    band = 3 * exact.std_per_step / np.sqrt(t)
    keep = slice(args.every - 1, None, args.every)
    rows = zip(t[keep], running[keep], np.full(len(t), exact.mean_return_per_step)[keep], band[keep])
    path = write_table(args.out, ("t", "running_mean", "exact_mean", "band_3sigma"), rows, vars(args))
    print(f"final running mean {running[-1]:.6f}, exact {exact.mean_return_per_step:.6f}")
    print(f"wrote {Path(path)}")


if __name__ == "__main__":
    main()
