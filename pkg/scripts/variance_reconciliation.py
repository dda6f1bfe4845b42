"""Engine variance vs the published two-point formula vs Monte Carlo."""

import argparse

from anchoring import simulation
from anchoring.price_models import TwoPointModel


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--spread1", type=float, default=0.11)
    parser.add_argument("--spread2", type=float, default=0.11)
    parser.add_argument("--memory", type=int, default=5)
    parser.add_argument("--steps", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()
    rec = simulation.reconcile_variance(
        TwoPointModel(1.0, args.spread1), TwoPointModel(1.0, args.spread2),
        args.memory, args.steps, args.seed,
    )
    print(rec.report())


if __name__ == "__main__":
    main()
