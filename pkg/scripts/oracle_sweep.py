"""Gaussian pipeline vs brute-force Fock oracle over noise strength.

For each sigma the same recorded draws are replayed through both pipelines
and the worst covariance and herald-probability deviations are reported.
"""

import argparse

import numpy as np

from uasim.circuit import NoiseModel, random_clements
from uasim.fock import oracle_run
from uasim.protocol import UAConfig, run_single_sample, sample_draws


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--modes", type=int, default=2)
    parser.add_argument("--replicas", type=int, default=2)
    parser.add_argument("--squeezing", type=float, nargs="+", default=[0.5, 0.7])
    parser.add_argument("--sigmas", type=float, nargs="+", default=[0.0, 0.01, 0.05, 0.1, 0.3])
    parser.add_argument("--draws", type=int, default=5)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    r = tuple(args.squeezing) if len(args.squeezing) == args.modes else (args.squeezing[0],) * args.modes
    config = UAConfig(args.modes, args.replicas, r)
    target = random_clements(args.modes, np.random.default_rng(args.seed))
    k = target.noisy_param_count
    print(f"{'sigma':>6} {'max|dV|':>10} {'max|dP|':>10} {'cutoff':>6}")
    for sigma in args.sigmas:
        dv = dp = 0.0
        cut = 0
        for s in range(args.draws):
            draws = sample_draws(args.seed, s, args.replicas, k, sigma)
            g = run_single_sample(config, target, NoiseModel(sigma), draws=draws)
            f = oracle_run(config, target, draws, cutoff=None)
            dv = max(dv, float(np.max(np.abs(f.covariance - g.covariance))))
            dp = max(dp, abs(f.probability - g.exact_p))
            cut = max(cut, f.cutoff)
        print(f"{sigma:6.3f} {dv:10.2e} {dp:10.2e} {cut:6d}")


if __name__ == "__main__":
    main()
