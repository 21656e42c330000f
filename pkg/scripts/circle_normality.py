"""Distance of W to the standard normal along the circle family, next to the bounds.

    python3 scripts/circle_normality.py --sizes 64 256 1024 4096 --samples 20000
"""

import argparse
import csv
import sys

from neighborhood_attack.chain import ChainConfig, sample_observables
from neighborhood_attack.graph import build_family, build_neighborhood_index
from neighborhood_attack.normdist import kolmogorov_to_normal, wasserstein1_to_normal
from neighborhood_attack.stein import stein_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024, 4096])
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["N", "var_y_over_n", "kolmogorov", "wasserstein1",
                     "rollin_delta", "theorem_delta_rstar"])
    for n in args.sizes:
        g = build_family("circle", n=n)
        idx = build_neighborhood_index(g)
        cfg = ChainConfig(seed=args.seed, samples=args.samples).resolved(n)
        y = sample_observables(g, idx, cfg)["y"].astype(float)
        var = y.var(ddof=1)
        w = y / var ** 0.5
        rep = stein_report(g.r, n, idx.r_star)
        writer.writerow([n, f"{var / n:.4f}", f"{kolmogorov_to_normal(w):.5f}",
                         f"{wasserstein1_to_normal(w):.5f}", f"{rep.rollin_delta:.4g}",
                         f"{rep.theorem_delta_rstar:.4g}"])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
