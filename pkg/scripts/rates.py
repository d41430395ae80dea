"""Median oracle ISE against n for the second-order and sinc kernels under Laplace error.

    python scripts/rates.py --replicates 40 --threads 4
"""
import argparse

from deconvkit.analysis import RateExperiment, TrueDensity, rate_experiment
from deconvkit.kernels import KernelSpec
from deconvkit.simulation import preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000, 4000, 8000])
    ap.add_argument("--replicates", type=int, default=40)
    ap.add_argument("--seed", type=int, default=2009)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--kernels", nargs="+", default=["fp:r=2,s=2", "sinc"])
    args = ap.parse_args()
    error = preset("fig31").error
    for name in args.kernels:
        exp = RateExperiment(TrueDensity.gaussian(), error, KernelSpec.parse(name), args.sizes,
                             args.replicates, args.seed, threads=args.threads)
        res = rate_experiment(exp)
        table = res.table()
        print(f"{name}: slope {res.slope:.3f}  95% ci [{res.ci[0]:.3f}, {res.ci[1]:.3f}]")
        for n, m, hh in zip(table["n"], table["median_ise"], table["median_h"]):
            print(f"  n={int(n):6d}  median ISE {m:.3e}  median h {hh:.3f}")


if __name__ == "__main__":
    main()
