"""Monte Carlo bias and variance of the deconvolution estimator at x = 0 against the
leading-order formulas and the exact finite-sample variance.

    python scripts/bias_variance.py --h 0.3 --n 1000 --replicates 500
"""
import argparse

import numpy as np
from scipy.integrate import trapezoid

from deconvkit.analysis import TrueDensity, density_of_w, theoretical_bias, theoretical_variance
from deconvkit.deconv_kernel import DeconvKernelPlan
from deconvkit.density import deconv_kde
from deconvkit.kernels import KernelSpec
from deconvkit.simulation import monte_carlo, preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.3)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--replicates", type=int, default=500)
    ap.add_argument("--seed", type=int, default=2009)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    truth = TrueDensity.gaussian()
    scn = preset("fig31", n=args.n, seed=args.seed)
    w = np.linspace(-12, 12, 24001)
    fw = density_of_w(truth, scn.error, w)
    for name in ("fp:r=2,s=2", "sinc"):
        kernel = KernelSpec.parse(name)
        plan = DeconvKernelPlan(kernel, scn.error, args.h)
        mc = monte_carlo(scn, args.replicates, lambda s: float(deconv_kde(s, plan, [0.0]).values[0]),
                         threads=args.threads)
        v = mc.values()
        kh = plan(-w / args.h) / args.h
        exact_var = (trapezoid(kh ** 2 * fw, w) - trapezoid(kh * fw, w) ** 2) / args.n
        asym_var = theoretical_variance(float(density_of_w(truth, scn.error, 0.0)), kernel, scn.error,
                                        args.h, args.n)
        line = (f"{name:11s} var mc={v.var(ddof=1):.3e} exact={exact_var:.3e} asymptotic={asym_var:.3e}"
                f"  bias mc={v.mean() - truth.pdf(0.0):+.4f} (se {mc.standard_error():.4f})")
        if not kernel.is_sinc:
            line += f" leading={theoretical_bias(truth, kernel, args.h, 0.0):+.4f}"
        print(line)


if __name__ == "__main__":
    main()
