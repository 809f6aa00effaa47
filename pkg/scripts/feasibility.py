"""Named Bernoulli coins: diverging versus bounded min-entropy.

The harmonic coin has H_min(X^m) = sum 1/i, which grows like ln m, so every
threshold is eventually met.  The quadratic coin's all-ones prefix keeps
probability above 2^-U > 0.319 forever, so thresholds below that are never met.
"""

import argparse
import math

from exactrng.analysis import quadratic_limit_upper, validity_check
from exactrng.exactnum import DyadicExp
from exactrng.process import IID, NamedBernoulli
from exactrng.sim import SimConfig, run_trials
from fractions import Fraction


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--m-cap", type=int, default=400)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args(argv)

    target = IID((Fraction(2, 3), Fraction(1, 3)))
    harm, quad = NamedBernoulli("harmonic"), NamedBernoulli("quadratic")
    print("lambda_bits,harmonic_m_star,ln_bound_m")
    for lam in (1, 2, 4, 6, 8):
        rep = validity_check(harm, target, 1, 0, 0, threshold=Fraction(1, 2**lam))
        # sum_{i<=m} 1/i >= ln(m+1), so m = e^lam - 1 always suffices
        print(f"{lam},{rep.m_star},{math.ceil(math.exp(lam) - 1)}")
    U = quadratic_limit_upper()
    print(f"\nquadratic: U = {U} = {float(U):.6f}, pi^2/6 = {math.pi**2 / 6:.6f}, 2^-U = {float(DyadicExp(U)):.6f}")
    for k in (1, 2, 3, 8):
        rep = validity_check(quad, target, 1, 0, 0, threshold=Fraction(1, 2**k))
        print(f"threshold 2^-{k}: passed={rep.passed} {rep.detail}")
    for coin in (harm, quad):
        r = run_trials(coin, target, SimConfig(args.seed, args.trials, 1, m_cap=args.m_cap))
        print(f"{coin.family}: truncated at m_cap={args.m_cap}: {r.truncated_trials / r.trials:.3f}  mean_T(completed)={r.mean_T:.3f}")


if __name__ == "__main__":
    main()
