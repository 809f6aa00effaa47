"""E[T_n]/n against the limiting rate for a Markov coin and an i.i.d. target.

Exact values (frontier DP) for small n, Monte Carlo for larger n.  Prints CSV.
"""

import argparse
import sys

from exactrng.analysis import expected_stopping_time, stopping_profile
from exactrng.bounds import asymptotic_rates
from exactrng.markov import summarize
from exactrng.process import load_model
from exactrng.sim import SimConfig, run_trials


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--coin", default="configs/markov_h14.json")
    ap.add_argument("--target", default="configs/iid_13_23.json")
    ap.add_argument("--exact", default="2,4,6,8,10,12")
    ap.add_argument("--mc", default="16,32,64,128")
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    coin, target = load_model(args.coin), load_model(args.target)
    limit = asymptotic_rates(summarize(coin), summarize(target)).L_int_upper.value
    w = sys.stdout.write
    w("n,method,per_symbol,lower,upper,limit\n")
    for n in map(int, args.exact.split(",")):
        lo, hi = expected_stopping_time(stopping_profile(coin, target, n, 60 + 6 * n))
        w(f"{n},exact,{float(lo + hi) / 2 / n:.6f},{float(lo) / n:.6f},{float(hi) / n:.6f},{limit:.6f}\n")
    for n in map(int, args.mc.split(",")):
        r = run_trials(coin, target, SimConfig(args.seed, args.trials, n))
        sd = (sum(t * t * c for t, c in r.t_counts.items()) / r.completed - r.mean_T**2) ** 0.5
        half = 2 * sd / r.completed**0.5 / n
        mt = r.mean_T / n
        w(f"{n},mc,{mt:.6f},{mt - half:.6f},{mt + half:.6f},{limit:.6f}\n")


if __name__ == "__main__":
    main()
