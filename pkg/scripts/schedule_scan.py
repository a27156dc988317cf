#!/usr/bin/env python3
"""Scan the two built-in rate schedules over a parameter grid.

Prints theta, the schedule integral, the decay constant kappa (or its log
when it underflows), and the resulting step bound for a nominal smallest
stationary probability.
"""

import argparse
import math

from glauberlab import analysis


def row(label, theta, sched, mu_min, eps):
    lk = analysis.log_kappa(sched)
    tb = analysis.t_bound(sched, mu_min, eps)
    print(f"{label}: theta={theta:.3e} integral={sched.integral():.6e} "
          f"log_kappa={lk:.6e} t_bound={tb:.6e}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mu-min", type=float, default=1e-6)
    ap.add_argument("--eps", type=float, default=0.1)
    args = ap.parse_args()

    print("== random cluster schedules ==")
    for p_min in (0.2, 0.5, 0.8):
        for lam_max in (0.1, 0.5, 0.9):
            for n in (16, 1024):
                theta, sched = analysis.rc_schedule(p_min, lam_max, n)
                row(f"rc p={p_min} lam={lam_max} n={n}", theta, sched,
                    args.mu_min, args.eps)

    print("== bipartite hardcore schedules ==")
    for lam in (0.2, 1.0):
        for deg in (2, 4):
            for n in (32, 512):
                theta, sched = analysis.bhc_schedule(lam, deg, n, 0.1)
                row(f"bhc lam={lam} deg={deg} n={n}", theta, sched,
                    args.mu_min, args.eps)

    print("== critical activities ==")
    for d in range(3, 8):
        print(f"degree {d}: lambda_c = {analysis.lambda_c(d):.6f}")


if __name__ == "__main__":
    main()
