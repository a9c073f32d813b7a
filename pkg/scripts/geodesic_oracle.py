"""Quasihyperbolic solver against the closed-form hyperbolic distance in the half-space.

In H^n the quasihyperbolic and hyperbolic metrics coincide, so the solver
distance should match arccosh(1 + |x-y|^2 / (2 x_n y_n)) from above.

    python scripts/geodesic_oracle.py --pairs 20 --dim 2 --seed 0
"""
import argparse
import time

import numpy as np

from qhyp import geometry as geo
from qhyp import metrics as met


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=20)
    ap.add_argument("--dim", type=int, default=2, choices=[2, 3])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    dom = geo.HalfSpace(args.dim)
    X = geo.sample_interior(dom, args.pairs, args.seed)
    Y = geo.sample_interior(dom, args.pairs, args.seed + 1)
    print(f"{'exact':>12} {'solver':>12} {'rel err':>10} {'iters':>6}")
    t0 = time.perf_counter()
    worst = 0.0
    for x, y in zip(X, Y):
        res = met.quasihyp_dist(dom, x, y, met.SolverOptions(seed=args.seed))
        exact = met.hyp_dist_halfspace(x, y)
        err = (res.distance - exact) / exact
        worst = max(worst, abs(err))
        print(f"{exact:12.6f} {res.distance:12.6f} {err:10.2e} {res.iterations:6d}")
    print(f"worst relative error {worst:.3g} in {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
