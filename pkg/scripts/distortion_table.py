"""Sampled dilatation and Jacobian-equivalence ratios for registry maps.

    python scripts/distortion_table.py --maps shear log-map h3-map --samples 2000
"""
import argparse

from qhyp import distortion as dist
from qhyp import harmonic as hm


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--maps", nargs="+", default=["shear", "log-map", "exp-map", "h3-map", "poisson"])
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'map':>10} {'K_O':>12} {'K_I':>12} {'K':>12}")
    for name in args.maps:
        f = hm.make_map(name)
        try:
            est = dist.dilatation_estimate(f, count=args.samples, seed=args.seed)
        except dist.NonpositiveJacobian as exc:
            print(f"{name:>10} nonpositive Jacobian: {exc}")
            continue
        print(f"{name:>10} {est.K_O:12.6g} {est.K_I:12.6g} {est.K:12.6g}")
    for s in (2, 8, 32, 128):
        K = dist.dilatation_estimate(hm.make_map("log-map", s=s), count=args.samples, seed=args.seed).K
        print(f"log-map on V_{s:<4} K = {K:.6g}")


if __name__ == "__main__":
    main()
