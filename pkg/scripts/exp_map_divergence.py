"""Pairwise k-ratios of exp((z+1)/(z-1)) along pairs approaching z = 1.

The pair for parameter a maps to exp(-a) and exp(-2a); the source distance
stays bounded while the image distance grows linearly in a.

    python scripts/exp_map_divergence.py --scales 5 15 40 90 200 340
"""
import argparse

from qhyp import verify as vf


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scales", type=float, nargs="+", default=[15.0, 90.0, 340.0])
    args = ap.parse_args()
    rep = vf.exp_map_divergence(tuple(args.scales))
    print(f"{'a':>8} {'k_D':>10} {'k_fD':>12} {'ratio':>10}")
    for w in rep.witnesses:
        v = w["values"]
        print(f"{v['a']:8.1f} {v['k_G']:10.5f} {v['k_fG']:12.4f} {v['ratio']:10.2f}")
    print(f"verdict: {rep.verdict} (solver residual {rep.residuals['solver_residual']:.2g})")


if __name__ == "__main__":
    main()
