"""Per-scale weak-uniform-boundedness sups for the planar registry maps.

For each scale s the pairs have d(x) within half a decade of s and
r_G(x, y) <= threshold; the table lists the largest r_{fG}(fx, fy) seen.

    python scripts/wub_scales.py --map arg-map --threshold 2
"""
import argparse
import math

from qhyp import harmonic as hm
from qhyp import verify as vf


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--map", default="arg-map", choices=["arg-map", "reim-map", "log-map", "shear", "exp-map"])
    ap.add_argument("--threshold", type=float, default=0.5)
    ap.add_argument("--scales", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3])
    ap.add_argument("--pairs", type=int, default=6000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    f = hm.make_map(args.map)
    extra = None
    if args.map == "arg-map" and args.threshold >= 2:
        extra = vf.arg_map_witness_pairs(args.scales)
    rep = vf.wub_check(f, count=args.pairs, seed=args.seed, threshold=args.threshold,
                       scales=args.scales, extra_pairs=extra)
    print(f"map {args.map}, threshold {args.threshold:g}, {rep.n_pairs} pairs")
    rate = args.map == "arg-map"
    print(f"{'scale':>8} {'pairs':>6} {'sup r_fG':>12}" + (f" {'pi/(sqrt2 s)':>14}" if rate else ""))
    for row in rep.per_scale:
        line = f"{row['scale']:8.0e} {row['count']:6d} {row['sup']:12.4f}"
        if rate:
            line += f" {math.pi / (math.sqrt(2) * row['scale']):14.4f}"
        print(line)
    print(f"verdict: {rep.verdict}")


if __name__ == "__main__":
    main()
