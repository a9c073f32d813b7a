"""Second complex dilatation of the log-map along the line y = 1/2.

|nu(z)| = |(1 - z)/(1 + z)| tends to 1 as x grows; this prints the profile
and locates where it crosses a given threshold.

    python scripts/log_map_nu.py --threshold 0.99
"""
import argparse

import numpy as np
from scipy.optimize import brentq

from qhyp import harmonic as hm


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threshold", type=float, default=0.99)
    args = ap.parse_args()
    f = hm.make_map("log-map")

    def nu(x):
        return float(abs(f.second_dilatation(np.array([x, 0.5]))))

    for x in (2, 10, 50, 100, 150, 199, 200, 1e3, 1e4, 1e6):
        print(f"x = {x:>9g}   |nu| = {nu(x):.8f}")
    cross = brentq(lambda x: nu(x) - args.threshold, 1.0 + 1e-9, 1e9, xtol=1e-12)
    print(f"|nu(x + 0.5i)| >= {args.threshold} exactly when x >= {cross:.6f}")


if __name__ == "__main__":
    main()
