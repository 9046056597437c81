"""Rayleigh quotient of the cusp ground state on truncated hyperbolic collars.

The quadrature value is printed next to 1/4 + 3/(2T) + 3/T^2, the exact
quotient of t*exp(t/2) against the weight exp(-t) on [0, T] (Neumann end),
and the T needed to bring it within a given distance of the limit 1/4.
"""

import argparse
import math

from boundary_comparison import kernels as K
from boundary_comparison import manifolds as M
from boundary_comparison import tube_geometry as TG


def closed_form(T):
    return 0.25 + 1.5 / T + 3.0 / T**2


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=float, nargs="+", default=[10, 20, 40, 80])
    ap.add_argument("--window", type=float, default=1e-3)
    args = ap.parse_args(argv)
    p = K.ComparisonParams(2, -1, 1)
    prof = TG.RadialProfile.from_expr("t*exp(t/2)")
    print(f"{'T':>8s} {'quadrature':>12s} {'closed form':>12s}")
    for T in args.T:
        cm = M.certify_bounds(M.build_warped_tube(M.Fiber.circle(2 * math.pi), "exp(-t)", "HalfInfinite", t_max=T), p)
        print(f"{T:8.1f} {TG.rayleigh_quotient(cm, prof, 2.0):12.8f} {closed_form(T):12.8f}")
    # 1.5/T + 3/T^2 = w  ->  T = (1.5 + sqrt(2.25 + 12 w)) / (2 w)
    w = args.window
    print(f"rigid bound {K.eigen_lower_bound(p, math.inf, 2.0, 'rigid')}; "
          f"quotient <= 1/4 + {w:g} needs T >= {(1.5 + math.sqrt(2.25 + 12 * w)) / (2 * w):.1f}")


if __name__ == "__main__":
    main()
