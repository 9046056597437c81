"""Discrete chain bound against the true tube-volume ratio as the chain is refined."""

import argparse

from boundary_comparison import kernels as K
from boundary_comparison import manifolds as M
from boundary_comparison import tube_geometry as TG
from boundary_comparison import verifiers as V


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=float, default=0.25)
    ap.add_argument("--R", type=float, default=0.75)
    ap.add_argument("--kmin", type=int, default=4)
    ap.add_argument("--kmax", type=int, default=12)
    args = ap.parse_args(argv)

    tube = M.build_warped_tube(M.Fiber.circle(2 * 3.141592653589793), "1+t", "Cylinder", 2.0)
    cm = M.certify_bounds(tube, K.ComparisonParams(2, 0, -1))
    truth = TG.tube_volume(cm, args.R) / TG.tube_volume(cm, args.r)
    model = K.model_ratio(cm.params, args.r, args.R)
    print(f"annulus, r={args.r}, R={args.R}: true ratio {truth:.10f}, model ratio {model:.10f}")
    print(f"{'N':>6s} {'bound':>16s} {'bound - truth':>14s} {'rel gap to model':>17s}")
    for k in range(args.kmin, args.kmax + 1):
        N = 2**k
        b = V.chain_bound(cm.params, args.r, args.R, N)
        print(f"{N:6d} {b:16.10f} {b - truth:14.3e} {(b - model) / model:17.3e}")


if __name__ == "__main__":
    main()
