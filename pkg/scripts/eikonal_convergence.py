"""Fast-marching error under grid refinement on the flat strip, plus the wavy-boundary error."""

import argparse
import math

import numpy as np

from boundary_comparison import distance_field as DF
from boundary_comparison import manifolds as M


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--h0", type=float, default=0.1)
    args = ap.parse_args(argv)

    flat = M.build_chart_surface("1", "0", "2", 2 * math.pi)
    tt = np.linspace(0.0, 2.0, 8001)
    exact = np.minimum(tt, 2 - tt)
    prev = None
    print(f"{'h':>8s} {'max err':>12s} {'ratio':>7s}")
    for i in range(args.levels):
        h = args.h0 / 2**i
        f = DF.solve_eikonal(flat, DF.make_grid(flat, nt=int(round(2 / h)), nx=16))
        err = float(np.max(np.abs(f.interpolate(tt, 0.0) - exact)))
        ratio = f"{prev / err:7.3f}" if prev else "      -"
        print(f"{h:8.4f} {err:12.4e} {ratio}")
        prev = err

    # wavy lower boundary: nearest point on the graph by dense sampling
    amp = 0.2
    wavy = M.build_chart_surface("1", f"{amp}*sin(x)", "2", 2 * math.pi)
    f = DF.solve_eikonal(wavy, DF.make_grid(wavy, h=0.0125))
    T, X = np.meshgrid(f.grid.t_samples, f.grid.x_samples, indexing="ij")
    m = f.grid.inside_mask
    xs = np.linspace(-math.pi, 3 * math.pi, 20000, endpoint=False)
    bs = amp * np.sin(xs)
    t, x = T[m], np.mod(X[m], 2 * math.pi)
    near = np.empty(len(t))
    for i in range(0, len(t), 512):
        sl = slice(i, i + 512)
        near[sl] = np.sqrt(((t[sl, None] - bs) ** 2 + (x[sl, None] - xs) ** 2).min(axis=1))
    err = float(np.max(np.abs(f.rho[m] - np.minimum(near, 2 - t))))
    print(f"wavy amplitude {amp}: max err {err:.3e} = {err / f.h:.2f} h")


if __name__ == "__main__":
    main()
