"""Acceptance gate: one recorded pass/fail line per criterion, tolerances as pinned."""

import math
import time

import numpy as np

from boundary_comparison import cli
from boundary_comparison import distance_field as DF
from boundary_comparison import kernels as K
from boundary_comparison import manifolds as M
from boundary_comparison import tube_geometry as TG
from boundary_comparison import verifiers as V
from boundary_comparison.kernels import ComparisonParams as P

TWO_PI = 2 * math.pi
CIRCLE = M.Fiber.circle(TWO_PI)

# bound-ordering grid for criterion 9; D values at or past the cut radius are skipped
ORDER_N = (2, 3, 4)
ORDER_KAPPA = (-1.0, -0.25, 0.0, 0.5, 1.0)
ORDER_LAM = (-1.0, -0.5, 0.0, 0.5, 1.0)
ORDER_D = (0.25, 0.5, 1.0, 2.0)


def _collar(T):
    return M.certify_bounds(M.build_warped_tube(CIRCLE, "exp(-t)", "HalfInfinite", t_max=T), P(2, -1, 1))


def _annulus_tube():
    return M.build_warped_tube(CIRCLE, "1+t", "Cylinder", 2.0)


def test_c01_kernel_closed_forms(criterion):
    start = time.perf_counter()
    p = P(2, -1, 1)
    e1 = abs(K.dirichlet_constant(p, 1.0) - (1 - math.exp(-1)))
    e2 = max(abs(K.dirichlet_constant(p, D, "scan") - K.dirichlet_constant(p, D)) for D in (0.5, 1.0, 2.0))
    e3 = abs(K.kasue_bar_mu(p, 1.0) - 0.25 * (1 - math.exp(-0.5)) ** -2)
    elapsed = time.perf_counter() - start
    ok = e1 <= 1e-10 and e2 <= 1e-7 and e3 <= 1e-7 and elapsed < 1.0
    criterion(1, ok, f"closed form err {e1:.1e} (<=1e-10), scan err {e2:.1e} (<=1e-7), "
                     f"kasue err {e3:.1e} (<=1e-7), {elapsed:.2f}s (<1s)")
    assert ok


def test_c02_collar_equality(criterion):
    start = time.perf_counter()
    cm = _collar(40.0)
    assert cm.resolution.boundary_samples >= 512
    reports = [
        V.check_log_jacobian(cm),
        V.check_relative_jacobian(cm),
        V.check_volume_comparison(cm),
        V.check_heintze_karcher(cm),
    ] + [V.check_measure_contraction(cm, t) for t in (0.25, 0.5, 0.75)]
    worst = max(abs(r.worst_margin) for r in reports)
    verdict = V.detect_rigidity(cm)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and verdict.kind == "volume_growth_splitting" and elapsed < 30
    criterion(2, ok, f"max |margin| {worst:.1e} (<=1e-6), verdict {verdict.kind}, {elapsed:.1f}s (<30s)")
    assert ok


def test_c03_annulus_battery(criterion, tmp_path):
    start = time.perf_counter()
    tube = _annulus_tube()
    cm = M.certify_bounds(tube, P(2, 0, -1))
    cert = max(abs(m) for m in cm.margins)
    vol = TG.tube_volume(cm, 0.5)
    vol_err = abs(vol - 4 * math.pi)
    chart = M.certify_bounds(M.chart_realization(tube), P(2, 0, -1))
    field = chart.bundle.field
    grid_vol = DF.region_volume(chart.manifold, field.grid, lambda t, x: field.interpolate(t, x) <= 0.5)
    grid_rel = abs(grid_vol - 4 * math.pi) / (4 * math.pi)
    code = cli.main(["--scenario", "euclidean_annulus", "--out", str(tmp_path), "--format", "csv"])
    mu = TG.dirichlet_eigen(cm)
    fine = TG.dirichlet_eigen(cm, gridpoints=4 * 2000)
    mu_rel = abs(mu - fine) / fine
    elapsed = time.perf_counter() - start
    ok = (cert <= 1e-9 and vol_err <= 1e-8 and grid_rel <= 0.01 and code == 0
          and mu >= 1 / 9 and mu_rel <= 5e-3 and elapsed < 60)
    criterion(3, ok, f"cert margins {cert:.1e}, coarea err {vol_err:.1e} (<=1e-8), grid rel {grid_rel:.2%} (<=1%), "
                     f"exit {code}, mu {mu:.6f} >= 1/9, finer-grid rel {mu_rel:.1e} (<=0.5%), {elapsed:.1f}s (<60s)")
    assert ok


def test_c04_hemisphere(criterion):
    start = time.perf_counter()
    tube = M.build_warped_tube(M.Fiber.round_sphere(1, 1.0), "cos(t)", "Cap", math.pi / 2)
    cm = M.certify_bounds(tube, P(2, 1, 0))
    D, _ = TG.inscribed_radius(cm)
    C = K.cut_radius(cm.params)
    verdict = V.detect_rigidity(cm)
    mu = TG.dirichlet_eigen(cm)
    elapsed = time.perf_counter() - start
    ok = (abs(D - math.pi / 2) <= 1e-6 and abs(C - math.pi / 2) <= 1e-6 and verdict.kind == "ball_space_form"
          and abs(mu - 2) <= 0.02 and elapsed < 30)
    criterion(4, ok, f"D {D:.9f}, cut radius {C:.9f} (pi/2 within 1e-6), verdict {verdict.kind}, "
                     f"mu {mu:.6f} (2 within 1%), {elapsed:.1f}s (<30s)")
    assert ok


def test_c05_rigid_eigenvalue_collar(criterion):
    p = P(2, -1, 1)
    src = f"t*exp({(p.n - 1) * p.lam / 2!r}*t)"
    prof = TG.RadialProfile.from_expr(src)
    probe = np.linspace(0.0, 5.0, 11)
    assert np.allclose(prof.value(probe), K.phi_profile(p, probe), rtol=1e-14)
    quotients = {T: TG.rayleigh_quotient(_collar(T), prof, 2.0) for T in (10.0, 20.0, 40.0)}
    in_window = 0.25 <= quotients[40.0] <= 0.251
    decreasing = quotients[10.0] > quotients[20.0] > quotients[40.0] >= 0.25
    rigid = K.eigen_lower_bound(p, math.inf, 2.0, "rigid")
    ok = in_window and decreasing and rigid == 0.25
    q = ", ".join(f"T={T:g}: {v:.6f}" for T, v in quotients.items())
    criterion(5, ok, f"R_2 {q}; window [0.25, 0.251] at T=40 {'met' if in_window else 'NOT met'}, "
                     f"decreasing {decreasing}, rigid bound {rigid!r}")
    assert ok


def test_c06_measure_contraction_closed_form(criterion):
    cm = M.certify_bounds(M.build_warped_tube(CIRCLE, "1", "Cylinder", 2.0), P(2, 0, 0))
    band = TG.RadialBand(0.25, 0.75)
    pre = TG.extension_preimage_volume(cm, 0.5, band)
    rep = V.check_measure_contraction(cm, 0.5, band)
    ok = abs(pre - math.pi) <= 1e-8 and abs(rep.worst_margin) <= 1e-8
    criterion(6, ok, f"preimage err {abs(pre - math.pi):.1e} (<=1e-8), margin {rep.worst_margin:.1e} (|.|<=1e-8)")
    assert ok


def test_c07_discrete_chain(criterion):
    cm = M.certify_bounds(_annulus_tube(), P(2, 0, -1))
    r, R = 0.25, 0.75
    truth = TG.tube_volume(cm, R) / TG.tube_volume(cm, r)
    Ns = [2**k for k in range(4, 13)]
    bounds = np.array([V.chain_bound(cm.params, r, R, N) for N in Ns])
    model = K.model_ratio(cm.params, r, R)
    above = bool(np.all(bounds >= truth))
    nonincreasing = bool(np.all(np.diff(bounds) <= 0))
    gap = (bounds[-1] - model) / model
    ok = above and nonincreasing and gap <= 0.01
    criterion(7, ok, f"bound >= true ratio {truth:.6f} for all N: {above}, nonincreasing: {nonincreasing}, "
                     f"gap at N=4096 {gap:.2e} (<=1%)")
    assert ok


def _nearest_wavy(t, x, amplitude, samples=10_000, chunk=512):
    xs = np.linspace(-math.pi, 3 * math.pi, 2 * samples, endpoint=False)
    bs = amplitude * np.sin(xs)
    out = np.empty(len(t))
    xm = np.mod(x, TWO_PI)
    for i in range(0, len(t), chunk):
        sl = slice(i, i + chunk)
        d2 = (t[sl, None] - bs[None, :]) ** 2 + (xm[sl, None] - xs[None, :]) ** 2
        out[sl] = np.sqrt(d2.min(axis=1))
    return out


def test_c08_eikonal_convergence(criterion):
    flat = M.build_chart_surface("1", "0", "2", TWO_PI)
    tt = np.linspace(0.0, 2.0, 8001)
    errs = []
    for h in (0.1, 0.05, 0.025, 0.0125):
        f = DF.solve_eikonal(flat, DF.make_grid(flat, nt=int(round(2 / h)), nx=16))
        errs.append(float(np.max(np.abs(f.interpolate(tt, 0.0) - np.minimum(tt, 2 - tt)))))
    ratios = [errs[i] / errs[i + 1] for i in range(3)]
    amp = 0.2
    wavy = M.build_chart_surface("1", f"{amp}*sin(x)", "2", TWO_PI)
    f = DF.solve_eikonal(wavy, DF.make_grid(wavy, h=0.0125))
    T, X = np.meshgrid(f.grid.t_samples, f.grid.x_samples, indexing="ij")
    m = f.grid.inside_mask
    oracle = np.minimum(_nearest_wavy(T[m], X[m], amp), 2.0 - T[m])
    wavy_err = float(np.max(np.abs(f.rho[m] - oracle)))
    ok = all(1.6 <= q <= 2.4 for q in ratios) and wavy_err <= 3 * f.h
    criterion(8, ok, f"refinement ratios {', '.join(f'{q:.3f}' for q in ratios)} (in [1.6, 2.4]), "
                     f"wavy err {wavy_err:.2e} = {wavy_err / f.h:.2f}h (<=3h)")
    assert ok


def test_c09_bound_ordering(criterion):
    start = time.perf_counter()
    worst_seg = worst_kasue = math.inf
    count = 0
    for n in ORDER_N:
        for kappa in ORDER_KAPPA:
            for lam in ORDER_LAM:
                p = P(n, kappa, lam)
                C = K.cut_radius(p)
                for D in ORDER_D:
                    if D >= C:
                        continue
                    count += 1
                    worst_seg = min(worst_seg, K.segment_constant(p, D) * D + 1e-9 - K.dirichlet_constant(p, D))
                    worst_kasue = min(worst_kasue,
                                      K.kasue_bar_mu(p, D) - K.eigen_lower_bound(p, D, 2.0, "dirichlet") + 1e-9)
    elapsed = time.perf_counter() - start
    ok = worst_seg >= 0 and worst_kasue >= 0 and elapsed < 10
    criterion(9, ok, f"{count} grid points, min slack C1*D - C {worst_seg:.2e}, "
                     f"min slack kasue - dirichlet {worst_kasue:.2e}, {elapsed:.1f}s (<10s)")
    assert ok


def test_c10_negative_control(criterion, tmp_path):
    text = cli.bundled_scenarios()["euclidean_annulus"].read_text().replace('"lam": -1', '"lam": 0')
    declared = tmp_path / "declared.json"
    declared.write_text(text)
    code_cert = cli.main(["--scenario", str(declared), "--out", str(tmp_path)])
    bypass = tmp_path / "bypass.json"
    bypass.write_text(text.replace('"certify": true', '"certify": false'))
    code_bypass = cli.main(["--scenario", str(bypass), "--out", str(tmp_path), "--format", "csv"])
    fails = [line.split(",")[1] for line in (tmp_path / "euclidean_annulus.csv").read_text().splitlines()[1:]
             if line.endswith(",fail")]
    ok = code_cert == 2 and code_bypass == 1 and len(fails) >= 1
    criterion(10, ok, f"declared lam=0 exit {code_cert} (2), bypassed exit {code_bypass} (1), failing: {fails}")
    assert ok


def test_c11_gauss_identity(criterion):
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(100):
        w0 = float(rng.uniform(0.5, 2.0))
        d1, d2 = (float(v) for v in rng.uniform(-2.0, 2.0, size=2))
        radius = float(rng.uniform(0.3, 3.0))
        L = 0.1 * w0 / (1 + abs(d1) + abs(d2))
        tube = M.build_warped_tube(M.Fiber.round_sphere(2, radius), f"{w0!r} + {d1!r}*t + {0.5 * d2!r}*t^2",
                                   "Cylinder", L)
        lhs, rhs = M.gauss_boundary_ricci_sides(tube)
        worst = max(worst, abs(lhs - rhs))
    ok = worst <= 1e-9
    criterion(11, ok, f"100 random n=3 tubes, max |lhs - rhs| {worst:.1e} (<=1e-9)")
    assert ok
