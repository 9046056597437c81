"""Integral quantities over the normal bundle of the boundary.

Volumes are computed with the coarea decomposition
``vol B_r = sum_x dvol_h(x) int_0^min(r, tau(x)) theta(t, x) dt``. The
normal bundle of a certified manifold is a list of boundary sides, each
holding boundary samples with their ``dvol_h`` weights, cut times and the
Jacobian ``theta`` (closed form for warped tubes, tabulated from the
geodesic/Jacobi ODE for chart surfaces).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.sparse

from .distance_field import DistanceField, cut_times_from_samples, foot_point, make_grid, region_volume, solve_eikonal
from .expr import Expr, as_expr
from .manifolds import (
    CertifiedManifold,
    ChartSurface2D,
    Topology,
    WarpedTube,
    _first_zero,
    integrate_chart_rays,
    normal_ray_profile,
)
from .numerics import Tolerance, integrate, min_eigen_grid, min_eigen_sturm_liouville

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
QUAD_TOL = Tolerance(rel=1e-12, abs=1e-14, max_subdivisions=400)


# --- boundary sides ----------------------------------------------------------------

class WarpedSide:
    """One boundary component of a warped tube; all samples are congruent."""

    uniform = True

    def __init__(self, tube: WarpedTube, label: str, samples: int):
        self.tube = tube
        self.label = label
        w0, w1, _ = tube.side_warp(label, 0.0)
        self.w0 = float(w0)
        self.n1 = tube.n - 1
        self.xs = tube.fiber.period * np.arange(samples) / samples
        self.volume = self.w0**self.n1 * tube.fiber.volume
        self.weights = np.full(samples, self.volume / samples)
        self.H = np.full(samples, float(-w1 / w0))
        L = tube.length
        tau = {Topology.CYLINDER: 0.5 * L, Topology.CAP: L, Topology.HALF_INFINITE: L}[tube.topology]
        self.tau = np.full(samples, tau)
        t1 = L if tube.topology is Topology.CAP else math.inf
        self.tau1 = np.full(samples, t1)
        self.end = np.full(samples, L)
        self.tau_error = 0.0

    def theta(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        w, _, _ = self.tube.side_warp(self.label, u)
        return (np.maximum(w / self.w0, 0.0) ** self.n1)[None, ...]

    def dlog_theta(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        w, w1, _ = self.tube.side_warp(self.label, u)
        return (self.n1 * w1 / w)[None, ...]

    def theta_scalar(self, u: float) -> float:
        w = float(self.tube.side_warp(self.label, u)[0])
        return max(w / self.w0, 0.0) ** self.n1

    def integral(self, lo, hi, g=None):
        """Per-sample ``int_lo^hi theta(u) g(u) du`` (``g`` scalar callable)."""
        lo = np.broadcast_to(np.asarray(lo, dtype=float), self.xs.shape)
        hi = np.broadcast_to(np.asarray(hi, dtype=float), self.xs.shape)
        out = np.zeros(len(self.xs))
        cache = {}
        for k in range(len(self.xs)):
            key = (float(lo[k]), float(hi[k]))
            if key not in cache:
                a, b = key
                if b <= a:
                    cache[key] = 0.0
                elif g is None:
                    cache[key] = integrate(self.theta_scalar, a, b, QUAD_TOL)
                else:
                    cache[key] = integrate(lambda u: self.theta_scalar(u) * float(g(u)), a, b, QUAD_TOL)
            out[k] = cache[key]
        return out

    def point(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return self.tube.side_position(self.label, u)[None, :], np.broadcast_to(self.xs[:, None], (len(self.xs), len(u)))


class ChartSide:
    """One boundary graph of a chart surface with tabulated ray data."""

    uniform = False

    def __init__(self, surface: ChartSurface2D, label: str, samples: int, t_max: float, step: float):
        self.surface = surface
        self.label = label
        self.xs = surface.period * np.arange(samples) / samples
        self.weights = surface.arclength_weight(label, self.xs) * surface.period / samples
        self.volume = float(np.sum(self.weights))
        self.H = surface.geodesic_curvature(label, self.xs)
        self.step = step
        self.times, states, exit_time = integrate_chart_rays(surface, label, self.xs, t_max, step)
        self.pos = states[..., 0:2]
        self.vel = states[..., 2:4]
        self.y = states[..., 4]
        self.dy = states[..., 5]
        self.exit = exit_time
        self.end = np.minimum(exit_time, self.times[-1])
        self.tau1 = np.array([
            _first_zero(self.times[self.times <= e], self.y[k, self.times <= e], self.dy[k, self.times <= e])
            for k, e in enumerate(self.end)
        ])
        self.tau = None
        self.tau_error = None

    def _locate(self, q):
        q = np.asarray(q, dtype=float)
        if q.ndim == 1:
            q = np.broadcast_to(q[None, :], (len(self.xs), len(q)))
        k = np.clip(np.floor(q / self.step).astype(int), 0, len(self.times) - 2)
        u = (q - self.times[k]) / self.step
        return k, u

    def _hermite(self, vals, ders, q):
        k, u = self._locate(q)
        h = self.step
        y0 = np.take_along_axis(vals, k, axis=1)
        y1 = np.take_along_axis(vals, k + 1, axis=1)
        d0 = np.take_along_axis(ders, k, axis=1)
        d1 = np.take_along_axis(ders, k + 1, axis=1)
        u2, u3 = u * u, u * u * u
        return ((2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0
                + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * d1)

    def theta(self, u):
        return self._hermite(self.y, self.dy, np.atleast_1d(u))

    def dlog_theta(self, u):
        u = np.atleast_1d(u)
        k, w = self._locate(u)
        # y' is interpolated linearly between samples; y by Hermite
        d = (1 - w) * np.take_along_axis(self.dy, k, axis=1) + w * np.take_along_axis(self.dy, k + 1, axis=1)
        return d / self.theta(u)

    def point(self, u):
        u = np.atleast_1d(u)
        return (self._hermite(self.pos[..., 0], self.vel[..., 0], u),
                self._hermite(self.pos[..., 1], self.vel[..., 1], u))

    def integral(self, lo, hi, g=None, panels: int = 64):
        """Per-ray ``int_lo^hi theta g`` by composite Gauss-Legendre on the interpolant.

        ``g`` takes an array of arguments (rays x nodes).
        """
        lo = np.broadcast_to(np.asarray(lo, dtype=float), self.xs.shape)
        hi = np.broadcast_to(np.asarray(hi, dtype=float), self.xs.shape)
        width = np.maximum(hi - lo, 0.0)
        edges = np.arange(panels) / panels
        local = (edges[:, None] + 0.5 * (_GL_NODES[None, :] + 1.0) / panels).ravel()
        wts = np.tile(_GL_WEIGHTS, panels) * 0.5 / panels
        q = lo[:, None] + width[:, None] * local[None, :]
        vals = self.theta(q)
        if g is not None:
            vals = vals * g(q)
        return width * np.sum(vals * wts[None, :], axis=1)


@dataclass
class NormalBundle:
    sides: list
    boundary_volume: float
    inscribed_radius: float
    truncated: bool
    field: DistanceField | None
    grid_h: float
    tau_error: float


def build_normal_bundle(cm: CertifiedManifold) -> NormalBundle:
    res = cm.resolution
    m = cm.manifold
    if isinstance(m, WarpedTube):
        sides = [WarpedSide(m, lb, res.boundary_samples) for lb in m.side_labels()]
        D = max(float(s.tau.max()) for s in sides)
        return NormalBundle(sides, sum(s.volume for s in sides), D, m.truncated, None, 0.0, 0.0)
    grid = make_grid(m, res.nt, res.nx, res.grid_h)
    field = solve_eikonal(m, grid)
    xs = np.linspace(0.0, m.period, 1024, endpoint=False)
    gap = float(np.max(m.beta_high(0.0, xs) - m.beta_low(0.0, xs)))
    t_max = 0.5 * gap + 3.0 * res.cut_constant * field.h
    t_max = res.step * math.ceil(t_max / res.step)
    sides = []
    for lb in m.side_labels():
        s = ChartSide(m, lb, res.boundary_samples, t_max, res.step)
        s.tau = cut_times_from_samples(field, s.times, s.pos, s.exit, s.tau1, res.cut_constant)
        s.tau_error = res.cut_constant * field.h
        sides.append(s)
    D = max(float(s.tau.max()) for s in sides)
    return NormalBundle(sides, sum(s.volume for s in sides), D, False, field, field.h, res.cut_constant * field.h)


# --- volumes ------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialBand:
    inner: float
    outer: float

    def __post_init__(self):
        if not (0 <= self.inner < self.outer):
            raise ValueError(f"need 0 <= r < R, got ({self.inner}, {self.outer})")

    def scaled(self, t: float) -> "RadialBand":
        return RadialBand(t * self.inner, t * self.outer)


@dataclass(frozen=True)
class TubeVolumeTable:
    radii: np.ndarray
    volumes: np.ndarray
    method: str

    def __post_init__(self):
        if np.any(np.diff(self.radii) <= 0):
            raise ValueError("radii must be ascending")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "volume", "method"])
            for r, v in zip(self.radii, self.volumes):
                w.writerow([repr(float(r)), repr(float(v)), self.method])


def tube_volume(cm: CertifiedManifold, r: float) -> float:
    if r < 0:
        raise ValueError("r must be nonnegative")
    total = 0.0
    for s in cm.bundle.sides:
        total += float(np.sum(s.weights * s.integral(0.0, np.minimum(r, s.tau))))
    return total


def tube_volume_error(cm: CertifiedManifold, r: float) -> float:
    """Error budget for :func:`tube_volume`: quadrature plus cut-time resolution."""
    b = cm.bundle
    total = 0.0
    for s in b.sides:
        if s.tau_error:
            near = r > s.tau - s.tau_error
            th = np.abs(s.theta(np.minimum(r, s.tau)[:, None]))[:, 0] if not s.uniform else 0.0
            total += float(np.sum(np.where(near, s.weights * th * s.tau_error, 0.0)))
    vol = tube_volume(cm, r)
    ode = 1e-8 if cm.is_chart else 1e-11
    return total + ode * max(vol, 1e-300)


def volume_table(cm: CertifiedManifold, radii, method: str = "coarea") -> TubeVolumeTable:
    radii = np.asarray(radii, dtype=float)
    if method == "coarea":
        vols = np.array([tube_volume(cm, r) for r in radii])
    elif method == "grid":
        if not cm.is_chart:
            raise ValueError("grid volumes need a chart surface")
        f = cm.bundle.field
        vols = np.array([region_volume(cm.manifold, f.grid, lambda t, x, r=r: f.interpolate(t, x) <= r) for r in radii])
    else:
        raise ValueError(f"unknown method {method!r}")
    return TubeVolumeTable(radii, vols, method)


def annulus_volume(cm: CertifiedManifold, band: RadialBand) -> float:
    return tube_volume(cm, band.outer) - tube_volume(cm, band.inner)


def inscribed_radius(cm: CertifiedManifold) -> tuple[float, bool]:
    b = cm.bundle
    return b.inscribed_radius, b.truncated


def extension_preimage_volume(cm: CertifiedManifold, t: float, band: RadialBand) -> float:
    """Volume of the preimage of a radial band under the t-extension map.

    A point at distance ``s`` on the ray from ``x`` maps into the band iff
    ``r < s/t < min(R, tau(x))``.
    """
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    if band.inner >= cm.bundle.inscribed_radius:
        warnings.warn("band lies beyond the inscribed radius; preimage is empty", stacklevel=2)
        return 0.0
    total = 0.0
    for s in cm.bundle.sides:
        lo = t * band.inner
        hi = t * np.minimum(band.outer, s.tau)
        total += float(np.sum(s.weights * s.integral(lo, hi)))
    return total


def integrate_radial(cm: CertifiedManifold, g, upper=None) -> float:
    """``int_M g(rho) dvol`` by coarea up to the cut times (or ``upper``)."""
    total = 0.0
    for s in cm.bundle.sides:
        hi = s.tau if upper is None else np.minimum(upper, s.tau)
        total += float(np.sum(s.weights * s.integral(0.0, hi, g)))
    return total


# --- functions on the manifold --------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """A function of the distance to the boundary, ``psi = phi(rho)``.

    ``phi`` is an expression in the variable ``t`` standing for ``rho``.
    """

    phi: Expr

    @classmethod
    def from_expr(cls, source) -> "RadialProfile":
        e = as_expr(source)
        if "x" in e.variables:
            raise ValueError("a radial profile depends on rho (written t) only")
        return cls(e)

    def value(self, s):
        return self.phi(s, 0.0)

    def derivative(self, s):
        return self.phi.jet(s, 0.0).t


def _warped_grid(tube: WarpedTube, x_dependent: bool, panels: int = 256):
    L = tube.length
    edges = L * np.arange(panels) / panels
    t = (edges[:, None] + 0.5 * L / panels * (_GL_NODES[None, :] + 1.0)).ravel()
    wt = np.tile(_GL_WEIGHTS, panels) * 0.5 * L / panels
    if x_dependent:
        if tube.fiber.dim != 1:
            raise ValueError("x-dependent functions need a one-dimensional fiber")
        nx = 256
        x = tube.fiber.period * np.arange(nx) / nx
        wx = np.full(nx, tube.fiber.period / nx)
    else:
        x, wx = np.zeros(1), np.array([tube.fiber.volume])
    return t, wt, x, wx


def _chart_grid(surface: ChartSurface2D, panels: int = 128, nx: int = 512):
    s = (np.arange(panels)[:, None] / panels + 0.5 / panels * (_GL_NODES[None, :] + 1.0)).ravel()
    ws = np.tile(_GL_WEIGHTS, panels) * 0.5 / panels
    x = surface.period * np.arange(nx) / nx
    lo, hi = surface.beta_low(0.0, x), surface.beta_high(0.0, x)
    T = lo[None, :] + s[:, None] * (hi - lo)[None, :]
    X = np.broadcast_to(x[None, :], T.shape)
    W = ws[:, None] * (hi - lo)[None, :] * (surface.period / nx)
    return T, X, W


def integrate_expression(cm: CertifiedManifold, psi, kind: str, p: float = 1.0) -> float:
    """``int_M |psi|^p`` (``kind="value"``) or ``int_M |grad psi|^p`` (``kind="grad"``)."""
    psi = as_expr(psi)
    m = cm.manifold
    if isinstance(m, WarpedTube):
        t, wt, x, wx = _warped_grid(m, "x" in psi.variables)
        T, X = np.meshgrid(t, x, indexing="ij")
        j = psi.jet(T, X)
        w = m.warp_jet(T)[0]
        vol = np.maximum(w, 0.0) ** (m.n - 1)
        if kind == "value":
            f = np.abs(j.v) ** p
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                gx2 = np.where(j.x == 0.0, 0.0, j.x**2 / (w * w))
            f = (j.t**2 + gx2) ** (0.5 * p)
        return float(np.sum((f * vol) @ wx * wt))
    T, X, W = _chart_grid(m)
    j = psi.jet(T, X)
    G = m.metric_jet(T, X).v
    if kind == "value":
        f = np.abs(j.v) ** p
    else:
        f = (j.t**2 + j.x**2 / G) ** (0.5 * p)
    return float(np.sum(np.sum(f * np.sqrt(G) * W, axis=1)))


def rayleigh_quotient(cm: CertifiedManifold, psi, p: float = 2.0) -> float:
    """``int |grad psi|^p / int |psi|^p`` for a symbolic or radial ``psi``."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    if isinstance(psi, RadialProfile):
        num = integrate_radial(cm, lambda s: np.abs(psi.derivative(s)) ** p)
        den = integrate_radial(cm, lambda s: np.abs(psi.value(s)) ** p)
    else:
        num = integrate_expression(cm, psi, "grad", p)
        den = integrate_expression(cm, psi, "value", p)
    if not den > 0:
        raise ValueError("zero denominator in the Rayleigh quotient")
    return num / den


def boundary_values(cm: CertifiedManifold, psi) -> np.ndarray:
    """Values of a symbolic function at boundary samples (for vanishing checks)."""
    psi = as_expr(psi)
    out = []
    for s in cm.bundle.sides:
        t, x = s.point(np.array([0.0]))
        out.append(np.ravel(psi(np.broadcast_to(t, x.shape), x)))
    return np.concatenate(out)


# --- segment excursion ------------------------------------------------------------

def _line_integral_along(cm, side_label, x_foot, f: Expr, length: float) -> float:
    if length <= 0:
        return 0.0
    m = cm.manifold
    if isinstance(m, WarpedTube):
        def g(s):
            return float(f(m.side_position(side_label, s), x_foot))

        return integrate(g, 0.0, length, Tolerance(rel=1e-10, abs=1e-12))
    k = max(2, int(math.ceil(length / cm.resolution.step)))
    k += k % 2
    prof = normal_ray_profile(m, x_foot, length, length / k, side_label)
    pts = prof.geodesic_points
    vals = f(pts[:, 0], pts[:, 1])
    return float(scipy.integrate.simpson(vals, x=prof.times))


def segment_excursion(cm: CertifiedManifold, f, p) -> float:
    """``E_f(p)``: minimum over foot points of the integral of ``f`` along the normal segment."""
    f = as_expr(f)
    t, x = float(p[0]), float(p[1])
    m = cm.manifold
    if isinstance(m, WarpedTube):
        cands = [("inner", t)]
        if m.topology is Topology.CYLINDER:
            cands.append(("outer", m.length - t))
        rho = min(c[1] for c in cands)
        feet = [c for c in cands if c[1] <= rho + 1e-12]
        if m.topology is Topology.CAP and abs(t - m.length) <= 1e-12:
            # the pole: every boundary point is a foot point; use the samples
            xs = cm.bundle.sides[0].xs
            return min(_line_integral_along(cm, "inner", float(xx), f, rho) for xx in xs)
        return min(_line_integral_along(cm, lb, x, f, rho) for lb, _ in feet)
    field = cm.bundle.field
    rho = float(field.interpolate(t, x))
    fp = foot_point(field, m, (t, x), cm.resolution.cut_constant)
    feet = [(fp.component, fp.x)]
    if fp.near_cut:
        other = "upper" if fp.component == "lower" else "lower"
        alt = foot_point(field, m, (t, x), cm.resolution.cut_constant, component=other)
        feet.append((alt.component, alt.x))
    return min(_line_integral_along(cm, lb, xf, f, rho) for lb, xf in feet)


def integrate_excursion(cm: CertifiedManifold, f, points: int = 2049) -> tuple[float, float]:
    """``(int_M E_f, int_M f)`` by coarea on the decomposition along normal rays.

    Off the cut locus the foot point of ``gamma_x(s)`` is ``x``, so
    ``E_f(gamma_x(s)) = int_0^s f(gamma_x)``; each ray is sampled on its own
    uniform grid over ``[0, tau(x)]`` and integrated with Simpson's rule.
    """
    f = as_expr(f)
    lin = np.linspace(0.0, 1.0, points)
    lhs = rhs = 0.0
    for s in cm.bundle.sides:
        if s.uniform:
            tau = float(s.tau[0])
            u = tau * lin
            T, X = np.broadcast_arrays(*s.point(u))
            th = np.broadcast_to(s.theta(u), T.shape)
            scale = np.full(len(s.xs), tau)
        else:
            U = s.tau[:, None] * lin[None, :]
            T, X = s.point(U)
            th = s.theta(U)
            scale = s.tau
        fv = f(T, X)
        F = scipy.integrate.cumulative_simpson(fv, dx=lin[1], axis=1, initial=0.0) * scale[:, None]
        lhs += float(np.sum(s.weights * scipy.integrate.simpson(F * th, dx=lin[1], axis=1) * scale))
        rhs += float(np.sum(s.weights * scipy.integrate.simpson(fv * th, dx=lin[1], axis=1) * scale))
    return lhs, rhs


# --- eigenvalues --------------------------------------------------------------------

def dirichlet_eigen(cm: CertifiedManifold, gridpoints: int = 2000, allow_truncated: bool = False,
                    nt: int | None = None, nx: int | None = None) -> float:
    """First Dirichlet eigenvalue of the Laplacian.

    Warped tubes: the ground state is a function of ``t`` alone, so the
    radial Sturm-Liouville problem with weight ``w^{n-1}`` is solved (natural
    condition at a cap's pole, Dirichlet at boundaries and at a truncation).
    Chart surfaces: five-point finite differences on a vertex grid.
    """
    m = cm.manifold
    if isinstance(m, WarpedTube):
        if m.truncated and not allow_truncated:
            raise ValueError("half-infinite tube: pass allow_truncated=True to use the truncation")
        far_dirichlet = m.topology is not Topology.CAP

        def weight(t):
            return np.maximum(m.warp_jet(t)[0], 0.0) ** (m.n - 1)

        mu, _ = min_eigen_sturm_liouville(weight, 0.0, m.length, gridpoints, (True, far_dirichlet))
        return mu
    return _chart_eigen(m, nt, nx)


def dirichlet_eigen_estimate(cm: CertifiedManifold, allow_truncated: bool = False,
                             nt: int = 64, nx: int = 64) -> tuple[float, float]:
    """``(mu, err)``: the eigenvalue and the gap to the same solver on a grid half as fine."""
    m = cm.manifold
    if isinstance(m, WarpedTube):
        mu = dirichlet_eigen(cm, 2000, allow_truncated)
        return mu, abs(mu - dirichlet_eigen(cm, 1000, allow_truncated))
    mu = _chart_eigen(m, nt, nx)
    if m.beta_low.variables or m.beta_high.variables:
        return mu, abs(mu - _chart_eigen_once(m, nt // 2, nx // 2))
    return mu, abs(mu - _chart_eigen_once(m, 2 * nt, 2 * nx))


def _chart_eigen_once(surface: ChartSurface2D, nt: int, nx: int) -> float:
    lo, hi = surface.t_range()
    dt = (hi - lo) / nt
    dx = surface.period / nx
    ts = lo + dt * np.arange(nt + 1)
    xs = dx * np.arange(nx)
    T, X = np.meshgrid(ts, xs, indexing="ij")
    slack = 1e-12 * max(1.0, abs(hi))
    strict = surface.inside(T, X) & (T > surface.beta_low(0.0, X) + slack) & (T < surface.beta_high(0.0, X) - slack)
    idx = -np.ones(T.shape, dtype=np.int64)
    idx[strict] = np.arange(int(strict.sum()))
    N = int(strict.sum())
    if N == 0:
        raise ValueError("no interior grid nodes")
    f_node = np.sqrt(surface.metric_jet(T, X).v)
    rows, cols, vals = [], [], []
    diag = np.zeros(N)
    # t-edges between (j, i) and (j+1, i): weight sqrt(G) dx / dt at the midpoint
    tm = 0.5 * (T[1:] + T[:-1])
    wt = np.sqrt(surface.metric_jet(tm, X[1:]).v) * dx / dt
    a, b = idx[:-1], idx[1:]
    for p_, q_, w_ in ((a, b, wt),):
        pa, qb = p_.ravel(), q_.ravel()
        ww = w_.ravel()
        m1 = pa >= 0
        np.add.at(diag, pa[m1], ww[m1])
        m2 = qb >= 0
        np.add.at(diag, qb[m2], ww[m2])
        both = m1 & m2
        rows += [pa[both], qb[both]]
        cols += [qb[both], pa[both]]
        vals += [-ww[both], -ww[both]]
    # x-edges between (j, i) and (j, i+1) (periodic): weight dt / (sqrt(G) dx)
    xm = X + 0.5 * dx
    wx = dt / (np.sqrt(surface.metric_jet(T, xm).v) * dx)
    pa, qb = idx.ravel(), np.roll(idx, -1, axis=1).ravel()
    ww = wx.ravel()
    m1, m2 = pa >= 0, qb >= 0
    np.add.at(diag, pa[m1], ww[m1])
    np.add.at(diag, qb[m2], ww[m2])
    both = m1 & m2
    rows += [pa[both], qb[both]]
    cols += [qb[both], pa[both]]
    vals += [-ww[both], -ww[both]]
    rows.append(np.arange(N))
    cols.append(np.arange(N))
    vals.append(diag)
    K = scipy.sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    mass = (f_node * dt * dx)[strict]
    return min_eigen_grid(K, mass)


def _chart_eigen(surface: ChartSurface2D, nt: int | None, nx: int | None) -> float:
    nt = nt or 64
    nx = nx or 64
    mu1 = _chart_eigen_once(surface, nt, nx)
    aligned = not surface.beta_low.variables and not surface.beta_high.variables
    if not aligned:
        return mu1
    mu2 = _chart_eigen_once(surface, 2 * nt, 2 * nx)
    return (4.0 * mu2 - mu1) / 3.0

