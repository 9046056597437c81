"""Concrete manifolds with boundary: warped tubes and 2-D chart surfaces.

Two classes are supported.

* ``WarpedTube``: ``dt^2 + w(t)^2 h_F`` on ``[0, L] x F`` for a fiber ``F``
  (round sphere, circle or flat torus). Boundaries sit at ``t = 0`` ("inner")
  and, for cylinders, at ``t = L`` ("outer").
* ``ChartSurface2D``: ``dt^2 + G(t, x) dx^2`` on the region between two
  periodic graphs ``t = beta_low(x)`` ("lower") and ``t = beta_high(x)``
  ("upper"). Curves ``x = const`` are unit-speed geodesics orthogonal to the
  levels of ``t``.

Sign convention: mean curvature is taken with respect to the inner normal,
so the boundary ``t = 0`` of a warped tube has ``H = -w'(0)/w(0)``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .expr import Expr, as_expr, evaluate_constant
from .numerics import NumericalError, find_root, rk4_step

CURVATURE_SAMPLES = 512
DEFAULT_T_MAX = 40.0


class CertificationError(ValueError):
    """A declared curvature bound is violated by the sampled curvature data."""


# --- fibers ----------------------------------------------------------------

class FiberKind(enum.Enum):
    ROUND_SPHERE = "RoundSphere"
    CIRCLE = "Circle"
    FLAT_TORUS = "FlatTorus"


@dataclass(frozen=True)
class Fiber:
    kind: FiberKind
    dim: int
    radius: float | None = None
    side_lengths: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("fiber dimension must be >= 1")
        if self.kind is FiberKind.ROUND_SPHERE:
            if not (self.radius and self.radius > 0):
                raise ValueError("round sphere needs a positive radius")
        elif self.kind is FiberKind.CIRCLE:
            if self.dim != 1 or len(self.side_lengths) != 1 or not self.side_lengths[0] > 0:
                raise ValueError("circle needs one positive length")
        else:
            if len(self.side_lengths) != self.dim or min(self.side_lengths) <= 0:
                raise ValueError("flat torus needs dim positive side lengths")

    @classmethod
    def round_sphere(cls, dim: int, radius: float = 1.0) -> "Fiber":
        return cls(FiberKind.ROUND_SPHERE, int(dim), float(radius))

    @classmethod
    def circle(cls, length: float) -> "Fiber":
        return cls(FiberKind.CIRCLE, 1, None, (float(length),))

    @classmethod
    def flat_torus(cls, side_lengths) -> "Fiber":
        sides = tuple(float(s) for s in side_lengths)
        return cls(FiberKind.FLAT_TORUS, len(sides), None, sides)

    @property
    def volume(self) -> float:
        if self.kind is FiberKind.ROUND_SPHERE:
            d = self.dim
            unit = 2.0 * math.pi ** ((d + 1) / 2.0) / math.gamma((d + 1) / 2.0)
            return unit * self.radius**d
        return float(np.prod(self.side_lengths))

    @property
    def sectional_curvature(self) -> float:
        return self.radius**-2 if self.kind is FiberKind.ROUND_SPHERE else 0.0

    @property
    def ricci(self) -> float:
        """Ricci curvature of the fiber in unit directions, ``(dim - 1) k``."""
        return (self.dim - 1) * self.sectional_curvature

    @property
    def period(self) -> float:
        """Length of the parameter circle used for boundary samples."""
        if self.kind is FiberKind.CIRCLE:
            return self.side_lengths[0]
        if self.kind is FiberKind.ROUND_SPHERE and self.dim == 1:
            return 2.0 * math.pi * self.radius
        return 1.0

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "dim": self.dim}
        if self.radius is not None:
            out["radius"] = self.radius
        if self.side_lengths:
            out["side_lengths"] = list(self.side_lengths)
        return out


def fiber_from_dict(spec: dict) -> Fiber:
    kind = spec.get("kind")
    if kind == "RoundSphere":
        return Fiber.round_sphere(int(spec.get("dim", 1)), evaluate_constant(spec.get("radius", 1.0)))
    if kind == "Circle":
        return Fiber.circle(evaluate_constant(spec.get("length", "2*pi")))
    if kind == "FlatTorus":
        return Fiber.flat_torus([evaluate_constant(s) for s in spec["side_lengths"]])
    raise ValueError(f"unknown fiber kind {kind!r}")


# --- warped tubes ------------------------------------------------------------

class Topology(enum.Enum):
    CYLINDER = "Cylinder"
    CAP = "Cap"
    HALF_INFINITE = "HalfInfinite"


@dataclass(frozen=True)
class WarpedTube:
    fiber: Fiber
    warp: Expr
    topology: Topology
    length: float

    @property
    def n(self) -> int:
        return self.fiber.dim + 1

    @property
    def truncated(self) -> bool:
        return self.topology is Topology.HALF_INFINITE

    def warp_jet(self, t):
        """``(w, w', w'')`` at ``t`` (arrays)."""
        j = self.warp.jet(t, 0.0)
        return j.v, j.t, j.tt

    def side_labels(self) -> tuple:
        return ("inner", "outer") if self.topology is Topology.CYLINDER else ("inner",)

    def side_warp(self, label: str, s):
        """Warp seen from a boundary component, as a function of distance ``s``."""
        s = np.asarray(s, dtype=float)
        if label == "inner":
            return self.warp_jet(s)
        if label == "outer":
            w, w1, w2 = self.warp_jet(self.length - s)
            return w, -w1, w2
        raise ValueError(f"unknown side {label!r}")

    def side_position(self, label: str, s):
        s = np.asarray(s, dtype=float)
        return s if label == "inner" else self.length - s


def build_warped_tube(fiber: Fiber, warp, topology, length: float | None = None,
                      t_max: float = DEFAULT_T_MAX, closure_tol: float = 1e-9) -> WarpedTube:
    """Validate and assemble a warped tube.

    ``length`` is the t-extent for cylinders and caps; half-infinite tubes
    are truncated at ``t_max``.
    """
    warp = as_expr(warp)
    if "x" in warp.variables:
        raise ValueError("the warp may depend on t only")
    topology = Topology(topology) if not isinstance(topology, Topology) else topology
    if topology is Topology.HALF_INFINITE:
        length = float(t_max)
    if length is None or not length > 0 or not math.isfinite(length):
        raise ValueError("tube length must be positive and finite")
    tube = WarpedTube(fiber, warp, topology, float(length))

    ts = np.linspace(0.0, length, 4097)
    w, w1, w2 = tube.warp_jet(ts)
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(w1)) and np.all(np.isfinite(w2))):
        raise ValueError("warp or its derivatives are not finite on [0, L]")
    interior = w[:-1] if topology is Topology.CAP else w
    if np.any(interior <= 0):
        bad = ts[np.argmin(interior)]
        raise ValueError(f"warp must be positive, w({bad:.6g}) = {float(tube.warp(bad)):.6g}")
    if topology is Topology.CAP:
        if fiber.kind is not FiberKind.ROUND_SPHERE:
            raise ValueError("a cap needs a round-sphere fiber")
        wl, wl1, _ = tube.warp_jet(length)
        if abs(float(wl)) > closure_tol:
            raise ValueError(f"cap closure failed: w(L) = {float(wl):.3g}")
        # smooth closure of the cone point: (w * radius)'(L) = -1
        if abs(float(wl1) * fiber.radius + 1.0) > closure_tol:
            raise ValueError(f"cap closure failed: w'(L) * radius = {float(wl1) * fiber.radius:.12g}, expected -1")
    return tube


def model_tube(params: kernels.ComparisonParams, t_max: float = DEFAULT_T_MAX,
               fiber: Fiber | None = None) -> WarpedTube:
    """The warped model ``w = s_{kappa, lam}`` as a cap or a truncated half-line."""
    k, lam, a = params.kappa, params.lam, params.root_k
    if k > 0:
        src = f"cos({a!r}*t) - {lam / a!r}*sin({a!r}*t)"
    elif k == 0:
        src = f"1 - {lam!r}*t"
    else:
        c1, c2 = 0.5 * (1.0 - lam / a), 0.5 * (1.0 + lam / a)
        src = f"{c2!r}*exp(-{a!r}*t)" if c1 == 0 else f"{c1!r}*exp({a!r}*t) + {c2!r}*exp(-{a!r}*t)"
    dim = params.n - 1
    if kernels.ball_condition(k, lam):
        c = kernels.cut_radius(params)
        _, d = kernels.s_boundary(params, c)
        fib = Fiber.round_sphere(dim, -1.0 / d)
        return build_warped_tube(fib, src, Topology.CAP, c)
    if fiber is None:
        # the tangential Ricci bound needs fiber curvature kappa + lam^2 (or less)
        k_fib = k + lam * lam
        if dim == 1:
            fiber = Fiber.circle(2 * math.pi)
        elif k_fib > 0:
            fiber = Fiber.round_sphere(dim, k_fib**-0.5)
        else:
            fiber = Fiber.flat_torus([2 * math.pi] * dim)
    fib = fiber
    return build_warped_tube(fib, src, Topology.HALF_INFINITE, t_max=t_max)


# --- chart surfaces ----------------------------------------------------------

@dataclass(frozen=True)
class ChartSurface2D:
    metric_coefficient: Expr
    beta_low: Expr
    beta_high: Expr
    period: float

    n = 2

    def side_labels(self) -> tuple:
        return ("lower", "upper")

    def metric_jet(self, t, x):
        return self.metric_coefficient.jet(t, x)

    def warp_sqrt(self, t, x):
        """``(f, f_t, f_tt)`` for ``f = sqrt(G)``."""
        j = self.metric_jet(t, x).sqrt()
        return j.v, j.t, j.tt

    def gauss_curvature(self, t, x):
        f, _, ftt = self.warp_sqrt(t, x)
        return -ftt / f

    def boundary(self, label: str, x):
        """``(beta, beta', beta'')`` of a boundary graph."""
        e = self.beta_low if label == "lower" else self.beta_high
        j = e.jet(0.0, x)
        return j.v, j.x, j.xx

    def t_range(self) -> tuple:
        xs = np.linspace(0.0, self.period, 2048, endpoint=False)
        return float(np.min(self.beta_low(0.0, xs))), float(np.max(self.beta_high(0.0, xs)))

    def inside(self, t, x, slack: float = 0.0):
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        lo = self.beta_low(0.0, x)
        hi = self.beta_high(0.0, x)
        return (t >= lo - slack) & (t <= hi + slack)

    def inner_normal(self, label: str, x):
        """Chart components ``(u^t, u^x)`` of the unit inner normal at ``x``."""
        b, b1, _ = self.boundary(label, x)
        G = self.metric_jet(b, x).v
        norm = np.sqrt(1.0 + b1 * b1 / G)
        sign = 1.0 if label == "lower" else -1.0
        return sign / norm, -sign * b1 / (G * norm)

    def geodesic_curvature(self, label: str, x):
        """Mean curvature of a boundary graph with respect to the inner normal."""
        x = np.asarray(x, dtype=float)
        b, b1, b2 = self.boundary(label, x)
        j = self.metric_jet(b, x)
        G, Gt, Gx = j.v, j.t, j.x
        # covariant acceleration of c(x) = (beta(x), x)
        at = b2 - 0.5 * Gt
        ax = b1 * Gt / G + 0.5 * Gx / G
        ut, ux = self.inner_normal(label, x)
        return (at * ut + G * ax * ux) / (b1 * b1 + G)

    def arclength_weight(self, label: str, x):
        b, b1, _ = self.boundary(label, x)
        return np.sqrt(b1 * b1 + self.metric_jet(b, x).v)


def build_chart_surface(G, beta_low, beta_high, period: float, samples: int = 512) -> ChartSurface2D:
    """Validate a chart surface ``dt^2 + G dx^2`` between two periodic graphs."""
    G, lo, hi = as_expr(G), as_expr(beta_low), as_expr(beta_high)
    if "t" in lo.variables or "t" in hi.variables:
        raise ValueError("boundary graphs depend on x only")
    if not period > 0:
        raise ValueError("period must be positive")
    surf = ChartSurface2D(G, lo, hi, float(period))
    xs = np.linspace(0.0, period, samples, endpoint=False)
    bl, bh = lo(0.0, xs), hi(0.0, xs)
    if np.any(bh - bl <= 0):
        i = int(np.argmin(bh - bl))
        raise ValueError(f"boundary graphs cross near x={xs[i]:.6g}")
    for e, name in ((lo, "beta_low"), (hi, "beta_high"), (G, "G")):
        if "x" in e.variables:
            tt = 0.5 * (bl + bh)
            a, b = e(tt, xs), e(tt, xs + period)
            if np.max(np.abs(a - b)) > 1e-9 * max(1.0, np.max(np.abs(a))):
                raise ValueError(f"{name} is not periodic with period {period}")
    s = np.linspace(0.0, 1.0, samples)
    tt = bl[None, :] + s[:, None] * (bh - bl)[None, :]
    g = G(tt, np.broadcast_to(xs, tt.shape))
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise ValueError("G must be positive on the closed region")
    return surf


def chart_realization(tube: WarpedTube) -> ChartSurface2D:
    """The same metric written as a chart surface (two-dimensional cylinders only)."""
    if tube.n != 2 or tube.topology is not Topology.CYLINDER:
        raise ValueError("chart realization needs a 2-dimensional cylinder tube")
    scale = tube.fiber.period / (2.0 * math.pi) if tube.fiber.kind is FiberKind.ROUND_SPHERE else 1.0
    src = f"({tube.warp.source})^2" if scale == 1.0 else f"({scale!r}*({tube.warp.source}))^2"
    period = tube.fiber.period if scale == 1.0 else 2.0 * math.pi
    return build_chart_surface(src, "0", repr(tube.length), period)


# --- curvature data ----------------------------------------------------------

@dataclass(frozen=True)
class CurvatureReport:
    ric_inf: float
    h_inf: float
    h_ranges: dict
    ric_location: tuple
    h_location: tuple
    samples: int


def curvature_report(m, samples: int = CURVATURE_SAMPLES) -> CurvatureReport:
    """Sampled infima of Ricci curvature (unit directions) and boundary mean curvature."""
    if isinstance(m, WarpedTube):
        return _warped_curvature(m, samples)
    if isinstance(m, ChartSurface2D):
        return _chart_curvature(m, samples)
    raise TypeError(f"unsupported manifold {type(m).__name__}")


def _warped_curvature(m: WarpedTube, samples: int) -> CurvatureReport:
    n = m.n
    end = m.length * (1 - 1.0 / samples) if m.topology is Topology.CAP else m.length
    ts = np.linspace(0.0, end, samples)
    w, w1, w2 = m.warp_jet(ts)
    radial = -(n - 1) * w2 / w
    tangential = -w2 / w + ((n - 2) * m.fiber.sectional_curvature - (n - 2) * w1 * w1) / (w * w)
    ric = np.minimum(radial, tangential) if n > 2 else radial
    if not np.all(np.isfinite(ric)):
        raise NumericalError("non-finite Ricci samples")
    i = int(np.argmin(ric))
    h_ranges = {}
    for label in m.side_labels():
        ww, ww1, _ = m.side_warp(label, 0.0)
        h = float(-ww1 / ww)
        h_ranges[label] = (h, h)
    worst = min(h_ranges, key=lambda k: h_ranges[k][0])
    return CurvatureReport(float(ric[i]), h_ranges[worst][0], h_ranges, (float(ts[i]), 0.0),
                           (worst, 0.0), samples)


def _chart_curvature(m: ChartSurface2D, samples: int) -> CurvatureReport:
    xs = np.linspace(0.0, m.period, samples, endpoint=False)
    s = np.linspace(0.0, 1.0, samples)
    bl, bh = m.beta_low(0.0, xs), m.beta_high(0.0, xs)
    tt = bl[None, :] + s[:, None] * (bh - bl)[None, :]
    xx = np.broadcast_to(xs, tt.shape)
    K = m.gauss_curvature(tt, xx)
    if not np.all(np.isfinite(K)):
        raise NumericalError("non-finite Gauss curvature samples")
    i = np.unravel_index(int(np.argmin(K)), K.shape)
    h_ranges, h_loc, h_inf = {}, None, math.inf
    for label in m.side_labels():
        H = m.geodesic_curvature(label, xs)
        if not np.all(np.isfinite(H)):
            raise NumericalError("non-finite boundary curvature samples")
        h_ranges[label] = (float(H.min()), float(H.max()))
        if H.min() < h_inf:
            h_inf, h_loc = float(H.min()), (label, float(xs[int(np.argmin(H))]))
    return CurvatureReport(float(K[i]), h_inf, h_ranges, (float(tt[i]), float(xx[i])), h_loc, samples * samples)


# --- ray profiles -------------------------------------------------------------

@dataclass(frozen=True)
class RayProfile:
    base_point: float
    side: str
    times: np.ndarray
    theta: np.ndarray
    dtheta: np.ndarray
    tau1: float
    exit_time: float
    geodesic_points: np.ndarray | None = None

    def __post_init__(self):
        if abs(self.theta[0] - 1.0) > 1e-12:
            raise ValueError("theta(0) must be 1")


def _first_zero(times, y, dy):
    """First sign change of ``y`` refined on the cubic Hermite interpolant."""
    neg = np.flatnonzero(y[1:] <= 0.0)
    if len(neg) == 0:
        return math.inf
    k = int(neg[0])
    if y[k + 1] == 0.0:
        return float(times[k + 1])
    t0, t1 = times[k], times[k + 1]
    h = t1 - t0

    def interp(t):
        u = (t - t0) / h
        h00, h10 = 2 * u**3 - 3 * u**2 + 1, u**3 - 2 * u**2 + u
        h01, h11 = -2 * u**3 + 3 * u**2, u**3 - u**2
        return h00 * y[k] + h10 * h * dy[k] + h01 * y[k + 1] + h11 * h * dy[k + 1]

    return find_root(interp, t0, t1)


def _warped_profile(m: WarpedTube, x: float, t_max: float, step: float, side: str) -> RayProfile:
    end = min(t_max, m.length)
    times = np.arange(0.0, end + 0.5 * step, step)
    times[-1] = min(times[-1], end)
    w, w1, _ = m.side_warp(side, times)
    w0 = float(w[0])
    n1 = m.n - 1
    theta = np.maximum(w / w0, 0.0) ** n1
    dtheta = n1 * np.maximum(w / w0, 0.0) ** (n1 - 1) * w1 / w0
    tau1 = m.length if m.topology is Topology.CAP and side == "inner" else math.inf
    return RayProfile(float(x), side, times, theta, dtheta, tau1, end)


def integrate_chart_rays(m: ChartSurface2D, side: str, xs, t_max: float, step: float):
    """Shoot inner normal geodesics from boundary points and solve the Jacobi equation.

    State per ray: ``(t, x, t', x', y, y')`` with ``y'' + K y = 0``,
    ``y(0) = 1``, ``y'(0) = -H``. Rays are frozen once they leave the region.

    Returns ``(times, states, exit_time)`` with ``states`` of shape
    ``(rays, len(times), 6)``.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    steps = int(math.ceil(t_max / step - 1e-9))
    times = step * np.arange(steps + 1)
    b, _, _ = m.boundary(side, xs)
    ut, ux = m.inner_normal(side, xs)
    H = m.geodesic_curvature(side, xs)
    y = np.stack([b, xs, ut, ux, np.ones_like(xs), -H], axis=1)
    alive = np.ones(len(xs), dtype=bool)
    exit_time = np.full(len(xs), math.inf)

    def field(_, s):
        t, x, vt, vx = s[:, 0], s[:, 1], s[:, 2], s[:, 3]
        jg = m.metric_jet(t, x)
        G, Gt, Gx = jg.v, jg.t, jg.x
        f = jg.sqrt()
        K = -f.tt / f.v
        out = np.empty_like(s)
        out[:, 0] = vt
        out[:, 1] = vx
        out[:, 2] = 0.5 * Gt * vx * vx
        out[:, 3] = -(Gt / G) * vt * vx - 0.5 * (Gx / G) * vx * vx
        out[:, 4] = s[:, 5]
        out[:, 5] = -K * s[:, 4]
        out[~alive] = 0.0
        return out

    states = np.empty((len(xs), steps + 1, 6))
    states[:, 0] = y
    tol = 1e-12
    for k in range(steps):
        y = rk4_step(field, times[k], y, step)
        if not np.all(np.isfinite(y[alive])):
            raise NumericalError(f"non-finite geodesic state at t={times[k + 1]:.6g}")
        states[:, k + 1] = y
        out = alive & ~m.inside(y[:, 0], y[:, 1], slack=tol)
        exit_time[out] = times[k + 1]
        alive &= ~out
    return times, states, exit_time


def _chart_profile(m: ChartSurface2D, x: float, t_max: float, step: float, side: str) -> RayProfile:
    times, states, exit_time = integrate_chart_rays(m, side, [x], t_max, step)
    st = states[0]
    end = float(exit_time[0])
    keep = times <= min(end, times[-1])
    tau1 = _first_zero(times[keep], st[keep, 4], st[keep, 5])
    return RayProfile(float(x), side, times[keep], st[keep, 4], st[keep, 5], tau1,
                      end if math.isfinite(end) else float(times[-1]), st[keep, :2].copy())


def normal_ray_profile(m, x: float, t_max: float, step: float = 1e-3, side: str | None = None) -> RayProfile:
    """Jacobian ``theta(t, x)`` of the normal exponential map along one inner normal ray."""
    if not t_max > 0 or not step > 0:
        raise ValueError("t_max and step must be positive")
    if isinstance(m, WarpedTube):
        return _warped_profile(m, x, t_max, step, side or "inner")
    if isinstance(m, ChartSurface2D):
        return _chart_profile(m, x, t_max, step, side or "lower")
    raise TypeError(f"unsupported manifold {type(m).__name__}")


def boundary_volume(m, samples: int = 4096) -> float:
    if isinstance(m, WarpedTube):
        total = 0.0
        for label in m.side_labels():
            w0 = float(m.side_warp(label, 0.0)[0])
            total += w0 ** (m.n - 1) * m.fiber.volume
        return total
    if isinstance(m, ChartSurface2D):
        xs = np.linspace(0.0, m.period, samples, endpoint=False)
        return float(sum(np.sum(m.arclength_weight(lb, xs)) * m.period / samples for lb in m.side_labels()))
    raise TypeError(f"unsupported manifold {type(m).__name__}")


def gauss_boundary_ricci_sides(m: WarpedTube, x=None, u=None) -> tuple[float, float]:
    """Both sides of the Gauss formula for the boundary Ricci curvature at ``t = 0``.

    The inner boundary of a warped tube is umbilic with ``A = a I``,
    ``a = -w'(0)/w(0)``, so ``trace A_{S(u,u)} = (n-1) a^2`` and
    ``sum_i |S(u, e_i)|^2 = a^2`` for a unit tangent ``u``.
    """
    if not isinstance(m, WarpedTube):
        raise TypeError("the Gauss boundary formula is implemented for warped tubes")
    n = m.n
    if n == 2:
        return 0.0, 0.0
    w, w1, w2 = (float(v) for v in m.warp_jet(0.0))
    k = m.fiber.sectional_curvature
    lhs = (n - 2) * k / (w * w)
    ric_u = -w2 / w + (n - 2) * (k - w1 * w1) / (w * w)
    k_mixed = -w2 / w
    a = -w1 / w
    rhs = ric_u - k_mixed + (n - 1) * a * a - a * a
    return lhs, rhs


# --- certification -----------------------------------------------------------

@dataclass(frozen=True)
class Resolution:
    boundary_samples: int = 512
    step: float = 1e-3
    profile_points: int = 4096
    nt: int | None = None
    nx: int | None = None
    grid_h: float = 0.0125
    cut_constant: float = 4.0

    def __post_init__(self):
        if self.boundary_samples < 4 or self.profile_points < 16:
            raise ValueError("too few samples")
        if not (self.step > 0 and self.grid_h > 0 and self.cut_constant > 0):
            raise ValueError("step sizes must be positive")


@dataclass(frozen=True)
class CertifiedManifold:
    manifold: object
    params: kernels.ComparisonParams
    ric_inf: float
    h_inf: float
    certification_margin: float
    margins: tuple
    tolerance: float
    certified: bool = True
    resolution: Resolution = field(default_factory=Resolution)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def is_chart(self) -> bool:
        return isinstance(self.manifold, ChartSurface2D)

    @property
    def compact(self) -> bool:
        return not (isinstance(self.manifold, WarpedTube) and self.manifold.truncated)

    @functools.cached_property
    def bundle(self):
        from .tube_geometry import build_normal_bundle

        return build_normal_bundle(self)


def certify_bounds(m, params: kernels.ComparisonParams, tol: float = 1e-9, enforce: bool = True,
                   resolution: Resolution | None = None) -> CertifiedManifold:
    """Check ``Ric >= (n-1) kappa`` and ``H >= lam`` on samples.

    With ``enforce=False`` violations are recorded in the margins instead of
    raising, which is how a deliberately mis-declared manifold is pushed
    through the check battery.
    """
    if m.n != params.n:
        raise CertificationError(f"dimension mismatch: manifold has n={m.n}, parameters n={params.n}")
    rep = curvature_report(m)
    ric_margin = rep.ric_inf - (params.n - 1) * params.kappa
    h_margin = rep.h_inf - params.lam
    ok = ric_margin >= -tol and h_margin >= -tol
    if enforce and not ok:
        if ric_margin < -tol:
            t, x = rep.ric_location
            raise CertificationError(
                f"Ricci bound violated at (t={t:.6g}, x={x:.6g}): Ric={rep.ric_inf:.12g} < {(params.n - 1) * params.kappa:.12g}"
            )
        label, x = rep.h_location
        raise CertificationError(f"mean curvature violated at {label} boundary, H={rep.h_inf:.12g} (x={x:.6g})")
    return CertifiedManifold(m, params, rep.ric_inf, rep.h_inf, min(ric_margin, h_margin),
                             (ric_margin, h_margin), tol, ok, resolution or Resolution())
