"""Distance to the boundary on chart surfaces by first-order fast marching.

Nodes are cell centres in ``t`` (so boundary graphs never sit on nodes) and
uniform in the periodic ``x`` direction. Each boundary component is marched
separately; ``rho`` is their minimum and ``source_component`` the argmin.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .manifolds import ChartSurface2D
from .numerics import NumericalError

LOWER, UPPER = 0, 1
_LABELS = ("lower", "upper")


@dataclass(frozen=True)
class Grid2D:
    nt: int
    nx: int
    t_samples: np.ndarray
    x_samples: np.ndarray
    inside_mask: np.ndarray  # (nt, nx)
    period: float
    periodic_x: bool = True

    @property
    def dt(self) -> float:
        return float(self.t_samples[1] - self.t_samples[0])

    @property
    def dx(self) -> float:
        return self.period / self.nx

    @property
    def t_lo(self) -> float:
        return float(self.t_samples[0] - 0.5 * self.dt)

    @property
    def t_hi(self) -> float:
        return float(self.t_samples[-1] + 0.5 * self.dt)


def make_grid(surface: ChartSurface2D, nt: int | None = None, nx: int | None = None, h: float = 0.0125) -> Grid2D:
    """Cell-centred grid covering the bounding strip of the chart region."""
    lo, hi = surface.t_range()
    nt = nt or max(8, int(math.ceil((hi - lo) / h)))
    nx = nx or max(8, int(math.ceil(surface.period / h)))
    dt = (hi - lo) / nt
    ts = lo + dt * (np.arange(nt) + 0.5)
    xs = surface.period * np.arange(nx) / nx
    mask = surface.inside(ts[:, None], xs[None, :])
    return Grid2D(nt, nx, ts, xs, mask, surface.period)


def _curve_distance(surface: ChartSurface2D, label: str, t, x, iterations: int = 6):
    """Signed distance to a boundary graph in the metric frozen at the node.

    Minimises ``(t - beta(x'))^2 + G (x - x')^2`` over ``x'`` by Newton steps;
    positive on the region side. Returns ``(distance, x')``.
    """
    e = surface.beta_low if label == "lower" else surface.beta_high
    xp = np.array(x, dtype=float)
    G0 = surface.metric_jet(t, x).v
    for _ in range(iterations):
        j = e.jet(0.0, xp)
        d = t - j.v
        g1 = -d * j.x - G0 * (x - xp)
        g2 = j.x * j.x - d * j.xx + G0
        xp = xp - g1 / np.where(g2 > 0, g2, 1.0)
    beta = e(0.0, xp)
    dist = np.sqrt((t - beta) ** 2 + G0 * (x - xp) ** 2)
    side = np.sign(t - beta) if label == "lower" else np.sign(beta - t)
    return side * dist, xp


@dataclass(frozen=True)
class DistanceField:
    grid: Grid2D
    rho: np.ndarray  # (nt, nx); signed near the boundary, nan far outside
    source_component: np.ndarray  # 0 lower, 1 upper, -1 undefined
    components: np.ndarray  # (2, nt, nx)
    h: float

    def _bilinear(self, values, t, x):
        g = self.grid
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        ft = (t - g.t_samples[0]) / g.dt
        j = np.clip(np.floor(ft).astype(int), 0, g.nt - 2)
        a = ft - j
        fx = np.mod(x, g.period) / g.dx
        i = np.floor(fx).astype(int) % g.nx
        b = fx - np.floor(fx)
        i1 = (i + 1) % g.nx
        v00, v01 = values[j, i], values[j, i1]
        v10, v11 = values[j + 1, i], values[j + 1, i1]
        return (1 - a) * ((1 - b) * v00 + b * v01) + a * ((1 - b) * v10 + b * v11)

    def interpolate(self, t, x):
        """Bilinear, periodic in ``x``, linear extrapolation at the t-edges."""
        return self._bilinear(self.rho, t, x)

    def interpolate_component(self, component: int, t, x):
        return self._bilinear(self.components[component], t, x)

    def max_inside(self) -> tuple[float, tuple]:
        vals = np.where(self.grid.inside_mask, self.rho, -np.inf)
        j, i = np.unravel_index(int(np.argmax(vals)), vals.shape)
        return float(vals[j, i]), (float(self.grid.t_samples[j]), float(self.grid.x_samples[i]))

    def dump(self, path) -> None:
        """Dense text matrix of rho, one row per t-sample, comma separated."""
        np.savetxt(path, self.rho, delimiter=",", fmt="%.10g")


def _march(known_vals: np.ndarray, known: np.ndarray, active: np.ndarray, ht: float, hx: np.ndarray) -> np.ndarray:
    """Fast marching from the fixed ``known`` nodes into ``active`` nodes.

    Heap entries are ``(value, flat_index)`` so ties pop in index order.
    """
    nt, nx = known.shape
    U = np.where(known, known_vals, np.inf).ravel().tolist()
    accepted = known.ravel().tolist()
    act = active.ravel().tolist()
    hxl = hx.ravel().tolist()
    inf = math.inf
    inv_t2 = 1.0 / (ht * ht)
    heap = []
    trial = [inf] * (nt * nx)

    def update(k):
        j, i = divmod(k, nx)
        a = inf
        if j > 0 and accepted[k - nx]:
            a = U[k - nx]
        if j < nt - 1 and accepted[k + nx] and U[k + nx] < a:
            a = U[k + nx]
        kl = k - 1 if i > 0 else k + nx - 1
        kr = k + 1 if i < nx - 1 else k - nx + 1
        b = inf
        if accepted[kl]:
            b = U[kl]
        if accepted[kr] and U[kr] < b:
            b = U[kr]
        hxk = hxl[k]
        if a == inf:
            return b + hxk
        if b == inf:
            return a + ht
        inv_x2 = 1.0 / (hxk * hxk)
        A = inv_t2 + inv_x2
        B = a * inv_t2 + b * inv_x2
        C = a * a * inv_t2 + b * b * inv_x2 - 1.0
        disc = B * B - A * C
        if disc >= 0:
            u = (B + math.sqrt(disc)) / A
            if u >= a and u >= b:
                return u
        return min(a + ht, b + hxk)

    def neighbours(k):
        j, i = divmod(k, nx)
        if j > 0:
            yield k - nx
        if j < nt - 1:
            yield k + nx
        yield k - 1 if i > 0 else k + nx - 1
        yield k + 1 if i < nx - 1 else k - nx + 1

    for k in np.flatnonzero(known.ravel()).tolist():
        for q in neighbours(k):
            if act[q] and not accepted[q]:
                u = update(q)
                if u < trial[q]:
                    trial[q] = u
                    heapq.heappush(heap, (u, q))
    while heap:
        u, k = heapq.heappop(heap)
        if accepted[k] or u > trial[k]:
            continue
        accepted[k] = True
        U[k] = u
        for q in neighbours(k):
            if act[q] and not accepted[q]:
                v = update(q)
                if v < trial[q]:
                    trial[q] = v
                    heapq.heappush(heap, (v, q))
    return np.array(U).reshape(nt, nx)


def solve_eikonal(surface: ChartSurface2D, grid: Grid2D, band_cells: float = 2.0) -> DistanceField:
    """First-order upwind solution of ``|grad rho|_g = 1`` with ``rho = 0`` on both graphs.

    Nodes within ``band_cells`` cell sizes of a graph are initialised with the
    local metric distance to the curve; the rest of the region is marched.
    """
    T, X = np.meshgrid(grid.t_samples, grid.x_samples, indexing="ij")
    G = surface.metric_jet(T, X).v
    hx = np.sqrt(G) * grid.dx
    h = max(grid.dt, float(hx.max()))
    band = band_cells * h
    comps = np.full((2, grid.nt, grid.nx), np.inf)
    for c, label in enumerate(_LABELS):
        d, _ = _curve_distance(surface, label, T, X)
        known = np.abs(d) <= band
        field_c = _march(d, known, grid.inside_mask, grid.dt, hx)
        reached = grid.inside_mask | known
        if np.any(~np.isfinite(field_c[grid.inside_mask])):
            raise NumericalError(f"unreachable interior nodes from the {label} boundary")
        comps[c] = np.where(reached, field_c, np.nan)
    with np.errstate(invalid="ignore"):
        rho = np.fmin(comps[0], comps[1])
        src = np.where(np.isnan(rho), -1, np.where(np.fmin(comps[0], np.inf) <= np.fmin(comps[1], np.inf), 0, 1))
    return DistanceField(grid, rho, src.astype(np.int8), comps, h)


# --- cut times, foot points, volumes --------------------------------------------

def cut_times_from_samples(field: DistanceField, times, points, exit_time, tau1, c: float = 4.0,
                           refine: bool = True) -> np.ndarray:
    """Cut times for a batch of rays sampled at common ``times``.

    ``points`` has shape ``(rays, len(times), 2)``. The first sample with
    ``t - rho(gamma(t)) > c h`` marks the violation; with ``refine`` the
    defect ``t - rho`` is fitted linearly on the next ``c h`` of the ray and
    extrapolated back to zero. Results are capped at the exit time and at
    ``tau1``.
    """
    times = np.asarray(times)
    rho = field.interpolate(points[..., 0], points[..., 1])
    defect = times[None, :] - rho
    slack = c * field.h
    out = np.empty(len(points))
    for r in range(len(points)):
        valid = times <= exit_time[r]
        bad = np.flatnonzero(valid & (defect[r] > slack))
        if len(bad) == 0:
            if times[valid][-1] < times[-1] or not math.isfinite(exit_time[r]):
                raise NumericalError("ray ends before leaving the distance-minimising range")
            out[r] = min(exit_time[r], tau1[r])
            continue
        v = int(bad[0])
        tau = times[max(v - 1, 0)]
        if refine:
            win = np.flatnonzero(valid & (times >= times[v]) & (times <= times[v] + slack))
            if len(win) >= 2:
                slope, icpt = np.polyfit(times[win], defect[r, win], 1)
                if slope > 0:
                    tau = min(max(-icpt / slope, 0.0), times[v])
        out[r] = min(tau, exit_time[r], tau1[r])
    return out


def cut_time(field: DistanceField, surface: ChartSurface2D, x: float, ray, c: float = 4.0, refine: bool = True) -> float:
    """Cut time of one ray profile (needs chart geodesic points)."""
    if ray.geodesic_points is None:
        raise ValueError("ray profile carries no chart points")
    pts = ray.geodesic_points[None]
    return float(cut_times_from_samples(field, ray.times, pts, np.array([ray.exit_time]),
                                        np.array([ray.tau1]), c, refine)[0])


@dataclass(frozen=True)
class FootPoint:
    x: float
    component: str
    near_cut: bool
    steps: int


def foot_point(field: DistanceField, surface: ChartSurface2D, p, c: float = 4.0, max_steps: int | None = None,
               component: str | None = None) -> FootPoint:
    """Steepest descent of rho from ``p = (t, x)``, then projection to the graph.

    ``component`` forces the descent on one boundary component (used to
    enumerate both candidates at a tie).
    """
    t, x = float(p[0]), float(p[1])
    h = field.h
    d0 = float(field.interpolate_component(0, t, x))
    d1 = float(field.interpolate_component(1, t, x))
    comp = (0 if d0 <= d1 else 1) if component is None else _LABELS.index(component)
    near_cut = abs(d0 - d1) <= c * h
    max_steps = max_steps or int(8 * max(d0, d1, 1.0) / h) + 100
    eps = 0.5 * h
    for step in range(max_steps):
        r = float(field.interpolate_component(comp, t, x))
        if r <= 2.0 * h:
            break
        G = float(surface.metric_jet(t, x).v)
        dt = (field.interpolate_component(comp, t + eps, x) - field.interpolate_component(comp, t - eps, x)) / (2 * eps)
        dxv = (field.interpolate_component(comp, t, x + eps) - field.interpolate_component(comp, t, x - eps)) / (2 * eps)
        gt, gx = float(dt), float(dxv) / G  # metric gradient components
        norm = math.sqrt(gt * gt + G * gx * gx)
        if norm < 1e-3:
            raise NumericalError(f"foot-point descent stagnated at (t={t:.6g}, x={x:.6g})")
        s = min(0.5 * h, r - h)
        t -= s * gt / norm
        x -= s * gx / norm
    else:
        raise NumericalError("foot-point descent did not reach the boundary")
    _, xp = _curve_distance(surface, _LABELS[comp], np.array(t), np.array(x))
    return FootPoint(float(np.mod(xp, surface.period)), _LABELS[comp], near_cut, step)


def region_volume(surface: ChartSurface2D, grid: Grid2D, predicate=None, supersample: int = 4) -> float:
    """Riemannian area of ``{inside and predicate}`` with ``supersample^2`` points per cell.

    ``predicate(t, x)`` takes arrays and returns booleans; ``None`` means the
    whole region.
    """
    off = (np.arange(supersample) + 0.5) / supersample - 0.5
    ts = (grid.t_samples[:, None] + grid.dt * off[None, :]).ravel()
    xs = (grid.x_samples[:, None] + grid.dx * off[None, :]).ravel()
    T, X = np.meshgrid(ts, xs, indexing="ij")
    keep = surface.inside(T, X)
    if predicate is not None:
        keep &= np.asarray(predicate(T, X), dtype=bool)
    w = np.sqrt(surface.metric_jet(T, X).v)
    cell = grid.dt * grid.dx / supersample**2
    # fixed-order reduction: rows then total
    return float(np.sum(np.sum(np.where(keep, w, 0.0), axis=1)) * cell)
