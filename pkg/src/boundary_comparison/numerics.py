"""Shared numerical machinery with fixed tolerances and deterministic behaviour.

Quadrature and root finding are thin wrappers over QUADPACK / Brent from scipy;
the fixed-step RK4 integrator, golden-section search and the eigen-solvers'
discretisations live here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.optimize
import scipy.sparse
import scipy.sparse.linalg


class NumericalError(RuntimeError):
    """Raised when a numerical routine fails to meet its contract."""


@dataclass(frozen=True)
class Tolerance:
    rel: float = 1e-10
    abs: float = 1e-13
    max_subdivisions: int = 400

    def __post_init__(self):
        if not (self.rel > 0 and self.abs > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times),) + state shape

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def integrate(f: Callable[[float], float], a: float, b: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    Raises :class:`NumericalError` if QUADPACK reports non-convergence.
    """
    if b < a:
        raise ValueError(f"integrate requires a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
        out = scipy.integrate.quad(
            f, a, b, epsabs=tol.abs, epsrel=tol.rel, limit=tol.max_subdivisions, full_output=1
        )
    value, err = out[0], out[1]
    if len(out) > 3:
        # ier > 0: accept only if the reported error still meets the request
        if not err <= max(tol.abs, tol.rel * abs(value)) * 10:
            raise NumericalError(f"quadrature on [{a}, {b}] did not converge: {out[3]}")
    if not math.isfinite(value):
        raise NumericalError(f"non-finite integral on [{a}, {b}]")
    return float(value)


def gauss_legendre_panels(f, a: float, b: float, panels: int = 64, order: int = 10) -> float:
    """Composite Gauss-Legendre rule for vectorised integrands (fixed panel order)."""
    if b <= a:
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = np.asarray(f(pts), dtype=float)
    return float(np.sum(np.sum(vals * weights[None, :], axis=1) * half))


def cumulative_gauss_legendre(f, grid: np.ndarray, order: int = 10) -> np.ndarray:
    """Integrals of ``f`` from ``grid[0]`` to every grid point, cell by cell."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(grid)
    mid = 0.5 * (grid[1:] + grid[:-1])
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    cells = np.sum(np.asarray(f(pts), dtype=float) * weights[None, :], axis=1) * half
    return np.concatenate([[0.0], np.cumsum(cells)])


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Bracketed root by Brent's bisection/secant/inverse-quadratic hybrid."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if flo * fhi > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    return float(scipy.optimize.brentq(f, lo, hi, xtol=tol.abs, rtol=4 * np.finfo(float).eps, maxiter=500))


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f: Callable[[float], float], a: float, b: float, xtol: float = 1e-12) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal ``f`` on ``[a, b]``.

    Returns ``(argmax, max)``; the endpoints are included as candidates.
    """
    lo, hi = a, b
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol * max(1.0, abs(lo) + abs(hi)):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    best = max([(fc, c), (fd, d), (f(a), a), (f(b), b)])
    return best[1], best[0]


def scan_sup(f_vec, a: float, b: float, points: int = 4096, refine: int = 3, f_scalar=None) -> tuple[float, float]:
    """Supremum of ``f`` on ``[a, b]``: uniform grid scan plus golden refinement.

    ``f_vec`` evaluates on arrays; ``f_scalar`` (defaults to ``f_vec``) is used
    for refinement around the best ``refine`` grid points.
    """
    f_scalar = f_scalar or (lambda s: float(f_vec(np.array([s]))[0]))
    grid = np.linspace(a, b, points)
    vals = np.asarray(f_vec(grid), dtype=float)
    order = np.argsort(-vals, kind="stable")[:refine]
    best_x, best_v = grid[order[0]], vals[order[0]]
    for k in order:
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, points - 1)]
        x, v = golden_max(f_scalar, lo, hi)
        if v > best_v:
            best_x, best_v = x, v
    return float(best_x), float(best_v)


def rk4_step(field, t, y, h):
    k1 = field(t, y)
    k2 = field(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = field(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = field(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def solve_ivp(field, y0, t_end: float, step: float) -> Trajectory:
    """Classical fourth-order Runge-Kutta with a fixed step.

    ``field(t, y)`` must return an array shaped like ``y``; states may carry
    leading batch dimensions (one row per ray, say). Output is dense at
    multiples of ``step``; the final step is shortened to land on ``t_end``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    y = np.array(y0, dtype=float)
    n_full = int(math.floor(t_end / step + 1e-9))
    times = [0.0]
    states = [y]
    t = 0.0
    for k in range(n_full):
        y = rk4_step(field, t, y, step)
        t = (k + 1) * step
        if not np.all(np.isfinite(y)):
            raise NumericalError(f"non-finite state at t={t}")
        times.append(t)
        states.append(y)
    if t_end - t > 1e-12 * max(1.0, t_end):
        y = rk4_step(field, t, y, t_end - t)
        if not np.all(np.isfinite(y)):
            raise NumericalError(f"non-finite state at t={t_end}")
        times.append(t_end)
        states.append(y)
    return Trajectory(np.array(times), np.array(states))


def _sl_matrices(weight, a, b, intervals, dirichlet):
    h = (b - a) / intervals
    nodes = a + h * np.arange(intervals + 1)
    mids = 0.5 * (nodes[1:] + nodes[:-1])
    p_half = np.asarray(weight(mids), dtype=float)
    if np.any(p_half <= 0):
        raise ValueError("weight must be positive inside the interval")
    # node i couples to i-1 via p_half[i-1] and to i+1 via p_half[i]
    diag = np.zeros(intervals + 1)
    diag[1:] += p_half
    diag[:-1] += p_half
    diag /= h
    off = -p_half / h
    mass = np.zeros(intervals + 1)
    mass[1:] += 0.5 * h * p_half
    mass[:-1] += 0.5 * h * p_half
    keep = np.ones(intervals + 1, dtype=bool)
    if dirichlet[0]:
        keep[0] = False
    if dirichlet[1]:
        keep[-1] = False
    idx = np.flatnonzero(keep)
    d = diag[idx]
    e = off[idx[:-1]]  # consecutive kept nodes are adjacent
    m = mass[idx]
    return nodes, idx, d, e, m


def _sl_smallest(weight, a, b, intervals, dirichlet):
    nodes, idx, d, e, m = _sl_matrices(weight, a, b, intervals, dirichlet)
    s = 1.0 / np.sqrt(m)
    w, v = scipy.linalg.eigh_tridiagonal(d * s * s, e * s[:-1] * s[1:], select="i", select_range=(0, 0))
    u = np.zeros_like(nodes)
    u[idx] = v[:, 0] * s
    u /= u[np.argmax(np.abs(u))]
    return float(w[0]), nodes, u


def min_eigen_sturm_liouville(weight, a: float, b: float, gridpoints: int = 2000,
                              dirichlet: tuple[bool, bool] = (True, True), extrapolate: bool = True):
    """Smallest eigenvalue of ``-(p u')' = mu p u`` on ``[a, b]``, ``p = weight``.

    Three-point finite-volume discretisation on ``gridpoints`` intervals; an end
    flagged ``False`` in ``dirichlet`` carries the natural (zero-flux)
    condition, which is the right one at a cone point where the weight
    vanishes. With ``extrapolate`` the value is Richardson-extrapolated from the
    grids with ``gridpoints`` and ``2 * gridpoints`` intervals.

    Returns ``(mu, (nodes, mode))`` with the mode normalised to max 1.
    """
    if gridpoints < 16:
        raise ValueError("gridpoints must be >= 16")
    mu_h, nodes, mode = _sl_smallest(weight, a, b, gridpoints, dirichlet)
    if not extrapolate:
        return mu_h, (nodes, mode)
    mu_h2, nodes, mode = _sl_smallest(weight, a, b, 2 * gridpoints, dirichlet)
    return (4.0 * mu_h2 - mu_h) / 3.0, (nodes, mode)


def min_eigen_grid(stiffness, mass) -> float:
    """Smallest generalised eigenvalue of a sparse SPD pencil ``K u = mu M u``.

    Shift-invert Lanczos around zero with an all-ones start vector, so repeated
    runs are bit-identical.
    """
    n = stiffness.shape[0]
    if mass.ndim == 1:
        mass = scipy.sparse.diags(mass)
    try:
        vals = scipy.sparse.linalg.eigsh(
            stiffness.tocsc(), k=1, M=mass.tocsc(), sigma=0.0, which="LM", v0=np.ones(n), tol=1e-12
        )[0]
    except scipy.sparse.linalg.ArpackNoConvergence as exc:  # pragma: no cover
        raise NumericalError("eigen-solver did not converge") from exc
    return float(vals[0])
