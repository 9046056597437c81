"""Comparison functions and constants for lower Ricci / mean-curvature bounds.

Everything here is a function of ``ComparisonParams`` ``(n, kappa, lam)``:
``Ric >= (n-1) kappa`` in the interior and ``H >= lam`` on the boundary.
Extended reals are plain floats with ``math.inf``; the only places that accept
an infinite argument are the cut radius and the ``D = inf`` constants of the
exponential-cusp case, which use closed forms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .numerics import DEFAULT_TOL, cumulative_gauss_legendre, golden_max, integrate, scan_sup

SCAN_POINTS = 4096
_EDGE = 1e-9  # scans stop at D - _EDGE * D, away from a vanishing denominator


@dataclass(frozen=True)
class ComparisonParams:
    n: int
    kappa: float
    lam: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n}")
        if not (math.isfinite(self.kappa) and math.isfinite(self.lam)):
            raise ValueError("kappa and lambda must be finite")

    @property
    def root_k(self) -> float:
        return math.sqrt(abs(self.kappa))

    @property
    def is_cusp(self) -> bool:
        """kappa < 0 and lambda = sqrt|kappa|: the exponential-cusp model."""
        return self.kappa < 0 and math.isclose(self.lam, self.root_k, rel_tol=1e-14, abs_tol=0.0)


class ModelCase(enum.Enum):
    BALL_CAP = "BallCap"
    BALL_COMPLEMENT = "BallComplement"
    EXPONENTIAL_CUSP = "ExponentialCusp"
    HYPERBOLIC_COLLAR = "HyperbolicCollar"
    EUCLIDEAN_HALF = "EuclideanHalf"


@dataclass(frozen=True)
class ModelSpaceDescriptor:
    params: ComparisonParams
    case: ModelCase
    radius_parameter: float | None = None


def model_space(params: ComparisonParams) -> ModelSpaceDescriptor:
    k, lam, a = params.kappa, params.lam, params.root_k
    if k > 0 or lam > a:
        return ModelSpaceDescriptor(params, ModelCase.BALL_CAP, cut_radius(params))
    if lam < -a:
        return ModelSpaceDescriptor(params, ModelCase.BALL_COMPLEMENT, cut_radius(ComparisonParams(params.n, k, -lam)))
    if abs(lam) == a:
        case = ModelCase.EUCLIDEAN_HALF if k == 0 else ModelCase.EXPONENTIAL_CUSP
        return ModelSpaceDescriptor(params, case)
    return ModelSpaceDescriptor(params, ModelCase.HYPERBOLIC_COLLAR, collar_offset(k, lam))


def s_point(kappa: float, t):
    """Solution of ``f'' + kappa f = 0`` with ``f(0)=0, f'(0)=1`` and its derivative."""
    t = np.asarray(t, dtype=float)
    if kappa > 0:
        a = math.sqrt(kappa)
        val, der = np.sin(a * t) / a, np.cos(a * t)
    elif kappa < 0:
        a = math.sqrt(-kappa)
        val, der = np.sinh(a * t) / a, np.cosh(a * t)
    else:
        val, der = t.copy(), np.ones_like(t)
    return _unwrap(val), _unwrap(der)


def s_boundary(params: ComparisonParams, t):
    """``s_{kappa,lam}`` (``f(0)=1, f'(0)=-lam``) and its derivative."""
    t = np.asarray(t, dtype=float)
    k, lam = params.kappa, params.lam
    if k > 0:
        a = math.sqrt(k)
        c, s = np.cos(a * t), np.sin(a * t)
        val = c - (lam / a) * s
        der = -a * s - lam * c
    elif k < 0:
        # exponential form avoids cosh - sinh cancellation in the cusp case
        a = math.sqrt(-k)
        ep, em = 0.5 * (1.0 - lam / a), 0.5 * (1.0 + lam / a)
        grow = np.exp(a * t) if ep != 0 else np.zeros_like(t)
        decay = np.exp(-a * t)
        val = ep * grow + em * decay
        der = a * (ep * grow - em * decay)
    else:
        val = 1.0 - lam * t
        der = np.full_like(t, -lam)
    return _unwrap(val), _unwrap(der)


def s_value(params: ComparisonParams, t):
    return s_boundary(params, t)[0]


def ball_condition(kappa: float, lam: float) -> bool:
    if kappa > 0:
        return True
    if kappa == 0:
        return lam > 0
    return lam > math.sqrt(-kappa)


def cut_radius(params: ComparisonParams) -> float:
    """First positive zero of ``s_{kappa,lam}``, or ``inf`` without the ball-condition."""
    k, lam = params.kappa, params.lam
    if not ball_condition(k, lam):
        return math.inf
    if k > 0:
        a = math.sqrt(k)
        # cos(a t) = (lam/a) sin(a t): first positive solution lies in (0, pi/a)
        return math.atan2(a, lam) / a
    if k == 0:
        return 1.0 / lam
    a = math.sqrt(-k)
    return math.atanh(a / lam) / a


def s_bar(params: ComparisonParams, t):
    """``s_{kappa,lam}`` on ``[0, C)`` extended by zero beyond the cut radius."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("s_bar is defined for t >= 0 only")
    c = cut_radius(params)
    val = np.where(t_arr < c, np.asarray(s_value(params, t_arr)), 0.0)
    return _unwrap(val)


def critical_point(params: ComparisonParams) -> float | None:
    """Unique positive zero of ``s'_{kappa,lam}`` before the cut radius, if any."""
    k, lam = params.kappa, params.lam
    if k > 0 and lam < 0:
        a = math.sqrt(k)
        return math.atan(-lam / a) / a
    if k < 0 and 0 < lam < math.sqrt(-k):
        a = math.sqrt(-k)
        return math.atanh(lam / a) / a
    return None


def power_s(params: ComparisonParams, t, power: float):
    """``s^power`` with s clipped at zero (only nonnegative arguments of s occur here)."""
    return np.maximum(np.asarray(s_value(params, t)), 0.0) ** power


def f_profile(params: ComparisonParams, r: float) -> float:
    """``int_0^r sbar^{n-1}``: the model tube volume per unit boundary volume."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    upper = min(r, cut_radius(params))
    m = params.n - 1
    return integrate(lambda u: float(power_s(params, u, m)), 0.0, upper)


def collar_offset(kappa: float, lam: float) -> float:
    """Solution of ``s'_{kappa,0}/s_{kappa,0} = -lam`` in the hyperbolic-collar case."""
    if not (kappa < 0 and abs(lam) < math.sqrt(-kappa)):
        raise ValueError("collar offset needs kappa < 0 and |lambda| < sqrt|kappa|")
    a = math.sqrt(-kappa)
    return math.atanh(-lam / a) / a


def _check_D(params: ComparisonParams, D: float, allow_inf: bool) -> float:
    c = cut_radius(params)
    if not D > 0:
        raise ValueError(f"D must be positive, got {D}")
    if math.isinf(D):
        if not allow_inf:
            raise ValueError("D must be finite here")
        if not params.is_cusp:
            raise ValueError("D = inf is admissible only for kappa < 0, lambda = sqrt|kappa|")
        return D
    if D > c * (1 + 1e-12):
        raise ValueError(f"D={D} exceeds the cut radius {c}")
    return min(D, c)


_GL20 = np.polynomial.legendre.leggauss(20)


def _short_gl(f, a: float, b: float) -> float:
    # refinement stays inside one or two scan cells, where 20 Gauss nodes are exact to rounding
    if b <= a:
        return 0.0
    x, w = _GL20
    half = 0.5 * (b - a)
    return float(np.dot(w, f(0.5 * (a + b) + half * x)) * half)


def tail_ratio_sup(params: ComparisonParams, lo: float, hi: float) -> tuple[float, float]:
    """``sup_{t in [lo, hi)} int_t^hi s^{n-1} / s^{n-1}(t)`` and its maximiser."""
    m = params.n - 1
    if hi <= lo:
        return lo, 0.0
    end = hi - _EDGE * (hi - lo)
    grid = np.linspace(lo, end, SCAN_POINTS)
    # tails[i] = int_{grid[i]}^{hi}, accumulated cell by cell from the top
    nodes = np.concatenate([grid, [hi]])
    cum = cumulative_gauss_legendre(lambda u: power_s(params, u, m), nodes)
    tails = cum[-1] - cum[:-1]
    vals = tails / power_s(params, grid, m)

    def scalar(t):
        j = min(int(np.searchsorted(nodes, t)), len(nodes) - 1)
        tail = cum[-1] - cum[j] + _short_gl(lambda u: power_s(params, u, m), t, nodes[j])
        return tail / float(power_s(params, t, m))

    order = np.argsort(-vals, kind="stable")[:3]
    best_t, best = grid[order[0]], vals[order[0]]
    for k in order:
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        t, v = golden_max(scalar, a, b)
        if v > best:
            best_t, best = t, v
    return float(best_t), float(best)


def dirichlet_constant(params: ComparisonParams, D: float, method: str = "auto") -> float:
    """``C(n, kappa, lam, D) = sup_{[0,D)} int_t^D s^{n-1} / s^{n-1}(t)``.

    ``method="auto"`` uses the closed form in the cusp case (required for
    ``D = inf``); ``"scan"`` forces the numerical supremum.
    """
    D = _check_D(params, D, allow_inf=(method == "auto"))
    if params.is_cusp and method == "auto":
        c = (params.n - 1) * params.lam
        return -math.expm1(-c * D) / c if math.isfinite(D) else 1.0 / c
    return tail_ratio_sup(params, 0.0, D)[1]


def isoperimetric_factor(params: ComparisonParams, d1: float, d2: float) -> float:
    """Sup factor of the volume estimate for a domain with ``d1 < rho < d2``."""
    if d2 <= d1:
        return 0.0
    return tail_ratio_sup(params, d1, d2)[1]


def segment_constant(params: ComparisonParams, D: float) -> float:
    """``C_1 = sup_{0<t<l<D} (s(l)/s(t))^{n-1}``.

    ``s`` solves ``s'' = -kappa s`` and is nonnegative on ``[0, D]``, so ``s'``
    is monotone there and ``s`` is unimodal: the supremum is attained at
    ``l = D`` against the minimum (convex case) or at the maximum of ``s``
    against ``s(0) = 1`` (concave case).
    """
    D = _check_D(params, D, allow_inf=False)
    m = params.n - 1
    _, d0 = s_boundary(params, 0.0)
    _, dD = s_boundary(params, D)
    if d0 <= 0 and dD <= 0:
        return 1.0
    t_star = critical_point(params)
    cands = [0.0, D] + ([t_star] if t_star is not None and 0 < t_star < D else [])
    vals = [float(s_value(params, c)) for c in cands]
    if params.kappa > 0:
        ratio = max(vals)  # running minimum is min(1, s(l)) so the sup is max s
    elif params.kappa < 0:
        ratio = float(s_value(params, D)) / min(vals)
    else:
        ratio = max(1.0, float(s_value(params, D)))
    return max(1.0, ratio) ** m


def kasue_bar_mu(params: ComparisonParams, D: float, method: str = "auto") -> float:
    """``(4 sup_{(0,D)} int_t^D s^{n-1} * int_0^t s^{1-n})^{-1}``."""
    D = _check_D(params, D, allow_inf=False)
    m = params.n - 1
    if params.is_cusp and method == "auto":
        c = m * params.lam
        return (c / 2.0) ** 2 / (-math.expm1(-c * D / 2.0)) ** 2
    end = D - _EDGE * D
    grid = np.linspace(0.0, end, SCAN_POINTS)
    nodes = np.concatenate([grid, [D]])
    cum_up = cumulative_gauss_legendre(lambda u: power_s(params, u, m), nodes)
    tails = cum_up[-1] - cum_up[:-1]
    heads = cumulative_gauss_legendre(lambda u: power_s(params, u, -m), grid)
    if not np.all(np.isfinite(heads)):
        raise ValueError("s vanishes inside (0, D)")

    def scalar(t):
        j = min(int(np.searchsorted(nodes, t)), len(nodes) - 1)
        i = max(int(np.searchsorted(grid, t, side="right")) - 1, 0)
        tail = cum_up[-1] - cum_up[j] + _short_gl(lambda u: power_s(params, u, m), t, nodes[j])
        head = heads[i] + _short_gl(lambda u: power_s(params, u, -m), grid[i], t)
        return tail * head

    _, best = scan_sup(lambda g: np.interp(g, grid, tails * heads), 0.0, end, SCAN_POINTS, 3, scalar)
    return 1.0 / (4.0 * best)


def eigen_lower_bound(params: ComparisonParams, D: float, p: float, variant: str) -> float:
    """Lower bounds for the first Dirichlet p-eigenvalue.

    ``dirichlet``: ``(p C)^{-p}``; ``segment``: ``(p C_1 D)^{-p}``;
    ``rigid``: ``((n-1) lam / p)^p`` in the cusp case.
    """
    if not p > 1:
        raise ValueError("p must exceed 1")
    if variant == "dirichlet":
        return (p * dirichlet_constant(params, D)) ** (-p)
    if variant == "segment":
        return (p * segment_constant(params, D) * D) ** (-p)
    if variant == "rigid":
        if not params.is_cusp:
            raise ValueError("rigid bound needs kappa < 0 and lambda = sqrt|kappa|")
        return ((params.n - 1) * params.lam / p) ** p
    raise ValueError(f"unknown variant {variant!r}")


def phi_profile(params: ComparisonParams, t):
    """``t exp((n-1) lam t / 2)``, the radial ground state of the cusp model."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("phi_profile is defined for t >= 0")
    return _unwrap(t * np.exp((params.n - 1) * params.lam * t / 2.0))


def model_ratio(params: ComparisonParams, r: float, R: float) -> float:
    """Model tube-volume ratio ``f(R) / f(r)``."""
    if not (0 < r <= R):
        raise ValueError(f"need 0 < r <= R, got r={r}, R={R}")
    if r == R:
        return 1.0
    return f_profile(params, R) / f_profile(params, r)


def interval_extrema(params: ComparisonParams, a, b):
    """Elementwise ``(inf, sup)`` of ``s^{n-1}`` over ``[a, b]`` for arrays of intervals."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = params.n - 1
    va, vb = power_s(params, a, m), power_s(params, b, m)
    lo, hi = np.minimum(va, vb), np.maximum(va, vb)
    t_star = critical_point(params)
    if t_star is not None:
        inside = (a < t_star) & (t_star < b)
        vs = float(power_s(params, t_star, m))
        lo = np.where(inside, np.minimum(lo, vs), lo)
        hi = np.where(inside, np.maximum(hi, vs), hi)
    return lo, hi


def _unwrap(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x
