"""Margin-based checks of the comparison inequalities, plus rigidity detection.

Every check evaluates inequalities ``lhs <= rhs`` on samples and records the
margins ``rhs - lhs`` (nonnegative = satisfied) with a tolerance composed from
the error budgets of the stages that produced the numbers:

* closed forms and adaptive quadrature on warped tubes: ``QUAD_REL`` relative;
* Jacobi-field ODE tables on chart surfaces: ``ODE_REL`` relative;
* cut times read off the eikonal grid: ``bundle.tau_error`` times the Jacobian
  mass that can move across the cut (:func:`_cut_budget`);
* eigenvalues: the gap between two grid resolutions.

A report passes iff ``worst_margin >= -tolerance``. The worst component is the
one with the smallest ``margin + tolerance``, so the report status is the
conjunction of the component statuses.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .expr import as_expr
from .manifolds import CertifiedManifold, Topology, WarpedTube, gauss_boundary_ricci_sides
from .numerics import scan_sup
from .tube_geometry import (
    RadialBand,
    RadialProfile,
    boundary_values,
    dirichlet_eigen_estimate,
    extension_preimage_volume,
    integrate_excursion,
    integrate_expression,
    integrate_radial,
    rayleigh_quotient,
    tube_volume,
    tube_volume_error,
)

QUAD_REL = 1e-9
ODE_REL = 1e-8
SERIES_CUTOFF = 1e-14
VANISH_TOL = 1e-9

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"

CHECK_NAMES = (
    "log_jacobian",
    "relative_jacobian",
    "volume_comparison",
    "heintze_karcher",
    "volume_growth",
    "inscribed_radius",
    "measure_contraction",
    "annulus_chain",
    "segment",
    "poincare",
    "isoperimetric",
    "eigen_bounds",
    "gauss_identity",
)


@dataclass
class CheckReport:
    check: str
    name: str
    params: dict
    worst_margin: float
    worst_location: dict
    tolerance: float
    status: str
    samples: int
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "name": self.name,
            "params": dict(self.params),
            "worst_margin": self.worst_margin,
            "worst_location": dict(self.worst_location),
            "tolerance": self.tolerance,
            "status": self.status,
            "samples": self.samples,
            "details": self.details,
        }


@dataclass
class RigidityVerdict:
    kind: str  # none | warped_product_on_ball | ball_space_form | volume_growth_splitting
    radius: float | None
    sup_deviation: float
    tolerance: float
    r_examined: float
    supporting_checks: list
    conditions: dict

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "radius": self.radius,
            "sup_deviation": self.sup_deviation,
            "tolerance": self.tolerance,
            "r_examined": self.r_examined,
            "supporting_checks": list(self.supporting_checks),
            "conditions": dict(self.conditions),
        }


class _Collector:
    """Accumulates margin arrays and keeps the component closest to failing."""

    def __init__(self, check: str, cm: CertifiedManifold, name: str | None = None, tol_scale: float = 1.0, **extra):
        self.check = check
        self.name = name or check
        p = cm.params
        self.params = {"n": p.n, "kappa": p.kappa, "lam": p.lam, **extra}
        self.tol_scale = tol_scale
        self.best = None
        self.samples = 0
        self.components = {}

    def add(self, label: str, margins, tol, locate=None):
        m = np.asarray(margins, dtype=float)
        if m.size == 0:
            return
        m = np.where(np.isnan(m), -np.inf, m)
        tl = np.broadcast_to(np.asarray(tol, dtype=float) * self.tol_scale, m.shape)
        with np.errstate(invalid="ignore"):
            key = m + tl
        i = np.unravel_index(int(np.argmin(key)), m.shape)
        self.samples += int(m.size)
        prev = self.components.get(label)
        if prev is None or m[i] + tl[i] < prev["margin"] + prev["tolerance"]:
            self.components[label] = {"margin": float(m[i]), "tolerance": float(tl[i])}
        if self.best is None or key[i] < self.best[0]:
            loc = {"component": label}
            if locate is not None:
                loc.update({k: _plain(v) for k, v in locate(i).items()})
            self.best = (float(key[i]), float(m[i]), float(tl[i]), loc)

    def report(self, **details) -> CheckReport:
        details = {"components": self.components, **details}
        if self.best is None:
            return _skipped(self.check, self.name, self.params, "no applicable samples", details)
        _, margin, tol, loc = self.best
        status = PASS if margin >= -tol else FAIL
        return CheckReport(self.check, self.name, self.params, margin, loc, tol, status, self.samples, details)


def _plain(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _skipped(check, name, params, reason, details=None) -> CheckReport:
    return CheckReport(check, name, dict(params), 0.0, {}, 0.0, SKIPPED, 0, {"reason": reason, **(details or {})})


def _param_dict(cm: CertifiedManifold, **extra) -> dict:
    p = cm.params
    return {"n": p.n, "kappa": p.kappa, "lam": p.lam, **extra}


# --- helpers -------------------------------------------------------------------------

def _S(params, u):
    return kernels.power_s(params, u, params.n - 1)


def _rel(cm: CertifiedManifold) -> float:
    return ODE_REL if cm.is_chart else QUAD_REL


def _cut_budget(side, r: float) -> float:
    """Jacobian mass that a cut-time error can move across radius ``r``."""
    if not side.tau_error:
        return 0.0
    near = side.tau < r + side.tau_error
    if not np.any(near):
        return 0.0
    u = side.tau[:, None] * np.linspace(0.0, 1.0, 33)[None, :]
    peak = np.max(np.abs(side.theta(u)), axis=1)
    return float(np.sum(np.where(near, side.weights * peak, 0.0))) * side.tau_error


def _ray_upper(side, cbar: float) -> np.ndarray:
    """Per-ray end of the comparison range: first conjugate value, exit, cut radius."""
    return np.minimum(np.minimum(side.tau1, side.end), cbar)


def _where(side, k, u) -> dict:
    return {"side": side.label, "x": float(side.xs[k]), "t": float(u)}


def inscribed_D(cm: CertifiedManifold, D: float | None = None) -> float:
    """Inscribed radius (or an override) clipped to the cut radius; constants need ``D <= C``."""
    if D is not None:
        if D < cm.bundle.inscribed_radius - cm.bundle.tau_error:
            raise ValueError(f"D={D} is below the computed inscribed radius {cm.bundle.inscribed_radius:.6g}")
        return min(D, kernels.cut_radius(cm.params))
    return min(cm.bundle.inscribed_radius, kernels.cut_radius(cm.params))


def default_band(cm: CertifiedManifold) -> RadialBand:
    d = min(cm.bundle.inscribed_radius, 2.0)
    return RadialBand(0.25 * d, 0.75 * d)


def _volume_radii(cm: CertifiedManifold, count: int = 16) -> np.ndarray:
    rmax = min(cm.bundle.inscribed_radius, 2.0 * kernels.cut_radius(cm.params))
    return np.geomspace(rmax / 100.0, rmax, count)


def _volume_data(cm: CertifiedManifold, radii):
    V = np.array([tube_volume(cm, r) for r in radii])
    err = np.array([tube_volume_error(cm, r) for r in radii])
    f = np.array([kernels.f_profile(cm.params, r) for r in radii])
    return V, err, f


# --- Jacobian comparisons ----------------------------------------------------------------

def check_log_jacobian(cm: CertifiedManifold, tol_scale: float = 1.0) -> CheckReport:
    """``theta'/theta <= (n-1) s'/s`` on ``[h, min(tau1, C) - h]``; doubles as the Laplacian check."""
    p = cm.params
    n1 = p.n - 1
    cbar = kernels.cut_radius(p)
    h = cm.resolution.step
    col = _Collector("log_jacobian", cm, tol_scale=tol_scale)
    for side in cm.bundle.sides:
        upper = _ray_upper(side, cbar) - h
        if side.uniform:
            if upper[0] <= h:
                continue
            u = np.linspace(h, upper[0], 257)
            dl = side.dlog_theta(u)[0]
            s, ds = kernels.s_boundary(p, u)
            kern = n1 * ds / s
            col.add(side.label, kern - dl, QUAD_REL * (1.0 + np.abs(kern) + np.abs(dl)),
                    lambda i, u=u, side=side: _where(side, 0, u[i[0]]))
        else:
            stride = max(1, (len(side.times) - 1) // 512)
            idx = np.arange(1, len(side.times), stride)
            u = side.times[idx]
            mask = u[None, :] <= upper[:, None]
            y = side.y[:, idx]
            with np.errstate(divide="ignore", invalid="ignore"):
                dl = np.where(mask, side.dy[:, idx] / y, 0.0)
            s, ds = kernels.s_boundary(p, u)
            kern = np.broadcast_to(n1 * ds / s, dl.shape)
            marg = np.where(mask, kern - dl, np.inf)
            col.add(side.label, marg, ODE_REL * (1.0 + np.abs(kern) + np.abs(dl)),
                    lambda i, u=u, side=side: _where(side, i[0], u[i[1]]))
    return col.report()


def check_relative_jacobian(cm: CertifiedManifold, points: int = 65, tol_scale: float = 1.0) -> CheckReport:
    """``theta(t)/theta(s) <= S(t)/S(s)`` for ``s <= t``, ``theta <= S`` and ``tau1 <= C``."""
    p = cm.params
    cbar = kernels.cut_radius(p)
    h = cm.resolution.step
    rel = _rel(cm)
    col = _Collector("relative_jacobian", cm, tol_scale=tol_scale)
    lin = np.linspace(0.0, 1.0, points)
    tri = np.triu(np.ones((points, points), dtype=bool), 1)
    for side in cm.bundle.sides:
        top = np.maximum(_ray_upper(side, cbar) - h, 0.0)
        if side.uniform:
            u = (top[0] * lin)[None, :]
            th = side.theta(u[0])
        else:
            u = top[:, None] * lin[None, :]
            th = side.theta(u)
        S = _S(p, u)
        a = th[:, :, None] * S[:, None, :]  # theta(s) S(t), s = row, t = column
        b = th[:, None, :] * S[:, :, None]  # theta(t) S(s)
        marg = np.where(tri[None], a - b, np.inf)

        def loc_pair(i, u=u, side=side):
            return {"side": side.label, "x": float(side.xs[i[0]]), "s": float(u[i[0], i[1]]),
                    "t": float(u[i[0], i[2]])}

        col.add(side.label + ":ratio", marg, rel * (np.abs(a) + np.abs(b)) + 1e-300, loc_pair)
        col.add(side.label + ":absolute", S - th, rel * (1.0 + np.abs(S)),
                lambda i, u=u, side=side: _where(side, i[0], u[i[0], i[1]]))
        if math.isfinite(cbar):
            reach = np.minimum(side.tau1, side.end)
            col.add(side.label + ":conjugate", cbar - reach, np.full(reach.shape, h),
                    lambda i, side=side, reach=reach: _where(side, i[0], reach[i[0]]))
    return col.report()


# --- volumes -----------------------------------------------------------------------------

def check_volume_comparison(cm: CertifiedManifold, tol_scale: float = 1.0) -> CheckReport:
    radii = _volume_radii(cm)
    V, err, f = _volume_data(cm, radii)
    col = _Collector("volume_comparison", cm, tol_scale=tol_scale, r_max=float(radii[-1]))
    i, j = np.triu_indices(len(radii), 1)
    model = f[j] / f[i]
    actual = V[j] / V[i]
    tol = actual * (err[i] / V[i] + err[j] / V[j]) + QUAD_REL * model
    col.add("ratio", model - actual, tol, lambda k: {"r": float(radii[i[k]]), "R": float(radii[j[k]])})
    return col.report(radii=radii.tolist(), volumes=V.tolist())


def check_heintze_karcher(cm: CertifiedManifold, tol_scale: float = 1.0) -> CheckReport:
    radii = _volume_radii(cm)
    V, err, f = _volume_data(cm, radii)
    area = cm.bundle.boundary_volume
    col = _Collector("heintze_karcher", cm, tol_scale=tol_scale, r_max=float(radii[-1]))
    col.add("absolute", area * f - V, err + QUAD_REL * area * f, lambda k: {"r": float(radii[k[0]])})
    return col.report()


def check_volume_growth(cm: CertifiedManifold, tol_scale: float = 1.0) -> CheckReport:
    radii = _volume_radii(cm)
    V, err, f = _volume_data(cm, radii)
    area = cm.bundle.boundary_volume
    col = _Collector("volume_growth", cm, tol_scale=tol_scale, r_max=float(radii[-1]))
    col.add("growth", area - V / f, err / f + QUAD_REL * area, lambda k: {"r": float(radii[k[0]])})
    return col.report()


def check_inscribed_radius(cm: CertifiedManifold, tol_scale: float = 1.0) -> CheckReport:
    p = cm.params
    if not kernels.ball_condition(p.kappa, p.lam):
        return _skipped("inscribed_radius", "inscribed_radius", _param_dict(cm), "ball-condition fails")
    cbar = kernels.cut_radius(p)
    D = cm.bundle.inscribed_radius
    col = _Collector("inscribed_radius", cm, tol_scale=tol_scale)
    col.add("radius", np.array([cbar - D]), cm.bundle.tau_error + QUAD_REL * cbar, lambda k: {"r": D})
    return col.report(inscribed_radius=D, cut_radius=cbar)


def check_measure_contraction(cm: CertifiedManifold, t: float, band: RadialBand | None = None,
                              tol_scale: float = 1.0) -> CheckReport:
    """Preimage volume under the t-extension map against the contraction integral."""
    band = band or default_band(cm)
    p = cm.params
    name = f"measure_contraction[t={t:g}]"
    col = _Collector("measure_contraction", cm, name, tol_scale, t=t, band=[band.inner, band.outer])
    lhs = extension_preimage_volume(cm, t, band)

    def g(u):
        u = np.asarray(u, dtype=float)
        den = _S(p, u)
        ok = den > 0
        return np.where(ok, _S(p, t * u) / np.where(ok, den, 1.0), 0.0)

    rhs = 0.0
    budget = 0.0
    for side in cm.bundle.sides:
        hi = np.minimum(band.outer, side.tau)
        rhs += t * float(np.sum(side.weights * side.integral(band.inner, hi, g)))
        budget += (1.0 + t) * _cut_budget(side, band.outer)
    tol = _rel(cm) * (abs(lhs) + abs(rhs)) + budget
    col.add("contraction", np.array([lhs - rhs]), tol, lambda k: {"r": band.inner, "R": band.outer})
    return col.report(lhs=lhs, rhs=rhs)


def _ratio_inf(params, t: float, a: float, b: float) -> float:
    """``inf_{s in (a, b)} S(t s) / S(s)``."""

    def neg(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = _S(params, t * s) / _S(params, s)
        return np.where(np.isfinite(v), -v, -np.inf)

    return -scan_sup(neg, a, b, 1025, 3)[1]


def chain_bound(params, r: float, R: float, N: int) -> float:
    """Discrete volume-ratio bound on the geometric partition with ratio ``(r/R)^{1/N}``.

    ``sum_{j>=1} t^j sup_{I_j} S / sum_{i>=N+1} t^i inf_{I_i} S`` with
    ``I_j = (t^j R, t^{j-1} R)``; series are cut once ``t^j`` drops below
    ``SERIES_CUTOFF``.
    """
    t = (r / R) ** (1.0 / N)
    terms = int(math.ceil(math.log(SERIES_CUTOFF) / math.log(t))) + N + 1
    j = np.arange(1, terms + 1, dtype=float)
    tj = t**j
    lo, hi = kernels.interval_extrema(params, tj * R, tj / t * R)
    num = float(np.sum(tj * hi))
    den = float(np.sum((tj * lo)[N:]))
    return num / den


def check_annulus_chain(cm: CertifiedManifold, t: float = 0.5, band: RadialBand | None = None,
                        k_max: int = 6, levels=range(4, 13), tol_scale: float = 1.0) -> CheckReport:
    """Annulus-to-annulus, annulus-to-ball and ball-to-ball discrete bounds, plus the refinement limit."""
    band = band or default_band(cm)
    p = cm.params
    r, R = band.inner, band.outer
    col = _Collector("annulus_chain", cm, tol_scale=tol_scale, t=t, band=[r, R], k_max=k_max)

    def vol(x):
        return tube_volume(cm, x), tube_volume_error(cm, x)

    (Vr, er), (VR, eR) = vol(r), vol(R)
    A, eA = VR - Vr, er + eR

    # annulus against its t-scaled copy
    (Vtr, etr), (VtR, etR) = vol(t * r), vol(t * R)
    At, eAt = VtR - Vtr, etr + etR
    bound = 1.0 / (t * _ratio_inf(p, t, r, R))
    ratio = A / At
    col.add("annulus_scaling", np.array([bound - ratio]),
            ratio * (eA / A + eAt / At) + QUAD_REL * bound, lambda k: {"r": r, "R": R})

    # annulus against the ball of radius t'^k R, t' = r/R
    tp = r / R
    imax = int(math.ceil(math.log(SERIES_CUTOFF) / math.log(tp))) + k_max + 1
    infs = np.array([tp**i * _ratio_inf(p, tp**i, r, R) for i in range(1, imax + 1)])
    tails = np.cumsum(infs[::-1])[::-1]
    marg, tol = [], []
    for k in range(1, k_max + 1):
        VB, eB = vol(tp**k * R)
        ratio = A / VB
        marg.append(1.0 / tails[k - 1] - ratio)
        tol.append(ratio * (eA / A + eB / VB) + QUAD_REL / tails[k - 1])
    col.add("annulus_ball", np.array(marg), np.array(tol), lambda k: {"r": tp ** (k[0] + 1) * R, "k": k[0] + 1})

    # ball against ball on refined geometric partitions
    true_ratio = VR / Vr
    t_err = true_ratio * (er / Vr + eR / VR)
    Ns = [2**k for k in levels]
    bounds = np.array([chain_bound(p, r, R, N) for N in Ns])
    col.add("ball_ratio", bounds - true_ratio, t_err + QUAD_REL * bounds, lambda k: {"N": Ns[k[0]]})
    if len(bounds) > 1:
        col.add("refinement_monotone", bounds[:-1] - bounds[1:], QUAD_REL * bounds[:-1],
                lambda k: {"N": Ns[k[0] + 1]})
    model = kernels.model_ratio(p, r, R)
    gap = bounds[-1] - model
    col.add("refinement_limit", np.array([0.01 * model - gap]), QUAD_REL * model, lambda k: {"N": Ns[-1]})
    return col.report(bounds=dict(zip(map(str, Ns), bounds.tolist())), true_ratio=true_ratio,
                      model_ratio=model)


# --- integral inequalities on compact manifolds ------------------------------------------

def _sample_function(cm: CertifiedManifold, f, points: int = 65) -> np.ndarray:
    f = as_expr(f)
    lin = np.linspace(0.0, 1.0, points)
    out = []
    for side in cm.bundle.sides:
        if side.uniform:
            T, X = np.broadcast_arrays(*side.point(float(side.tau[0]) * lin))
        else:
            T, X = side.point(side.tau[:, None] * lin[None, :])
        out.append(np.ravel(f(T, X)))
    return np.concatenate(out)


def _x_allowed(cm: CertifiedManifold) -> bool:
    return cm.is_chart or cm.manifold.fiber.dim == 1


def default_segment_specs(cm: CertifiedManifold) -> list:
    return ["1", "0", "1+0.5*sin(x)"] if _x_allowed(cm) else ["1", "0", "1+0.5*t"]


def check_segment(cm: CertifiedManifold, f_specs=None, D: float | None = None, tol_scale: float = 1.0) -> CheckReport:
    """Excursion integral against ``C_1 D int f``."""
    if not cm.compact:
        return _skipped("segment", "segment", _param_dict(cm), "manifold is not compact")
    f_specs = list(f_specs) if f_specs is not None else default_segment_specs(cm)
    p = cm.params
    D = inscribed_D(cm, D)
    c1 = kernels.segment_constant(p, D)
    col = _Collector("segment", cm, tol_scale=tol_scale, D=D)
    b = cm.bundle
    sides_budget = sum(_cut_budget(s, D) for s in b.sides)
    values = {}
    for spec in f_specs:
        vals = _sample_function(cm, spec)
        if np.min(vals) < 0:
            raise ValueError(f"segment check needs f >= 0, {spec!r} takes the value {np.min(vals):.3g}")
        lhs, mass = integrate_excursion(cm, spec)
        rhs = c1 * D * mass
        fmax = float(np.max(np.abs(vals)))
        tol = _rel(cm) * (abs(lhs) + abs(rhs)) + 1e-7 * (abs(lhs) + abs(rhs)) + sides_budget * fmax * D * (1.0 + c1)
        col.add(spec, np.array([rhs - lhs]), tol, lambda k, spec=spec: {"f": spec})
        values[spec] = {"lhs": lhs, "rhs": rhs}
    return col.report(C1=c1, values=values)


def default_poincare_specs(cm: CertifiedManifold, D: float | None = None) -> list:
    m = cm.manifold
    D = inscribed_D(cm, D)
    radial = ["radial:t", f"radial:sin({math.pi / (2 * D)!r}*t)"]
    if isinstance(m, WarpedTube):
        sym = f"t*({m.length!r}-t)" if m.topology is Topology.CYLINDER else "t"
    else:
        sym = f"(t-({m.beta_low.source}))*(({m.beta_high.source})-t)"
    return radial + [sym, "0"]


def check_poincare(cm: CertifiedManifold, psi_specs=None, D: float | None = None, tol_scale: float = 1.0) -> CheckReport:
    """``int |psi| <= C_1 D int |grad psi|`` for functions vanishing on the boundary.

    Specs prefixed ``radial:`` are profiles ``phi(rho)`` with ``t`` standing for
    ``rho``; other specs are functions of the chart coordinates.
    """
    if not cm.compact:
        return _skipped("poincare", "poincare", _param_dict(cm), "manifold is not compact")
    psi_specs = list(psi_specs) if psi_specs is not None else default_poincare_specs(cm, D)
    p = cm.params
    D = inscribed_D(cm, D)
    c1 = kernels.segment_constant(p, D)
    col = _Collector("poincare", cm, tol_scale=tol_scale, D=D)
    budget = sum(_cut_budget(s, D) for s in cm.bundle.sides)
    values = {}
    for spec in psi_specs:
        if spec.startswith("radial:"):
            prof = RadialProfile.from_expr(spec[len("radial:"):])
            if abs(prof.value(0.0)) > VANISH_TOL:
                raise ValueError(f"{spec!r} does not vanish on the boundary")
            lhs = integrate_radial(cm, lambda s: np.abs(prof.value(s)))
            grad = integrate_radial(cm, lambda s: np.abs(prof.derivative(s)))
            top = float(np.max(np.abs(prof.value(np.linspace(0.0, D, 257)))))
            dtop = float(np.max(np.abs(prof.derivative(np.linspace(0.0, D, 257)))))
            extra = budget * (top + c1 * D * dtop)
        else:
            bv = boundary_values(cm, spec)
            if np.max(np.abs(bv)) > VANISH_TOL:
                raise ValueError(f"{spec!r} does not vanish on the boundary (max {np.max(np.abs(bv)):.3g})")
            lhs = integrate_expression(cm, spec, "value", 1.0)
            grad = integrate_expression(cm, spec, "grad", 1.0)
            extra = 0.0
        rhs = c1 * D * grad
        tol = _rel(cm) * (abs(lhs) + abs(rhs)) + 1e-7 * (abs(lhs) + abs(rhs)) + extra
        col.add(spec, np.array([rhs - lhs]), tol, lambda k, spec=spec: {"psi": spec})
        values[spec] = {"lhs": lhs, "rhs": rhs}
    return col.report(C1=c1, values=values)


def default_iso_bands(cm: CertifiedManifold) -> dict:
    out = {}
    for side in cm.bundle.sides:
        d = min(float(np.min(side.tau)), 2.0)
        out[side.label] = (0.2 * d, 0.8 * d)
    return out


def check_isoperimetric(cm: CertifiedManifold, bands: dict | None = None, tol_scale: float = 1.0) -> CheckReport:
    """Volume of ``{t1 < rho < t2}`` near one boundary side against its boundary area."""
    bands = bands if bands is not None else default_iso_bands(cm)
    p = cm.params
    col = _Collector("isoperimetric", cm, tol_scale=tol_scale,
                     bands={k: list(v) for k, v in sorted(bands.items())})
    sides = {s.label: s for s in cm.bundle.sides}
    values = {}
    for label, (t1, t2) in sorted(bands.items()):
        if label not in sides:
            raise ValueError(f"unknown boundary side {label!r}")
        side = sides[label]
        if t2 < t1 or t1 < 0:
            raise ValueError(f"invalid band ({t1}, {t2})")
        if t2 > float(np.min(side.tau)):
            raise ValueError(f"band ({t1}, {t2}) crosses the cut time {float(np.min(side.tau)):.6g} of side {label}")
        if t2 == t1:
            col.add(label, np.array([0.0]), 0.0, lambda k, label=label: {"side": label})
            continue
        vol = float(np.sum(side.weights * side.integral(t1, t2)))
        th = side.theta(np.array([t1, t2]))
        th = np.broadcast_to(th, (len(side.xs), 2))
        area = float(np.sum(side.weights[:, None] * th))
        factor = kernels.isoperimetric_factor(p, t1, t2)
        rhs = area * factor
        col.add(label, np.array([rhs - vol]), _rel(cm) * (vol + rhs) + 1e-9 * rhs,
                lambda k, label=label, t1=t1, t2=t2: {"side": label, "r": t1, "R": t2})
        values[label] = {"volume": vol, "area": area, "factor": factor}
    return col.report(values=values)


def check_eigen_bounds(cm: CertifiedManifold, p_list=(2.0, 3.0), seed: int = 0, trials: int = 3,
                       D: float | None = None, tol_scale: float = 1.0) -> CheckReport:
    """Numerical first eigenvalue against the lower bounds, and their ordering."""
    par = cm.params
    cusp = par.is_cusp
    if not cm.compact and not cusp:
        return _skipped("eigen_bounds", "eigen_bounds", _param_dict(cm),
                        "half-infinite tube without the exponential-cusp parameters")
    col = _Collector("eigen_bounds", cm, tol_scale=tol_scale, p_list=list(p_list))
    D = inscribed_D(cm, D) if cm.compact else math.inf
    mu, mu_err = dirichlet_eigen_estimate(cm, allow_truncated=not cm.compact)
    mu_tol = mu_err + 1e-12 * abs(mu)

    def bounds_for(q):
        out = {"dirichlet": kernels.eigen_lower_bound(par, D, q, "dirichlet")}
        if cm.compact:
            out["segment"] = kernels.eigen_lower_bound(par, D, q, "segment")
        if cusp:
            out["rigid"] = kernels.eigen_lower_bound(par, D, q, "rigid")
        return out

    b2 = bounds_for(2.0)
    if cm.compact:
        b2["kasue"] = kernels.kasue_bar_mu(par, D)
    for k, v in sorted(b2.items()):
        col.add(f"p=2:{k}", np.array([mu - v]), mu_tol + QUAD_REL * v, lambda i, k=k: {"bound": k})
    if cm.compact:
        col.add("order:segment<=dirichlet", np.array([b2["dirichlet"] - b2["segment"]]), 1e-9, None)
        col.add("order:dirichlet<=kasue", np.array([b2["kasue"] - b2["dirichlet"]]), 1e-9, None)

    # trial functions phi(rho) = sin(pi rho / (2 D'))^a give upper bounds for every p
    top = D if cm.compact else cm.bundle.inscribed_radius
    width = 2.0 * top if cm.compact else top
    rng = np.random.default_rng(seed)
    exps = [1.0] + sorted(float(a) for a in rng.uniform(1.0, 3.0, size=trials))
    trial_src = [f"sin({math.pi / width!r}*t)^{a!r}" for a in exps]
    quotients = {}
    r2 = rayleigh_quotient(cm, RadialProfile.from_expr(trial_src[0]), 2.0)
    quotients["2"] = r2
    col.add("p=2:trial>=mu", np.array([r2 - mu]), mu_tol + 1e-9 * r2, lambda i: {"trial": trial_src[0]})
    for q in p_list:
        if q == 2.0:
            continue
        bq = max(bounds_for(q).values())
        rq = min(rayleigh_quotient(cm, RadialProfile.from_expr(src), q) for src in trial_src)
        quotients[repr(float(q))] = rq
        col.add(f"p={q:g}:trial", np.array([rq - bq]), 1e-7 * (rq + bq), lambda i, q=q: {"p": q})
    return col.report(mu=mu, mu_error=mu_err, bounds_p2=b2, trial_quotients=quotients, trial_exponents=exps)


def check_gauss_identity(cm: CertifiedManifold, tol_scale: float = 1.0) -> CheckReport:
    """Both sides of the boundary Gauss formula agree on warped tubes."""
    m = cm.manifold
    if not isinstance(m, WarpedTube) or m.n < 3:
        return _skipped("gauss_identity", "gauss_identity", _param_dict(cm),
                        "needs a warped tube of dimension >= 3")
    lhs, rhs = gauss_boundary_ricci_sides(m)
    col = _Collector("gauss_identity", cm, tol_scale=tol_scale)
    col.add("gauss", np.array([-abs(lhs - rhs)]), 1e-9 * (1.0 + abs(lhs)), lambda i: {"t": 0.0})
    return col.report(lhs=lhs, rhs=rhs)


# --- rigidity ----------------------------------------------------------------------------

def _sphere_area(dim: int) -> float:
    """Volume of the unit round sphere of dimension ``dim``."""
    return 2.0 * math.pi ** ((dim + 1) / 2.0) / math.gamma((dim + 1) / 2.0)


def rigidity_conditions(cm: CertifiedManifold) -> dict:
    p = cm.params
    out = {}
    m = cm.manifold
    if isinstance(m, WarpedTube):
        w0 = float(m.warp_jet(0.0)[0])
        ric_boundary = (m.n - 2) * m.fiber.sectional_curvature / (w0 * w0)
        out["boundary_ricci_margin"] = ric_boundary - (m.n - 2) * (p.kappa + p.lam**2)
    if kernels.ball_condition(p.kappa, -p.lam):
        rho0 = kernels.cut_radius(kernels.ComparisonParams(p.n, p.kappa, -p.lam))
        model_area = _sphere_area(p.n - 1) * float(kernels.s_point(p.kappa, rho0)[0]) ** (p.n - 1)
        out["complement_model_area"] = model_area
        out["complement_area_condition"] = bool(cm.bundle.boundary_volume >= model_area)
    return out


def detect_rigidity(cm: CertifiedManifold, tol: float = 1e-6) -> RigidityVerdict:
    """Equality-case detection: ``theta`` against ``S`` up to the smallest cut time.

    Precedence: ball_space_form, then volume_growth_splitting, then
    warped_product_on_ball(r). The volume-growth criterion is asymptotic; it is
    evaluated at ``r_examined`` only (the truncation length of a half-infinite
    tube, otherwise a radius past the inscribed radius and the cut radius).
    """
    p = cm.params
    b = cm.bundle
    cbar = kernels.cut_radius(p)
    r = min(float(np.min(s.tau)) for s in b.sides)
    top = min(r, cbar)
    dev = 0.0
    lin = np.linspace(0.0, 1.0, 513)
    for side in b.sides:
        u = top * lin
        th = side.theta(u)
        dev = max(dev, float(np.max(np.abs(th - _S(p, u)[None, :]))))
    D = b.inscribed_radius
    ball = kernels.ball_condition(p.kappa, p.lam)
    if b.truncated:
        r_eval = D
    elif ball:
        r_eval = max(2.0 * D, cbar)
    else:
        r_eval = 4.0 * D
    area = b.boundary_volume
    growth = tube_volume(cm, r_eval) / kernels.f_profile(p, r_eval)
    conditions = rigidity_conditions(cm)
    conditions["volume_growth_ratio"] = growth
    conditions["boundary_volume"] = area
    conditions["min_cut_time"] = r
    kind, radius, support = "none", None, []
    if dev <= tol:
        if ball and D >= cbar - tol:
            kind, radius = "ball_space_form", cbar
            support = ["log_jacobian", "relative_jacobian", "inscribed_radius"]
        elif growth >= area * (1.0 - tol):
            kind, radius = "volume_growth_splitting", r_eval
            support = ["log_jacobian", "relative_jacobian", "volume_growth"]
        else:
            kind, radius = "warped_product_on_ball", r
            support = ["log_jacobian", "relative_jacobian"]
    return RigidityVerdict(kind, radius, dev, tol, r_eval, support, conditions)


# --- suite -------------------------------------------------------------------------------

@dataclass
class SuiteConfig:
    checks: tuple = CHECK_NAMES
    t_values: tuple = (0.25, 0.5, 0.75)
    band: RadialBand | None = None
    chain_t: float = 0.5
    chain_k_max: int = 6
    chain_levels: tuple = tuple(range(4, 13))
    f_specs: list | None = None
    psi_specs: list | None = None
    iso_bands: dict | None = None
    p_list: tuple = (2.0, 3.0)
    trials: int = 3
    seed: int = 0
    tol_scale: float = 1.0
    rigidity_tol: float = 1e-6
    threads: int = 1
    D: float | None = None

    def __post_init__(self):
        unknown = [c for c in self.checks if c not in CHECK_NAMES]
        if unknown:
            raise ValueError(f"unknown check names {unknown}; known: {list(CHECK_NAMES)}")
        if not self.tol_scale > 0:
            raise ValueError("tol_scale must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


def _tasks(cm: CertifiedManifold, cfg: SuiteConfig) -> list:
    s = cfg.tol_scale
    table = {
        "log_jacobian": [lambda: check_log_jacobian(cm, tol_scale=s)],
        "relative_jacobian": [lambda: check_relative_jacobian(cm, tol_scale=s)],
        "volume_comparison": [lambda: check_volume_comparison(cm, tol_scale=s)],
        "heintze_karcher": [lambda: check_heintze_karcher(cm, tol_scale=s)],
        "volume_growth": [lambda: check_volume_growth(cm, tol_scale=s)],
        "inscribed_radius": [lambda: check_inscribed_radius(cm, tol_scale=s)],
        "measure_contraction": [
            (lambda t=t: check_measure_contraction(cm, t, cfg.band, tol_scale=s)) for t in cfg.t_values
        ],
        "annulus_chain": [lambda: check_annulus_chain(cm, cfg.chain_t, cfg.band, cfg.chain_k_max,
                                                      cfg.chain_levels, tol_scale=s)],
        "segment": [lambda: check_segment(cm, cfg.f_specs, cfg.D, tol_scale=s)],
        "poincare": [lambda: check_poincare(cm, cfg.psi_specs, cfg.D, tol_scale=s)],
        "isoperimetric": [lambda: check_isoperimetric(cm, cfg.iso_bands, tol_scale=s)],
        "eigen_bounds": [lambda: check_eigen_bounds(cm, cfg.p_list, cfg.seed, cfg.trials, cfg.D, tol_scale=s)],
        "gauss_identity": [lambda: check_gauss_identity(cm, tol_scale=s)],
    }
    return [task for name in CHECK_NAMES if name in cfg.checks for task in table[name]]


def run_suite(cm: CertifiedManifold, config: SuiteConfig | None = None):
    """Run the configured checks and the rigidity detector.

    Returns ``(reports, verdict)`` with reports in the fixed order of
    ``CHECK_NAMES``. Thread count affects wall time only.
    """
    cfg = config or SuiteConfig()
    cm.bundle  # build the shared normal bundle once, before fanning out
    tasks = _tasks(cm, cfg)
    if cfg.threads == 1:
        reports = [task() for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            reports = list(pool.map(lambda task: task(), tasks))
    return reports, detect_rigidity(cm, cfg.rigidity_tol)
