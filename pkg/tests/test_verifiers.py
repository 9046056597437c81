import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from boundary_comparison import kernels as K
from boundary_comparison import manifolds as M
from boundary_comparison import tube_geometry as TG
from boundary_comparison import verifiers as V
from boundary_comparison.kernels import ComparisonParams as P

TWO_PI = 2 * math.pi
CIRCLE = M.Fiber.circle(TWO_PI)
FAST = M.Resolution(boundary_samples=128, grid_h=0.025)


def _tube(warp, topology, length=None, params=None, fiber=CIRCLE, **kw):
    return M.certify_bounds(M.build_warped_tube(fiber, warp, topology, length, **kw), params)


@pytest.fixture(scope="module")
def annulus():
    return _tube("1+t", "Cylinder", 2.0, P(2, 0, -1))


@pytest.fixture(scope="module")
def cylinder():
    return _tube("1", "Cylinder", 2.0, P(2, 0, 0))


@pytest.fixture(scope="module")
def collar():
    return _tube("exp(-t)", "HalfInfinite", params=P(2, -1, 1), t_max=40.0)


@pytest.fixture(scope="module")
def hemisphere():
    return _tube("cos(t)", "Cap", math.pi / 2, P(2, 1, 0), fiber=M.Fiber.round_sphere(1, 1.0))


@pytest.fixture(scope="module")
def cap():
    return _tube("1-t", "Cap", 1.0, P(2, 0, 1), fiber=M.Fiber.round_sphere(1, 1.0))


def _wavy(amplitude, slack):
    surf = M.build_chart_surface("1", f"{amplitude!r}*sin(x)", "2", TWO_PI)
    # lower graph curvature is at least -amplitude; the flat upper side has H = 0
    return M.certify_bounds(surf, P(2, 0, -amplitude - slack), resolution=FAST)


@pytest.fixture(scope="module")
def wavy():
    return _wavy(0.2, 0.0)


class TestReports:
    def test_status_rule(self, annulus):
        rep = V.check_log_jacobian(annulus)
        assert rep.passed == (rep.worst_margin >= -rep.tolerance)
        d = rep.to_dict()
        assert d["check"] == "log_jacobian" and d["status"] == "pass"
        json.dumps(d)

    def test_tol_scale(self, annulus):
        a = V.check_log_jacobian(annulus)
        b = V.check_log_jacobian(annulus, tol_scale=10.0)
        assert b.tolerance == pytest.approx(10 * a.tolerance)


class TestJacobianChecks:
    def test_log_jacobian_models(self, collar, annulus, hemisphere):
        for cm in (collar, annulus, hemisphere):
            rep = V.check_log_jacobian(cm)
            assert rep.passed and abs(rep.worst_margin) <= 1e-6

    def test_log_jacobian_annulus_outer_side_strict(self, annulus):
        rep = V.check_log_jacobian(annulus)
        assert rep.details["components"]["outer"]["margin"] > 0.1

    def test_log_jacobian_detects_violation(self, annulus):
        cm = M.certify_bounds(annulus.manifold, P(2, 0, 0), enforce=False)
        rep = V.check_log_jacobian(cm)
        assert not rep.passed and rep.worst_location["side"] == "inner"

    def test_relative_jacobian_models(self, hemisphere, annulus):
        for cm in (hemisphere, annulus):
            rep = V.check_relative_jacobian(cm)
            assert rep.passed and abs(rep.worst_margin) <= 1e-6

    def test_relative_jacobian_conjugate_component(self, hemisphere):
        comp = V.check_relative_jacobian(hemisphere).details["components"]
        assert abs(comp["inner:conjugate"]["margin"]) <= 1e-9

    def test_wavy_chart(self, wavy):
        rep = V.check_relative_jacobian(wavy)
        assert rep.passed
        assert V.check_log_jacobian(wavy).passed


class TestVolumeChecks:
    def test_volume_comparison(self, annulus, collar, cylinder):
        assert V.check_volume_comparison(annulus).passed
        rep = V.check_volume_comparison(collar)
        assert rep.passed and abs(rep.worst_margin) <= 1e-6
        assert V.check_volume_comparison(cylinder).passed

    def test_heintze_karcher_annulus_closed_form(self, annulus):
        # 8 pi (r + r^2/2) - 8 pi r = 4 pi r^2, smallest at r = 0.01
        rep = V.check_heintze_karcher(annulus)
        assert rep.passed and rep.worst_margin == pytest.approx(4 * math.pi * 1e-4, rel=1e-9)
        assert rep.worst_location["r"] == pytest.approx(0.01)

    def test_heintze_karcher_models(self, collar, hemisphere):
        for cm in (collar, hemisphere):
            rep = V.check_heintze_karcher(cm)
            assert rep.passed and abs(rep.worst_margin) <= 1e-6

    def test_volume_growth(self, collar, annulus):
        rep = V.check_volume_growth(collar)
        assert rep.passed and abs(rep.worst_margin) <= 1e-6
        rep = V.check_volume_growth(annulus)
        assert rep.worst_margin == pytest.approx(8 * math.pi * (1 - 1 / 1.005), rel=1e-9)

    def test_inscribed_radius(self, hemisphere, annulus, cap):
        rep = V.check_inscribed_radius(hemisphere)
        assert rep.passed and abs(rep.worst_margin) <= 1e-12
        assert V.check_inscribed_radius(annulus).status == V.SKIPPED
        assert abs(V.check_inscribed_radius(cap).worst_margin) <= 1e-12


class TestMeasureContraction:
    def test_flat_cylinder(self, cylinder):
        rep = V.check_measure_contraction(cylinder, 0.5, TG.RadialBand(0.25, 0.75))
        assert rep.details["lhs"] == pytest.approx(math.pi, rel=1e-12)
        assert rep.details["rhs"] == pytest.approx(math.pi, rel=1e-12)
        assert rep.name == "measure_contraction[t=0.5]"

    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
    def test_collar_equality(self, collar, t):
        rep = V.check_measure_contraction(collar, t, TG.RadialBand(0.0, 1.0))
        assert abs(rep.worst_margin) <= 1e-6

    def test_annulus(self, annulus):
        rep = V.check_measure_contraction(annulus, 0.5, TG.RadialBand(0.25, 0.75))
        assert rep.passed and rep.details["lhs"] == pytest.approx(TWO_PI, rel=1e-12)
        # RHS: 0.5 * 2 pi * int_{0.25}^{0.75} [(1+u/2) + (3-u) (1+u/2)/(1+u)] du
        import scipy.integrate

        g = lambda u: (1 + u / 2) + (3 - u) * (1 + u / 2) / (1 + u)
        rhs = 0.5 * TWO_PI * scipy.integrate.quad(g, 0.25, 0.75, epsabs=1e-14)[0]
        assert rep.details["rhs"] == pytest.approx(rhs, rel=1e-10)


class TestAnnulusChain:
    def test_flat_cylinder(self, cylinder):
        rep = V.check_annulus_chain(cylinder, 0.5, TG.RadialBand(0.25, 0.5))
        assert rep.passed

    def test_collar_scaling_closed_form(self, collar):
        # S(ts)/S(s) = exp((1-t)s) is not constant, so the bound is strict on the collar
        rep = V.check_annulus_chain(collar, 0.5, TG.RadialBand(0.25, 0.75))
        assert rep.passed
        bound = 1.0 / (0.5 * math.exp(0.5 * 0.25))
        ratio = (math.exp(-0.25) - math.exp(-0.75)) / (math.exp(-0.125) - math.exp(-0.375))
        assert rep.details["components"]["annulus_scaling"]["margin"] == pytest.approx(bound - ratio, rel=1e-9)

    def test_flat_scaling_equality(self, cylinder):
        rep = V.check_annulus_chain(cylinder, 0.5, TG.RadialBand(0.25, 0.75))
        assert abs(rep.details["components"]["annulus_scaling"]["margin"]) <= 1e-9

    def test_refinement_trend(self, annulus):
        rep = V.check_annulus_chain(annulus, 0.5, TG.RadialBand(0.25, 0.75))
        bounds = np.array(list(rep.details["bounds"].values()))
        assert np.all(np.diff(bounds) <= 1e-12)
        assert np.all(bounds >= rep.details["true_ratio"])
        assert bounds[-1] == pytest.approx(rep.details["model_ratio"], rel=1e-2)
        assert rep.details["model_ratio"] == pytest.approx(K.model_ratio(annulus.params, 0.25, 0.75))

    def test_chain_bound_flat_limit(self):
        # S = 1: bound_N = t / (1 - t) * (1 - t) / t^{N+1} * t^... = t^{-N} = R / r exactly
        p = P(2, 0, 0)
        for N in (1, 4, 64):
            assert V.chain_bound(p, 0.25, 0.75, N) == pytest.approx(3.0, rel=1e-12)


@given(r=st.floats(0.05, 0.6), width=st.floats(0.05, 0.35))
@settings(max_examples=20, deadline=None)
def test_chain_bound_antimonotone_and_above_truth(annulus, r, width):
    R = r + width
    truth = TG.tube_volume(annulus, R) / TG.tube_volume(annulus, r)
    bounds = [V.chain_bound(annulus.params, r, R, 2**k) for k in range(2, 9)]
    assert all(b >= truth * (1 - 1e-12) for b in bounds)
    assert all(bounds[i + 1] <= bounds[i] * (1 + 1e-12) for i in range(len(bounds) - 1))


class TestIntegralChecks:
    def test_segment_annulus_closed_form(self, annulus):
        rep = V.check_segment(annulus, ["t"])
        vals = rep.details["values"]["t"]
        assert vals["lhs"] == pytest.approx(4.5 * math.pi, rel=1e-8)
        c1 = K.segment_constant(annulus.params, 1.0)
        assert vals["rhs"] == pytest.approx(c1 * 1.0 * TWO_PI * 14 / 3, rel=1e-8)
        assert rep.passed

    def test_segment_defaults(self, annulus):
        rep = V.check_segment(annulus)
        assert rep.passed
        assert rep.details["values"]["0"] == {"lhs": 0.0, "rhs": 0.0}
        one = rep.details["values"]["1"]
        # int rho dvol = 2 pi [int_0^1 s(1+s) + int_0^1 s(3-s)] = 2 pi * 2
        assert one["lhs"] == pytest.approx(4 * math.pi, rel=1e-8)

    def test_segment_rejects_negative(self, annulus):
        with pytest.raises(ValueError):
            V.check_segment(annulus, ["t-1"])

    def test_segment_skips_noncompact(self, collar):
        assert V.check_segment(collar).status == V.SKIPPED

    def test_poincare_flat_cylinder(self, cylinder):
        rep = V.check_poincare(cylinder, ["radial:t", "0", "sin(pi*t/2)"])
        vals = rep.details["values"]
        assert vals["radial:t"]["lhs"] == pytest.approx(TWO_PI, rel=1e-10)
        assert vals["radial:t"]["rhs"] == pytest.approx(4 * math.pi, rel=1e-10)
        assert vals["sin(pi*t/2)"]["lhs"] == pytest.approx(8.0, rel=1e-8)
        assert vals["sin(pi*t/2)"]["rhs"] == pytest.approx(4 * math.pi, rel=1e-6)
        assert rep.passed

    def test_poincare_rejects_nonvanishing(self, cylinder):
        with pytest.raises(ValueError, match="vanish"):
            V.check_poincare(cylinder, ["1+t"])
        with pytest.raises(ValueError, match="vanish"):
            V.check_poincare(cylinder, ["radial:cos(t)"])

    def test_poincare_defaults_chart(self, wavy):
        assert V.check_poincare(wavy).passed

    def test_isoperimetric_annulus(self, annulus):
        rep = V.check_isoperimetric(annulus, {"inner": (0.2, 0.8)})
        vals = rep.details["values"]["inner"]
        assert vals["volume"] == pytest.approx(TWO_PI * 0.9, rel=1e-12)
        assert vals["area"] == pytest.approx(TWO_PI * 3.0, rel=1e-12)
        assert rep.passed

    def test_isoperimetric_collar_and_empty(self, collar):
        rep = V.check_isoperimetric(collar, {"inner": (0.0, 1.0)})
        assert rep.passed and rep.worst_margin >= 0
        empty = V.check_isoperimetric(collar, {"inner": (0.5, 0.5)})
        assert empty.worst_margin == 0.0 and empty.passed

    def test_isoperimetric_errors(self, annulus):
        with pytest.raises(ValueError, match="cut time"):
            V.check_isoperimetric(annulus, {"inner": (0.2, 1.5)})
        with pytest.raises(ValueError, match="unknown"):
            V.check_isoperimetric(annulus, {"left": (0.2, 0.5)})


class TestEigenBounds:
    def test_annulus(self, annulus):
        rep = V.check_eigen_bounds(annulus)
        assert rep.passed
        assert rep.details["mu"] >= 1 / 9
        assert rep.details["bounds_p2"]["dirichlet"] == pytest.approx(1 / 9, rel=1e-9)

    def test_flat_strip(self, cylinder):
        rep = V.check_eigen_bounds(cylinder)
        assert rep.details["mu"] == pytest.approx((math.pi / 2) ** 2, rel=1e-6)
        assert rep.details["bounds_p2"]["dirichlet"] == pytest.approx(0.25, rel=1e-9)
        assert rep.passed

    def test_truncated_collar(self, collar):
        rep = V.check_eigen_bounds(collar)
        assert rep.details["bounds_p2"]["rigid"] == 0.25
        assert rep.details["mu"] > 0.25 and rep.passed

    def test_skips_noncusp_half_infinite(self):
        cm = _tube("exp(-t) + 0.5*exp(t)", "HalfInfinite", params=P(2, -1, 0.0), t_max=5.0)
        assert V.check_eigen_bounds(cm).status == V.SKIPPED

    def test_deterministic_seed(self, annulus):
        a = V.check_eigen_bounds(annulus, seed=3).details["trial_exponents"]
        b = V.check_eigen_bounds(annulus, seed=3).details["trial_exponents"]
        assert a == b and a[0] == 1.0


class TestGauss:
    def test_skipped_for_surfaces(self, annulus):
        assert V.check_gauss_identity(annulus).status == V.SKIPPED

    def test_three_dimensional(self):
        cm = _tube("1+t", "Cylinder", 1.0, P(3, 0, -1), fiber=M.Fiber.round_sphere(2, 1.0))
        rep = V.check_gauss_identity(cm)
        assert rep.passed and rep.details["lhs"] == pytest.approx(1.0)


class TestRigidity:
    def test_collar(self, collar):
        v = V.detect_rigidity(collar)
        assert v.kind == "volume_growth_splitting" and v.sup_deviation <= 1e-6

    def test_hemisphere(self, hemisphere):
        v = V.detect_rigidity(hemisphere)
        assert v.kind == "ball_space_form" and v.radius == pytest.approx(math.pi / 2)

    def test_flat_cylinder_is_not_a_splitting(self, cylinder):
        v = V.detect_rigidity(cylinder)
        assert v.kind == "warped_product_on_ball" and v.radius == pytest.approx(1.0)

    def test_annulus_none(self, annulus):
        v = V.detect_rigidity(annulus)
        assert v.kind == "none" and v.sup_deviation > 0.1

    @pytest.mark.parametrize("amplitude, slack", [(0.2, 0.1), (0.1, 0.3)])
    def test_wavy_never_fires(self, amplitude, slack):
        v = V.detect_rigidity(_wavy(amplitude, slack))
        assert v.kind == "none"

    def test_conditions(self):
        # kappa=0, lam=-1 complement condition uses the unit circle of length 2 pi
        cm = _tube("1+t", "Cylinder", 2.0, P(2, 0, -1))
        cond = V.detect_rigidity(cm).conditions
        assert cond["complement_model_area"] == pytest.approx(TWO_PI)
        assert cond["complement_area_condition"] is True
        assert cond["boundary_ricci_margin"] == 0.0

    def test_verdict_serialises(self, collar):
        json.dumps(V.detect_rigidity(collar).to_dict())


class TestSuite:
    def test_annulus_battery(self, annulus):
        reports, verdict = V.run_suite(annulus)
        assert all(r.status in (V.PASS, V.SKIPPED) for r in reports)
        assert [r.check for r in reports] == sorted([r.check for r in reports], key=V.CHECK_NAMES.index)

    def test_collar_battery(self, collar):
        reports, verdict = V.run_suite(collar, V.SuiteConfig(band=TG.RadialBand(0.25, 0.75)))
        assert all(r.status in (V.PASS, V.SKIPPED) for r in reports)
        for name in ("log_jacobian", "volume_comparison", "heintze_karcher", "volume_growth", "measure_contraction"):
            for r in reports:
                if r.check == name:
                    assert abs(r.worst_margin) <= 1e-6, r.name
        assert verdict.kind == "volume_growth_splitting"

    def test_mis_certified_annulus_fails(self, annulus):
        cm = M.certify_bounds(annulus.manifold, P(2, 0, 0), enforce=False)
        reports, _ = V.run_suite(cm)
        assert any(r.status == V.FAIL for r in reports)

    def test_threads_do_not_change_results(self, annulus):
        cfg1 = V.SuiteConfig(checks=("volume_comparison", "measure_contraction", "segment"))
        cfg4 = V.SuiteConfig(checks=cfg1.checks, threads=4)
        a = [r.to_dict() for r in V.run_suite(annulus, cfg1)[0]]
        b = [r.to_dict() for r in V.run_suite(annulus, cfg4)[0]]
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            V.SuiteConfig(checks=("nope",))
        with pytest.raises(ValueError):
            V.SuiteConfig(threads=0)


@given(
    kappa=st.sampled_from([-1.0, 0.0, 1.0]),
    lam=st.one_of(st.floats(0.2, 1.5), st.floats(-1.5, -0.2)),
)
@settings(max_examples=15, deadline=None)
def test_model_spaces_are_equality_cases(kappa, lam):
    p = P(2, kappa, lam)
    cm = M.certify_bounds(M.model_tube(p, t_max=6.0), p)
    band = TG.RadialBand(0.2 * min(cm.bundle.inscribed_radius, 2.0), 0.6 * min(cm.bundle.inscribed_radius, 2.0))
    checks = [
        V.check_log_jacobian(cm),
        V.check_relative_jacobian(cm),
        V.check_volume_comparison(cm),
        V.check_heintze_karcher(cm),
        V.check_measure_contraction(cm, 0.5, band),
    ]
    for rep in checks:
        assert rep.passed and abs(rep.worst_margin) <= 1e-6, rep.name
