import math

import numpy as np
import pytest
import scipy.optimize
import scipy.sparse
import scipy.special
from hypothesis import given, settings, strategies as st

from boundary_comparison import numerics as N
from boundary_comparison.numerics import Tolerance


def _annulus_oracle():
    # Dirichlet radial mode on 1 <= r <= 3: J0(k)Y0(3k) - J0(3k)Y0(k) = 0
    def cross(k):
        return scipy.special.j0(k) * scipy.special.y0(3 * k) - scipy.special.j0(3 * k) * scipy.special.y0(k)

    return scipy.optimize.brentq(cross, 1.0, 2.0, xtol=1e-15) ** 2


def _laplacian_1d(n, h, periodic=False):
    main = 2.0 * np.ones(n)
    off = -np.ones(n - 1)
    A = scipy.sparse.diags([off, main, off], [-1, 0, 1], format="lil")
    if periodic:
        A[0, n - 1] = A[n - 1, 0] = -1.0
    return A.tocsr() / h**2


class TestTolerance:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            Tolerance(rel=0.0)
        with pytest.raises(ValueError):
            Tolerance(max_subdivisions=0)


class TestIntegrate:
    def test_examples(self):
        assert N.integrate(lambda t: 1.0, 0, 3) == pytest.approx(3.0, rel=1e-14)
        assert N.integrate(lambda t: t, 0, 1) == pytest.approx(0.5, rel=1e-14)
        assert N.integrate(lambda t: math.exp(-t), 0, 1) == pytest.approx(1 - math.exp(-1), rel=1e-12)

    def test_reversed_interval(self):
        with pytest.raises(ValueError):
            N.integrate(lambda t: 1.0, 1, 0)

    def test_nonconvergence_raises(self):
        with pytest.raises(N.NumericalError):
            N.integrate(lambda t: math.sin(1.0 / t) / t**2 if t else 0.0, 0.0, 1.0,
                        Tolerance(rel=1e-14, abs=1e-15, max_subdivisions=3))

    def test_gauss_legendre_panels(self):
        assert N.gauss_legendre_panels(np.cos, 0, math.pi / 2) == pytest.approx(1.0, rel=1e-14)

    def test_cumulative(self):
        grid = np.linspace(0, 2, 9)
        out = N.cumulative_gauss_legendre(lambda t: 3 * t**2, grid)
        assert np.allclose(out, grid**3, rtol=1e-13, atol=1e-14)


@given(
    a=st.floats(-2, 0), b=st.floats(0, 1), c=st.floats(1, 3),
    k=st.floats(0.1, 4.0),
)
@settings(max_examples=50, deadline=None)
def test_integrate_additive(a, b, c, k):
    f = lambda t: math.exp(-k * t * t) * math.cos(k * t)
    tol = Tolerance()
    whole = N.integrate(f, a, c, tol)
    split = N.integrate(f, a, b, tol) + N.integrate(f, b, c, tol)
    assert abs(whole - split) <= 2 * (tol.rel * (abs(whole) + 1) + tol.abs) * 10


class TestFindRoot:
    def test_examples(self):
        assert N.find_root(lambda t: t - 0.5, 0, 1) == pytest.approx(0.5, abs=1e-13)
        assert N.find_root(math.cos, 0, math.pi) == pytest.approx(math.pi / 2, abs=1e-13)

    def test_bisection_oracle(self):
        lo, hi = 0.0, 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if math.tanh(mid) < 0.5 else (lo, mid)
        assert N.find_root(lambda t: math.tanh(t) - 0.5, 0, 2) == pytest.approx(lo, abs=1e-12)
        assert lo == pytest.approx(math.atanh(0.5), abs=1e-14)

    def test_no_sign_change(self):
        with pytest.raises(ValueError):
            N.find_root(lambda t: t * t + 1, -1, 1)


class TestSearch:
    def test_golden_max(self):
        x, v = N.golden_max(lambda t: -(t - 0.3) ** 2, 0, 1)
        assert x == pytest.approx(0.3, abs=1e-6) and v == pytest.approx(0.0, abs=1e-12)

    def test_scan_sup_finds_narrow_peak(self):
        f = lambda t: np.exp(-((np.asarray(t) - 0.7123) ** 2) / 1e-4)
        x, v = N.scan_sup(f, 0, 1, points=512)
        assert x == pytest.approx(0.7123, abs=1e-6) and v == pytest.approx(1.0, abs=1e-10)


class TestSolveIvp:
    def test_constant(self):
        traj = N.solve_ivp(lambda t, y: np.zeros_like(y), [2.5], 1.0, 0.1)
        assert np.all(traj.states == 2.5)
        assert traj.times[-1] == pytest.approx(1.0)

    def test_cosine(self):
        traj = N.solve_ivp(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], math.pi / 2, 1e-3)
        assert abs(traj.states[-1, 0]) < 1e-8
        assert traj.times[-1] == pytest.approx(math.pi / 2)

    def test_collar_jacobi(self):
        traj = N.solve_ivp(lambda t, y: np.array([y[1], y[0]]), [1.0, -1.0], 3.0, 1e-3)
        assert np.max(np.abs(traj.states[:, 0] - np.exp(-traj.times))) < 1e-8

    def test_fourth_order(self):
        def err(h):
            traj = N.solve_ivp(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], 2.0, h)
            return abs(traj.states[-1, 0] - math.cos(2.0))

        assert err(0.1) / err(0.05) >= 12.0

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_nonfinite_state(self):
        with pytest.raises(N.NumericalError):
            N.solve_ivp(lambda t, y: y * y, [1.0], 2.0, 0.1)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            N.solve_ivp(lambda t, y: y, [1.0], 1.0, 0.0)

    def test_batched_states(self):
        traj = N.solve_ivp(lambda t, y: -y, np.ones((3, 1)), 1.0, 1e-2)
        assert traj.states.shape == (101, 3, 1)


class TestSturmLiouville:
    def test_constant_weight(self):
        mu, (nodes, mode) = N.min_eigen_sturm_liouville(lambda t: np.ones_like(t), 0, 2, 200)
        assert mu == pytest.approx((math.pi / 2) ** 2, rel=1e-8)
        assert mode[0] == 0 and mode[-1] == 0 and np.max(mode) == pytest.approx(1.0)

    def test_annulus_bessel_oracle(self):
        mu, _ = N.min_eigen_sturm_liouville(lambda t: 1 + t, 0, 2, 2000)
        assert mu == pytest.approx(_annulus_oracle(), rel=1e-9)

    def test_hemisphere(self):
        mu, _ = N.min_eigen_sturm_liouville(np.cos, 0, math.pi / 2, 2000, dirichlet=(True, False))
        assert mu == pytest.approx(2.0, abs=1e-3)

    def test_second_order_rate(self):
        exact = (math.pi / 3) ** 2
        errs = [
            abs(N.min_eigen_sturm_liouville(lambda t: np.ones_like(t), 0, 3, n, extrapolate=False)[0] - exact)
            for n in (32, 64, 128)
        ]
        rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert all(1.9 < r < 2.1 for r in rates)

    def test_rejects_small_grid(self):
        with pytest.raises(ValueError):
            N.min_eigen_sturm_liouville(lambda t: np.ones_like(t), 0, 1, 8)

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError):
            N.min_eigen_sturm_liouville(lambda t: t - 0.5, 0, 1, 64)


@given(L=st.floats(0.5, 4.0))
@settings(max_examples=20, deadline=None)
def test_sl_constant_weight_matches_closed_form(L):
    mu, _ = N.min_eigen_sturm_liouville(lambda t: np.ones_like(t), 0, L, 256)
    assert mu == pytest.approx((math.pi / L) ** 2, rel=1e-8)


class TestGridEigen:
    def _strip(self, width, nt, nx, period=2 * math.pi):
        ht, hx = width / (nt + 1), period / nx
        K = scipy.sparse.kron(_laplacian_1d(nt, ht), scipy.sparse.identity(nx)) + scipy.sparse.kron(
            scipy.sparse.identity(nt), _laplacian_1d(nx, hx, periodic=True)
        )
        return K, np.ones(nt * nx)

    def test_flat_strip(self):
        mu = N.min_eigen_grid(*self._strip(2.0, 200, 200))
        assert mu == pytest.approx((math.pi / 2) ** 2, rel=1e-2)

    def test_fiber_reparametrisation_invariance(self):
        # rescaling the periodic variable leaves the radial ground state alone
        a = N.min_eigen_grid(*self._strip(2.0, 100, 60))
        b = N.min_eigen_grid(*self._strip(2.0, 100, 60, period=4 * math.pi))
        assert a == pytest.approx(b, rel=1e-2)

    def test_domain_monotonicity(self):
        wide = N.min_eigen_grid(*self._strip(2.0, 99, 40))
        narrow = N.min_eigen_grid(*self._strip(1.5, 99, 40))
        assert narrow > wide

    def test_deterministic(self):
        pencil = self._strip(1.0, 40, 40)
        assert N.min_eigen_grid(*pencil) == N.min_eigen_grid(*pencil)
