import math

import numpy as np
import pytest

from taserk import problems as pb
from taserk import splitting as sp
from taserk.diagrams import REAL_AXIS_EXTENT
from taserk.linalg import eig_symmetric
from taserk.tase import hat_t, integrate, tase_operator, tase_rk_method

OPS = {p: tase_operator(p) for p in (2, 3, 4)}


def fd_directional(f, t, u, v, eps=1e-6):
    return (f(t, u + eps * v) - f(t, u - eps * v)) / (2 * eps)


@pytest.mark.parametrize(
    "factory,kwargs",
    [
        (pb.linear_commuting, {}),
        (pb.linear_noncommuting, {}),
        (pb.fisher_kolmogorov, {"M": 40}),
        (pb.burgers, {"M": 64}),
        (pb.fitzhugh_nagumo, {"M": 32}),
    ],
)
def test_jacobian_matches_finite_differences(rng, factory, kwargs):
    prob = factory(**kwargs)
    scale = np.max(np.abs(prob.u0)) or 1.0
    for _ in range(10):
        u = prob.u0 + 0.1 * scale * rng.standard_normal(prob.dimension)
        v = rng.standard_normal(prob.dimension)
        got = prob.jacobian(u) @ v
        ref = fd_directional(prob.f, 0.0, u, v, eps=1e-6 * scale)
        assert np.linalg.norm(got - ref) <= 1e-5 * max(np.linalg.norm(ref), 1.0)


@pytest.mark.parametrize(
    "factory,kwargs",
    [
        (pb.linear_commuting, {}),
        (pb.linear_noncommuting, {}),
        (pb.fisher_kolmogorov, {}),
        (pb.burgers, {}),
        (pb.fitzhugh_nagumo, {"M": 256}),
    ],
)
def test_operator_matrix_negative_definite(factory, kwargs):
    prob = factory(**kwargs)
    w = eig_symmetric(prob.A).eigenvalues
    assert w.max() < 0


class TestLinearExamples:
    def test_commuting_spectra(self):
        prob = pb.linear_commuting()
        s = prob.splitting()
        np.testing.assert_allclose(
            eig_symmetric(prob.A).eigenvalues, [-100.0, -10.0, -1.0], atol=1e-10
        )
        np.testing.assert_allclose(
            eig_symmetric(np.asarray(s.B)).eigenvalues, [-50.0, -12.0, -1.5], atol=1e-10
        )

    def test_commuting_commutator(self):
        s = pb.linear_commuting().splitting()
        A, B = np.asarray(s.A), np.asarray(s.B)
        assert np.linalg.norm(A @ B - B @ A) <= 1e-10 * np.linalg.norm(A) * np.linalg.norm(B)

    def test_noncommuting_properties(self):
        prob = pb.linear_noncommuting()
        s = prob.splitting()
        assert not s.commuting
        np.testing.assert_allclose(
            np.sort(eig_symmetric(prob.A).eigenvalues), [-30.0, -10.0, -4.0], atol=1e-12
        )
        mus = sp.generalized_eigenvalues(s)
        assert np.min(np.abs(mus - 0.5)) <= 1e-10

    def test_forcing_and_initial_state(self):
        prob = pb.linear_commuting()
        J, g = prob.linear
        np.testing.assert_array_equal(g, 10.0 * np.ones(3))
        np.testing.assert_array_equal(prob.u0, [200.0, 300.0, 100.0])
        np.testing.assert_allclose(prob.f(0.0, prob.u0), J @ prob.u0 + g)

    def test_homogeneous_strips_forcing(self):
        hom = pb.linear_commuting().homogeneous()
        u = np.array([1.0, 2.0, 3.0])
        J, g = hom.linear
        assert not np.any(g)
        np.testing.assert_allclose(hom.f(0.0, u), J @ u)


class TestFisherKolmogorov:
    def test_initial_condition_center_value(self):
        prob = pb.fisher_kolmogorov(M=100)
        x = -1.0 + prob.params["h"] * np.arange(1, 100)
        idx = np.argmin(np.abs(x))
        assert x[idx] == 0.0
        assert prob.u0[idx] == 1.0

    def test_diffusion_spectrum_closed_form(self):
        prob = pb.fisher_kolmogorov(M=100)
        got = np.sort(eig_symmetric(-prob.A).eigenvalues)
        np.testing.assert_allclose(got, np.sort(pb.fk_diffusion_spectrum(prob)), rtol=1e-11)

    def test_defaults(self):
        prob = pb.fisher_kolmogorov()
        assert prob.params["M"] == 100
        assert prob.params["D"] == 2e-2
        assert prob.params["eps"] == 1e-2

    def test_constant_one_is_steady_state(self):
        # boundary data is 1, so u == 1 must be an equilibrium of the
        # semi-discretization including the boundary forcing vector
        prob = pb.fisher_kolmogorov(M=50)
        np.testing.assert_allclose(prob.f(0.0, np.ones(49)), 0.0, atol=1e-12)

    def test_rhs_second_order_in_h(self):
        # manufactured profile compatible with the unit boundary values
        def G(x):
            return 1.0 + (1.0 - x**2) * np.sin(2.0 * x)

        def G_xx(x):
            return (-2.0) * np.sin(2.0 * x) + 2.0 * (-2.0 * x) * 2.0 * np.cos(2.0 * x) - (
                1.0 - x**2
            ) * 4.0 * np.sin(2.0 * x)

        errs = []
        for M in (64, 128):
            prob = pb.fisher_kolmogorov(M=M)
            D, eps, h = prob.params["D"], prob.params["eps"], prob.params["h"]
            x = -1.0 + h * np.arange(1, M)
            exact = D * G_xx(x) + eps * G(x) * (1.0 - G(x))
            got = prob.f(0.0, G(x))
            errs.append(np.max(np.abs(got - exact)))
        ratio = errs[0] / errs[1]
        assert 3.4 <= ratio <= 4.6


class TestBurgers:
    def test_stencil_row_sums_vanish(self):
        prob = pb.burgers(M=64)
        L1, L2 = prob.params["L1"], prob.params["L2"]
        np.testing.assert_allclose(L1.sum(axis=1), 0.0, atol=1e-10)
        np.testing.assert_allclose(L2.sum(axis=1), 0.0, atol=1e-10)

    def test_initial_condition(self):
        prob = pb.burgers(M=64)
        x = prob.params["h"] * np.arange(64)
        np.testing.assert_allclose(prob.u0, 0.5 * (1.0 - np.cos(x)))
        assert prob.te == 4.0

    def test_operator_matrix_definition(self):
        prob = pb.burgers(M=32, eps=0.1, kappa=3.0)
        L1 = prob.params["L1"]
        np.testing.assert_allclose(prob.A, 3.0 * (0.1 * L1 - 2.0 * np.eye(32)), atol=1e-13)

    def test_stencils_fourth_order(self):
        errs1, errs2 = [], []
        for M in (32, 64):
            prob = pb.burgers(M=M)
            L1, L2 = prob.params["L1"], prob.params["L2"]
            x = prob.params["h"] * np.arange(M)
            u = np.sin(x)
            errs1.append(np.max(np.abs(L1 @ u + np.sin(x))))
            errs2.append(np.max(np.abs(L2 @ u - np.cos(x))))
        assert 12.0 <= errs1[0] / errs1[1] <= 20.0
        assert 12.0 <= errs2[0] / errs2[1] <= 20.0

    def test_flux_uses_pointwise_square(self):
        prob = pb.burgers(M=32, eps=0.0)

        u = np.linspace(0.0, 1.0, 32)
        L2 = prob.params["L2"]
        np.testing.assert_allclose(prob.f(0.0, u), -0.5 * (L2 @ (u * u)), atol=1e-14)


class TestFitzHughNagumo:
    def test_w_initial_value_at_wave_center(self):
        prob = pb.fitzhugh_nagumo(M=100)
        # x = 1.5 is on the grid: phi(0) = 2, so w(1.5, 0) = -3/8
        idx = 15
        assert abs(prob.params["h"] * idx - 1.5) < 1e-12
        assert abs(prob.u0[100 + idx] - (-0.375)) <= 1e-12

    def test_state_layout(self):
        prob = pb.fitzhugh_nagumo(M=32)
        assert prob.dimension == 64
        du = prob.f(0.0, prob.u0)
        v, w = prob.u0[:32], prob.u0[32:]
        np.testing.assert_allclose(
            du[32:], (v - prob.params["a"] - prob.params["b"] * w) / prob.params["tau"]
        )

    def test_operator_blocks(self):
        prob = pb.fitzhugh_nagumo(M=16, kappa=1.2)
        b, tau = prob.params["b"], prob.params["tau"]
        np.testing.assert_allclose(
            prob.A[16:, 16:], -1.2 * (b / tau) * np.eye(16), atol=1e-14
        )
        assert np.abs(prob.A[:16, 16:]).max() == 0.0


class TestFkCertificate:
    def test_fov_real_and_inside_envelope(self, rng):
        # weighted FOV of the frozen reaction part stays real and inside the
        # closed-form envelope for any slopes within the solution bounds
        prob = pb.fisher_kolmogorov(M=100)
        bounds = pb.NonlinearBounds(0.0, 1.5)
        lo, hi = pb.fk_fov_bounds(prob, bounds)
        eps = prob.params["eps"]
        xi = rng.uniform(bounds.lower, bounds.upper, 99)
        B = eps * np.diag(1.0 - 2.0 * xi)
        fb = sp.fov_q(sp.Splitting(A=prob.A, B=B), q=1.0, n_theta=360)
        assert np.abs(fb.points.imag).max() <= 1e-10
        assert fb.points.real.min() >= lo - 1e-10
        assert fb.points.real.max() <= hi + 1e-10

    def test_unconditional_certificate_all_orders(self):
        prob = pb.fisher_kolmogorov(M=100)
        for p in (2, 3, 4):
            v = pb.fk_stability_check(prob, OPS[p], k=math.inf)
            assert v.holds
            assert v.margin > 0

    def test_center_slope_trivially_stable(self):
        prob = pb.fisher_kolmogorov(M=100)
        v = pb.fk_stability_check(prob, OPS[2], k=math.inf,
                                  bounds=pb.NonlinearBounds(0.5, 0.5))
        assert v.holds

    def test_violated_bounds_fail(self):
        # absurdly large upper bound drives the reaction slope past the
        # stability interval
        prob = pb.fisher_kolmogorov(M=100)
        v = pb.fk_stability_check(prob, OPS[2], k=math.inf,
                                  bounds=pb.NonlinearBounds(0.0, 1e4))
        assert not v.holds


class TestScalarHelpers:
    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_chi_self_consistency(self, p):
        # with slope exactly chi the filtered argument hits the left edge
        # of the explicit stability interval
        op = OPS[p]
        lam, k = -3.0, 0.7
        chi = pb.scalar_logistic_chi(op, k, lam)
        ktp = hat_t(op, k * lam) / lam
        assert abs(ktp * (lam + chi) + REAL_AXIS_EXTENT[p]) <= 1e-12

    def test_chi_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            pb.scalar_logistic_chi(OPS[2], 0.5, 1.0)
        with pytest.raises(ValueError):
            pb.scalar_logistic_chi(OPS[2], -0.5, -1.0)

    def test_safe_xi_logistic(self):
        eps = 0.01
        g_prime = lambda xi: eps * (1.0 - 2.0 * xi)
        assert pb.safe_xi(g_prime, pb.NonlinearBounds(0.0, 1.5)) == 1.5

    def test_safe_xi_interior_minimum(self):
        g_prime = lambda xi: (xi - 0.3) ** 2
        got = pb.safe_xi(g_prime, pb.NonlinearBounds(0.0, 1.0))
        assert abs(got - 0.3) <= 1e-5

    @pytest.mark.parametrize("p", [2, 3])
    def test_slope_condition_implies_bounded_simulation(self, p):
        # scalar split with reaction slope above the threshold: 1e4 steps
        # stay bounded
        lam, eps, k = -2.0, 0.05, 0.5
        op = OPS[p]
        chi = pb.scalar_logistic_chi(op, k, lam)
        bounds = pb.NonlinearBounds(0.0, 1.5)
        g_prime = lambda xi: eps * (1.0 - 2.0 * xi)
        assert g_prime(bounds.upper) >= chi
        J = np.array([[lam]])
        prob = pb.SplitProblem(
            name="scalar-split",
            f=lambda t, u: lam * u + eps * u * (1.0 - u),
            jacobian=lambda u: J + eps * (1.0 - 2.0 * u)[None, :],
            A=J,
            u0=np.array([1.4]),
            t0=0.0,
            te=1e4 * k,
        )
        run = integrate(prob, tase_rk_method(p), k)
        assert not run.blowup
        assert run.max_norm() <= 2.0


class TestRegistry:
    def test_make_problem_filters_params(self):
        prob = pb.make_problem("burgers", M=32, eps=0.5, tau=99.0)
        assert prob.params["M"] == 32
        assert prob.params["eps"] == 0.5

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            pb.make_problem("nope")

    def test_all_registered_names_construct(self):
        for name in pb.REGISTRY:
            prob = pb.make_problem(name, M=16)
            assert prob.dimension >= 1
