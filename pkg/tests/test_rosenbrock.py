import json
import math

import numpy as np
import pytest

from taserk import rosenbrock as rb
from taserk.problems import SplitProblem


def scalar_problem(lam):
    J = np.array([[lam]])
    return SplitProblem(
        name="scalar", f=lambda t, u: J @ u, jacobian=lambda u: J,
        A=J, u0=np.array([1.0]), t0=0.0, te=1.0, linear=(J, np.zeros(1)),
    )


def rotation_problem(z, k):
    # complex test value z = k*lambda realized as a 2x2 rotation block, so
    # |u_1| equals the modulus of the scalar growth factor
    lam = z / k
    J = np.array([[lam.real, -lam.imag], [lam.imag, lam.real]])
    return SplitProblem(
        name="rot", f=lambda t, u: J @ u, jacobian=lambda u: J,
        A=J, u0=np.array([1.0, 0.0]), t0=0.0, te=k,
    )


class TestTableaus:
    def test_ros2_coefficients(self):
        tab = rb.ros2()
        g = 1.0 + 1.0 / math.sqrt(2.0)
        assert tab.s == 2
        np.testing.assert_allclose(np.diag(tab.gamma), [g, g])
        np.testing.assert_allclose(tab.gamma[1, 0], -2.0 * g)
        np.testing.assert_allclose(tab.b, [0.5, 0.5])

    def test_validation(self):
        with pytest.raises(ValueError):
            rb.RowTableau(2, np.zeros((2, 2)), np.diag([1.0, -1.0]), np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            rb.RowTableau(2, np.triu(np.ones((2, 2))), np.eye(2), np.array([1.0, 0.0]))

    def test_json_roundtrip(self, tmp_path):
        tab = rb.ros2()
        path = tmp_path / "tab.json"
        path.write_text(json.dumps({
            "s": tab.s, "alpha": tab.alpha.tolist(), "gamma": tab.gamma.tolist(),
            "b": tab.b.tolist(), "name": "ros2",
        }))
        loaded = rb.load_row_tableau(path)
        np.testing.assert_array_equal(loaded.gamma, tab.gamma)
        assert loaded.name == "ros2"


class TestStep:
    def test_zero_field(self):
        prob = SplitProblem(
            name="null", f=lambda t, u: np.zeros_like(u),
            jacobian=lambda u: np.zeros((2, 2)), A=-np.eye(2),
            u0=np.array([3.0, -1.0]), t0=0.0, te=1.0,
        )
        out = rb.row_step(prob, rb.ros2(), 0.0, prob.u0, 0.5)
        np.testing.assert_allclose(out, prob.u0, atol=1e-15)

    @pytest.mark.parametrize("k", [0.1, 1.0, 10.0])
    def test_linearly_implicit_euler_growth(self, k):
        lam = -2.0
        prob = scalar_problem(lam)
        out = rb.row_step(prob, rb.linearly_implicit_euler(), 0.0, prob.u0, k)
        np.testing.assert_allclose(out, [1.0 / (1.0 - k * lam)], rtol=1e-14)

    def test_ros2_observed_order_two(self):
        # nonlinear scalar problem with known solution: u' = -u^2, u(0)=1
        prob = SplitProblem(
            name="riccati", f=lambda t, u: -u * u,
            jacobian=lambda u: np.array([[-2.0 * u[0]]]),
            A=np.array([[-2.0]]), u0=np.array([1.0]), t0=0.0, te=2.0,
        )
        exact = 1.0 / 3.0
        errs = []
        for k in (0.1, 0.05, 0.025, 0.0125):
            run = rb.integrate_row(prob, rb.ros2(), k)
            errs.append(abs(run.final_state[0] - exact))
        slope = math.log(errs[-2] / errs[-1]) / math.log(2.0)
        assert abs(slope - 2.0) <= 0.2

    def test_frozen_jacobian_mode_runs_and_reuses_factorization(self):
        prob = SplitProblem(
            name="riccati", f=lambda t, u: -u * u,
            jacobian=lambda u: np.array([[-2.0 * u[0]]]),
            A=np.array([[-2.0]]), u0=np.array([1.0]), t0=0.0, te=1.0,
        )
        run = rb.integrate_row(prob, rb.ros2(), 0.1, jacobian_mode="frozen")
        assert run.stats.n_factorizations == 1
        assert run.stats.n_solves == 2 * 10
        # frozen Jacobian preserves order >= 1; solution still accurate-ish
        assert abs(run.final_state[0] - 0.5) <= 0.05

    def test_exact_mode_factors_each_step(self):
        prob = scalar_problem(-1.0)
        run = rb.integrate_row(prob, rb.ros2(), 0.1, t_end=1.0)
        assert run.stats.n_factorizations == 10


class TestStability:
    def test_a_stability_probe_on_half_plane_grid(self):
        # sample k*lambda over the left half plane; one step from unit data
        # must never amplify
        tab = rb.ros2()
        k = 1.0
        for re in (-100.0, -10.0, -1.0, -0.01):
            for im in (0.0, 0.5, 5.0, 50.0):
                z = complex(re, im)
                prob = rotation_problem(z, k)
                out = rb.row_step(prob, tab, 0.0, prob.u0, k)
                assert np.linalg.norm(out) <= 1.0 + 1e-12

    def test_l_stability_at_deep_negative(self):
        prob = rotation_problem(complex(-1e8, 0.0), 1.0)
        out = rb.row_step(prob, rb.ros2(), 0.0, prob.u0, 1.0)
        assert np.linalg.norm(out) <= 1e-6


class TestIntegrateRow:
    def test_blowup_flag(self):
        J = np.array([[1.0]])
        prob = SplitProblem(
            name="grow", f=lambda t, u: 3.0 * u * u, jacobian=lambda u: J,
            A=J, u0=np.array([5.0]), t0=0.0, te=1e4,
        )
        run = rb.integrate_row(prob, rb.ros2(), 50.0)
        assert run.blowup
