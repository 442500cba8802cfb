"""Built-in test problems: two 3x3 linear splittings and three
semi-discretized reaction/advection-diffusion PDEs, plus the helpers for
certifying the scalar linear-plus-nonlinear split.

Every constructor returns a :class:`SplitProblem` holding the right-hand
side, its Jacobian, and the operator matrix ``A`` chosen for the TASE
solves (symmetric negative definite by construction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .diagrams import REAL_AXIS_EXTENT
from .splitting import Splitting, StabilityVerdict
from .tase import hat_t


@dataclass
class SplitProblem:
    """An IVP ``u' = f(t, u)`` together with the splitting matrix ``A``.

    For linear constant-coefficient problems ``linear = (J, g)`` records
    ``f(t, u) = J u + g`` so exact reference solutions are available.
    """

    name: str
    f: callable
    jacobian: callable
    A: np.ndarray
    u0: np.ndarray
    t0: float
    te: float
    params: dict = field(default_factory=dict)
    linear: tuple | None = None

    @property
    def dimension(self):
        return len(self.u0)

    def splitting(self):
        """The analysis pair ``(A, B)`` with ``B = J(u0) - A``."""
        return Splitting(A=self.A, B=self.jacobian(self.u0) - self.A)

    def homogeneous(self):
        """Same problem with the constant forcing removed (linear only)."""
        if self.linear is None:
            raise ValueError("homogeneous() requires a linear problem")
        J, _ = self.linear
        return SplitProblem(
            name=self.name + "-homogeneous",
            f=lambda t, u: J @ u,
            jacobian=lambda u: J,
            A=self.A,
            u0=self.u0,
            t0=self.t0,
            te=self.te,
            params=dict(self.params),
            linear=(J, np.zeros_like(self.u0)),
        )


@dataclass(frozen=True)
class NonlinearBounds:
    """A priori solution bounds feeding the mean-value stability estimate."""

    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")


def _linear_problem(name, A, B, te=30.0):
    J = A + B
    g = 10.0 * np.ones(A.shape[0])
    u0 = np.array([2.0, 3.0, 1.0]) * 100.0
    return SplitProblem(
        name=name,
        f=lambda t, u: J @ u + g,
        jacobian=lambda u: J,
        A=A,
        u0=u0,
        t0=0.0,
        te=te,
        linear=(J, g),
    )


def linear_commuting(te=30.0):
    """3x3 stiff linear problem whose splitting matrices commute.

    ``A`` has spectrum {-100, -10, -1}, ``B`` has {-50, -12, -3/2} in the
    same eigenbasis, so the mode ratios are {1/2, 6/5, 3/2}.
    """
    A = np.array(
        [
            [-40.0, 30.0, 30.0],
            [30.0, -71.0 / 2.0, -69.0 / 2.0],
            [30.0, -69.0 / 2.0, -71.0 / 2.0],
        ]
    )
    B = np.array(
        [
            [-74.0 / 3.0, 38.0 / 3.0, 38.0 / 3.0],
            [38.0 / 3.0, -233.0 / 12.0, -215.0 / 12.0],
            [38.0 / 3.0, -215.0 / 12.0, -233.0 / 12.0],
        ]
    )
    return _linear_problem("linear-commuting", A, B, te)


def linear_noncommuting(te=30.0):
    """3x3 linear problem whose splitting matrices do not commute.

    ``A`` and ``B`` are simultaneously block diagonalizable only; the
    leading 2x2 block carries a complex pair of mode ratios.
    """
    A = np.diag([-10.0, -4.0, -30.0])
    B = np.array([[-3.0, 15.0, 0.0], [-15.0, -3.0, 0.0], [0.0, 0.0, -15.0]])
    return _linear_problem("linear-noncommuting", A, B, te)


def fisher_kolmogorov(M=100, D=2e-2, eps=1e-2, te=20.0):
    """Reaction-diffusion wave problem on [-1, 1] with unit Dirichlet data.

    Second-order differences on ``M - 1`` interior points; the boundary
    contribution enters the right-hand side as a constant vector.
    """
    if M < 3:
        raise ValueError("need at least 3 grid intervals")
    h = 2.0 / M
    n = M - 1
    x = -1.0 + h * np.arange(1, M)
    A = (D / h**2) * (
        np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    )
    bc = np.zeros(n)
    bc[0] = D / h**2
    bc[-1] = D / h**2
    u0 = 1.0 + 0.5 * np.exp(-x) * np.sin(np.pi * x)

    def f(t, u):
        return A @ u + eps * u * (1.0 - u) + bc

    def jac(u):
        return A + eps * np.diag(1.0 - 2.0 * u)

    return SplitProblem(
        name="fk",
        f=f,
        jacobian=jac,
        A=A,
        u0=u0,
        t0=0.0,
        te=te,
        params={"M": M, "D": D, "eps": eps, "h": h},
    )


def _circulant(M, offsets, values):
    C = np.zeros((M, M))
    idx = np.arange(M)
    for off, v in zip(offsets, values):
        C[idx, (idx + off) % M] = v
    return C


def _diffusion4(M, h):
    # fourth-order periodic second-derivative stencil
    return _circulant(M, (-2, -1, 0, 1, 2), np.array([-1, 16, -30, 16, -1]) / 12.0) / h**2


def _advection4(M, h):
    # fourth-order periodic first-derivative stencil
    return _circulant(M, (-2, -1, 0, 1, 2), np.array([1, -8, 0, 8, -1]) / 12.0) / h


def burgers(M=1024, eps=1e-2, kappa=1.0, te=4.0):
    """Viscous conservation law on [0, 2 pi] with periodic wrap.

    Fourth-order pentadiagonal circulant stencils; the flux is applied
    to the pointwise square of the state.  The operator matrix shifts
    the diagonal of the diffusion to stay negative definite and scales
    it by ``kappa``.
    """
    if M < 8:
        raise ValueError("need at least 8 grid points")
    h = 2.0 * np.pi / M
    L1 = _diffusion4(M, h)
    L2 = _advection4(M, h)
    x = h * np.arange(M)
    u0 = 0.5 * (1.0 - np.cos(x))
    A = kappa * (eps * L1 - 2.0 * np.eye(M))

    def f(t, u):
        return eps * (L1 @ u) - 0.5 * (L2 @ (u * u))

    def jac(u):
        return eps * L1 - L2 * u[None, :]

    return SplitProblem(
        name="burgers",
        f=f,
        jacobian=jac,
        A=A,
        u0=u0,
        t0=0.0,
        te=te,
        params={"M": M, "eps": eps, "kappa": kappa, "h": h, "L1": L1, "L2": L2},
    )


def fitzhugh_nagumo(M=1024, D=0.01, a=-0.7, b=0.8, tau=12.5, kappa=1.0, te=50.0):
    """Excitable-medium two-field model on [0, 10], periodic, 2M unknowns.

    State layout is ``(v, w)``; only ``v`` diffuses (fourth-order
    stencil).  The operator matrix is block diagonal with a damped
    diffusion block for ``v`` and a scalar relaxation block for ``w``.
    """
    if M < 8:
        raise ValueError("need at least 8 grid points")
    h = 10.0 / M
    L1 = _diffusion4(M, h)
    x = h * np.arange(M)

    def phi(z):
        return 1.0 + np.exp(-10.0 * np.pi * np.sinh(z))

    v0 = -1.5 + 3.0 / phi(x - 1.5) - 3.0 / phi(x - 2.0)
    w0 = -3.0 / (4.0 * phi(x - 1.5))
    u0 = np.concatenate([v0, w0])
    A = np.zeros((2 * M, 2 * M))
    A[:M, :M] = kappa * (D * L1 - np.eye(M))
    A[M:, M:] = -kappa * (b / tau) * np.eye(M)

    def f(t, u):
        v, w = u[:M], u[M:]
        dv = D * (L1 @ v) + v - v**3 / 3.0 - w
        dw = (v - a - b * w) / tau
        return np.concatenate([dv, dw])

    def jac(u):
        v = u[:M]
        J = np.zeros((2 * M, 2 * M))
        J[:M, :M] = D * L1 + np.diag(1.0 - v**2)
        J[:M, M:] = -np.eye(M)
        J[M:, :M] = np.eye(M) / tau
        J[M:, M:] = -(b / tau) * np.eye(M)
        return J

    return SplitProblem(
        name="fhn",
        f=f,
        jacobian=jac,
        A=A,
        u0=u0,
        t0=0.0,
        te=te,
        params={"M": M, "D": D, "a": a, "b": b, "tau": tau, "kappa": kappa, "h": h},
    )


def fk_diffusion_spectrum(problem):
    """Closed-form spectrum of the negated diffusion matrix."""
    M = problem.params["M"]
    D = problem.params["D"]
    h = problem.params["h"]
    i = np.arange(1, M)
    return 2.0 * D / h**2 * (1.0 + np.cos(i * np.pi / M))


def fk_fov_bounds(problem, bounds):
    """Envelope of the weighted field of values of the frozen reaction part.

    Every FOV value lies in ``[(eps/l)(1 - 2 ub), (eps/l)(1 - 2 lb)]``
    for some ``l`` in the diffusion spectrum interval; the returned pair
    is the envelope over that interval.
    """
    eps = problem.params["eps"]
    spec = fk_diffusion_spectrum(problem)
    ells = (spec.min(), spec.max())
    lo = min((eps / ell) * (1.0 - 2.0 * bounds.upper) for ell in ells)
    hi = max((eps / ell) * (1.0 - 2.0 * bounds.lower) for ell in ells)
    return lo, hi


def fk_stability_check(problem, op, k, bounds=NonlinearBounds(0.0, 1.5)):
    """Interval certificate for the reaction-diffusion problem.

    Checks that the FOV envelope sits inside the negated diagram's real
    slice: ``1 - c_p/|hat_t(k lambda_1)| <= envelope`` and
    ``envelope <= 1``.  ``k = inf`` certifies every step size at once.
    """
    p = op.p
    lam1 = -fk_diffusion_spectrum(problem).max()
    y1 = -math.inf if math.isinf(k) else k * lam1
    that = hat_t(op, y1)
    left_endpoint = 1.0 + REAL_AXIS_EXTENT[p] / that  # negated right endpoint
    lo, hi = fk_fov_bounds(problem, bounds)
    first = left_endpoint <= lo
    second = hi <= 1.0
    margin = min(lo - left_endpoint, 1.0 - hi)
    return StabilityVerdict(
        condition="fk-bounds",
        holds=bool(first and second),
        margin=float(margin),
        witness=None if (first and second) else complex(lo if not first else hi),
        params={"p": p, "k": k, "bounds": (bounds.lower, bounds.upper)},
        inconclusive=abs(margin) < 1e-6,
    )


def scalar_logistic_chi(op, k, lam):
    """Reaction-slope threshold for scalar linear-plus-nonlinear splits.

    A nonlinearity with derivative everywhere at least this value keeps
    the filtered explicit step inside its stability interval.
    """
    if lam >= 0:
        raise ValueError("lam must be negative")
    if k <= 0:
        raise ValueError("k must be positive")
    y = k * lam
    # k * T_p(k lam) = hat_t(y) / lam
    ktp = hat_t(op, y) / lam
    return -REAL_AXIS_EXTENT[op.p] / ktp - lam


def safe_xi(g_prime, bounds):
    """Minimizer of the nonlinearity slope over the solution bounds.

    Evaluating the stability threshold at this point is conservative for
    every state the bounds admit.
    """
    lo, hi = bounds.lower, bounds.upper
    candidates = [lo, hi]
    if hi > lo:
        res = scipy.optimize.minimize_scalar(g_prime, bounds=(lo, hi), method="bounded")
        if res.success:
            candidates.append(float(res.x))
    return min(candidates, key=g_prime)


REGISTRY = {
    "linear-commuting": linear_commuting,
    "linear-noncommuting": linear_noncommuting,
    "fk": fisher_kolmogorov,
    "burgers": burgers,
    "fhn": fitzhugh_nagumo,
}


def make_problem(name, **params):
    """Instantiate a registered problem, ignoring parameters it does not take."""
    import inspect

    if name not in REGISTRY:
        raise KeyError(f"unknown problem {name!r}; known: {sorted(REGISTRY)}")
    ctor = REGISTRY[name]
    accepted = inspect.signature(ctor).parameters
    kwargs = {k: v for k, v in params.items() if k in accepted and v is not None}
    return ctor(**kwargs)
