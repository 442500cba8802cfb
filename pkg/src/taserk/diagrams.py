"""Scalar stability functions and the stability diagrams of TASE-RK methods.

For the split test problem ``u' = lambda*u + gamma*u`` with
``y = k*lambda < 0`` and ``mu = gamma/lambda``, one step of a p-stage
order-p method multiplies the mode by

    rt_tilde(y, mu) = R_p( hat_t(y) * (1 + mu) ),

where ``R_p`` is the degree-p truncated exponential.  The diagram
``D(y, p)`` collects the ``mu`` with ``|rt_tilde| <= 1`` and
``Re(mu) >= -1``; its ``y -> -inf`` limit is the step-size-free
(unconditional) diagram and is the smallest of the family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import InvalidMu, PoleHit, RootFindingFailure
from .tase import TaseOperator, hat_t, hat_t_limit, tase_operator

_FACTORIALS = [math.factorial(q) for q in range(8)]

# Negative-real-axis extent c_p of {z : |R_p(z)| <= 1}: R_p(-c_p) = -1 for
# p = 2 and +1 for p = 3, 4.  Closed forms via Cardano-type radicals.
_C3 = -(
    (-4.0 + math.sqrt(17.0)) ** (1.0 / 3.0)
    - 1.0
    - (-4.0 + math.sqrt(17.0)) ** (-1.0 / 3.0)
)
_C4 = (
    -(
        2.0 ** (2.0 / 3.0) * (-43.0 + 9.0 * math.sqrt(29.0)) ** (1.0 / 3.0)
        - 4.0
        - 10.0 * (2.0 / (-43.0 + 9.0 * math.sqrt(29.0))) ** (1.0 / 3.0)
    )
    / 3.0
)
REAL_AXIS_EXTENT = {2: 2.0, 3: _C3, 4: _C4}


def rp(p, z):
    """Truncated exponential ``1 + z + ... + z^p / p!``."""
    z = complex(z)
    acc = 0j
    for q in range(p, 0, -1):
        acc = (acc + 1.0 / _FACTORIALS[q]) * z
    return acc + 1.0


def in_rp(p, z, tol=1e-12):
    """Membership in the order-p explicit stability region (left half-plane)."""
    return abs(rp(p, z)) <= 1.0 + tol and complex(z).real <= tol


def tp(op, z):
    """The scalar operator value ``sum_j beta_j / (1 - omega_j z)``."""
    z = complex(z)
    acc = 0j
    for bj, wj in zip(op.beta, op.omega):
        den = 1.0 - wj * z
        if den == 0:
            raise PoleHit(f"resolvent pole at z = {z}")
        acc += bj / den
    return acc


def rt(op, z):
    """Stability function of the p-stage order-p method with exact operator matrix."""
    return rp(op.p, tp(op, z) * z)


def rt_tilde(op, y, mu):
    """Transformed stability function ``R_p(hat_t(y) (1 + mu))``.

    ``y = -inf`` evaluates the step-size-free limit.
    """
    return rp(op.p, hat_t(op, y) * (1.0 + complex(mu)))


@dataclass(frozen=True)
class DiagramQuery:
    """A (p, y) context for membership and boundary queries.

    ``y`` is negative; ``-inf`` selects the unconditional diagram.
    """

    p: int
    y: float
    operator: TaseOperator

    def __post_init__(self):
        if self.p not in (2, 3, 4):
            raise ValueError("diagrams are defined for p in {2, 3, 4}")
        if not (self.y < 0):
            raise ValueError("y must be negative (use -inf for the limit diagram)")


def diagram(p, y, operator=None):
    """Convenience constructor; the operator defaults to the shipped weights."""
    if p not in (2, 3, 4):
        raise ValueError("diagrams are defined for p in {2, 3, 4}")
    return DiagramQuery(p=p, y=float(y), operator=operator or tase_operator(p))


def in_diagram(query, mu, tol=1e-12):
    """True iff ``|rt_tilde(y, mu)| <= 1 + tol`` and ``Re(mu) >= -1 - tol``."""
    mu = complex(mu)
    if mu.real < -1.0 - tol:
        return False
    return abs(rt_tilde(query.operator, query.y, mu)) <= 1.0 + tol


def membership_margin(query, mu):
    """Signed slack ``1 - |rt_tilde|``; negative outside the diagram."""
    return 1.0 - abs(rt_tilde(query.operator, query.y, complex(mu)))


@dataclass(frozen=True)
class BoundaryCurve:
    """Boundary points of a diagram, several roots per angle.

    Every stored point satisfies ``residual <= 1e-8`` and
    ``Re(mu) >= -1 - 1e-12``.
    """

    thetas: np.ndarray
    points: np.ndarray
    residuals: np.ndarray

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("theta,re_mu,im_mu,residual\n")
            for th, mu, res in zip(self.thetas, self.points, self.residuals):
                fh.write(f"{th:.16e},{mu.real:.16e},{mu.imag:.16e},{res:.16e}\n")


def boundary(query, n_theta=720, residual_tol=1e-8):
    """All boundary points, solving ``rt_tilde(y, mu) = exp(i theta)`` per angle.

    The roots of the degree-p polynomial are found through the companion
    matrix and mapped back by ``mu = -1 + z / hat_t(y)``; roots with
    ``Re(mu) < -1`` are discarded and a residual check is enforced.

    Raises
    ------
    RootFindingFailure
        If some angle yields no admissible root.
    """
    if n_theta < 8:
        raise ValueError("n_theta must be at least 8")
    p = query.p
    that = hat_t(query.operator, query.y)
    coeffs = np.array([1.0 / _FACTORIALS[q] for q in range(p, 0, -1)] + [0.0], dtype=complex)
    thetas_out, points, residuals = [], [], []
    for theta in np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False):
        target = np.exp(1j * theta)
        coeffs[-1] = 1.0 - target
        roots = np.roots(coeffs)
        admissible = []
        for z in roots:
            mu = -1.0 + z / that
            if mu.real < -1.0 - 1e-12:
                continue
            res = abs(rt_tilde(query.operator, query.y, mu) - target)
            if res <= residual_tol:
                admissible.append((mu, res))
        if not admissible:
            raise RootFindingFailure(f"no admissible boundary root at theta = {theta}")
        admissible.sort(key=lambda t: (t[0].real, t[0].imag))
        for mu, res in admissible:
            thetas_out.append(theta)
            points.append(mu)
            residuals.append(res)
    return BoundaryCurve(
        thetas=np.asarray(thetas_out),
        points=np.asarray(points),
        residuals=np.asarray(residuals),
    )


def real_axis_endpoints(query):
    """Left and right intersections of the diagram with the real axis.

    The left endpoint is -1 for every (y, p).  The right endpoint is
    ``-1 + c_p / |hat_t(y)|`` with ``c_p`` the real-axis extent of the
    explicit region; at ``y = -inf`` this is the smallest right endpoint.
    """
    that = hat_t(query.operator, query.y)
    return -1.0, -1.0 - REAL_AXIS_EXTENT[query.p] / that


def mu_right_limit(op):
    """Right real-axis endpoint of the unconditional diagram."""
    return -1.0 - REAL_AXIS_EXTENT[op.p] / hat_t_limit(op)


def _solve_y_for_target(op, target):
    # hat_t is monotone increasing from hat_t_limit to 0 on (-inf, 0)
    y_hi = -1e-14
    y_lo = -1.0
    while hat_t(op, y_lo) > target:
        y_lo *= 2.0
        if y_lo < -1e18:
            raise RootFindingFailure("could not bracket the damping target")
    return scipy.optimize.brentq(
        lambda y: hat_t(op, y) - target, y_lo, y_hi, rtol=1e-14, maxiter=200
    )


def kstar_real(op, pairs):
    """Largest stable step size for real mode pairs ``(lambda_i < 0, mu_i)``.

    Returns ``inf`` when every ``mu_i`` is at most the unconditional
    right endpoint.  For p = 2 the per-mode threshold has a closed form;
    for p = 3, 4 it is solved by bracketed root finding on the monotone
    damping function (relative tolerance well below 1e-10).

    Raises
    ------
    InvalidMu
        If some ``mu_i < -1`` (the underlying mode would be unstable
        for the continuous problem).
    """
    p = op.p
    mustar = mu_right_limit(op)
    cp = REAL_AXIS_EXTENT[p]
    best = math.inf
    for lam, mu in pairs:
        lam = float(lam)
        mu = complex(mu)
        if abs(mu.imag) > 1e-12:
            raise InvalidMu(f"mu = {mu} is not real")
        mu = mu.real
        if lam >= 0:
            raise ValueError(f"lambda = {lam} must be negative")
        if mu < -1.0 - 1e-12:
            raise InvalidMu(f"mu = {mu} violates Re(mu) >= -1")
        if mu <= mustar:
            continue
        if p == 2:
            k = (-8.0 + mu - math.sqrt(28.0 + 20.0 * mu + mu * mu)) / (
                9.0 * lam * (-1.0 + mu)
            )
        else:
            # mu == mu_r(k lambda)  <=>  hat_t(k lambda) == -c_p / (1 + mu)
            y = _solve_y_for_target(op, -cp / (1.0 + mu))
            k = y / lam
        best = min(best, k)
    return best
