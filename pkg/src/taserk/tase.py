"""TASE operators and the TASE-RK time steppers of orders 2, 3 and 4.

A TASE operator of order ``p`` is the matrix function

    T_p(kA; w) = sum_j beta_j (I - w_j k A)^{-1},

a rational approximation of the identity to order ``p`` that filters the
stage derivatives of an explicit Runge-Kutta method.  The matrix ``A``
may be the exact Jacobian of the problem or any user-supplied substitute
(typically a symmetric negative definite approximation that is cheap to
factor once and reuse).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, DuplicateOmega, NonFiniteState
from .linalg import Factorization

#: default operator weights per order; order 1 is a single resolvent
DEFAULT_OMEGA = {
    1: (1.0,),
    2: (3.0, 1.5),
    3: (2.3147, 1.8796, 1.5822),
    4: (3.9396, 2.4506, 2.2271, 2.0612),
}

#: infinity-norm guard above which a trajectory is declared blown up
BLOWUP_GUARD = 1e100


def tase_weights(p, omega):
    """Partial-fraction weights making the operator accurate to order ``p``.

    beta_j = (1/w_j)^(p-1) / prod_{l != j} (1/w_j - 1/w_l)

    The weights always satisfy ``sum(beta) == 1`` (the operator reduces to
    the identity at k = 0).

    Raises
    ------
    DuplicateOmega
        When two reciprocal weights are closer than 1e-12.
    """
    omega = np.asarray(omega, dtype=float)
    if len(omega) != p:
        raise ValueError(f"expected {p} weights, got {len(omega)}")
    if np.any(omega <= 0):
        raise ValueError("all omega_j must be positive")
    x = 1.0 / omega
    beta = np.empty(p)
    for j in range(p):
        prod = 1.0
        for l in range(p):
            if l == j:
                continue
            diff = x[j] - x[l]
            if abs(diff) < 1e-12:
                raise DuplicateOmega(f"omega[{j}] and omega[{l}] nearly coincide")
            prod *= diff
        beta[j] = x[j] ** (p - 1) / prod
    return beta


@dataclass(frozen=True)
class TaseOperator:
    """Order, free weights omega and derived partial-fraction weights beta."""

    p: int
    omega: tuple
    beta: tuple

    def __post_init__(self):
        if abs(sum(self.beta) - 1.0) > 1e-12:
            raise ValueError("beta weights do not sum to 1")


def tase_operator(p, omega=None):
    """Build a :class:`TaseOperator`; ``omega`` defaults to the shipped weights."""
    if omega is None:
        omega = DEFAULT_OMEGA[p]
    beta = tase_weights(p, omega)
    return TaseOperator(p=p, omega=tuple(float(w) for w in omega), beta=tuple(beta))


def hat_t(op, y):
    """The scalar damping function ``y * T_p(y)`` for ``y < 0``.

    Monotone increasing on the negative axis with values in
    ``[hat_t_limit(op), 0)``; ``y = -inf`` is accepted and returns the limit.
    """
    if np.isneginf(y):
        return hat_t_limit(op)
    if y >= 0:
        raise DomainError(f"hat_t requires y < 0, got {y}")
    beta = np.asarray(op.beta)
    omega = np.asarray(op.omega)
    return float(y * np.sum(beta / (1.0 - omega * y)))


def hat_t_limit(op):
    """Limit of ``hat_t`` as y -> -inf, in closed form ``-sum(beta_j / omega_j)``."""
    beta = np.asarray(op.beta)
    omega = np.asarray(op.omega)
    return float(-np.sum(beta / omega))


class TaseSolver:
    """Applies ``T_p(kA)`` to vectors, factoring each resolvent exactly once.

    The factorizations of ``(I - omega_j k A)`` are computed on
    construction and reused for every application, so one solver instance
    serves all stages of all steps that share the same ``(A, k)`` pair.
    """

    def __init__(self, op, A, k, stats=None):
        A = np.asarray(A, dtype=float)
        eye = np.eye(A.shape[0])
        self.op = op
        self._factors = [Factorization(eye - wj * k * A) for wj in op.omega]
        self.stats = stats
        if stats is not None:
            stats.n_factorizations += len(op.omega)

    def apply(self, v):
        out = np.zeros_like(v, dtype=float)
        for bj, fac in zip(self.op.beta, self._factors):
            out += bj * fac.solve(v)
        if self.stats is not None:
            self.stats.n_solves += len(self.op.beta)
        return out


def apply_tase(op, A, k, v, solver=None):
    """Evaluate ``T_p(kA) v`` by ``p`` linear solves.

    With ``A = 0`` this returns ``v`` up to round-off.  Pass a
    :class:`TaseSolver` to reuse factorizations across calls.
    """
    if solver is None:
        solver = TaseSolver(op, A, k)
    return solver.apply(np.asarray(v, dtype=float))


@dataclass(frozen=True)
class ExplicitTableau:
    """Strictly lower-triangular explicit Runge-Kutta tableau."""

    s: int
    alpha: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = ""

    def __post_init__(self):
        alpha = np.asarray(self.alpha, float)
        if alpha.shape != (self.s, self.s):
            raise ValueError("alpha must be s x s")
        if np.abs(np.triu(alpha)).max() > 0:
            raise ValueError("alpha must be strictly lower triangular")
        if abs(np.sum(self.b) - 1.0) > 1e-12:
            raise ValueError("quadrature weights must sum to 1")
        if np.abs(np.asarray(self.c) - alpha.sum(axis=1)).max() > 1e-12:
            raise ValueError("nodes must equal row sums of alpha")


def heun2():
    """Two-stage second-order explicit scheme."""
    alpha = np.array([[0.0, 0.0], [1.0, 0.0]])
    return ExplicitTableau(2, alpha, np.array([0.5, 0.5]), alpha.sum(axis=1), "heun2")


def kutta3():
    """Three-stage third-order explicit scheme."""
    alpha = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [-1.0, 2.0, 0.0]])
    b = np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])
    return ExplicitTableau(3, alpha, b, alpha.sum(axis=1), "kutta3")


def rk4_classical():
    """Classical four-stage fourth-order explicit scheme."""
    alpha = np.zeros((4, 4))
    alpha[1, 0] = 0.5
    alpha[2, 1] = 0.5
    alpha[3, 2] = 1.0
    b = np.array([1.0, 2.0, 2.0, 1.0]) / 6.0
    return ExplicitTableau(4, alpha, b, alpha.sum(axis=1), "rk4")


_TABLEAUS = {2: heun2, 3: kutta3, 4: rk4_classical}


@dataclass(frozen=True)
class TaseRkMethod:
    """An order-p method: explicit tableau plus matching TASE operator."""

    p: int
    tableau: ExplicitTableau
    op: TaseOperator
    name: str = ""


def tase_rk_method(p, omega=None):
    """The shipped p-stage order-p method (p = 2, 3 or 4)."""
    if p not in _TABLEAUS:
        raise ValueError(f"no shipped tableau of order {p}")
    return TaseRkMethod(
        p=p, tableau=_TABLEAUS[p](), op=tase_operator(p, omega), name=f"trk{p}"
    )


@dataclass
class WorkStats:
    n_solves: int = 0
    n_factorizations: int = 0
    n_rhs_evals: int = 0
    wall_time: float = 0.0


@dataclass
class IntegrationRun:
    """Trajectory on the homogeneous grid ``t_n = t0 + n k`` plus work counters."""

    times: np.ndarray
    states: np.ndarray
    k: float
    stats: WorkStats
    blowup: bool = False
    blowup_index: int | None = None

    @property
    def final_state(self):
        return self.states[-1]

    def max_norm(self):
        return float(np.max(np.abs(self.states)))


def tase_rk_step(problem, tableau, op, t_n, u_n, k, solver=None, stats=None):
    """One step of the TASE-RK scheme.

    Stage states accumulate ``k * alpha_ij * T_p(kA) f(t_n + c_j k, U_j)``
    and the update applies the quadrature weights ``b_j`` to the same
    filtered derivatives.

    Raises
    ------
    NonFiniteState
        As soon as any stage or the update stops being finite.
    """
    if tableau.s != op.p:
        raise ValueError("stage count must match the operator order")
    if solver is None:
        solver = TaseSolver(op, problem.A, k, stats=stats)
    u_n = np.asarray(u_n, dtype=float)
    tf = []
    # blowing-up runs overflow before the finiteness check fires; that is
    # the detection mechanism, not an error worth warning about
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(tableau.s):
            U = u_n.copy()
            for j in range(i):
                aij = tableau.alpha[i, j]
                if aij != 0.0:
                    U += (k * aij) * tf[j]
            F = problem.f(t_n + tableau.c[i] * k, U)
            if stats is not None:
                stats.n_rhs_evals += 1
            tf.append(solver.apply(F))
        u_next = u_n.copy()
        for j in range(tableau.s):
            u_next += (k * tableau.b[j]) * tf[j]
    if not np.all(np.isfinite(u_next)):
        raise NonFiniteState(f"non-finite state at t = {t_n + k}")
    return u_next


def integrate(problem, method, k, t_end=None, store_states=True):
    """March a :class:`TaseRkMethod` from ``problem.t0`` to ``t_end``.

    The number of steps is ``round((t_end - t0) / k)``.  Integration stops
    early with ``blowup=True`` once the max norm exceeds ``BLOWUP_GUARD``
    or a stage goes non-finite.
    """
    if k <= 0:
        raise ValueError("step size must be positive")
    t0 = problem.t0
    te = problem.te if t_end is None else t_end
    if te <= t0:
        raise ValueError("t_end must exceed t0")
    n_steps = int(round((te - t0) / k))
    stats = WorkStats()
    tic = time.perf_counter()
    solver = TaseSolver(method.op, problem.A, k, stats=stats)

    u = np.asarray(problem.u0, dtype=float).copy()
    times = [t0]
    states = [u.copy()] if store_states else None
    blowup = False
    blowup_index = None
    for n in range(n_steps):
        t_n = t0 + n * k
        try:
            u = tase_rk_step(problem, method.tableau, method.op, t_n, u, k,
                             solver=solver, stats=stats)
        except NonFiniteState:
            blowup = True
            blowup_index = n + 1
            u = np.full_like(u, np.inf)
        times.append(t_n + k)
        if store_states:
            states.append(u.copy())
        if blowup or np.max(np.abs(u)) > BLOWUP_GUARD:
            blowup = True
            blowup_index = blowup_index if blowup_index is not None else n + 1
            break
    stats.wall_time = time.perf_counter() - tic
    if not store_states:
        states = [u.copy()]
    return IntegrationRun(
        times=np.asarray(times),
        states=np.asarray(states),
        k=float(k),
        stats=stats,
        blowup=blowup,
        blowup_index=blowup_index,
    )
