"""Generic Rosenbrock/ROW stepper used as the efficiency baseline.

The stepper implements the autonomous stage form

    (I - gamma_ii k J) k_i = k f(U_i) + k J sum_{j<i} gamma_ij k_j,
    U_i = u_n + sum_{j<i} alpha_ij k_j,
    u_{n+1} = u_n + sum_i b_i k_i,

with the Jacobian either re-evaluated every step (``exact``) or frozen
at the initial state (``frozen``).  Coefficient sets are pluggable; the
shipped default is the classical L-stable two-stage second-order scheme.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteState, SolveFailure
from .linalg import Factorization
from .tase import BLOWUP_GUARD, IntegrationRun, WorkStats


@dataclass(frozen=True)
class RowTableau:
    """Stage coefficients of a ROW scheme; gamma has a positive diagonal."""

    s: int
    alpha: np.ndarray
    gamma: np.ndarray
    b: np.ndarray
    name: str = ""

    def __post_init__(self):
        alpha = np.asarray(self.alpha, float)
        gamma = np.asarray(self.gamma, float)
        if alpha.shape != (self.s, self.s) or gamma.shape != (self.s, self.s):
            raise ValueError("alpha and gamma must be s x s")
        if np.abs(np.triu(alpha)).max() > 0:
            raise ValueError("alpha must be strictly lower triangular")
        if np.abs(np.triu(gamma, 1)).max() > 0:
            raise ValueError("gamma must be lower triangular")
        if np.any(np.diag(gamma) <= 0):
            raise ValueError("gamma must have a positive diagonal")
        if len(self.b) != self.s:
            raise ValueError("b must have s entries")


def ros2():
    """Two-stage order-two L-stable scheme with gamma = 1 + 1/sqrt(2)."""
    g = 1.0 + 1.0 / math.sqrt(2.0)
    alpha = np.array([[0.0, 0.0], [1.0, 0.0]])
    gamma = np.array([[g, 0.0], [-2.0 * g, g]])
    return RowTableau(2, alpha, gamma, np.array([0.5, 0.5]), "ros2")


def linearly_implicit_euler():
    """One-stage scheme with gamma = 1 (growth factor 1/(1 - k lambda))."""
    return RowTableau(1, np.zeros((1, 1)), np.ones((1, 1)), np.array([1.0]), "lieuler")


def load_row_tableau(path):
    """Read a tableau from JSON ``{s, alpha, gamma, b, name}``."""
    with open(path) as fh:
        obj = json.load(fh)
    return RowTableau(
        s=int(obj["s"]),
        alpha=np.asarray(obj["alpha"], float),
        gamma=np.asarray(obj["gamma"], float),
        b=np.asarray(obj["b"], float),
        name=obj.get("name", ""),
    )


def _stage_factors(tableau, J, k, stats):
    """One factorization per distinct diagonal entry of gamma."""
    n = J.shape[0]
    eye = np.eye(n)
    factors = {}
    for g in np.diag(np.asarray(tableau.gamma)):
        if g not in factors:
            try:
                factors[g] = Factorization(eye - g * k * J)
            except SolveFailure:
                raise
            if stats is not None:
                stats.n_factorizations += 1
    return factors


def row_step(problem, tableau, t, u, k, jacobian_mode="exact", frozen=None, stats=None):
    """One ROW step; ``frozen = (J, factors)`` carries reusable work.

    In ``frozen`` mode the caller builds ``frozen`` once (see
    :func:`integrate_row`) so the factorizations survive across steps.
    """
    u = np.asarray(u, dtype=float)
    if jacobian_mode == "exact" or frozen is None:
        J = np.asarray(problem.jacobian(u), float)
        factors = _stage_factors(tableau, J, k, stats)
    else:
        J, factors = frozen
    gamma = np.asarray(tableau.gamma, float)
    alpha = np.asarray(tableau.alpha, float)
    stages = []
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(tableau.s):
            U = u.copy()
            for j in range(i):
                if alpha[i, j] != 0.0:
                    U += alpha[i, j] * stages[j]
            rhs = k * problem.f(t + alpha[i, :i].sum() * k, U)
            if stats is not None:
                stats.n_rhs_evals += 1
            corr = np.zeros_like(u)
            for j in range(i):
                if gamma[i, j] != 0.0:
                    corr += gamma[i, j] * stages[j]
            if np.any(corr):
                rhs = rhs + k * (J @ corr)
            ki = factors[gamma[i, i]].solve(rhs)
            if stats is not None:
                stats.n_solves += 1
            stages.append(ki)
        u_next = u.copy()
        for i in range(tableau.s):
            u_next += tableau.b[i] * stages[i]
    if not np.all(np.isfinite(u_next)):
        raise NonFiniteState(f"non-finite state at t = {t + k}")
    return u_next


def integrate_row(problem, tableau, k, t_end=None, jacobian_mode="exact", store_states=True):
    """March a ROW scheme on the homogeneous grid; mirrors ``tase.integrate``."""
    if k <= 0:
        raise ValueError("step size must be positive")
    t0 = problem.t0
    te = problem.te if t_end is None else t_end
    n_steps = int(round((te - t0) / k))
    stats = WorkStats()
    tic = time.perf_counter()
    frozen = None
    if jacobian_mode == "frozen":
        J = np.asarray(problem.jacobian(problem.u0), float)
        frozen = (J, _stage_factors(tableau, J, k, stats))
    u = np.asarray(problem.u0, dtype=float).copy()
    times = [t0]
    states = [u.copy()] if store_states else None
    blowup = False
    blowup_index = None
    for n in range(n_steps):
        t_n = t0 + n * k
        try:
            u = row_step(problem, tableau, t_n, u, k,
                         jacobian_mode=jacobian_mode, frozen=frozen, stats=stats)
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
