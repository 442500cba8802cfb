"""Experiment orchestration: reference solutions, empirical step-size
search, convergence and work-precision tables, and certificate sweeps."""

from __future__ import annotations

import math

import numpy as np

from .diagrams import kstar_real
from .errors import NoBracket, NotSimultaneouslyDiagonalizable
from .rosenbrock import integrate_row
from .splitting import (
    check_fov_conditional,
    check_fov_unconditional,
    check_modewise,
    check_unconditional_eigs,
    check_worst_mode,
    fov_q,
    generalized_eigenvalues,
    paired_modes,
)
from .tase import integrate, tase_rk_method

#: a trajectory is "bounded" if its max norm never exceeds this multiple
BOUNDED_FACTOR = 10.0


def exact_linear_solution(problem, t):
    """Closed-form state of ``u' = J u + g`` at time ``t`` via eigendecomposition."""
    if problem.linear is None:
        raise ValueError("problem is not linear")
    J, g = problem.linear
    w, V = np.linalg.eig(J)
    ustar = -np.linalg.solve(J, g) if np.any(g) else np.zeros_like(problem.u0)
    c = np.linalg.solve(V, problem.u0 - ustar)
    u = V @ (c * np.exp(w * (t - problem.t0))) + ustar
    return u.real


def rk4_reference(problem, t_end=None, k_ref=None, base_k=None):
    """Tiny-step classical RK4 reference for nonlinear problems."""
    te = problem.te if t_end is None else t_end
    if k_ref is None:
        if base_k is None:
            raise ValueError("pass k_ref or base_k")
        k_ref = base_k / 100.0
    n = int(math.ceil((te - problem.t0) / k_ref))
    k = (te - problem.t0) / n
    u = np.asarray(problem.u0, float).copy()
    t = problem.t0
    for _ in range(n):
        k1 = problem.f(t, u)
        k2 = problem.f(t + 0.5 * k, u + 0.5 * k * k1)
        k3 = problem.f(t + 0.5 * k, u + 0.5 * k * k2)
        k4 = problem.f(t + k, u + k * k3)
        u = u + (k / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += k
    return u


def reference_solution(problem, t_end=None, base_k=1e-2):
    """Exact solution for linear problems, tiny-step RK4 otherwise."""
    te = problem.te if t_end is None else t_end
    if problem.linear is not None:
        return exact_linear_solution(problem, te)
    return rk4_reference(problem, t_end=te, base_k=base_k)


def relative_error(u, u_ref):
    """Relative two-norm error at the final grid point."""
    denom = np.linalg.norm(u_ref)
    if denom == 0:
        return float(np.linalg.norm(u - u_ref))
    return float(np.linalg.norm(u - u_ref) / denom)


def run_method(problem, method_spec, k, t_end=None, store_states=True):
    """Dispatch on a method spec: a TaseRkMethod, RowTableau, or name string."""
    from .rosenbrock import RowTableau, load_row_tableau, ros2
    from .tase import TaseRkMethod

    if isinstance(method_spec, str):
        name = method_spec
        if name.startswith("trk"):
            method_spec = tase_rk_method(int(name[3:]))
        elif name == "ros2":
            method_spec = ros2()
        elif name.startswith("row:"):
            method_spec = load_row_tableau(name[4:])
        else:
            raise ValueError(f"unknown method {name!r}")
    if isinstance(method_spec, TaseRkMethod):
        return integrate(problem, method_spec, k, t_end=t_end, store_states=store_states)
    if isinstance(method_spec, RowTableau):
        return integrate_row(problem, method_spec, k, t_end=t_end, store_states=store_states)
    raise TypeError(f"cannot run {type(method_spec)}")


def is_bounded(run, u0, factor=BOUNDED_FACTOR):
    """Boundedness predicate ``max_n |u_n|_inf <= factor (1 + |u0|_inf)``."""
    if run.blowup:
        return False
    limit = factor * (1.0 + float(np.max(np.abs(u0))))
    return run.max_norm() <= limit


def kstar_empirical(problem, method_spec, t_end=None, k_init=0.1, rtol=1e-3,
                    k_cap=1e6, k_floor=1e-10):
    """Bisect the largest step size keeping the run bounded.

    The bracket is found by doubling/halving from ``k_init``; a run that
    stays bounded all the way to ``k_cap`` reports ``inf``.

    Raises
    ------
    NoBracket
        When even ``k_floor`` is unstable.
    """

    def stable(k):
        run = run_method(problem, method_spec, k, t_end=t_end, store_states=True)
        return is_bounded(run, problem.u0)

    k = k_init
    if stable(k):
        lo = k
        while True:
            k *= 2.0
            if k > k_cap:
                return math.inf
            if not stable(k):
                hi = k
                break
            lo = k
    else:
        hi = k
        while True:
            k /= 2.0
            if k < k_floor:
                raise NoBracket("no stable step size found above the floor")
            if stable(k):
                lo = k
                break
            hi = k
    while (hi - lo) > rtol * lo:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def convergence_table(problem, method_spec, ks, t_end=None, reference=None):
    """Error-versus-step rows plus consecutive observed orders."""
    te = problem.te if t_end is None else t_end
    if reference is None:
        reference = reference_solution(problem, t_end=te, base_k=min(ks))
    rows = []
    for k in ks:
        run = run_method(problem, method_spec, k, t_end=te, store_states=False)
        err = math.inf if run.blowup else relative_error(run.final_state, reference)
        rows.append(
            {
                "method": getattr(method_spec, "name", str(method_spec)),
                "k": float(k),
                "error": err,
                "wall_time": run.stats.wall_time,
                "n_solves": run.stats.n_solves,
                "n_factorizations": run.stats.n_factorizations,
            }
        )
    _attach_orders(rows)
    return rows


def _attach_orders(rows):
    for i, row in enumerate(rows):
        if i == 0 or not np.isfinite(rows[i - 1]["error"]) or not np.isfinite(row["error"]):
            row["observed_order"] = math.nan
            continue
        k0, k1 = rows[i - 1]["k"], row["k"]
        e0, e1 = rows[i - 1]["error"], row["error"]
        if e0 <= 0 or e1 <= 0 or k0 == k1:
            row["observed_order"] = math.nan
        else:
            row["observed_order"] = math.log(e0 / e1) / math.log(k0 / k1)


def work_precision(problem, method_specs, ks, t_end=None, reference=None):
    """Work-precision rows for several methods over a shared step list."""
    te = problem.te if t_end is None else t_end
    if reference is None:
        reference = reference_solution(problem, t_end=te, base_k=min(ks))
    all_rows = []
    for spec in method_specs:
        all_rows.extend(
            convergence_table(problem, spec, ks, t_end=te, reference=reference)
        )
    return all_rows


def certify(problem, ps=(2, 3, 4), k=None, q_list=(1.0 / 3.0, 0.5, 1.0, 2.0),
            n_theta=720):
    """Run the applicable certificates for a problem's splitting.

    Commuting splittings are examined mode by mode (with the analytic
    largest stable step attached when the mode ratios are real);
    non-commuting ones go through the field-of-values route, sweeping
    the supplied exponent list.
    """
    s = problem.splitting()
    out = {"problem": problem.name, "commuting": bool(s.commuting), "verdicts": []}
    if s.commuting:
        try:
            pairs = paired_modes(s)
        except NotSimultaneouslyDiagonalizable:
            pairs = None
    else:
        # the boundaries and mode ratios are p-independent; compute once
        boundaries = {q: fov_q(s, q, n_theta) for q in q_list}
        mus = generalized_eigenvalues(s)
    for p in ps:
        op = tase_rk_method(p).op
        if s.commuting:
            out["verdicts"].append(check_unconditional_eigs(s, op).to_json())
            if pairs is not None and all(abs(g.imag) < 1e-10 for _, g in pairs):
                kstar = kstar_real(op, [(lam, (g / lam).real) for lam, g in pairs])
                out["verdicts"].append(
                    {
                        "condition": "largest-stable-step",
                        "holds": True,
                        "margin": 0.0,
                        "witness": None,
                        "params": {"p": p, "kstar": kstar},
                        "inconclusive": False,
                    }
                )
            if k is not None:
                out["verdicts"].append(check_modewise(s, op, k).to_json())
                out["verdicts"].append(check_worst_mode(s, op, k).to_json())
        else:
            for q in q_list:
                suff, nec = check_fov_unconditional(
                    s, op, q, fov_boundary=boundaries[q], mus=mus
                )
                out["verdicts"].append(suff.to_json())
                out["verdicts"].append(nec.to_json())
                if k is not None:
                    out["verdicts"].append(
                        check_fov_conditional(
                            s, op, k, q, fov_boundary=boundaries[q]
                        ).to_json()
                    )
    return out
