"""Stability certificates for Jacobian splittings ``J = A + B``.

``A`` is the (symmetric negative definite) matrix placed inside the TASE
operator, ``B = J - A`` the leftover.  When ``A`` and ``B`` commute the
per-mode ratios ``mu_i = gamma_i / lambda_i`` decide stability through
the diagrams; in the general case the field of values of a weighted
similarity transform of ``B`` provides sufficient conditions, and the
generalized eigenvalues a necessary one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse.linalg

from .diagrams import diagram, in_diagram, membership_margin
from .errors import (
    IllConditioned,
    NoConvergence,
    NotNegativeDefinite,
    NotSimultaneouslyDiagonalizable,
    NotSymmetric,
    SingularA,
)
from .linalg import eig_general, eig_symmetric, is_symmetric

#: default number of support angles for field-of-values sampling
DEFAULT_N_THETA = 720

#: margins below this are reported as boundary cases (sampling cannot
#: distinguish tangency from strict inclusion)
INCONCLUSIVE_MARGIN = 1e-6


@dataclass(frozen=True)
class Splitting:
    """A validated pair ``(A, B)`` with ``A`` symmetric negative definite."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, float)
        if not is_symmetric(A):
            raise NotSymmetric("splitting matrix A must be symmetric")
        if np.linalg.eigvalsh(A).max() >= 0:
            raise NotNegativeDefinite("splitting matrix A must be negative definite")

    @cached_property
    def commuting(self):
        A, B = np.asarray(self.A), np.asarray(self.B)
        comm = np.linalg.norm(A @ B - B @ A)
        scale = np.linalg.norm(A) * max(np.linalg.norm(B), 1e-300)
        return comm <= 1e-10 * scale

    @property
    def dimension(self):
        return np.asarray(self.A).shape[0]

    def lambda_min(self):
        return float(np.linalg.eigvalsh(np.asarray(self.A, float))[0])


def subblock(splitting, indices):
    """Splitting restricted to a principal sub-block (experimental).

    Intended for splittings that are simultaneously *block*
    diagonalizable: the caller selects the block to analyze and remains
    responsible for covering the complementary block separately.
    """
    idx = np.asarray(indices)
    A = np.asarray(splitting.A)[np.ix_(idx, idx)]
    B = np.asarray(splitting.B)[np.ix_(idx, idx)]
    return Splitting(A=A, B=B)


@dataclass
class StabilityVerdict:
    """Outcome of one certificate: condition id, pass/fail, slack, witness."""

    condition: str
    holds: bool
    margin: float
    witness: complex | None = None
    params: dict = field(default_factory=dict)
    inconclusive: bool = False
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "condition": self.condition,
            "holds": bool(self.holds),
            "margin": float(self.margin),
            "witness": None
            if self.witness is None
            else [float(self.witness.real), float(self.witness.imag)],
            "params": self.params,
            "inconclusive": bool(self.inconclusive),
        }


def generalized_eigenvalues(splitting):
    """The multiset ``eig(A^{-1} B)`` of per-mode ratios."""
    A = np.asarray(splitting.A, float)
    B = np.asarray(splitting.B, float)
    try:
        AinvB = np.linalg.solve(A, B)
    except np.linalg.LinAlgError as exc:
        raise SingularA(str(exc)) from exc
    return eig_general(AinvB).eigenvalues


def paired_modes(splitting, tol=1e-8):
    """One-to-one pairs ``(lambda_i, gamma_i)`` from a shared eigenbasis.

    Diagonalizes ``A`` orthogonally, then requires ``B`` to be (block-)
    diagonal in that basis; blocks belonging to repeated eigenvalues of
    ``A`` are diagonalized separately.

    Raises
    ------
    NotSimultaneouslyDiagonalizable
        When ``B`` couples distinct eigenspaces of ``A``.
    """
    dec = eig_symmetric(splitting.A)
    lam, Q = dec.eigenvalues, dec.eigenvectors
    M = Q.T @ np.asarray(splitting.B, float) @ Q
    scale = max(np.abs(M).max(), 1e-300)
    # cluster equal eigenvalues of A
    clusters = []
    start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or abs(lam[i] - lam[start]) > 1e-9 * max(abs(lam[start]), 1.0):
            clusters.append((start, i))
            start = i
    off = np.abs(M).copy()
    for s, e in clusters:
        off[s:e, s:e] = 0.0
    if off.max() > tol * scale:
        raise NotSimultaneouslyDiagonalizable(
            "B couples distinct eigenspaces of A (off-block residual "
            f"{off.max() / scale:.2e})"
        )
    pairs = []
    for s, e in clusters:
        if e - s == 1:
            gammas = [M[s, s]]
        else:
            gammas = list(np.linalg.eigvals(M[s:e, s:e]))
        pairs.extend((float(lam[s]), complex(g)) for g in gammas)
    return pairs


def _membership_verdict(mus_and_queries, condition, params):
    """Shared reduction: all points must lie in their diagrams."""
    worst_margin = math.inf
    witness = None
    holds = True
    for mu, query in mus_and_queries:
        margin = membership_margin(query, mu)
        if complex(mu).real < -1.0 - 1e-12:
            margin = min(margin, -abs(complex(mu).real + 1.0))
        if margin < worst_margin:
            worst_margin = margin
            if not in_diagram(query, mu):
                witness = complex(mu)
        if not in_diagram(query, mu):
            holds = False
    if holds:
        witness = None
    return StabilityVerdict(
        condition=condition,
        holds=holds,
        margin=worst_margin,
        witness=witness,
        params=params,
        inconclusive=abs(worst_margin) < INCONCLUSIVE_MARGIN,
    )


def check_modewise(splitting, op, k):
    """Per-mode membership check (necessary and sufficient, commuting case).

    Requires a shared eigenbasis so that each ``mu_i`` can be paired
    with its own ``y_i = k lambda_i``.
    """
    if not splitting.commuting:
        raise NotSimultaneouslyDiagonalizable("splitting matrices do not commute")
    pairs = paired_modes(splitting)
    items = [
        (gam / lam, diagram(op.p, k * lam, op)) for lam, gam in pairs
    ]
    return _membership_verdict(items, "modewise", {"p": op.p, "k": k})


def check_worst_mode(splitting, op, k):
    """Sufficient check against the diagram of the most negative eigenvalue.

    Does not need the pairing between modes: every generalized
    eigenvalue must lie in the (smallest) diagram at ``y1 = k lambda_1``.
    """
    if not splitting.commuting:
        raise NotSimultaneouslyDiagonalizable("splitting matrices do not commute")
    mus = generalized_eigenvalues(splitting)
    q = diagram(op.p, k * splitting.lambda_min(), op)
    items = [(mu, q) for mu in mus]
    return _membership_verdict(items, "worst-mode", {"p": op.p, "k": k})


def check_unconditional_eigs(splitting, op):
    """Step-size-free membership of all generalized eigenvalues (iff, commuting)."""
    if not splitting.commuting:
        raise NotSimultaneouslyDiagonalizable("splitting matrices do not commute")
    mus = generalized_eigenvalues(splitting)
    q = diagram(op.p, -math.inf, op)
    items = [(mu, q) for mu in mus]
    return _membership_verdict(items, "unconditional-eigenvalues", {"p": op.p})


@dataclass(frozen=True)
class FovBoundary:
    """Support points of a field of values, one (or one mirrored) per angle."""

    angles: np.ndarray
    points: np.ndarray

    @property
    def max_real(self):
        return float(self.points.real.max())

    def convexity_defect(self):
        """Largest violation of the supporting-hyperplane property.

        For exact support points ``Re(e^{i theta_i} (w_i - w_j)) >= 0``
        for all i, j; the return value is the most negative left side.
        """
        phase = np.exp(1j * self.angles)
        support = (phase * self.points).real
        others = (phase[:, None] * self.points[None, :]).real
        return float((support[:, None] - others).min())

    def hull_samples(self, n=64):
        """Deterministic interior points: radial sections toward the centroid."""
        c = self.points.mean()
        m = len(self.points)
        n_dirs = 8
        n_radii = max(1, n // n_dirs)
        dirs = self.points[:: max(1, m // n_dirs)][:n_dirs]
        radii = (np.arange(1, n_radii + 1)) / (n_radii + 1)
        return np.array([c + r * (w - c) for w in dirs for r in radii])

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("theta,re,im\n")
            for th, w in zip(self.angles, self.points):
                fh.write(f"{th:.16e},{w.real:.16e},{w.imag:.16e}\n")


def _support_point(S, W, X, theta, v0, real_form):
    """Leading eigenvector of the rotated Hermitian part, then <x, X x>.

    With ``real_form`` the Hermitian part is ``cos(t) S + i sin(t) W``
    for real ``S = (X + X^T)/2`` and skew ``W = (X - X^T)/2``; otherwise
    it is ``cos(t) S - sin(t) W`` with Hermitian ``S`` and ``W``.
    """
    n = S.shape[0]
    ct, st = math.cos(theta), math.sin(theta)

    def dense_h():
        return ct * S + 1j * st * W if real_form else ct * S - st * W

    def support(x):
        if real_form:
            Xx = X @ np.ascontiguousarray(x.real) + 1j * (X @ np.ascontiguousarray(x.imag))
        else:
            Xx = X @ x
        return complex(np.vdot(x, Xx))

    if n <= 128:
        vals, vecs = np.linalg.eigh(dense_h())
        x = vecs[:, -1]
        return support(x), x
    if real_form:
        # split real/imaginary parts: a complex vector against the real
        # parts would otherwise promote the matrices on every product
        def matvec(v):
            vr, vi = np.ascontiguousarray(v.real), np.ascontiguousarray(v.imag)
            return (ct * (S @ vr) - st * (W @ vi)) + 1j * (ct * (S @ vi) + st * (W @ vr))
    else:
        matvec = lambda v: ct * (S @ v) - st * (W @ v)
    lin = scipy.sparse.linalg.LinearOperator((n, n), matvec=matvec, dtype=complex)
    try:
        # a moderately large Krylov basis copes with the clustered extreme
        # eigenvalues these rotated Hermitian parts tend to have
        vals, vecs = scipy.sparse.linalg.eigsh(
            lin, k=1, which="LA", v0=v0, tol=1e-9, ncv=min(n, 48)
        )
        x = vecs[:, 0]
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        # dense fallback keeps the contract; only the budgeted path failed
        try:
            vals, vecs = np.linalg.eigh(dense_h())
        except np.linalg.LinAlgError:
            raise NoConvergence(str(exc)) from exc
        x = vecs[:, -1]
    return support(x), x


def fov(X, n_theta=DEFAULT_N_THETA):
    """Field-of-values boundary by support-point sweeps over the angle grid.

    For each angle the leading eigenvector of the rotated Hermitian part
    supplies one support point; real matrices are mirrored across the
    real axis to halve the eigenvalue work.
    """
    X = np.asarray(X)
    if X.shape[0] != X.shape[1]:
        raise ValueError("fov requires a square matrix")
    if n_theta < 16:
        raise ValueError("n_theta must be at least 16")
    angles = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    points = np.empty(n_theta, dtype=complex)
    real_input = np.isrealobj(X)
    if real_input:
        S = 0.5 * (X + X.T)
        W = 0.5 * (X - X.T)
    else:
        S = 0.5 * (X + X.conj().T)
        W = (X - X.conj().T) / 2j  # Hermitian; H = cos*S - sin*W
    v0 = None
    half = n_theta // 2
    sweep = range(half + 1) if (real_input and n_theta % 2 == 0) else range(n_theta)
    for i in sweep:
        points[i], v0 = _support_point(S, W, X, angles[i], v0, real_input)
    if real_input and n_theta % 2 == 0:
        for i in range(half + 1, n_theta):
            points[i] = points[n_theta - i].conjugate()
    return FovBoundary(angles=angles, points=points)


def _fractional_pair(Am, q):
    """``(-A)^(q/2-1)`` and ``(-A)^(-q/2)`` from one eigendecomposition."""
    dec = eig_symmetric(Am)
    w, Q = dec.eigenvalues, dec.eigenvectors
    if w[0] <= 0 or w[0] < 1e-12 * w[-1]:
        raise IllConditioned("(-A) is too ill-conditioned for fractional powers")
    P1 = (Q * w ** (q / 2.0 - 1.0)) @ Q.T
    P2 = (Q * w ** (-q / 2.0)) @ Q.T
    return P1, P2


def fov_q(splitting, q, n_theta=DEFAULT_N_THETA):
    """Weighted field of values ``W((-A)^(q/2-1) B (-A)^(-q/2))``."""
    Am = -np.asarray(splitting.A, float)
    P1, P2 = _fractional_pair(Am, float(q))
    X = P1 @ np.asarray(splitting.B, float) @ P2
    return fov(X, n_theta=n_theta)


def _fov_inclusion_verdict(boundary_points, query, condition, params):
    """All sampled FOV points (boundary + hull interior) must satisfy
    ``-w in D``; the witness is the offending FOV point."""
    samples = np.concatenate([boundary_points.points, boundary_points.hull_samples()])
    worst_margin = math.inf
    witness = None
    holds = True
    for w in samples:
        margin = membership_margin(query, -w)
        if (-w).real < -1.0 - 1e-12:
            margin = min(margin, -abs((-w).real + 1.0))
        ok = in_diagram(query, -w)
        if margin < worst_margin:
            worst_margin = margin
            if not ok:
                witness = complex(w)
        if not ok:
            holds = False
    if holds:
        witness = None
    return StabilityVerdict(
        condition=condition,
        holds=holds,
        margin=worst_margin,
        witness=witness,
        params=params,
        inconclusive=abs(worst_margin) < INCONCLUSIVE_MARGIN,
    )


def check_fov_conditional(splitting, op, k, q, n_theta=DEFAULT_N_THETA, fov_boundary=None):
    """Sufficient stability check ``W_q(-A, B) inside -D(y1, p)`` at ``y1 = k lambda_1``.

    A single ``q`` is tested; sweeping candidate exponents is the
    caller's loop.  Pass ``fov_boundary`` to reuse a precomputed FOV.
    """
    if fov_boundary is None:
        fov_boundary = fov_q(splitting, q, n_theta)
    query = diagram(op.p, k * splitting.lambda_min(), op)
    return _fov_inclusion_verdict(
        fov_boundary, query, "fov-conditional", {"p": op.p, "k": k, "q": q}
    )


def check_fov_unconditional(splitting, op, q, n_theta=DEFAULT_N_THETA,
                            fov_boundary=None, mus=None):
    """Step-size-free pair of verdicts.

    Returns ``(sufficient, necessary)``: inclusion of ``W_q(-A, B)`` in
    the negated unconditional diagram, and membership of all
    generalized eigenvalues in the unconditional diagram.  A failing
    necessary verdict certifies that no step size is uniformly stable.
    Pass ``fov_boundary`` and/or ``mus`` to reuse precomputed work.
    """
    if fov_boundary is None:
        fov_boundary = fov_q(splitting, q, n_theta)
    query = diagram(op.p, -math.inf, op)
    sufficient = _fov_inclusion_verdict(
        fov_boundary, query, "fov-unconditional", {"p": op.p, "q": q}
    )
    if mus is None:
        mus = generalized_eigenvalues(splitting)
    necessary = _membership_verdict(
        [(mu, query) for mu in mus], "eigenvalue-necessary", {"p": op.p, "q": q}
    )
    return sufficient, necessary


def kappa_transform(obj, kappa):
    """Rescaling identities when ``A`` is replaced by ``kappa * A``.

    Generalized eigenvalues of ``(A, J)`` map to ``-1 + mu / kappa``;
    field-of-values boundaries of ``(-A, J)`` map to ``1 + w / kappa``.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if isinstance(obj, FovBoundary):
        return FovBoundary(angles=obj.angles, points=1.0 + obj.points / kappa)
    vals = np.asarray(obj, dtype=complex)
    return -1.0 + vals / kappa


def tase_matrix(op, A, k):
    """Dense ``T_p(kA)`` assembled by solving against the identity."""
    A = np.asarray(A, float)
    n = A.shape[0]
    eye = np.eye(n)
    T = np.zeros((n, n))
    for bj, wj in zip(op.beta, op.omega):
        T += bj * np.linalg.solve(eye - wj * k * A, eye)
    return T


def amplification_matrix(splitting, op, k):
    """One-step propagator ``sum_q Z^q / q!`` with ``Z = k T_p(kA) (A + B)``."""
    A = np.asarray(splitting.A, float)
    B = np.asarray(splitting.B, float)
    Z = k * tase_matrix(op, A, k) @ (A + B)
    n = Z.shape[0]
    RT = np.eye(n)
    P = np.eye(n)
    for q in range(1, op.p + 1):
        P = P @ Z / q
        RT = RT + P
    return RT


def spectral_radius_check(splitting, op, k, power_probe=True):
    """Brute-force stability oracle ``rho(RT_p(kA, kB)) <= 1``.

    The spectral radius is the reported criterion; a defective
    unimodular eigenvalue would evade it, so the 256-step power norm is
    logged in ``details`` (never gated) unless ``power_probe=False``.
    """
    RT = amplification_matrix(splitting, op, k)
    eigs = eig_general(RT).eigenvalues
    idx = int(np.argmax(np.abs(eigs)))
    rho = float(np.abs(eigs[idx]))
    holds = rho <= 1.0 + 1e-10
    details = {"rho": rho}
    if power_probe:
        P = RT.copy()
        for _ in range(8):
            P = P @ P
        details["power_norm_256"] = float(np.linalg.norm(P, 2))
    return StabilityVerdict(
        condition="spectral-radius",
        holds=holds,
        margin=1.0 - rho,
        witness=None if holds else complex(eigs[idx]),
        params={"p": op.p, "k": k},
        inconclusive=abs(1.0 - rho) < 1e-9,
        details=details,
    )
