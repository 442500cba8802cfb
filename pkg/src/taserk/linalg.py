"""Dense linear-algebra contracts used by the rest of the package.

Matrices are plain ``numpy.ndarray`` objects in row-major order.  The
heavy lifting is delegated to LAPACK through :mod:`scipy.linalg`; this
module only pins down tolerances, error types and a small JSON exchange
format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    IllConditioned,
    NoConvergence,
    NotPositiveDefinite,
    NotSymmetric,
    SolveFailure,
)

#: relative symmetry-detection threshold in max norm
SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (with multiplicity, unordered unless noted) and optional vectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    symmetric: bool = False


def is_symmetric(X, rtol=SYMMETRY_RTOL):
    X = np.asarray(X)
    if X.shape[0] != X.shape[1]:
        return False
    scale = max(np.abs(X).max(), 1e-300)
    return np.abs(X - X.T).max() <= rtol * scale


def solve_spd(M, rhs):
    """Solve ``M x = rhs`` for symmetric positive definite ``M`` via Cholesky.

    Raises
    ------
    NotPositiveDefinite
        If the factorization encounters a non-positive pivot.
    """
    M = np.asarray(M, dtype=float)
    try:
        c, low = scipy.linalg.cho_factor(M, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return scipy.linalg.cho_solve((c, low), rhs, check_finite=False)


def eig_general(X):
    """Eigenvalues (and right eigenvectors) of a general square matrix."""
    X = np.asarray(X)
    if not np.all(np.isfinite(X)):
        raise SolveFailure("matrix has non-finite entries")
    try:
        w, v = scipy.linalg.eig(X, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigenDecomposition(eigenvalues=w, eigenvectors=v, symmetric=False)


def eig_symmetric(X):
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues come back real in ascending order with orthonormal
    eigenvectors.  Symmetry is enforced at ``SYMMETRY_RTOL`` relative in
    max norm.
    """
    X = np.asarray(X, dtype=float)
    if not is_symmetric(X):
        raise NotSymmetric("matrix is not symmetric within 1e-12 relative")
    try:
        w, v = scipy.linalg.eigh(X, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigenDecomposition(eigenvalues=w, eigenvectors=v, symmetric=True)


def fractional_power_spd(M, r):
    """``M**r`` for symmetric positive definite ``M`` via eigendecomposition.

    The result is ``Q diag(lambda_i**r) Q^T`` and therefore symmetric.

    Raises
    ------
    IllConditioned
        When the eigenvalue spread makes ``lambda**r`` overflow/underflow,
        or the smallest eigenvalue is below ``1e-12`` of the largest.
    """
    dec = eig_symmetric(M)
    w = dec.eigenvalues
    if w[0] <= 0 or w[0] < 1e-12 * w[-1]:
        raise IllConditioned(
            f"eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}] too wide for fractional power"
        )
    with np.errstate(over="raise", under="ignore"):
        try:
            wr = w**float(r)
        except FloatingPointError as exc:
            raise IllConditioned(str(exc)) from exc
    if not np.all(np.isfinite(wr)):
        raise IllConditioned("fractional eigenvalue power overflowed")
    Q = dec.eigenvectors
    out = (Q * wr) @ Q.T
    return 0.5 * (out + out.T)


class Factorization:
    """Reusable factorization of a real square matrix.

    Uses Cholesky when the matrix is symmetric positive definite and
    falls back to LU otherwise, so callers can treat both uniformly.
    """

    def __init__(self, M):
        M = np.asarray(M, dtype=float)
        self._cho = None
        self._lu = None
        if is_symmetric(M):
            try:
                self._cho = scipy.linalg.cho_factor(M, check_finite=False)
                return
            except scipy.linalg.LinAlgError:
                pass
        try:
            self._lu = scipy.linalg.lu_factor(M, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise SolveFailure(str(exc)) from exc

    def solve(self, rhs):
        if self._cho is not None:
            return scipy.linalg.cho_solve(self._cho, rhs, check_finite=False)
        return scipy.linalg.lu_solve(self._lu, rhs, check_finite=False)


def load_matrix(path):
    """Read a matrix from the JSON exchange format.

    The format is ``{"rows": n, "cols": m, "data": [...]}`` with row-major
    ``data``; complex entries are stored as ``[re, im]`` pairs.
    """
    with open(path) as fh:
        obj = json.load(fh)
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(data)}")
    if any(isinstance(x, (list, tuple)) for x in data):
        flat = np.array(
            [complex(x[0], x[1]) if isinstance(x, (list, tuple)) else complex(x) for x in data]
        )
    else:
        flat = np.array(data, dtype=float)
    return flat.reshape(rows, cols)


def save_matrix(path, X):
    """Write a matrix in the JSON exchange format (see :func:`load_matrix`)."""
    X = np.asarray(X)
    if np.iscomplexobj(X):
        data = [[float(z.real), float(z.imag)] for z in X.ravel()]
    else:
        data = [float(x) for x in X.ravel()]
    with open(path, "w") as fh:
        json.dump({"rows": X.shape[0], "cols": X.shape[1], "data": data}, fh)
