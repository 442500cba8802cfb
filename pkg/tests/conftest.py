import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_spd(rng, n, shift=None):
    """Random symmetric positive definite matrix with eigenvalues >= ~1."""
    R = rng.standard_normal((n, n))
    M = R @ R.T
    return M + (n if shift is None else shift) * np.eye(n)


def random_sym_negdef(rng, n, lam_lo=-100.0, lam_hi=-0.1):
    """Random symmetric negative definite matrix with spectrum in [lam_lo, lam_hi]."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = rng.uniform(lam_lo, lam_hi, n)
    return (Q * lam) @ Q.T
