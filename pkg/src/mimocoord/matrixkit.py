"""Dense complex-Hermitian kernels: Cholesky, eigendecomposition, whitening.

Every solver in the package reduces to these three primitives. All outputs
follow fixed ordering/phase conventions so that repeated runs (and parallel
workers) produce bit-identical results.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConvergenceFailure, DimensionMismatch, NotHermitian, NotPositiveDefinite

HERMITIAN_RTOL = 1e-10
PHASE_TOL = 1e-12


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor of a Hermitian positive-definite matrix.

    ``lower @ lower.conj().T`` reconstructs the input; the diagonal is real
    and strictly positive.
    """

    lower: np.ndarray
    dim: int


@dataclass(frozen=True)
class EigenPair:
    """Hermitian eigendecomposition with deterministic conventions.

    ``values`` sorted descending (ties kept in the factorization's original
    column order); each eigenvector's first component of magnitude above
    ``PHASE_TOL`` is rotated to be real and positive.
    """

    values: np.ndarray
    vectors: np.ndarray


def _as_square(a, name):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    return a


def _check_hermitian(a, name):
    scale = np.linalg.norm(a, "fro")
    if scale == 0.0:
        return
    if np.linalg.norm(a - a.conj().T, "fro") > HERMITIAN_RTOL * scale:
        raise NotHermitian(f"{name} is not Hermitian within {HERMITIAN_RTOL:g} relative asymmetry")


def hermitize(a):
    """Return the Hermitian part (a + a^H)/2, suppressing round-off asymmetry."""
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def cholesky(q) -> CholeskyFactor:
    """Factor a Hermitian positive-definite matrix as L L^H with L lower-triangular.

    Raises
    ------
    NotPositiveDefinite
        If a pivot falls at or below ``n * eps * trace(q)``, which signals a
        degenerate I+N covariance (the caller forgot the noise-floor term).
    """
    q = _as_square(q, "q")
    _check_hermitian(q, "q")
    n = q.shape[0]
    threshold = n * np.finfo(float).eps * max(float(np.real(np.trace(q))), 0.0)
    try:
        lower = np.linalg.cholesky(hermitize(q))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"cholesky failed: {exc}") from exc
    pivots = np.real(np.diag(lower)) ** 2
    if np.any(pivots <= threshold):
        raise NotPositiveDefinite(
            f"pivot {pivots.min():.3e} at or below degeneracy threshold {threshold:.3e}"
        )
    return CholeskyFactor(lower=lower, dim=n)


def _fix_phases(vectors):
    """Rotate each column so its first component above PHASE_TOL is real positive."""
    fixed = vectors.copy()
    for j in range(fixed.shape[1]):
        col = fixed[:, j]
        idx = np.flatnonzero(np.abs(col) > PHASE_TOL)
        if idx.size:
            pivot = col[idx[0]]
            fixed[:, j] = col * (pivot.conjugate() / abs(pivot))
    return fixed


def herm_eig(m) -> EigenPair:
    """Eigendecompose a Hermitian (PSD in normal use) matrix.

    Eigenvalues are returned in descending order; exact ties keep the
    ascending-index order of the underlying factorization (stable sort), and
    eigenvector phases follow the first-large-component-real-positive rule,
    so identical inputs give bit-identical outputs.
    """
    m = _as_square(m, "m")
    _check_hermitian(m, "m")
    try:
        values, vectors = np.linalg.eigh(hermitize(m))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(-values, kind="stable")
    return EigenPair(values=values[order], vectors=_fix_phases(vectors[:, order]))


def whiten(r, q):
    """Whiten a PSD matrix by a PD one: return (L, M) with M = L^-1 r L^-H.

    Computed with forward/back triangular substitution (never an explicit
    inverse) and Hermitian-symmetrized before return. The eigenvalues of M
    equal those of q^-1 r.
    """
    r = _as_square(r, "r")
    factor = cholesky(q)
    if r.shape[0] != factor.dim:
        raise DimensionMismatch(f"r is {r.shape}, q is {factor.dim}x{factor.dim}")
    # L^-1 r, then (L^-1 r) L^-H  ==  solve L x = r, then solve x L^H = m.
    half = solve_triangular(factor.lower, r, lower=True)
    m = solve_triangular(factor.lower, half.conj().T, lower=True).conj().T
    return factor, hermitize(m)


def solve_lower_herm(factor: CholeskyFactor, b):
    """Solve L^H x = b for x, i.e. apply L^-H to b."""
    return solve_triangular(factor.lower, np.asarray(b, dtype=complex), lower=True, trans="C")
