"""Dense symmetric-matrix kernels shared by every model.

All matrices are plain ``float64`` ndarrays. Symmetry and positive
definiteness are enforced by the validators below rather than by wrapper
classes; operations that promise a symmetric result build it explicitly so
``A == A.T`` holds bit-exactly.

The half-vectorization ``vec_star`` stacks the main diagonal first, then each
super-diagonal left to right. That ordering is a frozen contract: the
structural matrices of the log-covariance model index into it.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import DimensionError, NotPositiveDefiniteError, NumericalError

log = logging.getLogger(__name__)

# Relative eigenvalue floor below which a matrix is treated as singular.
SPD_EIG_FLOOR = 1e-12
# Condition numbers above this get logged (tiny view uncertainties create
# deliberately ill-conditioned systems; we want a record, not a failure).
COND_WARN = 1e10


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square 2-D, got shape {a.shape}")
    return a


def symmetrize(a) -> np.ndarray:
    """Return 0.5*(A + A.T); output is exactly symmetric."""
    a = as_matrix(a)
    return 0.5 * (a + a.T)


def require_symmetric(a, name: str = "matrix", tol: float = 1e-12) -> np.ndarray:
    """Validate symmetry (relative to the largest entry) and return an
    exactly symmetric copy."""
    a = as_matrix(a, name)
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > tol * scale:
        raise DimensionError(f"{name} is not symmetric")
    return symmetrize(a)


def require_spd(a, name: str = "matrix") -> np.ndarray:
    """Validate that ``a`` is symmetric positive definite.

    Rejects matrices whose smallest eigenvalue is at or below
    ``SPD_EIG_FLOOR`` times the largest, so near-singular inputs fail loudly
    instead of silently poisoning a factorization downstream.
    """
    a = require_symmetric(a, name)
    w = np.linalg.eigvalsh(a)
    if w[0] <= SPD_EIG_FLOOR * max(w[-1], 0.0) or w[-1] <= 0.0:
        raise NotPositiveDefiniteError(
            f"{name} is not positive definite: eigenvalue range "
            f"[{w[0]:.3e}, {w[-1]:.3e}]"
        )
    return a


def add_jitter(a, rel: float = 1e-10) -> np.ndarray:
    """Opt-in diagonal jitter of ``rel * trace/n``; the amount is logged."""
    a = require_symmetric(a)
    eps = rel * np.trace(a) / a.shape[0]
    log.info("adding diagonal jitter %.3e to %dx%d matrix", eps, *a.shape)
    return a + eps * np.eye(a.shape[0])


def spd_solve(a, b, name: str = "system"):
    """Solve ``a @ x = b`` for SPD ``a`` via Cholesky.

    Logs a warning when the condition number exceeds ``COND_WARN`` and raises
    :class:`NumericalError` (with a condition report) if the factorization
    fails.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    try:
        c = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        w = np.linalg.eigvalsh(symmetrize(a))
        raise NumericalError(
            f"{name}: Cholesky failed; eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}]"
        ) from exc
    w = np.linalg.eigvalsh(symmetrize(a))
    if w[0] > 0 and w[-1] / w[0] > COND_WARN:
        log.warning("%s: condition number %.3e exceeds %.0e", name, w[-1] / w[0], COND_WARN)
    y = np.linalg.solve(c, b)
    return np.linalg.solve(c.T, y)


def spd_inverse(a, name: str = "matrix") -> np.ndarray:
    """Symmetric inverse of an SPD matrix (via :func:`spd_solve`)."""
    a = np.asarray(a, dtype=float)
    return symmetrize(spd_solve(a, np.eye(a.shape[0]), name))


# ---------------------------------------------------------------------------
# Half-vectorization: diagonal-first stacking of a symmetric matrix.
# ---------------------------------------------------------------------------

_INDEX_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def vec_star_dim(n: int) -> int:
    return n * (n + 1) // 2


def vec_star_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column index arrays of the stacking order.

    Position ``p`` of the stacked vector holds entry ``(rows[p], cols[p])``:
    the main diagonal first, then the first super-diagonal, and so on up to
    the single corner entry ``(0, n-1)``.
    """
    if n not in _INDEX_CACHE:
        rows = np.concatenate([np.arange(n - off) for off in range(n)])
        cols = np.concatenate([np.arange(off, n) for off in range(n)])
        _INDEX_CACHE[n] = (rows, cols)
    return _INDEX_CACHE[n]


def vec_star(a) -> np.ndarray:
    """Stack a symmetric matrix into a length ``n(n+1)/2`` vector.

    ``[[a, b], [b, c]]`` maps to ``[a, c, b]``.
    """
    a = require_symmetric(a)
    rows, cols = vec_star_indices(a.shape[0])
    return a[rows, cols].copy()


def source_dim_of(d: int) -> int:
    """Matrix dimension ``n`` with ``n(n+1)/2 == d``."""
    n = int((np.sqrt(8 * d + 1) - 1) / 2 + 0.5)
    if vec_star_dim(n) != d:
        raise DimensionError(f"length {d} is not of the form n(n+1)/2")
    return n


def vec_star_inverse(v) -> np.ndarray:
    """Rebuild the symmetric matrix whose stacking is ``v`` (exact inverse
    of :func:`vec_star`)."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    n = source_dim_of(v.size)
    rows, cols = vec_star_indices(n)
    a = np.zeros((n, n))
    a[rows, cols] = v
    a[cols, rows] = v
    return a


def vec_star_bilinear(m) -> np.ndarray:
    """Stack an arbitrary square matrix so that for every symmetric ``A``::

        vec_star(A) @ vec_star_bilinear(M) == sum(A * M)

    Diagonal slots take ``M[k, k]``; the slot for ``(k, l)`` with ``k < l``
    takes ``M[k, l] + M[l, k]`` (the two occurrences of ``A[k, l]``).
    """
    m = as_matrix(m)
    rows, cols = vec_star_indices(m.shape[0])
    out = m[rows, cols] + m[cols, rows]
    out[: m.shape[0]] *= 0.5
    return out


# ---------------------------------------------------------------------------
# Matrix log/exp through the symmetric eigendecomposition.
# ---------------------------------------------------------------------------


def matrix_log_spd(a) -> np.ndarray:
    """Matrix logarithm of an SPD matrix.

    Uses the spectral decomposition, so eigenvalues of the result are the
    logs of the input's eigenvalues. Raises
    :class:`NotPositiveDefiniteError` for non-SPD input.
    """
    a = require_spd(a, "matrix_log_spd input")
    w, v = np.linalg.eigh(a)
    return symmetrize((v * np.log(w)) @ v.T)


def matrix_exp_sym(a) -> np.ndarray:
    """Matrix exponential of a symmetric matrix (always SPD)."""
    a = require_symmetric(a, "matrix_exp_sym input")
    w, v = np.linalg.eigh(a)
    return symmetrize((v * np.exp(w)) @ v.T)


def log_det_spd(a, name: str = "matrix") -> float:
    """log det of an SPD matrix via Cholesky."""
    a = np.asarray(a, dtype=float)
    try:
        c = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"{name} is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diag(c))))


# ---------------------------------------------------------------------------
# Completing the square.
# ---------------------------------------------------------------------------


def complete_square(a_mat, a_vec, b_mat, b_vec):
    """Combine two quadratic forms centred at ``a_vec`` and ``b_vec``.

    For SPD ``A`` and ``B``::

        (y-a)'A(y-a) + (y-b)'B(y-b)
            == (y-y*)'(A+B)(y-y*) + (a-b)'H(a-b)

    Returns ``(y_star, H, combined)`` with ``y* = (A+B)^-1 (Aa + Bb)``,
    ``H = (A^-1 + B^-1)^-1`` and ``combined = A + B``.
    """
    a_mat = require_spd(a_mat, "complete_square A")
    b_mat = require_spd(b_mat, "complete_square B")
    a_vec = np.asarray(a_vec, dtype=float)
    b_vec = np.asarray(b_vec, dtype=float)
    p = a_mat.shape[0]
    if b_mat.shape[0] != p or a_vec.shape != (p,) or b_vec.shape != (p,):
        raise DimensionError("complete_square: dimensions do not agree")
    combined = a_mat + b_mat
    y_star = spd_solve(combined, a_mat @ a_vec + b_mat @ b_vec, "complete_square A+B")
    h = spd_inverse(spd_inverse(a_mat) + spd_inverse(b_mat), "complete_square H")
    return y_star, h, combined
