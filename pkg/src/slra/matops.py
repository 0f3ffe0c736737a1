"""Dense complex matrix primitives: SVD, Frobenius geometry, numerical rank,
singular value functional calculus, and the scalar threshold maps."""

from typing import Callable, NamedTuple

import numpy as np


class SvdFactors(NamedTuple):
    """Thin SVD triple: ``A = U @ diag(sigma) @ V.conj().T``.

    ``U`` is (m, k), ``V`` is (n, k), both with orthonormal columns,
    ``sigma`` is length k = min(m, n), non-negative and non-increasing.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.conj().T


def _as_matrix(a):
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def frobenius_inner(a, b) -> float:
    """Real Frobenius inner product Re(sum(conj(a_ij) * b_ij)).

    Symmetric on complex matrices and reduces to the usual trace inner
    product for real ones; ``frobenius_inner(a, a) == frobenius_norm(a)**2``.
    """
    a, b = _as_matrix(a), _as_matrix(b)
    _check_same_shape(a, b)
    return float(np.real(np.vdot(a, b)))


def frobenius_norm(a) -> float:
    """Frobenius norm sqrt(sum |a_ij|^2)."""
    return float(np.linalg.norm(_as_matrix(a)))


def svd(a) -> SvdFactors:
    """Thin singular value decomposition of a finite matrix.

    Raises
    ------
    ValueError
        If the input contains NaN or Inf entries.
    numpy.linalg.LinAlgError
        If the underlying decomposition fails to converge.
    """
    a = _as_matrix(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return SvdFactors(u, s, vh.conj().T)


def singular_values(a) -> np.ndarray:
    """Singular values only (non-increasing), skipping the vector computation."""
    a = _as_matrix(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return np.linalg.svd(a, compute_uv=False)


def f_hard(x, sigma0: float):
    """Hard threshold: 0 below sigma0, identity from sigma0 on.

    The tie at ``x == sigma0`` resolves to ``sigma0`` (the value is kept).
    Accepts scalars or arrays of non-negative values.
    """
    x = np.asarray(x, dtype=float)
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    if np.any(x < 0):
        raise ValueError("threshold input must be non-negative")
    out = np.where(x >= sigma0, x, 0.0)
    return float(out) if out.ndim == 0 else out


def f_alpha(x, sigma0: float, alpha: float):
    """Three-branch shrinkage map of the augmented primal update.

    Returns 0 for ``x < sigma0``, the ramp ``(2/alpha) * (x - sigma0)`` on
    ``[sigma0, (1 + alpha/2) * sigma0)`` and ``x / (1 + alpha/2)`` above.
    Continuous and monotone for ``alpha > 0``; ``alpha == 0`` delegates to
    the hard threshold ``f_hard``. Satisfies ``0 <= f_alpha(x) <= x``.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == 0:
        return f_hard(x, sigma0)
    x = np.asarray(x, dtype=float)
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    if np.any(x < 0):
        raise ValueError("threshold input must be non-negative")
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    knee = (1.0 + alpha / 2.0) * sigma0
    out = np.zeros_like(xv)
    ramp = (xv >= sigma0) & (xv < knee)
    out[ramp] = (2.0 / alpha) * (xv[ramp] - sigma0)
    top = xv >= knee
    out[top] = xv[top] / (1.0 + alpha / 2.0)
    return float(out[0]) if scalar else out


def apply_svfc(a, f: Callable[[np.ndarray], np.ndarray]):
    """Singular value functional calculus: replace each singular value
    sigma_j by f(sigma_j), keeping the singular vectors.

    ``f`` must be defined (elementwise, vectorized) on [0, sigma_1(a)].
    """
    u, s, v = svd(a)
    fs = np.asarray(f(s), dtype=float)
    return (u * fs) @ v.conj().T


def numerical_rank(a, rel_tol: float = 1e-9) -> int:
    """Number of singular values above ``rel_tol * sigma_1`` (0 for the
    zero matrix).  ``rel_tol`` must lie in (0, 1)."""
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    s = singular_values(a)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))
