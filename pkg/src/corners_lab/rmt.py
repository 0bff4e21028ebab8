"""Perturbed GUE matrices and their corners eigenvalue process.

The matrix model is ``H = sqrt(t) * G + t * diag(a)`` where ``G`` is GUE:
diagonal entries are standard real normals and off-diagonal entries have
independent real and imaginary parts of variance 1/2 each.
"""

from __future__ import annotations

import numpy as np

from .arrays import InterlacingArray, check_perturbation
from .rng import as_stream

__all__ = [
    "EigensolverError",
    "check_hermitian",
    "sample_perturbed_gue_matrix",
    "corners_eigenvalues",
    "sample_corners_process",
]


class EigensolverError(RuntimeError):
    def __init__(self, message, matrix=None, level=None):
        super().__init__(message)
        self.matrix = matrix
        self.level = level


def check_hermitian(H, atol: float = 0.0) -> np.ndarray:
    """Return ``H`` as a complex array after checking it is square and Hermitian."""
    H = np.asarray(H)
    if H.ndim < 2 or H.shape[-1] != H.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {H.shape}")
    H = H.astype(complex, copy=False)
    if not np.allclose(H, np.conj(np.swapaxes(H, -1, -2)), rtol=0.0, atol=atol):
        raise ValueError("matrix is not Hermitian")
    return H


def sample_perturbed_gue_matrix(n: int, t: float, a, rng=None, size=None) -> np.ndarray:
    """Draw ``sqrt(t) G + t diag(a_1..a_n)``.

    Parameters
    ----------
    n : int
        Matrix dimension.
    t : float
        Time parameter, must be positive.
    a : array_like
        Perturbation sequence with at least ``n`` entries; only the first
        ``n`` are used.
    rng : RngStream, int or Generator, optional
    size : int or tuple, optional
        Batch shape. The result has shape ``size + (n, n)``.

    Returns
    -------
    H : ndarray of complex
        Exactly Hermitian (the lower triangle is the conjugate of the upper).
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if not t > 0:
        raise ValueError("t must be positive")
    a = check_perturbation(a, n)[:n]
    rng = as_stream(rng)
    batch = () if size is None else tuple(np.atleast_1d(size))
    re = rng.standard_normal(batch + (n, n))
    im = rng.standard_normal(batch + (n, n))
    # (A + A^*)/2: diagonal keeps Re A_kk ~ N(0,1), off-diagonal parts get variance 1/2
    A = re + 1j * im
    G = 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))
    idx = np.arange(n)
    G[..., idx, idx] = re[..., idx, idx]
    return np.sqrt(t) * G + t * np.diag(a).astype(complex)


def corners_eigenvalues(H) -> InterlacingArray:
    """Eigenvalues of every top-left ``m x m`` corner, each sorted descending.

    Works on a single matrix or a batch ``(..., n, n)``. Uses LAPACK's
    Hermitian solver one corner at a time.
    """
    H = check_hermitian(H)
    n = H.shape[-1]
    levels = []
    for m in range(1, n + 1):
        try:
            w = np.linalg.eigvalsh(H[..., :m, :m])
        except np.linalg.LinAlgError as exc:
            raise EigensolverError(f"eigensolver failed at level {m}: {exc}", matrix=H, level=m) from exc
        levels.append(w[..., ::-1])
    return InterlacingArray(tuple(levels))


def sample_corners_process(n: int, t: float, a, rng=None, size=None) -> InterlacingArray:
    """Corners process of one (or a batch of) perturbed GUE matrices."""
    return corners_eigenvalues(sample_perturbed_gue_matrix(n, t, a, rng, size))
