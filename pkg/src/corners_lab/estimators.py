"""scikit-learn style wrappers around the jump operators.

Batches of interlacing arrays are passed in packed form, an ``(n, N(N+1)/2)``
matrix whose row lists ``lam^1_1, lam^2_1, lam^2_2, lam^3_1, ...``. Every
transformer draws its randomness from a stream created in :meth:`fit` from
``random_state``, so ``fit(X).transform(X)`` is reproducible.

Examples
--------
>>> from corners_lab.estimators import CornersSampler, LevelSwap
>>> X = CornersSampler(depth=3, a=(0.5, -0.2, 0.1), random_state=0).sample(4)
>>> LevelSwap(k=1, a=(0.5, -0.2, 0.1), random_state=0).fit_transform(X).shape
(4, 6)
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .arrays import InterlacingArray, check_perturbation, validate_interlacing
from .gibbs import resample_level
from .rbm import exponential_jump_map
from .rmt import sample_corners_process
from .rng import as_stream
from .swaps import global_shift_sweep, level_swap

__all__ = [
    "check_interlacing_array",
    "CornersSampler",
    "LevelSwap",
    "GlobalShiftSweep",
    "GibbsLevelResampler",
    "ArrayShift",
    "ExponentialJumpMap",
]


def _depth_from_width(m: int) -> int:
    depth = int(round((math.sqrt(8 * m + 1) - 1) / 2))
    if depth * (depth + 1) // 2 != m:
        raise ValueError(f"{m} columns is not a triangular number N(N+1)/2")
    return depth


def check_interlacing_array(X, tol: float = 0.0) -> InterlacingArray:
    """Validate a packed batch and return it as an :class:`InterlacingArray`.

    Raises ``ValueError`` naming the first ``(level, index, sample)`` that
    breaks interlacing by more than ``tol``.
    """
    X = check_array(X, dtype=float)
    _depth_from_width(X.shape[1])
    arr = InterlacingArray.from_packed(X)
    report = validate_interlacing(arr, tol)
    if not report.ok:
        raise ValueError(report.message)
    return arr


class _JumpTransformer(TransformerMixin, BaseEstimator):
    """Shared fit: validates the width and creates the random stream."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        self.depth_ = _depth_from_width(X.shape[1])
        self._check_params()
        self.rng_ = as_stream(self.random_state)
        return self

    def _check_params(self):
        pass

    def _input(self, X) -> InterlacingArray:
        check_is_fitted(self, "rng_")
        # inputs usually come from the eigensolver, which interlaces only up to round-off
        arr = check_interlacing_array(X, tol=1e-8)
        if arr.depth != self.depth_:
            raise ValueError(f"fitted on depth {self.depth_}, got depth {arr.depth}")
        return arr


class LevelSwap(_JumpTransformer):
    """Swap operator at level ``k`` for parameters ``a``.

    After ``transform`` the attribute ``parameters_`` holds ``a`` with
    entries ``k`` and ``k+1`` exchanged.
    """

    def __init__(self, k=1, a=None, random_state=None):
        self.k = k
        self.a = a
        self.random_state = random_state

    def _check_params(self):
        if self.a is None:
            raise ValueError("a is required")
        check_perturbation(self.a, self.depth_)
        if not 1 <= self.k < self.depth_:
            raise ValueError(f"k must satisfy 1 <= k < {self.depth_}")

    def transform(self, X):
        arr = self._input(X)
        out, self.parameters_ = level_swap(arr, self.k, self.a, self.rng_)
        return out.packed()


class GlobalShiftSweep(_JumpTransformer):
    """Level swaps ``k = 1..N-1`` for ``a = (0, -alpha, ..., -(N-1) alpha)``.

    Only levels ``1..N-1`` of the output follow the shifted law; level ``N``
    is returned unchanged.
    """

    def __init__(self, alpha=1.0, random_state=None):
        self.alpha = alpha
        self.random_state = random_state

    def _check_params(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.depth_ < 2:
            raise ValueError("the sweep needs depth >= 2")

    def transform(self, X):
        res = global_shift_sweep(self._input(X), self.alpha, self.rng_)
        return res.array.packed()


class GibbsLevelResampler(_JumpTransformer):
    """Redraw level ``k`` from its conditional law with tilt ``alpha = a_k - a_{k+1}``."""

    def __init__(self, k=1, alpha=0.0, random_state=None):
        self.k = k
        self.alpha = alpha
        self.random_state = random_state

    def _check_params(self):
        if not 1 <= self.k < self.depth_:
            raise ValueError(f"k must satisfy 1 <= k < {self.depth_}")
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")

    def transform(self, X):
        return resample_level(self._input(X), self.k, self.alpha, self.rng_).packed()


class ArrayShift(TransformerMixin, BaseEstimator):
    """Add a constant to every entry; the deterministic part of the global shift."""

    def __init__(self, shift=0.0):
        self.shift = shift

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return check_array(X, dtype=float) + self.shift

    def inverse_transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return check_array(X, dtype=float) - self.shift


class ExponentialJumpMap(TransformerMixin, BaseEstimator):
    """``X'_k = X_{k+1} + min(Exp(k alpha), X_k - X_{k+1})`` on rows of edge values.

    Input rows are non-increasing vectors ``(X_1, ..., X_K)``; output rows
    have ``K - 1`` entries.
    """

    def __init__(self, alpha=1.0, random_state=None):
        self.alpha = alpha
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[1] < 2:
            raise ValueError("need at least two columns")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        self.n_features_in_ = X.shape[1]
        self.rng_ = as_stream(self.random_state)
        return self

    def transform(self, X):
        check_is_fitted(self, "rng_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return exponential_jump_map(X, self.alpha, self.rng_)


class CornersSampler(BaseEstimator):
    """Draws packed corners samples of ``sqrt(t) G + t diag(a)``."""

    def __init__(self, depth=3, t=1.0, a=None, random_state=None):
        self.depth = depth
        self.t = t
        self.a = a
        self.random_state = random_state

    def sample(self, n_samples: int) -> np.ndarray:
        a = np.zeros(self.depth) if self.a is None else self.a
        if not hasattr(self, "rng_"):
            self.rng_ = as_stream(self.random_state)
        arr = sample_corners_process(self.depth, self.t, a, self.rng_, size=int(n_samples))
        return arr.packed()
