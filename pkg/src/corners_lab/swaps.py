"""Exponential jump (swap) operators on interlacing arrays.

A left jump moves a point ``x`` of ``(c, d)`` to ``c + min(E, x - c)`` with
``E`` exponential of rate ``alpha``; a right jump moves it to
``d - min(E, d - x)``. Applied to every entry of level ``k`` inside its
interlacing interval these realise the level swap, which exchanges the
perturbation parameters ``a_k`` and ``a_{k+1}`` in law. Sweeping the level
swap over ``k = 1, 2, ..., N-1`` for ``a = (0, -alpha, -2 alpha, ...)`` shifts
the whole array by ``-alpha t`` in law.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .arrays import InterlacingArray, check_perturbation, transpose_parameters
from .gibbs import level_intervals
from .rng import as_stream

__all__ = [
    "jump_left",
    "jump_right",
    "elementary_swap_left",
    "elementary_swap_right",
    "level_swap",
    "SweepResult",
    "global_shift_sweep",
    "compose_swaps",
    "arithmetic_parameters",
]


def jump_left(x, c, e):
    """``c + min(e, x - c)`` for given exponential draws ``e``.

    A saturated jump returns ``x`` itself (``c + (x - c)`` need not round
    back to ``x``), so the atom at ``x`` is exact and ``c <= y <= x`` holds
    in floating point.
    """
    x, c, e = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, c, e)))
    return np.where(e < x - c, np.minimum(c + e, x), x)


def jump_right(x, d, e):
    """``d - min(e, d - x)`` for given exponential draws ``e``; saturated jumps return ``x``."""
    x, d, e = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, d, e)))
    return np.where(e < d - x, np.maximum(d - e, x), x)


def _positive_rate(rate, name):
    if not np.all(np.asarray(rate) > 0):
        raise ValueError(f"{name} must be positive, got {rate}")


def elementary_swap_left(x, c, alpha, rng=None):
    """Left jump of rate ``alpha`` towards ``c``.

    Sends ``E_alpha(c, d)`` to ``E_{-alpha}(c, d)`` whatever ``d`` is. The
    output equals ``x`` with probability ``exp(-alpha (x - c))``.
    """
    _positive_rate(alpha, "alpha")
    x, c = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(c, dtype=float))
    if np.any(x < c):
        raise ValueError("need x >= c")
    y = jump_left(x, c, as_stream(rng).exponential(alpha, x.shape))
    return float(y) if y.ndim == 0 else y


def elementary_swap_right(x, d, beta, rng=None):
    """Right jump of rate ``beta`` towards ``d``; sends ``E_{-beta}(c, d)`` to ``E_beta(c, d)``."""
    _positive_rate(beta, "beta")
    x, d = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(d, dtype=float))
    if np.any(x > d):
        raise ValueError("need x <= d")
    y = jump_right(x, d, as_stream(rng).exponential(beta, x.shape))
    return float(y) if y.ndim == 0 else y


def level_swap(arr: InterlacingArray, k: int, a, rng=None):
    """Apply the swap operator at level ``k`` and transpose ``a_k <-> a_{k+1}``.

    For ``a_k > a_{k+1}`` every ``lam^k_i`` jumps left towards
    ``lam^{k+1}_{i+1} v lam^{k-1}_i`` with rate ``a_k - a_{k+1}``; for
    ``a_k < a_{k+1}`` it jumps right towards ``lam^{k+1}_i ^ lam^{k-1}_{i-1}``
    with rate ``a_{k+1} - a_k``; equal parameters leave the array alone. One
    exponential per entry, drawn in index order ``i = 1..k``.

    Returns
    -------
    (InterlacingArray, ndarray)
        The new array (only level ``k`` differs) and the transposed parameters.
    """
    n = arr.depth
    if not 1 <= k < n:
        raise IndexError(f"level swap needs 1 <= k < {n}, got k={k}")
    a = check_perturbation(a, n)
    swapped = transpose_parameters(a, k)
    rate = a[k - 1] - a[k]
    if rate == 0:
        return arr, swapped
    lo, hi = level_intervals(arr, k)
    x = arr.level(k)
    e = as_stream(rng).exponential(abs(rate), x.shape)
    new = jump_left(x, lo, e) if rate > 0 else jump_right(x, hi, e)
    return arr.with_level(k, new), swapped


def arithmetic_parameters(n: int, alpha: float) -> np.ndarray:
    """``(0, -alpha, -2 alpha, ..., -(n-1) alpha)``."""
    return -alpha * np.arange(n, dtype=float)


class SweepResult(NamedTuple):
    """Output of :func:`global_shift_sweep`.

    ``array`` has all ``N`` levels, but only levels ``1..N-1`` follow the
    shifted law; ``tainted_level`` (``N``) marks the level that would need
    level ``N+1`` to be swapped. ``parameters`` is the running parameter
    sequence after the sweep.
    """

    array: InterlacingArray
    parameters: np.ndarray
    tainted_level: int

    @property
    def faithful(self) -> InterlacingArray:
        """Levels ``1..N-1``, the part distributed as the shifted array."""
        return self.array.truncate(self.tainted_level - 1)


def global_shift_sweep(arr: InterlacingArray, alpha: float, rng=None) -> SweepResult:
    """Level swaps at ``k = 1, ..., N-1`` for ``a = (0, -alpha, ..., -(N-1) alpha)``.

    The rate at level ``k`` is ``k alpha`` (the running parameter ``0`` meets
    ``-k alpha``). When the input is the corners process of
    ``sqrt(t) G + t diag(a)``, levels ``1..N-1`` of the result are
    distributed as the input shifted by ``-alpha t``. The sweep turns the
    parameters into ``(-alpha, ..., -(N-1) alpha, 0)`` and the law of levels
    ``1..N-1`` only involves the first ``N-1`` of them. Level ``N`` is
    untouched and flagged as tainted.
    """
    n = arr.depth
    if n < 2:
        raise ValueError("the sweep needs at least two levels")
    _positive_rate(alpha, "alpha")
    out, a = compose_swaps(arr, range(1, n), arithmetic_parameters(n, alpha), rng)
    return SweepResult(out, a, n)


def compose_swaps(arr: InterlacingArray, schedule: Sequence[int], a, rng=None):
    """Apply :func:`level_swap` for each ``k`` in ``schedule`` in turn, tracking ``a``."""
    rng = as_stream(rng)
    a = check_perturbation(a, arr.depth)
    for k in schedule:
        arr, a = level_swap(arr, int(k), a, rng)
    return arr, a
