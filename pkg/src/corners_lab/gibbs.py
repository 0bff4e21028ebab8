"""Exponentially tilted Gibbs structure of the perturbed GUE corners process.

Contents:

* the confined exponential law ``E_alpha(c, d)`` (density proportional to
  ``exp(alpha x)`` on ``(c, d)``) with a numerically stable CDF/quantile;
* :func:`resample_level`, the exact conditional resampler of one level given
  its two neighbours;
* unnormalised log densities: single top level, joint over all levels, the
  conditional of the lower levels given the top one, and the harmonic
  function of the perturbed GUE family;
* quadrature normalisers for small depth, used as density oracles.

All log densities are vectorised over leading batch dimensions of their
array arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .arrays import InterlacingArray, check_perturbation, interlacing_mask, level_sums
from .rng import as_stream

__all__ = [
    "ConfinedExponential",
    "confined_exp_cdf",
    "confined_exp_quantile",
    "confined_exp_sample",
    "confined_exp_mean",
    "level_intervals",
    "resample_level",
    "vandermonde",
    "log_density_level_N",
    "normalize_by_quadrature",
    "level_density_normalizer",
    "log_joint_density",
    "log_conditional_gibbs",
    "harmonic_fn_pert_gue",
    "RepeatedParametersError",
]

# below this |alpha (d - c)| the law is treated as uniform plus a first-order tilt
_SMALL_TILT = 1e-8


class RepeatedParametersError(ValueError):
    """Raised where a density needs pairwise distinct parameters (confluent forms are not implemented)."""


@dataclass(frozen=True)
class ConfinedExponential:
    """``E_alpha(c, d)``: density ``alpha e^{alpha x} / (e^{alpha d} - e^{alpha c})`` on ``(c, d)``.

    ``alpha`` may be negative; ``alpha == 0`` is the uniform law.
    """

    alpha: float
    c: float
    d: float

    def __post_init__(self):
        if not (np.isfinite(self.c) and np.isfinite(self.d)):
            raise ValueError("interval ends must be finite")
        if not self.c < self.d:
            raise ValueError(f"need c < d, got c={self.c}, d={self.d}")
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")

    def cdf(self, x):
        return confined_exp_cdf(self, x)

    def quantile(self, u):
        return confined_exp_quantile(self, u)

    def mean(self) -> float:
        return confined_exp_mean(self)


def _cdf(alpha, c, d, x):
    alpha, c, d, x = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (alpha, c, d, x)))
    length = d - c
    s = np.clip((x - c) / np.where(length > 0, length, 1.0), 0.0, 1.0)
    eps = alpha * length
    out = np.empty(s.shape)
    small = np.abs(eps) < _SMALL_TILT
    out[small] = s[small] + 0.5 * eps[small] * s[small] * (s[small] - 1.0)
    pos = ~small & (eps > 0)
    neg = ~small & (eps < 0)
    # alpha > 0: write relative to d to avoid overflow of e^{alpha (d-c)}
    e, sp = eps[pos], s[pos]
    out[pos] = np.exp(-e * (1.0 - sp)) * (-np.expm1(-e * sp)) / (-np.expm1(-e))
    e, sn = eps[neg], s[neg]
    out[neg] = np.expm1(e * sn) / np.expm1(e)
    return np.clip(out, 0.0, 1.0)


def _quantile(alpha, c, d, u):
    alpha, c, d, u = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (alpha, c, d, u)))
    length = d - c
    eps = alpha * length
    s = np.empty(u.shape)
    small = np.abs(eps) < _SMALL_TILT
    us = u[small]
    s[small] = us + 0.5 * eps[small] * us * (1.0 - us)
    pos = ~small & (eps > 0)
    neg = ~small & (eps < 0)
    e, up = eps[pos], u[pos]
    s[pos] = 1.0 + np.log(up + (1.0 - up) * np.exp(-e)) / e
    e, un = eps[neg], u[neg]
    # log(1 - u + u e^eps); log1p(u expm1(eps)) hits log(0) at u = 1 once expm1 rounds to -1
    with np.errstate(divide="ignore"):
        s[neg] = np.logaddexp(np.log1p(-un), np.log(un) + e) / e
    x = c + np.clip(s, 0.0, 1.0) * length
    return np.minimum(np.maximum(x, c), d)


def confined_exp_cdf(p: ConfinedExponential, x):
    """``P(X <= x)`` for ``X ~ E_alpha(c, d)``; 0 below ``c``, 1 above ``d``."""
    return _cdf(p.alpha, p.c, p.d, x)


def confined_exp_quantile(p: ConfinedExponential, u):
    """Inverse CDF.

    Uses ``(e^{alpha(x-c)} - 1) / (e^{alpha(d-c)} - 1) = u`` in expm1/log1p
    form, rewritten around ``d`` for positive tilt so nothing overflows.
    The result always lies in ``[c, d]``.
    """
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("u must lie in [0, 1]")
    out = _quantile(p.alpha, p.c, p.d, u)
    return float(out) if out.ndim == 0 else out


def confined_exp_sample(p: ConfinedExponential, rng=None, size=None):
    """Inverse-CDF draw(s) from ``E_alpha(c, d)``."""
    u = as_stream(rng).uniform(size)
    out = _quantile(p.alpha, p.c, p.d, u)
    return float(out) if out.ndim == 0 else out


def confined_exp_mean(p: ConfinedExponential) -> float:
    """Closed-form mean ``(d e^{ad} - c e^{ac}) / (e^{ad} - e^{ac}) - 1/a``."""
    length = p.d - p.c
    eps = p.alpha * length
    if abs(eps) < 1e-6:
        return p.c + length * (0.5 + eps / 12.0)
    # mean of the rescaled variable on (0, 1) with tilt eps
    m01 = 1.0 / (-math.expm1(-eps)) - 1.0 / eps
    return p.c + length * m01


def level_intervals(arr: InterlacingArray, k: int):
    """Lower and upper ends of the interlacing interval of every entry of level ``k``.

    Entry ``i`` of level ``k`` ranges over
    ``(lam^{k+1}_{i+1} v lam^{k-1}_i, lam^{k+1}_i ^ lam^{k-1}_{i-1})`` with the
    conventions ``lam^{k-1}_k = -inf`` and ``lam^{k-1}_0 = +inf``. Needs
    ``1 <= k < N``.
    """
    if not 1 <= k < arr.depth:
        raise IndexError(f"level {k} has no level above it in a depth-{arr.depth} array")
    above = arr.level(k + 1)
    lo, hi = above[..., 1:], above[..., :-1]
    if k > 1:
        below = arr.level(k - 1)
        lo = lo.copy()
        hi = hi.copy()
        lo[..., :-1] = np.maximum(lo[..., :-1], below)
        hi[..., 1:] = np.minimum(hi[..., 1:], below)
    return lo, hi


def resample_level(arr: InterlacingArray, k: int, alpha: float, rng=None) -> InterlacingArray:
    """Redraw level ``k`` from its exact conditional law given levels ``k-1`` and ``k+1``.

    Each entry is an independent ``E_alpha`` variable on its interlacing
    interval, ``alpha = a_k - a_{k+1}``. Zero-length intervals return the
    forced point. All other levels are returned unchanged.
    """
    lo, hi = level_intervals(arr, k)
    u = as_stream(rng).uniform(lo.shape)
    return arr.with_level(k, _quantile(alpha, lo, hi, u))


def vandermonde(b) -> np.ndarray | float:
    """``prod_{i<j} (b_i - b_j)`` over the last axis."""
    b = np.asarray(b, dtype=float)
    n = b.shape[-1]
    out = np.ones(b.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            out = out * (b[..., i] - b[..., j])
    return float(out) if out.ndim == 0 else out


def _log_abs_vandermonde(b):
    b = np.asarray(b, dtype=float)
    n = b.shape[-1]
    out = np.zeros(b.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            out = out + np.log(np.abs(b[..., i] - b[..., j]))
    return out


def _log_abs_det_exp(a, lam):
    """``log |det[exp(a_i lam_j)]|``, stabilised by pulling out the column maxima."""
    m = a[:, None] * lam[..., None, :]
    shift = m.max(axis=-2, keepdims=True)
    _, logdet = np.linalg.slogdet(np.exp(m - shift))
    return logdet + shift.sum(axis=(-2, -1))


def _require_distinct(a):
    if np.unique(a).size != a.size:
        raise RepeatedParametersError(
            "repeated perturbation parameters: the limiting (confluent) density form is not implemented"
        )


def log_density_level_N(lam, t: float, a) -> np.ndarray | float:
    """Unnormalised log density of the top level ``lam^N``.

    ``log( det[exp(-(lam_i - t a_j)^2 / (2t))] * V(lam) / V(a) )``, with
    ``N = len(a)``. The normaliser does not depend on ``a``; see
    :func:`normalize_by_quadrature` and :func:`level_density_normalizer`.
    Coinciding ``lam`` entries give ``-inf``.
    """
    lam = np.asarray(lam, dtype=float)
    a = check_perturbation(a)
    if lam.shape[-1] != a.size:
        raise ValueError(f"lam has {lam.shape[-1]} entries but a has {a.size}")
    if not t > 0:
        raise ValueError("t must be positive")
    _require_distinct(a)
    # det[exp(-(l_i - t a_j)^2/2t)] = prod_i e^{-l_i^2/2t} prod_j e^{-t a_j^2/2} det[e^{a_j l_i}]
    with np.errstate(divide="ignore"):
        out = (
            -(lam**2).sum(axis=-1) / (2 * t)
            - t * (a**2).sum() / 2
            + _log_abs_det_exp(a, lam)
            + _log_abs_vandermonde(lam)
            - _log_abs_vandermonde(a)
        )
    out = np.where(np.isnan(out), -np.inf, out)
    return float(out) if out.ndim == 0 else out


def level_density_normalizer(n: int, t: float) -> float:
    """Closed form of the normaliser of :func:`log_density_level_N`, ``(2 pi)^{n/2} t^{n^2/2}``.

    Obtained from the ``a -> 0`` limit and the Gaussian Selberg (Mehta)
    integral; independent of ``a``.
    """
    return (2 * math.pi) ** (n / 2) * t ** (n * n / 2)


def normalize_by_quadrature(t: float, a, half_width: float = 8.0, epsabs: float = 1e-10, epsrel: float = 1e-10) -> float:
    """Integral of ``exp(log_density_level_N)`` over ordered ``lam`` for ``N = len(a) <= 3``.

    ``N = 1, 2`` use adaptive Gauss-Kronrod (QUADPACK) on
    ``[t min(a) - w, t max(a) + w]`` with ``w = half_width * sqrt(t)``.
    ``N = 3`` exploits that the unnormalised density extends to a symmetric
    function on ``R^3``: the ordered integral is the full integral over ``3!``,
    evaluated with a tensor Gauss-Hermite rule.
    """
    a = check_perturbation(a)
    _require_distinct(a)
    n = a.size
    w = half_width * math.sqrt(t)
    lo, hi = t * a.min() - w, t * a.max() + w
    if n == 1:
        f = lambda x: math.exp(log_density_level_N([x], t, a))
        val, _ = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=200)
        return val
    if n == 2:
        f = lambda y, x: math.exp(log_density_level_N([x, y], t, a))
        val, _ = integrate.dblquad(f, lo, hi, lambda x: lo, lambda x: x, epsabs=epsabs, epsrel=epsrel)
        return val
    if n == 3:
        return _symmetric_gauss_hermite(t, a, order=60) / 6.0
    raise ValueError("quadrature normaliser implemented for N <= 3 only")


def _symmetric_gauss_hermite(t, a, order):
    # integrand = e^{-|lam|^2/2t} * rest; substitute lam = sqrt(2t) x for hermgauss weights
    x, wts = np.polynomial.hermite.hermgauss(order)
    n = a.size
    grids = np.meshgrid(*([x] * n), indexing="ij")
    lam = np.sqrt(2 * t) * np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack(np.meshgrid(*([wts] * n), indexing="ij"), axis=-1).reshape(-1, n), axis=-1)
    # sort each node so that the (symmetric) density is evaluated on ordered arguments
    lam = -np.sort(-lam, axis=-1)
    with np.errstate(divide="ignore"):
        rest = log_density_level_N(lam, t, a) + (lam**2).sum(axis=-1) / (2 * t)
    vals = np.exp(rest)
    return float(np.sum(weights * vals) * (2 * t) ** (n / 2))


def log_joint_density(arr: InterlacingArray, t: float, a) -> np.ndarray | float:
    """Unnormalised log joint density of levels ``1..N`` of the corners process.

    ``log V(lam^N) + sum_i (-t a_i^2/2 - (lam^N_i)^2/(2t))
    + |lam^N| a_N + sum_{k<N} |lam^k| (a_k - a_{k+1})`` on the interlacing
    support, ``-inf`` elsewhere. ``a`` needs ``N`` entries, not necessarily
    distinct.
    """
    n = arr.depth
    a = check_perturbation(a, n)[:n]
    top = arr.level(n)
    sums = level_sums(arr)
    tilt = sums[..., -1] * a[-1] + (sums[..., :-1] * (a[:-1] - a[1:])).sum(axis=-1)
    with np.errstate(divide="ignore"):
        out = (
            _log_abs_vandermonde(top)
            - t * (a**2).sum() / 2
            - (top**2).sum(axis=-1) / (2 * t)
            + tilt
        )
    out = np.where(interlacing_mask(arr, 0.0), out, -np.inf)
    return float(out) if out.ndim == 0 else out


def log_conditional_gibbs(arr: InterlacingArray, a) -> np.ndarray | float:
    """Log density of levels ``1..N-1`` given level ``N`` under the ``a``-tilted Gibbs law.

    ``V(a) / det[exp(a_i lam^N_j)] * exp(|lam^N| a_N + sum_{k<N} |lam^k| (a_k - a_{k+1}))``
    on the interlacing support. This one is normalised exactly.
    """
    n = arr.depth
    a = check_perturbation(a, n)[:n]
    _require_distinct(a)
    top = arr.level(n)
    sums = level_sums(arr)
    tilt = sums[..., -1] * a[-1] + (sums[..., :-1] * (a[:-1] - a[1:])).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _log_abs_vandermonde(a) - _log_abs_det_exp(a, top) + tilt
    out = np.where(interlacing_mask(arr, 0.0), out, -np.inf)
    return float(out) if out.ndim == 0 else out


def harmonic_fn_pert_gue(lam, t: float, a) -> np.ndarray | float:
    """``V(lam) prod_i exp(-t a_i^2/2 - lam_i^2/(2t))`` (unnormalised), ``N = len(lam)``."""
    lam = np.asarray(lam, dtype=float)
    a = check_perturbation(a, lam.shape[-1])[: lam.shape[-1]]
    out = vandermonde(lam) * np.exp(-t * (a**2).sum() / 2 - (lam**2).sum(axis=-1) / (2 * t))
    return float(out) if np.ndim(out) == 0 else out
