"""Reflected Brownian motions with drifts, simulated by projected Euler steps.

``B^k_j``, ``1 <= j <= k <= K``, all start at 0; every process on level ``k``
carries drift ``a_k = -(k-1) alpha`` and is kept inside
``[B^{k-1}_j, B^{k-1}_{j-1}]`` (missing ends are infinite). Reflection by
local time is replaced by clamping after each free Euler step, levels updated
top-down so every level is clamped against the already-updated one before
it. The scheme keeps the array interlacing exactly; its weak error in the
reflected coordinates is of order ``sqrt(dt)``.

The edge ``X_k = B^k_k`` only interacts with ``X_{k-1}``, so
:func:`simulate_edges` runs that subsystem alone.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .arrays import InterlacingArray
from .rng import as_stream
from .swaps import jump_left

__all__ = [
    "RbmConfig",
    "simulate_reflected_system",
    "simulate_edges",
    "simulate_edges_coupled",
    "simulate_trajectory",
    "write_trajectory_csv",
    "edge_values",
    "exponential_jump_map",
]

# normals generated per block, bounded to keep memory flat for large path counts
_BLOCK_ENTRIES = 1 << 22


@dataclass(frozen=True)
class RbmConfig:
    """Depth ``K``, drift gap ``alpha``, horizon ``t`` and Euler step ``dt``.

    ``t / dt`` is rounded to an integer number of steps (with a warning when
    that changes ``dt``); :attr:`step` is the step actually used.
    """

    depth: int
    alpha: float
    t: float
    dt: float
    n_steps: int = field(init=False)

    def __post_init__(self):
        if int(self.depth) != self.depth or self.depth < 1:
            raise ValueError("depth must be a positive integer")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.t > 0:
            raise ValueError("t must be positive")
        if not 0 < self.dt <= self.t:
            raise ValueError("dt must satisfy 0 < dt <= t")
        ratio = self.t / self.dt
        steps = max(1, int(round(ratio)))
        if abs(ratio - steps) > 1e-9 * ratio:
            warnings.warn(f"t/dt = {ratio:g} is not an integer; using {steps} steps of {self.t / steps:g}")
        object.__setattr__(self, "n_steps", steps)

    @property
    def step(self) -> float:
        return self.t / self.n_steps

    @property
    def drifts(self) -> np.ndarray:
        """``a_k = -(k-1) alpha`` for ``k = 1..K``."""
        return -self.alpha * np.arange(self.depth, dtype=float)


def _blocks(n_steps, width):
    per_block = max(1, _BLOCK_ENTRIES // max(1, width))
    start = 0
    while start < n_steps:
        stop = min(n_steps, start + per_block)
        yield stop - start
        start = stop


def _euler_full(state, drift_steps, noise, K):
    """One projected Euler step of the full array, in place. ``state`` is packed ``(n, K(K+1)/2)``."""
    state += noise
    pos = 0
    prev = None
    for k in range(1, K + 1):
        cur = state[:, pos:pos + k]
        cur += drift_steps[k - 1]
        if prev is not None:
            np.maximum(cur[:, :-1], prev, out=cur[:, :-1])
            np.minimum(cur[:, 1:], prev, out=cur[:, 1:])
        prev = cur
        pos += k


def _euler_edges(state, drift_steps, noise):
    state += noise
    state += drift_steps
    for k in range(1, state.shape[1]):
        np.minimum(state[:, k], state[:, k - 1], out=state[:, k])


def simulate_reflected_system(cfg: RbmConfig, rng=None, n_paths: int | None = None) -> InterlacingArray:
    """Values ``B^k_j(t)`` of the full reflected system.

    Returns an unbatched array for ``n_paths=None``, otherwise a batch of
    ``n_paths`` independent paths (vectorised over paths, sequential in time).
    """
    rng = as_stream(rng)
    n = 1 if n_paths is None else int(n_paths)
    K = cfg.depth
    m = K * (K + 1) // 2
    dt = cfg.step
    sq = math.sqrt(dt)
    drift_steps = cfg.drifts * dt
    state = np.zeros((n, m))
    for block in _blocks(cfg.n_steps, n * m):
        z = rng.standard_normal((block, n, m))
        z *= sq
        for s in range(block):
            _euler_full(state, drift_steps, z[s], K)
    arr = InterlacingArray.from_packed(state)
    return arr[0] if n_paths is None else arr


def simulate_edges(cfg: RbmConfig, rng=None, n_paths: int = 1) -> np.ndarray:
    """``X_k(t) = B^k_k(t)``, ``k = 1..K``, for ``n_paths`` paths; shape ``(n_paths, K)``."""
    rng = as_stream(rng)
    K = cfg.depth
    dt = cfg.step
    sq = math.sqrt(dt)
    drift_steps = cfg.drifts * dt
    state = np.zeros((int(n_paths), K))
    for block in _blocks(cfg.n_steps, n_paths * K):
        z = rng.standard_normal((block, n_paths, K))
        z *= sq
        for s in range(block):
            _euler_edges(state, drift_steps, z[s])
    return state


def simulate_edges_coupled(cfg: RbmConfig, rng=None, n_paths: int = 1, coarsenings=(1, 4, 16)) -> dict:
    """Edge values at several step sizes driven by the same Brownian path.

    ``cfg.dt`` is the finest step; for every factor ``f`` in ``coarsenings``
    a scheme with step ``f * dt`` is run on increments summed over blocks of
    ``f`` fine increments. Returns ``{f: ndarray (n_paths, K)}``. Coupling
    removes most Monte Carlo noise from differences between step sizes.
    """
    rng = as_stream(rng)
    factors = sorted({int(f) for f in coarsenings})
    if cfg.n_steps % factors[-1]:
        raise ValueError(f"{cfg.n_steps} fine steps are not divisible by {factors[-1]}")
    K = cfg.depth
    dt = cfg.step
    sq = math.sqrt(dt)
    states = {f: np.zeros((n_paths, K)) for f in factors}
    acc = {f: np.zeros((n_paths, K)) for f in factors}
    drift = {f: cfg.drifts * dt * f for f in factors}
    step = 0
    for block in _blocks(cfg.n_steps, n_paths * K):
        z = rng.standard_normal((block, n_paths, K))
        z *= sq
        for s in range(block):
            step += 1
            for f in factors:
                if f == 1:
                    _euler_edges(states[f], drift[f], z[s])
                    continue
                acc[f] += z[s]
                if step % f == 0:
                    _euler_edges(states[f], drift[f], acc[f])
                    acc[f][:] = 0.0
    return states


def simulate_trajectory(cfg: RbmConfig, rng=None, every: int = 1) -> np.ndarray:
    """Single path of the full system recorded every ``every`` steps.

    Returns packed values of shape ``(n_records, K(K+1)/2)``; row ``r`` is
    the state after step ``r * every`` (row 0 is the all-zero start).
    """
    rng = as_stream(rng)
    K = cfg.depth
    m = K * (K + 1) // 2
    dt = cfg.step
    sq = math.sqrt(dt)
    drift_steps = cfg.drifts * dt
    state = np.zeros((1, m))
    rows = [state[0].copy()]
    for s in range(1, cfg.n_steps + 1):
        _euler_full(state, drift_steps, sq * rng.standard_normal((1, m)), K)
        if s % every == 0:
            rows.append(state[0].copy())
    return np.array(rows)


def write_trajectory_csv(traj: np.ndarray, every: int = 1, fh=None) -> str | None:
    """Rows ``step,level,index,value`` for a trajectory from :func:`simulate_trajectory`."""
    out = fh if fh is not None else io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("step", "level", "index", "value"))
    m = traj.shape[1]
    K = int(round((math.sqrt(8 * m + 1) - 1) / 2))
    pairs = [(k, j) for k in range(1, K + 1) for j in range(1, k + 1)]
    for r, row in enumerate(traj):
        for (k, j), v in zip(pairs, row):
            writer.writerow((r * every, k, j, repr(float(v))))
    return out.getvalue() if fh is None else None


def edge_values(arr: InterlacingArray) -> np.ndarray:
    """``X_k = lam^k_k``, ``k = 1..K`` (descending along the last axis)."""
    return arr.edge()


def exponential_jump_map(X, alpha: float, rng=None) -> np.ndarray:
    """``X'_k = X_{k+1} + min(E_k, X_k - X_{k+1})`` with ``E_k`` exponential of rate ``k alpha``.

    ``X`` is descending along its last axis (length ``K``); the result has
    length ``K - 1`` because the last coordinate would need ``X_{K+1}``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    X = np.asarray(X, dtype=float)
    if X.shape[-1] < 2:
        raise ValueError("need at least two coordinates")
    gaps = X[..., :-1] - X[..., 1:]
    if np.any(gaps < 0):
        raise ValueError("X must be non-increasing along the last axis")
    K = X.shape[-1]
    rates = alpha * np.arange(1, K, dtype=float)
    e = as_stream(rng).exponential(np.broadcast_to(rates, gaps.shape), gaps.shape)
    return jump_left(X[..., :-1], X[..., 1:], e)
