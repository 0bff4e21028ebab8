"""Interlacing triangular arrays and perturbation sequences.

An interlacing array of depth ``N`` stores levels ``1..N``; level ``k`` holds
``k`` reals sorted in descending order, ``lam[k][0] >= ... >= lam[k][k-1]``,
and consecutive levels interlace::

    lam^{k+1}_{j+1} <= lam^k_j <= lam^{k+1}_j

Every level may carry the same leading batch shape, so one
:class:`InterlacingArray` can hold a whole Monte Carlo sample. Level ``k``
then has shape ``batch_shape + (k,)``. Operations broadcast over the batch.

Indices in the public API are 1-based (level ``k``, entry ``j``) to match the
usual notation; storage is plain 0-based numpy.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "InterlacingArray",
    "InterlacingReport",
    "ShapeError",
    "check_perturbation",
    "transpose_parameters",
    "validate_interlacing",
    "interlacing_mask",
    "shift_array",
    "level_sums",
    "to_csv",
    "from_csv",
]


class ShapeError(ValueError):
    """Structural problem: level ``k`` does not have ``k`` entries, or batch shapes disagree."""


def _frozen(x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=float, copy=True)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class InterlacingArray:
    """Triangular array ``{lam^k_j : 1 <= j <= k <= N}``, optionally batched.

    Parameters
    ----------
    levels : sequence of array_like
        ``levels[k-1]`` is level ``k`` with trailing dimension ``k``. All
        levels must share the same leading (batch) shape.

    The stored arrays are read-only copies; every operator returns a new
    instance.
    """

    levels: tuple

    def __post_init__(self):
        levels = tuple(_frozen(lv) for lv in self.levels)
        if not levels:
            raise ShapeError("an interlacing array needs at least one level")
        batch = levels[0].shape[:-1] if levels[0].ndim else None
        for k, lv in enumerate(levels, start=1):
            if lv.ndim == 0 or lv.shape[-1] != k:
                raise ShapeError(f"level {k} must have exactly {k} entries, got shape {lv.shape}")
            if lv.shape[:-1] != batch:
                raise ShapeError(
                    f"level {k} has batch shape {lv.shape[:-1]}, expected {batch}"
                )
        object.__setattr__(self, "levels", levels)

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def batch_shape(self) -> tuple:
        return self.levels[0].shape[:-1]

    def __len__(self):
        if not self.batch_shape:
            raise TypeError("unbatched InterlacingArray has no len()")
        return self.batch_shape[0]

    def level(self, k: int) -> np.ndarray:
        """Return level ``k`` (1-based)."""
        if not 1 <= k <= self.depth:
            raise IndexError(f"level {k} outside 1..{self.depth}")
        return self.levels[k - 1]

    def __getitem__(self, idx) -> "InterlacingArray":
        """Index the batch dimension(s)."""
        if not self.batch_shape:
            raise TypeError("unbatched InterlacingArray cannot be indexed; use level()")
        if isinstance(idx, tuple):
            idx = idx + (Ellipsis, slice(None))
        else:
            idx = (idx, Ellipsis, slice(None))
        return InterlacingArray(tuple(lv[idx] for lv in self.levels))

    def with_level(self, k: int, values) -> "InterlacingArray":
        """Copy of the array with level ``k`` replaced."""
        levels = list(self.levels)
        levels[k - 1] = values
        return InterlacingArray(tuple(levels))

    def truncate(self, depth: int) -> "InterlacingArray":
        """Keep levels ``1..depth``."""
        if not 1 <= depth <= self.depth:
            raise ValueError(f"depth must be in 1..{self.depth}")
        return InterlacingArray(self.levels[:depth])

    def edge(self) -> np.ndarray:
        """Smallest entry of every level, ``(lam^1_1, lam^2_2, ..., lam^N_N)``."""
        return np.stack([lv[..., -1] for lv in self.levels], axis=-1)

    def packed(self) -> np.ndarray:
        """Entries flattened to ``batch_shape + (N(N+1)/2,)``, level-major, index ascending."""
        return np.concatenate(self.levels, axis=-1)

    @classmethod
    def from_packed(cls, values) -> "InterlacingArray":
        """Inverse of :meth:`packed`; the depth is inferred from the trailing size."""
        values = np.asarray(values, dtype=float)
        m = values.shape[-1]
        depth = int(round((np.sqrt(8 * m + 1) - 1) / 2))
        if depth * (depth + 1) // 2 != m:
            raise ShapeError(f"{m} entries do not form a triangular array")
        bounds = np.cumsum([0] + list(range(1, depth + 1)))
        return cls(tuple(values[..., bounds[k]:bounds[k + 1]] for k in range(depth)))

    @classmethod
    def from_levels(cls, levels: Iterable[Sequence[float]]) -> "InterlacingArray":
        return cls(tuple(np.asarray(lv, dtype=float) for lv in levels))

    def tolist(self) -> list:
        return [lv.tolist() for lv in self.levels]

    def equals(self, other: "InterlacingArray") -> bool:
        """Exact entrywise equality."""
        return self.depth == other.depth and all(
            np.array_equal(x, y) for x, y in zip(self.levels, other.levels)
        )

    def allclose(self, other: "InterlacingArray", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        return self.depth == other.depth and all(
            np.allclose(x, y, atol=atol, rtol=rtol) for x, y in zip(self.levels, other.levels)
        )

    def __repr__(self):
        if self.batch_shape:
            return f"InterlacingArray(depth={self.depth}, batch_shape={self.batch_shape})"
        return f"InterlacingArray({self.tolist()})"


class InterlacingReport(NamedTuple):
    """Outcome of :func:`validate_interlacing`.

    ``level`` and ``index`` name the first failing entry (1-based); ``sample``
    is its position in the flattened batch (``None`` for unbatched arrays).
    ``excess`` is by how much the inequality is violated.
    """

    ok: bool
    level: int | None = None
    index: int | None = None
    sample: int | None = None
    excess: float = 0.0
    message: str = ""

    def __bool__(self):
        return self.ok


def validate_interlacing(arr: InterlacingArray, tol: float = 0.0) -> InterlacingReport:
    """Check descending order within levels and interlacing between levels.

    Levels are scanned in ascending order; for each entry ``(k, j)`` the
    constraints ``lam^{k-1}_j <= lam^k_j <= lam^{k-1}_{j-1}`` and
    ``lam^k_j <= lam^k_{j-1}`` are tested with additive slack ``tol``. Ties are
    valid. Structural problems raise :class:`ShapeError` instead.
    """
    if not isinstance(arr, InterlacingArray):
        arr = InterlacingArray.from_levels(arr)
    batch = arr.batch_shape
    flat = [lv.reshape(-1, lv.shape[-1]) for lv in arr.levels]
    n = flat[0].shape[0]
    for k in range(1, arr.depth + 1):
        cur = flat[k - 1]
        if np.isnan(cur).any() or not np.isfinite(cur).all():
            s, j = np.argwhere(~np.isfinite(cur))[0]
            return _report(False, k, j + 1, s, batch, np.inf, "non-finite entry")
        # excess[s, j] > 0 means entry (k, j+1) breaks one of its constraints
        excess = np.full((n, k), -np.inf)
        if k > 1:
            below = flat[k - 2]
            excess[:, :-1] = np.maximum(excess[:, :-1], below - cur[:, :-1])
            excess[:, 1:] = np.maximum(excess[:, 1:], cur[:, 1:] - below)
            excess[:, 1:] = np.maximum(excess[:, 1:], cur[:, 1:] - cur[:, :-1])
        bad = excess > tol
        if bad.any():
            # first failing sample, then first failing index in it
            s = int(np.argmax(bad.any(axis=1)))
            j = int(np.argmax(bad[s]))
            return _report(False, k, j + 1, s, batch, float(excess[s, j]), "interlacing violated")
    return InterlacingReport(True)


def interlacing_mask(arr: InterlacingArray, tol: float = 0.0) -> np.ndarray:
    """Boolean array of ``batch_shape``: True where the sample interlaces (slack ``tol``)."""
    ok = np.ones(arr.batch_shape, dtype=bool)
    for k in range(2, arr.depth + 1):
        cur, below = arr.level(k), arr.level(k - 1)
        ok &= np.all(below - cur[..., :-1] <= tol, axis=-1)
        ok &= np.all(cur[..., 1:] - below <= tol, axis=-1)
        ok &= np.all(cur[..., 1:] - cur[..., :-1] <= tol, axis=-1)
    return ok


def _report(ok, k, j, s, batch, excess, what):
    sample = int(s) if batch else None
    where = f"level {k}, index {j}" + (f", sample {sample}" if batch else "")
    return InterlacingReport(ok, int(k), int(j), sample, float(excess), f"{what} at {where} (excess {excess:.3g})")


def shift_array(arr: InterlacingArray, s) -> InterlacingArray:
    """Add ``s`` to every entry. ``s`` may be a scalar or broadcast over the batch."""
    s = np.asarray(s, dtype=float)[..., None]
    return InterlacingArray(tuple(lv + s for lv in arr.levels))


def level_sums(arr: InterlacingArray) -> np.ndarray:
    """``|lam^k| = lam^k_1 + ... + lam^k_k`` for ``k = 1..N``, shape ``batch_shape + (N,)``."""
    return np.stack([lv.sum(axis=-1) for lv in arr.levels], axis=-1)


def check_perturbation(a, n: int | None = None, distinct: bool = False) -> np.ndarray:
    """Validate a perturbation sequence and return it as a float vector.

    Raises ``ValueError`` for non-finite entries, for fewer than ``n``
    entries, or for repeated entries when ``distinct`` is set.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.ndim != 1:
        raise ValueError(f"perturbation sequence must be a vector, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("perturbation sequence has non-finite entries")
    if n is not None and a.size < n:
        raise ValueError(f"perturbation sequence has {a.size} entries, need at least {n}")
    if distinct:
        head = a if n is None else a[:n]
        if np.unique(head).size != head.size:
            raise ValueError("perturbation parameters must be pairwise distinct")
    return a


def transpose_parameters(a, k: int) -> np.ndarray:
    """Swap ``a_k`` and ``a_{k+1}`` (1-based), returning a new vector."""
    a = np.array(a, dtype=float)
    if not 1 <= k < a.size:
        raise IndexError(f"cannot transpose positions {k}, {k + 1} of a length-{a.size} sequence")
    a[[k - 1, k]] = a[[k, k - 1]]
    return a


CSV_FIELDS = ("level", "index", "value")


def to_csv(arr: InterlacingArray, fh=None) -> str | None:
    """Write ``level,index,value`` rows (level ascending, index ascending).

    Batched arrays get a leading ``sample`` column numbering the flattened
    batch. Returns the text when ``fh`` is None.
    """
    out = fh if fh is not None else io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    flat = [lv.reshape(-1, lv.shape[-1]) for lv in arr.levels]
    if arr.batch_shape:
        writer.writerow(("sample",) + CSV_FIELDS)
        for s in range(flat[0].shape[0]):
            for k, lv in enumerate(flat, start=1):
                for j in range(k):
                    writer.writerow((s, k, j + 1, repr(float(lv[s, j]))))
    else:
        writer.writerow(CSV_FIELDS)
        for k, lv in enumerate(flat, start=1):
            for j in range(k):
                writer.writerow((k, j + 1, repr(float(lv[0, j]))))
    if fh is None:
        return out.getvalue()
    return None


def from_csv(text_or_fh) -> InterlacingArray:
    """Read what :func:`to_csv` writes (with or without the ``sample`` column)."""
    fh = io.StringIO(text_or_fh) if isinstance(text_or_fh, str) else text_or_fh
    reader = csv.DictReader(fh)
    rows = list(reader)
    if not rows:
        raise ShapeError("empty CSV")
    batched = "sample" in reader.fieldnames
    depth = max(int(r["level"]) for r in rows)
    n = 1 + max(int(r["sample"]) for r in rows) if batched else 1
    levels = [np.full((n, k), np.nan) for k in range(1, depth + 1)]
    for r in rows:
        k, j = int(r["level"]), int(r["index"])
        if not 1 <= j <= k:
            raise ShapeError(f"index {j} invalid at level {k}")
        s = int(r["sample"]) if batched else 0
        levels[k - 1][s, j - 1] = float(r["value"])
    if any(np.isnan(lv).any() for lv in levels):
        raise ShapeError("CSV does not describe a complete triangular array")
    if not batched:
        levels = [lv[0] for lv in levels]
    return InterlacingArray(tuple(levels))
