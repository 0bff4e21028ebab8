"""Goodness-of-fit tests turning equalities in distribution into pass/fail checks.

Conventions used across the package: a :class:`TestResult` passes when its
p-value is strictly above its threshold; the default threshold is 0.001 per
test, Bonferroni-corrected (``m * p``) across the marginals of one
experiment.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "SIGNIFICANCE",
    "TestResult",
    "kolmogorov_sf",
    "ks_two_sample",
    "ks_one_sample",
    "bonferroni",
    "MomentReport",
    "moment_report",
    "mean_test",
    "correlation_test",
    "histogram_l1",
    "bin_probabilities",
]

SIGNIFICANCE = 1e-3


@dataclass
class TestResult:
    """One statistical check.

    ``passed`` is ``p_value > threshold``. For checks that are not
    hypothesis tests (tolerance checks) ``p_value`` is 1.0 or 0.0 and the
    statistic carries the measured quantity.
    """

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    p_value: float
    n: tuple
    threshold: float = SIGNIFICANCE
    passed: bool = field(default=None)
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.statistic = float(self.statistic)
        self.p_value = float(min(1.0, max(0.0, self.p_value)))
        self.n = tuple(int(v) for v in np.atleast_1d(self.n))
        if self.passed is None:
            self.passed = bool(self.p_value > self.threshold)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n"] = list(self.n)
        d["p"] = d.pop("p_value")
        return d

    def summary(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: stat={self.statistic:.6g} p={self.p_value:.4g} (threshold {self.threshold:g}, n={self.n})"


def kolmogorov_sf(x) -> np.ndarray | float:
    """``P(K > x)`` for the Kolmogorov distribution, ``2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 x^2}``.

    For small ``x`` the alternating series converges slowly; there the
    Jacobi-transformed form ``1 - sqrt(2 pi)/x sum_j e^{-(2j-1)^2 pi^2 / (8 x^2)}``
    is used instead.
    """
    x = np.asarray(x, dtype=float)
    out = np.ones(x.shape)
    j = np.arange(1, 101, dtype=float)
    big = x >= 1.0
    xb = x[big][..., None]
    signs = np.where(j % 2 == 1, 1.0, -1.0)
    out[big] = 2.0 * np.sum(signs * np.exp(-2.0 * j**2 * xb**2), axis=-1)
    small = (x > 0) & ~big
    xs = x[small][..., None]
    cdf = math.sqrt(2 * math.pi) / xs[..., 0] * np.sum(np.exp(-((2 * j - 1) ** 2) * math.pi**2 / (8 * xs**2)), axis=-1)
    out[small] = 1.0 - cdf
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _clean(s, name):
    s = np.asarray(s, dtype=float).ravel()
    if s.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.isfinite(s).all():
        raise ValueError(f"{name} has non-finite values")
    return s


def ks_two_sample(s1, s2, name: str = "ks_two_sample", threshold: float = SIGNIFICANCE) -> TestResult:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value at ``D sqrt(nm/(n+m))``."""
    a = np.sort(_clean(s1, "s1"))
    b = np.sort(_clean(s2, "s2"))
    n, m = a.size, b.size
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / n
    fb = np.searchsorted(b, grid, side="right") / m
    d = float(np.max(np.abs(fa - fb)))
    p = kolmogorov_sf(d * math.sqrt(n * m / (n + m)))
    return TestResult(name, d, p, (n, m), threshold)


def ks_one_sample(s, cdf: Callable, name: str = "ks_one_sample", threshold: float = SIGNIFICANCE) -> TestResult:
    """One-sample Kolmogorov-Smirnov test against a continuous CDF (asymptotic p-value)."""
    x = np.sort(_clean(s, "s"))
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    p = kolmogorov_sf(d * math.sqrt(n))
    return TestResult(name, d, p, (n,), threshold)


def bonferroni(results: Sequence[TestResult], family_threshold: float = SIGNIFICANCE) -> list:
    """Re-judge a family of tests with Bonferroni-corrected p-values ``min(1, m p)``."""
    m = len(results)
    out = []
    for r in results:
        p = min(1.0, m * r.p_value)
        details = dict(r.details, raw_p=r.p_value, family_size=m)
        out.append(TestResult(r.name, r.statistic, p, r.n, family_threshold, seed=r.seed, details=details))
    return out


class MomentReport(NamedTuple):
    mean: float
    variance: float
    mean_stderr: float
    variance_stderr: float
    n: int


def moment_report(s) -> MomentReport:
    """Sample mean, unbiased variance and their standard errors.

    The variance standard error uses the fourth central moment,
    ``sqrt((m4 - var^2) / n)``.
    """
    x = _clean(s, "s")
    n = x.size
    mean = float(np.mean(x))
    dev = x - mean
    var = float(np.sum(dev**2) / (n - 1)) if n > 1 else 0.0
    m4 = float(np.mean(dev**4))
    var_se = math.sqrt(max(m4 - var**2, 0.0) / n) if n > 1 else 0.0
    return MomentReport(mean, var, math.sqrt(var / n), var_se, n)


def mean_test(s, target: float, allowance: float = 0.0, n_stderr: float = 3.0, name: str = "mean",
              stderr: float | None = None) -> TestResult:
    """Pass when ``|mean - target| <= n_stderr * stderr + allowance``.

    ``stderr`` defaults to the sample standard error of the mean.
    """
    mr = moment_report(s)
    tol = n_stderr * (mr.mean_stderr if stderr is None else stderr) + allowance
    diff = mr.mean - target
    ok = abs(diff) <= tol
    return TestResult(
        name, diff, 1.0 if ok else 0.0, (mr.n,), threshold=0.5, passed=ok,
        details={"mean": mr.mean, "target": target, "tolerance": tol},
    )


def _corr(x, y):
    return float(np.corrcoef(x, y)[0, 1])


def correlation_test(x1, y1, x2, y2, n_stderr: float = 3.0, name: str = "correlation") -> TestResult:
    """Compare Pearson correlations of two independent paired samples.

    The difference of Fisher ``z`` transforms has standard error
    ``sqrt(1/(n1-3) + 1/(n2-3))``; passes within ``n_stderr`` of it.
    """
    r1, r2 = _corr(x1, y1), _corr(x2, y2)
    n1, n2 = len(x1), len(x2)
    se = math.sqrt(1.0 / (n1 - 3) + 1.0 / (n2 - 3))
    z = (math.atanh(r1) - math.atanh(r2)) / se
    # two-sided normal p-value; |z| < n_stderr  <=>  p > erfc(n_stderr / sqrt 2)
    p = math.erfc(abs(z) / math.sqrt(2))
    return TestResult(name, z, p, (n1, n2), threshold=math.erfc(n_stderr / math.sqrt(2)),
                      details={"r1": r1, "r2": r2, "stderr_z": se, "n_stderr": n_stderr})


def bin_probabilities(density: Callable, edges: Sequence[np.ndarray], order: int = 8) -> np.ndarray:
    """Integrate ``density`` over every cell of a rectangular grid.

    Tensor Gauss-Legendre rule of the given order per cell. ``density``
    takes an array of points with shape ``(..., d)`` and returns densities of
    shape ``(...)``.
    """
    edges = [np.asarray(e, dtype=float) for e in edges]
    nodes, weights = np.polynomial.legendre.leggauss(order)
    pts, wts = [], []
    for e in edges:
        half = 0.5 * np.diff(e)[:, None]
        mid = 0.5 * (e[1:] + e[:-1])[:, None]
        pts.append(mid + half * nodes)  # (bins, order)
        wts.append(half * weights)
    d = len(edges)
    grids = np.meshgrid(*[p.ravel() for p in pts], indexing="ij")
    wgrid = np.ones(grids[0].shape)
    for w in np.meshgrid(*[w.ravel() for w in wts], indexing="ij"):
        wgrid = wgrid * w
    vals = np.asarray(density(np.stack(grids, axis=-1)), dtype=float) * wgrid
    shape = [s for e in edges for s in (e.size - 1, order)]
    return vals.reshape(shape).sum(axis=tuple(range(1, 2 * d, 2)))


def histogram_l1(samples, density: Callable | None, edges, probabilities=None, order: int = 8) -> float:
    """L1 distance between the empirical histogram and the density's cell masses.

    Samples outside the grid and density mass outside it are compared as
    one extra cell, so completely disjoint laws give 2. Pass precomputed
    ``probabilities`` to skip the integration.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise ValueError("no samples")
    if isinstance(edges, np.ndarray) and edges.ndim == 1:
        edges = [edges]
    edges = list(edges)
    if len(edges) != x.shape[1]:
        raise ValueError("need one bin-edge vector per sample dimension")
    counts, _ = np.histogramdd(x, bins=edges)
    emp = counts / x.shape[0]
    if probabilities is None:
        probabilities = bin_probabilities(density, edges, order)
    probabilities = np.asarray(probabilities, dtype=float)
    outside_emp = 1.0 - emp.sum()
    outside_p = max(0.0, 1.0 - probabilities.sum())
    return float(np.abs(emp - probabilities).sum() + abs(outside_emp - outside_p))
