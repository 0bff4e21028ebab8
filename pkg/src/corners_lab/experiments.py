"""Named, seeded Monte Carlo experiments with machine-readable reports.

Every experiment draws its samples in fixed-size chunks; chunk ``c`` of role
``r`` uses the stream ``(seed, r << 32 | c)``. Chunks are farmed out to a
thread pool, but since the stream layout does not depend on the pool size
and results are concatenated in chunk order, reports are identical for any
``threads`` value.
"""

from __future__ import annotations

import configparser
import json
import math
import os
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import ndtr

from . import __version__
from .arrays import InterlacingArray, check_perturbation, shift_array, to_csv, transpose_parameters, validate_interlacing
from .gibbs import (
    ConfinedExponential,
    confined_exp_mean,
    confined_exp_sample,
    level_intervals,
    log_density_level_N,
    normalize_by_quadrature,
    resample_level,
)
from .rbm import RbmConfig, exponential_jump_map, simulate_edges, simulate_edges_coupled, simulate_reflected_system
from .rmt import sample_corners_process
from .rng import RngStream, seed_from_env
from .stats import (
    TestResult,
    bin_probabilities,
    bonferroni,
    correlation_test,
    histogram_l1,
    ks_one_sample,
    ks_two_sample,
    mean_test,
    moment_report,
)
from .swaps import arithmetic_parameters, compose_swaps, elementary_swap_left, global_shift_sweep, level_swap

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "ExperimentConfig",
    "VerificationReport",
    "load_config_file",
    "run_experiment",
    "structural_suite",
]

CHUNK = 10_000


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run. ``None`` means "experiment default"."""

    experiment: str
    n_samples: int | None = None
    depth: int | None = None
    t: float | None = None
    alpha: float | None = None
    a: tuple | None = None
    dt: float | None = None
    k: int | None = None
    c: float | None = None
    d: float | None = None
    seed: int | None = None
    threads: int | None = None
    out: str | None = None
    dump: str | None = None

    def resolved(self) -> "ExperimentConfig":
        """Fill experiment defaults and validate every field."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        spec = EXPERIMENTS[self.experiment]
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        for key, default in spec.defaults.items():
            if values.get(key) is None:
                values[key] = default
        if values["seed"] is None:
            values["seed"] = seed_from_env()
        if values["threads"] is None:
            values["threads"] = os.cpu_count() or 1
        if values["a"] is not None:
            values["a"] = tuple(float(v) for v in values["a"])
        cfg = ExperimentConfig(**values)
        cfg._validate(spec)
        return cfg

    def _validate(self, spec):
        def positive(name, integer=False):
            v = getattr(self, name)
            if v is None:
                return
            if integer and (int(v) != v):
                raise ConfigError(name, f"must be an integer, got {v}")
            if not v > 0:
                raise ConfigError(name, f"must be positive, got {v}")

        for name in ("n_samples", "depth", "threads"):
            positive(name, integer=True)
        for name in ("t", "alpha", "dt"):
            positive(name)
        if self.n_samples is not None and self.n_samples < 2:
            raise ConfigError("n_samples", "need at least 2 samples")
        if self.a is not None:
            try:
                check_perturbation(self.a, self.depth, distinct=spec.distinct_a)
            except ValueError as exc:
                raise ConfigError("a", str(exc)) from None
        if self.k is not None and self.depth is not None and not 1 <= self.k < self.depth:
            raise ConfigError("k", f"must satisfy 1 <= k < depth={self.depth}")
        if self.c is not None and self.d is not None and not self.c < self.d:
            raise ConfigError("d", f"need c < d, got c={self.c}, d={self.d}")
        if self.dt is not None and self.t is not None and self.dt > self.t:
            raise ConfigError("dt", "must not exceed t")
        if self.experiment == "bm-identity" and round(self.t / self.dt) % 16:
            raise ConfigError("dt", f"t/dt = {self.t / self.dt:g} steps must be divisible by 16 for the refinement check")
        if self.experiment == "global-shift" and self.depth < 2:
            raise ConfigError("depth", "the sweep needs depth >= 2")
        if self.experiment == "bm-shift" and self.depth < 2:
            raise ConfigError("depth", "the jump map needs depth >= 2")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["a"] = list(self.a) if self.a is not None else None
        return d


_INT_FIELDS = {"n_samples", "depth", "k", "seed", "threads"}
_FLOAT_FIELDS = {"t", "alpha", "dt", "c", "d"}


def parse_value(name: str, raw):
    """Convert a textual config value for field ``name``."""
    if raw is None:
        return None
    try:
        if name in _INT_FIELDS:
            return int(float(raw)) if isinstance(raw, str) and "e" in raw.lower() else int(raw)
        if name in _FLOAT_FIELDS:
            return float(raw)
        if name == "a":
            if isinstance(raw, str):
                raw = [v for v in raw.replace(",", " ").split() if v]
            return tuple(float(v) for v in raw)
    except (TypeError, ValueError):
        raise ConfigError(name, f"cannot parse {raw!r}") from None
    return raw


def load_config_file(path) -> dict:
    """Read ``key = value`` lines (``#`` comments allowed) into a dict of parsed fields."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    parser.read_string("[config]\n" + text)
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for key, raw in parser["config"].items():
        name = key.strip().replace("-", "_")
        if name == "n":
            name = "n_samples"
        if name not in known:
            raise ConfigError(name, "unknown config key")
        out[name] = parse_value(name, raw.strip())
    return out


@dataclass
class VerificationReport:
    experiment: str
    claim: str
    config: dict
    version: str
    streams: dict
    tests: list
    passed: bool
    summary: dict = field(default_factory=dict)
    wall_clock_seconds: float | None = None

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "experiment": self.experiment,
            "claim": self.claim,
            "version": self.version,
            "config": self.config,
            "streams": self.streams,
            "passed": self.passed,
            "tests": [t.to_dict() for t in self.tests],
            "summary": self.summary,
        }
        if include_timing:
            d["wall_clock_seconds"] = self.wall_clock_seconds
        return d

    def to_json(self, include_timing: bool = False) -> str:
        """Deterministic JSON; wall-clock time is left out unless asked for."""
        return json.dumps(_jsonable(self.to_dict(include_timing)), indent=2, sort_keys=True) + "\n"

    def lines(self) -> list:
        return [t.summary() for t in self.tests]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


# ---------------------------------------------------------------------------
# chunked sampling


class _Runner:
    """Stream bookkeeping plus the thread pool for one experiment run."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.roles: dict = {}
        self.pool = ThreadPoolExecutor(max_workers=cfg.threads)

    def role(self, name: str) -> int:
        if name not in self.roles:
            self.roles[name] = len(self.roles)
        return self.roles[name]

    def stream(self, role: str, chunk: int = 0) -> RngStream:
        return RngStream(self.cfg.seed, (self.role(role) << 32) | chunk)

    def map(self, role: str, n: int, fn: Callable, chunk: int = CHUNK) -> list:
        """Call ``fn(size, stream)`` per chunk; results come back in chunk order."""
        self.role(role)
        sizes = [min(chunk, n - start) for start in range(0, n, chunk)]
        futures = [self.pool.submit(fn, size, self.stream(role, i)) for i, size in enumerate(sizes)]
        return [f.result() for f in futures]

    def apply(self, role: str, x, fn: Callable, chunk: int = CHUNK) -> list:
        """Call ``fn(x[chunk slice], stream)`` per chunk of an existing batch."""
        self.role(role)
        n = len(x)
        futures = [self.pool.submit(fn, x[s:s + chunk], self.stream(role, i))
                   for i, s in enumerate(range(0, n, chunk))]
        return [f.result() for f in futures]

    def corners(self, role: str, n: int, depth: int, t: float, a) -> InterlacingArray:
        parts = self.map(role, n, lambda size, rng: sample_corners_process(depth, t, a, rng, size=size))
        return _concat(parts)

    def streams_description(self) -> dict:
        return {
            "seed": self.cfg.seed,
            "chunk_size": CHUNK,
            "stream_id": "role << 32 | chunk",
            "roles": dict(self.roles),
        }

    def close(self):
        self.pool.shutdown()


def _concat(parts) -> InterlacingArray:
    depth = parts[0].depth
    return InterlacingArray(tuple(np.concatenate([p.level(k) for p in parts]) for k in range(1, depth + 1)))


def _marginal_names(depth, levels=None):
    levels = range(1, depth + 1) if levels is None else levels
    return [(k, j) for k in levels for j in range(1, k + 1)]


def _marginal_ks(x: InterlacingArray, y: InterlacingArray, label: str, levels=None) -> list:
    raw = [
        ks_two_sample(x.level(k)[:, j - 1], y.level(k)[:, j - 1], name=f"{label} lam^{k}_{j}")
        for k, j in _marginal_names(x.depth, levels)
    ]
    return bonferroni(raw)


def _structural(name: str, ok: bool, measured: float, details=None) -> TestResult:
    return TestResult(name, measured, 1.0 if ok else 0.0, (1,), threshold=0.5, passed=bool(ok), details=details or {})


def _normal_cdf(mean, var):
    sd = math.sqrt(var)
    return lambda x: ndtr((np.asarray(x) - mean) / sd)


# ---------------------------------------------------------------------------
# experiments


def _elementary_swap(cfg: ExperimentConfig, run: _Runner):
    src = ConfinedExponential(cfg.alpha, cfg.c, cfg.d)
    target = ConfinedExponential(-cfg.alpha, cfg.c, cfg.d)

    def chunk(size, rng):
        x = confined_exp_sample(src, rng, size=size)
        return elementary_swap_left(x, cfg.c, cfg.alpha, rng)

    y = np.concatenate(run.map("swap", cfg.n_samples, chunk))
    expected = confined_exp_mean(target)
    tests = [
        ks_one_sample(y, target.cdf, name=f"left jump output vs E_{-cfg.alpha:g}({cfg.c:g},{cfg.d:g}) CDF"),
        mean_test(y, expected, name="left jump output mean"),
        _structural("outputs inside [c, d]", bool(np.all((y >= cfg.c) & (y <= cfg.d))), float(y.min())),
    ]
    mr = moment_report(y)
    return tests, {"mean": mr.mean, "mean_stderr": mr.mean_stderr, "expected_mean": expected}, {"swapped": y}


def _swap_case(run, cfg, a, role):
    a = np.asarray(a)
    x = run.corners(f"{role}-input", cfg.n_samples, cfg.depth, cfg.t, a)
    parts = run.apply(f"{role}-jumps", x, lambda piece, rng: level_swap(piece, cfg.k, a, rng)[0])
    y = _concat(parts)
    a_new = transpose_parameters(a, cfg.k)
    reference = run.corners(f"{role}-reference", cfg.n_samples, cfg.depth, cfg.t, a_new)
    return x, y, a_new, reference


def _operator_structure(x, y, k, direction) -> list:
    others_same = all(np.array_equal(x.level(j), y.level(j)) for j in range(1, x.depth + 1) if j != k)
    moved = y.level(k) - x.level(k)
    monotone = bool(np.all(moved <= 0)) if direction == "left" else bool(np.all(moved >= 0))
    report = validate_interlacing(y, 0.0)
    return [
        _structural(f"{direction} swap output interlaces (tol 0)", report.ok, report.excess, {"message": report.message}),
        _structural(f"{direction} swap changes only level {k}", others_same, 0.0),
        _structural(f"{direction} swap is monotone", monotone, float(np.abs(moved).max())),
    ]


def _swap_theorem(cfg: ExperimentConfig, run: _Runner):
    a = np.asarray(cfg.a)
    k = cfg.k
    tests = []
    summary = {}
    for role, params in (("forward", a), ("mirrored", transpose_parameters(a, k))):
        direction = "left" if params[k - 1] > params[k] else "right"
        x, y, a_new, ref = _swap_case(run, cfg, params, role)
        tests += _marginal_ks(y, ref, f"{direction} swap at level {k} vs corners with a={_fmt(a_new)}:")
        tests += _operator_structure(x, y, k, direction)
        summary[role] = {"a_in": list(params), "a_out": list(a_new), "direction": direction}
    return tests, summary, {}


def _fmt(a):
    return "(" + ",".join(f"{v:g}" for v in a) + ")"


def _double_swap(cfg: ExperimentConfig, run: _Runner):
    a = np.asarray(cfg.a)
    k = cfg.k
    x = run.corners("input", cfg.n_samples, cfg.depth, cfg.t, a)
    y = _concat(run.apply("jumps", x, lambda piece, rng: compose_swaps(piece, [k, k], a, rng)[0]))
    params = transpose_parameters(transpose_parameters(a, k), k)
    ref = run.corners("reference", cfg.n_samples, cfg.depth, cfg.t, a)
    tests = _marginal_ks(y, ref, f"double swap at level {k} vs corners with a={_fmt(a)}:")
    changed = np.any(y.level(k) != x.level(k), axis=-1)
    frac = float(changed.mean())
    # both jumps of an entry can saturate; that leaves it in place with
    # probability exp(-rate * interval length), independently over the entries
    lo, hi = level_intervals(x, k)
    rate = abs(a[k - 1] - a[k])
    p_stay = np.exp(-rate * (hi - lo).sum(axis=-1))
    expected = float(1.0 - p_stay.mean())
    se = math.sqrt(max(expected * (1 - expected), 1e-12) / cfg.n_samples)
    tests.append(_structural("fraction of samples changed > 0.99", frac > 0.99, frac))
    tests.append(_structural(
        "fraction changed matches 1 - E[exp(-rate * total interval length)] within 3 stderr",
        abs(frac - expected) <= 3 * se, frac - expected, {"expected": expected, "stderr": se},
    ))
    tests.append(_structural("parameters restored after two swaps", bool(np.array_equal(params, a)), 0.0))
    return tests, {"fraction_changed": frac, "predicted_fraction_changed": expected}, {}


def _global_shift(cfg: ExperimentConfig, run: _Runner):
    n, alpha, t = cfg.depth, cfg.alpha, cfg.t
    a = arithmetic_parameters(n, alpha)
    x = run.corners("input", cfg.n_samples, n, t, a)
    results = run.apply("sweep", x, lambda piece, rng: global_shift_sweep(piece, alpha, rng))
    y = _concat([r.array for r in results])
    tainted = results[0].tainted_level
    ref = shift_array(run.corners("reference", cfg.n_samples, n, t, a), -alpha * t)
    levels = range(1, tainted)
    tests = _marginal_ks(y, ref, f"sweep output vs corners shifted by {-alpha * t:g}:", levels)
    tests.append(ks_one_sample(y.level(1)[:, 0], _normal_cdf(-alpha * t, t), name=f"sweep level 1 vs Normal({-alpha * t:g}, {t:g})"))
    tests.append(_structural(f"level {tainted} untouched by the sweep", bool(np.array_equal(x.level(n), y.level(n))), 0.0))
    rep = validate_interlacing(y, 0.0)
    tests.append(_structural("sweep output interlaces (tol 0)", rep.ok, rep.excess, {"message": rep.message}))
    summary = {"tainted_level": tainted, "faithful_levels": list(levels)}
    return tests, summary, {"swept": y}


def _bm_identity(cfg: ExperimentConfig, run: _Runner):
    K, alpha, t = cfg.depth, cfg.alpha, cfg.t
    rcfg = RbmConfig(K, alpha, t, cfg.dt)
    arr = _concat(run.map("paths", cfg.n_samples, lambda size, rng: simulate_reflected_system(rcfg, rng, size)))
    X = arr.edge()
    ref = run.corners("matrix", 5 * cfg.n_samples, K, t, rcfg.drifts).edge()
    allowance = 0.05
    tests, summary = [], {"rbm": {}, "matrix": {}}
    for k in range(1, K + 1):
        m1, m2 = moment_report(X[:, k - 1]), moment_report(ref[:, k - 1])
        se_mean = math.hypot(m1.mean_stderr, m2.mean_stderr)
        se_var = math.hypot(m1.variance_stderr, m2.variance_stderr)
        dm, dv = m1.mean - m2.mean, m1.variance - m2.variance
        tests.append(_structural(f"mean X_{k}(t) vs lam^{k}_{k}", abs(dm) <= 3 * se_mean + allowance, dm,
                                 {"tolerance": 3 * se_mean + allowance}))
        tests.append(_structural(f"variance X_{k}(t) vs lam^{k}_{k}", abs(dv) <= 3 * se_var + allowance, dv,
                                 {"tolerance": 3 * se_var + allowance}))
        summary["rbm"][f"X_{k}"] = {"mean": m1.mean, "var": m1.variance}
        summary["matrix"][f"lam^{k}_{k}"] = {"mean": m2.mean, "var": m2.variance}
    rep = validate_interlacing(arr, 0.0)
    tests.append(_structural("simulated array interlaces (tol 0)", rep.ok, rep.excess))
    refine = _refinement(cfg, run, rcfg)
    tests += refine[0]
    summary["refinement"] = refine[1]
    return tests, summary, {"edges": X}


def _refinement(cfg, run, rcfg):
    """Halving of the step-size bias: coupled runs at dt, 4 dt, 16 dt."""
    factors = (1, 4, 16)
    parts = run.map("refinement", cfg.n_samples,
                    lambda size, rng: simulate_edges_coupled(rcfg, rng, size, factors))
    means = {f: np.concatenate([p[f] for p in parts]).mean(axis=0) for f in factors}
    tests, info = [], {"dt": [rcfg.step * f for f in factors], "means": {str(f): means[f].tolist() for f in factors}}
    for k in range(2, rcfg.depth + 1):
        coarse = means[4][k - 1] - means[16][k - 1]
        fine = means[1][k - 1] - means[4][k - 1]
        ratio = fine / coarse if coarse != 0 else float("nan")
        ok = 0.3 <= ratio <= 0.7
        tests.append(_structural(f"step refinement halves the bias of X_{k}", ok, ratio,
                                 {"diff_4dt_16dt": coarse, "diff_dt_4dt": fine, "accepted_ratio": [0.3, 0.7]}))
        info[f"X_{k}_ratio"] = ratio
    return tests, info


def _bm_shift(cfg: ExperimentConfig, run: _Runner):
    K, alpha, t = cfg.depth, cfg.alpha, cfg.t
    rcfg = RbmConfig(K, alpha, t, cfg.dt)
    X = np.concatenate(run.map("paths", cfg.n_samples, lambda size, rng: simulate_edges(rcfg, rng, size)))
    Xp = np.concatenate(run.apply("jumps", X, lambda piece, rng: exponential_jump_map(piece, alpha, rng)))
    Y = np.concatenate(run.map("independent", cfg.n_samples, lambda size, rng: simulate_edges(rcfg, rng, size))) - alpha * t
    n = cfg.n_samples
    tests = [
        mean_test(Xp[:, 0], -alpha * t, allowance=0.05, stderr=math.sqrt(t / n), name="mean X'_1(t) vs -alpha t"),
    ]
    tests += bonferroni([
        ks_two_sample(Xp[:, k - 1], Y[:, k - 1], name=f"X'_{k}(t) vs X_{k}(t) - alpha t (independent paths)")
        for k in range(1, min(K - 1, 2) + 1)
    ])
    if K >= 3:
        tests.append(correlation_test(Xp[:, 0], Xp[:, 1], Y[:, 0], Y[:, 1], name="corr(X'_1, X'_2) vs corr(X_1, X_2)"))
    tests.append(ks_one_sample(Xp[:, 0], _normal_cdf(-alpha * t, t), name=f"X'_1(t) vs Normal({-alpha * t:g}, {t:g})"))
    between = np.all((Xp <= X[:, :-1]) & (Xp >= X[:, 1:]))
    tests.append(_structural("X_{k+1} <= X'_k <= X_k on every path", bool(between), 0.0))
    summary = {"mean_Xprime": Xp.mean(axis=0).tolist(), "mean_X_shifted": Y.mean(axis=0).tolist()}
    return tests, summary, {"jumped": Xp, "shifted": Y}


def _density_oracle(cfg: ExperimentConfig, run: _Runner):
    t = cfg.t
    a = np.asarray(cfg.a)
    if a.size != 2:
        raise ConfigError("a", "the density oracle compares a two-level density; give two parameters")
    edges = np.linspace(-5.0, 5.0, 51)
    results = {}
    for role, params in (("given", a), ("reversed", a[::-1].copy())):
        z = normalize_by_quadrature(t, params)

        def density(p, _params=params, _z=z):
            with np.errstate(divide="ignore", invalid="ignore"):
                val = np.exp(log_density_level_N(p, t, _params)) / _z
            return np.where(p[..., 0] >= p[..., 1], val, 0.0)

        probs = bin_probabilities(density, [edges, edges])
        lam = run.corners(role, cfg.n_samples, 2, t, params).level(2)
        l1 = histogram_l1(lam, None, [edges, edges], probabilities=probs)
        null = _null_l1(probs, cfg.n_samples, run.stream(f"{role}-null"))
        results[role] = {"a": params.tolist(), "normalizer": z, "l1": l1,
                         "null_l1_mean": float(null.mean()), "null_l1_sd": float(null.std()),
                         "null_p": float((null >= l1).mean())}
    l1, l1r = results["given"]["l1"], results["reversed"]["l1"]
    tests = [
        _structural("histogram L1 < 0.05 on 50x50 grid over [-5,5]^2", l1 < 0.05, l1, results["given"]),
        _structural("|L1(a) - L1(reversed a)| < 0.01", abs(l1 - l1r) < 0.01, abs(l1 - l1r), results["reversed"]),
    ]
    return tests, results, {}


def _null_l1(probs, n, rng, draws: int = 200):
    """L1 of exact multinomial histograms: what a perfect sampler scores."""
    p = np.append(probs.ravel(), max(0.0, 1.0 - probs.sum()))
    p = p / p.sum()
    counts = rng.generator.multinomial(n, p, size=draws)
    return np.abs(counts / n - p).sum(axis=1)


def _gibbs_invariance(cfg: ExperimentConfig, run: _Runner):
    a = np.asarray(cfg.a)
    k = cfg.k
    alpha = a[k - 1] - a[k]
    x = run.corners("input", cfg.n_samples, cfg.depth, cfg.t, a)
    y = _concat(run.apply("resample", x, lambda piece, rng: resample_level(piece, k, alpha, rng)))
    ref = run.corners("reference", cfg.n_samples, cfg.depth, cfg.t, a)
    tests = _marginal_ks(y, ref, f"level {k} resampled vs fresh corners:")
    rep = validate_interlacing(y, 0.0)
    tests.append(_structural("resampled array interlaces (tol 0)", rep.ok, rep.excess))
    others = all(np.array_equal(x.level(j), y.level(j)) for j in range(1, cfg.depth + 1) if j != k)
    tests.append(_structural(f"only level {k} resampled", others, 0.0))
    return tests, {"alpha": float(alpha)}, {"resampled": y}


def structural_suite(n_applications: int = 10_000, seed: int = 0, max_depth: int = 6) -> list:
    """Random operators on random valid arrays; counts invariant violations.

    Inputs are corners samples (eigensolver output, checked at tol 1e-8) and
    random interlacing arrays with deliberate ties (checked at tol 0). Each
    application picks one of: level swap, compose of swaps, global sweep,
    level resample, exponential jump map. Jump outputs must interlace at
    tolerance 0, move monotonically and only touch their own level.
    """
    rng = RngStream(seed, 0)
    g = rng.generator
    counts = {"interlacing": 0, "eigensolver": 0, "monotonicity": 0, "locality": 0, "jump_map": 0}
    per_op = {}
    for _ in range(n_applications):
        depth = int(g.integers(2, max_depth + 1))
        a = np.round(g.normal(0, 1, depth), 1)
        if g.random() < 0.5:
            arr = sample_corners_process(depth, float(g.uniform(0.2, 3)), a, rng)
            if not validate_interlacing(arr, 1e-8).ok:
                counts["eigensolver"] += 1
            arr = _project(arr)
        else:
            arr = _random_array(depth, g)
        op = ["level_swap", "compose", "sweep", "resample", "jump_map"][int(g.integers(0, 5))]
        per_op[op] = per_op.get(op, 0) + 1
        if op == "jump_map":
            X = arr.edge()
            Xp = exponential_jump_map(X, float(g.uniform(0.1, 3)), rng)
            if not (np.all(Xp <= X[:-1]) and np.all(Xp >= X[1:])):
                counts["jump_map"] += 1
            continue
        if op == "level_swap":
            k = int(g.integers(1, depth))
            out, _ = level_swap(arr, k, a, rng)
            changed = [k]
            direction = np.sign(a[k - 1] - a[k])
            moved = out.level(k) - arr.level(k)
            if (direction > 0 and np.any(moved > 0)) or (direction < 0 and np.any(moved < 0)) or (direction == 0 and np.any(moved != 0)):
                counts["monotonicity"] += 1
        elif op == "compose":
            sched = [int(v) for v in g.integers(1, depth, size=int(g.integers(0, 5)))]
            out, _ = compose_swaps(arr, sched, a, rng)
            changed = sorted(set(sched))
        elif op == "sweep":
            res = global_shift_sweep(arr, float(g.uniform(0.05, 2)), rng)
            out = res.array
            changed = list(range(1, depth))
            if np.any(out.level(1) > arr.level(1)):
                counts["monotonicity"] += 1
        else:
            k = int(g.integers(1, depth))
            out = resample_level(arr, k, float(g.normal(0, 2)), rng)
            changed = [k]
        if not validate_interlacing(out, 0.0).ok:
            counts["interlacing"] += 1
        for j in range(1, depth + 1):
            if j not in changed and not np.array_equal(out.level(j), arr.level(j)):
                counts["locality"] += 1
                break
    return [
        _structural(f"{name} violations == 0", v == 0, v, {"applications": n_applications, "ops": per_op})
        for name, v in counts.items()
    ]


def _project(arr: InterlacingArray) -> InterlacingArray:
    """Remove eigensolver round-off so the array interlaces exactly (moves entries by ~1e-15)."""
    levels = [np.array(arr.level(1), dtype=float)]
    for k in range(2, arr.depth + 1):
        cur = np.array(arr.level(k), dtype=float)
        below = levels[-1]
        cur[:-1] = np.maximum(cur[:-1], below)
        cur[1:] = np.minimum(cur[1:], below)
        levels.append(cur)
    return InterlacingArray(tuple(levels))


def _random_array(depth, g) -> InterlacingArray:
    """Top level from a coarse grid (so ties occur), lower levels uniform in their intervals, sometimes snapped."""
    top = -np.sort(-np.round(g.normal(0, 2, depth), 0 if g.random() < 0.3 else 2))
    levels = [top]
    for k in range(depth - 1, 0, -1):
        above = levels[0]
        lo, hi = above[1:], above[:-1]
        cur = lo + g.random(k) * (hi - lo)
        snap = g.random(k) < 0.2
        cur[snap] = np.where(g.random(int(snap.sum())) < 0.5, lo[snap], hi[snap])
        levels.insert(0, cur)
    return InterlacingArray(tuple(levels))


@dataclass(frozen=True)
class _Experiment:
    run: Callable
    claim: str
    defaults: dict
    distinct_a: bool = False


_SWAP_A = (0.5, -0.2, 0.1)

EXPERIMENTS = {
    "elementary-swap": _Experiment(
        _elementary_swap,
        "A left exponential jump of rate alpha towards c maps E_alpha(c,d) to E_-alpha(c,d).",
        {"n_samples": 100_000, "alpha": 1.0, "c": 0.0, "d": 1.0},
    ),
    "swap-theorem": _Experiment(
        _swap_theorem,
        "The level-k swap operator turns the corners law for a into the corners law for a with a_k, a_{k+1} exchanged.",
        {"n_samples": 100_000, "depth": 3, "t": 1.0, "a": _SWAP_A, "k": 1},
    ),
    "double-swap": _Experiment(
        _double_swap,
        "Swapping level k twice returns to the original corners law without being the identity map.",
        {"n_samples": 100_000, "depth": 3, "t": 1.0, "a": _SWAP_A, "k": 1},
    ),
    "global-shift": _Experiment(
        _global_shift,
        "Level swaps k=1..N-1 with rates k*alpha on the corners of sqrt(t)G + t diag(0,-alpha,...) shift levels 1..N-1 by -alpha t in law.",
        {"n_samples": 100_000, "depth": 5, "t": 1.0, "alpha": 0.4},
    ),
    "bm-identity": _Experiment(
        _bm_identity,
        "Reflected Brownian motions with drifts -(k-1) alpha have the corners law of sqrt(t)G + t diag(0,-alpha,...) at time t.",
        {"n_samples": 20_000, "depth": 3, "t": 1.0, "alpha": 0.5, "dt": 1e-4},
    ),
    "bm-shift": _Experiment(
        _bm_shift,
        "X'_k = X_{k+1} + min(Exp(k alpha), X_k - X_{k+1}) is jointly distributed as X_k(t) - alpha t.",
        {"n_samples": 20_000, "depth": 3, "t": 1.0, "alpha": 0.5, "dt": 1e-4},
    ),
    "density-oracle": _Experiment(
        _density_oracle,
        "Top-level eigenvalues follow det[exp(-(lam_i - t a_j)^2/2t)] V(lam)/V(a) with an a-independent normaliser.",
        {"n_samples": 100_000, "depth": 2, "t": 1.0, "a": (0.3, -0.3)},
        distinct_a=True,
    ),
    "gibbs-invariance": _Experiment(
        _gibbs_invariance,
        "Redrawing level k from independent confined exponentials with rate a_k - a_{k+1} preserves the corners law.",
        {"n_samples": 100_000, "depth": 3, "t": 1.0, "a": _SWAP_A, "k": 2},
    ),
    "structural": _Experiment(
        lambda cfg, run: (structural_suite(cfg.n_samples, cfg.seed), {}, {}),
        "Jump operators keep arrays interlacing, move monotonically and only touch their own level.",
        {"n_samples": 10_000},
    ),
}


def run_experiment(cfg: ExperimentConfig) -> VerificationReport:
    """Run one named experiment and write its report (and sample dump) if paths are set."""
    cfg = cfg.resolved()
    spec = EXPERIMENTS[cfg.experiment]
    run = _Runner(cfg)
    start = time.perf_counter()
    try:
        tests, summary, samples = spec.run(cfg, run)
    finally:
        run.close()
    elapsed = time.perf_counter() - start
    for t in tests:
        t.seed = cfg.seed
    reported = cfg.to_dict()
    reported.pop("threads")
    report = VerificationReport(
        experiment=cfg.experiment,
        claim=spec.claim,
        config=reported,
        version=_version_string(),
        streams=run.streams_description(),
        tests=tests,
        passed=all(t.passed for t in tests),
        summary=summary,
        wall_clock_seconds=elapsed,
    )
    if cfg.out:
        Path(cfg.out).write_text(report.to_json())
        Path(cfg.out).with_suffix(".timing.json").write_text(
            json.dumps({"wall_clock_seconds": elapsed, "threads": cfg.threads}) + "\n"
        )
    if cfg.dump and samples:
        _dump(cfg.dump, samples)
    return report


def _dump(path, samples: dict):
    base = Path(path)
    for name, values in samples.items():
        target = base.with_name(f"{base.stem}_{name}.csv")
        if isinstance(values, InterlacingArray):
            target.write_text(to_csv(values))
        else:
            values = np.asarray(values)
            if values.ndim == 1:
                values = values[:, None]
            header = ",".join(f"x{i + 1}" for i in range(values.shape[1]))
            np.savetxt(target, values, delimiter=",", header=header, comments="", fmt="%.17g")
