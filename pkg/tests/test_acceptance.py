"""Exit criteria, each run at its stated size and tolerance with the fixed seed 42.

Every criterion records one PASS/FAIL line, printed in the terminal summary.
Two individual checks are marked ``xfail``. Each is kept at its stated
threshold and reported as FAIL; see the README section on known failures:

* criterion 3, changed fraction > 0.99: both jumps of an entry can saturate,
  so the double swap returns the array unchanged with probability
  ``E[exp(-rate * total interval length)]``, about 0.24 here;
* criterion 7, L1 < 0.05: an exact sampler scores L1 of 0.051 +- 0.002 at
  n = 1e5 on this grid, so the bar sits at the null median.
"""

import time

import pytest

from corners_lab.experiments import ExperimentConfig, run_experiment

from conftest import ACCEPTANCE_LINES

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

SEED = 42
_CACHE: dict = {}


def report(name, **kw):
    """Run an experiment once per session (seed pinned, defaults = the stated configuration)."""
    key = (name, tuple(sorted(kw.items())))
    if key not in _CACHE:
        t0 = time.perf_counter()
        rep = run_experiment(ExperimentConfig(name, seed=SEED, threads=1, **kw))
        _CACHE[key] = (rep, time.perf_counter() - t0)
    return _CACHE[key]


def by_name(rep, fragment):
    hits = [t for t in rep.tests if fragment in t.name]
    assert hits, f"no test matching {fragment!r} in {rep.experiment}"
    return hits


def record(number, title, ok, detail):
    ACCEPTANCE_LINES[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}"


def test_criterion_1_elementary_swap():
    rep, secs = report("elementary-swap")
    ks = by_name(rep, "CDF")[0]
    mean = by_name(rep, "mean")[0]
    ok = rep.passed and secs < 5
    record(1, "elementary swap", ok,
           f"KS p={ks.p_value:.3g}, mean={mean.details['mean']:.6f} (target 0.418023 +- {mean.details['tolerance']:.2g}), {secs:.1f}s")
    assert mean.details["target"] == pytest.approx(0.418023, abs=1e-6)
    assert ok


def test_criterion_2_swap_theorem():
    rep, secs = report("swap-theorem")
    marg = [t for t in rep.tests if "lam^" in t.name]
    assert len(marg) == 12  # six marginals, left case and mirrored right case
    ok = rep.passed and secs < 120
    record(2, "swap theorem (left and mirrored right)", ok,
           f"min Bonferroni p={min(t.p_value for t in marg):.3g} over {len(marg)} marginals, {secs:.1f}s")
    assert rep.summary["forward"]["a_out"] == [-0.2, 0.5, 0.1]
    assert rep.summary["mirrored"]["direction"] == "right"
    assert ok


def _double_swap_line(rep, secs):
    marg = [t for t in rep.tests if "lam^" in t.name]
    frac = rep.summary["fraction_changed"]
    ok = rep.passed
    record(3, "double swap", ok,
           f"min Bonferroni p={min(t.p_value for t in marg):.3g}; changed fraction {frac:.4f} "
           f"(needs > 0.99; exact prediction {rep.summary['predicted_fraction_changed']:.4f}), {secs:.1f}s")
    return marg


def test_criterion_3_double_swap_law_preserved():
    rep, secs = report("double-swap")
    marg = _double_swap_line(rep, secs)
    assert all(t.passed for t in marg)
    assert by_name(rep, "matches 1 - E[exp")[0].passed
    assert by_name(rep, "parameters restored")[0].passed


@pytest.mark.xfail(strict=True, reason="saturated jumps give a positive probability of no change; see module docstring")
def test_criterion_3_double_swap_changed_fraction():
    rep, secs = report("double-swap")
    _double_swap_line(rep, secs)
    assert by_name(rep, "> 0.99")[0].passed


def test_criterion_4_global_shift():
    rep, secs = report("global-shift")
    marg = [t for t in rep.tests if "lam^" in t.name]
    assert len(marg) == 10
    gauss = by_name(rep, "Normal(-0.4, 1)")[0]
    ok = rep.passed and secs < 180
    record(4, "global shift", ok,
           f"min Bonferroni p={min(t.p_value for t in marg):.3g} over 10 marginals, level-1 normal KS p={gauss.p_value:.3g}, {secs:.1f}s")
    assert ok


def test_criterion_5_bm_identity():
    rep, secs = report("bm-identity")
    ratios = [t.statistic for t in by_name(rep, "refinement")]
    ok = rep.passed and secs < 600
    worst = max((abs(t.statistic) / t.details["tolerance"] for t in rep.tests if "tolerance" in t.details), default=0)
    record(5, "reflected BM vs corners", ok,
           f"worst moment gap {worst:.2f} of tolerance, dt-refinement ratios {', '.join(f'{r:.2f}' for r in ratios)}, {secs:.1f}s")
    assert ok


def test_criterion_6_brownian_shift():
    rep, secs = report("bm-shift")
    ks = by_name(rep, "independent paths")
    corr = by_name(rep, "corr")[0]
    mean = by_name(rep, "mean X'_1")[0]
    ok = rep.passed
    record(6, "Brownian shift", ok,
           f"mean gap {mean.statistic:+.4f} (tol {mean.details['tolerance']:.3f}), KS p={', '.join(f'{t.p_value:.3g}' for t in ks)}, "
           f"corr z={corr.statistic:+.2f}, {secs:.1f}s")
    assert ok


def _density_line(rep, secs):
    l1 = by_name(rep, "histogram L1")[0]
    sym = by_name(rep, "reversed")[0]
    ok = rep.passed
    record(7, "density oracle", ok,
           f"L1={l1.statistic:.4f} (needs < 0.05; exact-sampler null {l1.details['null_l1_mean']:.4f} +- {l1.details['null_l1_sd']:.4f}, "
           f"null p={l1.details['null_p']:.2f}), |dL1|={sym.statistic:.4f}, {secs:.1f}s")
    return l1, sym


def test_criterion_7_density_symmetry_and_normaliser():
    rep, secs = report("density-oracle")
    _, sym = _density_line(rep, secs)
    assert sym.passed
    given, reversed_ = rep.summary["given"], rep.summary["reversed"]
    assert given["normalizer"] == pytest.approx(reversed_["normalizer"], rel=1e-8)
    # the sampler is indistinguishable from exact multinomial draws of the density
    assert given["null_p"] > 0.001 and reversed_["null_p"] > 0.001


@pytest.mark.xfail(strict=False, reason="L1 < 0.05 sits at the median of an exact sampler's L1; see module docstring")
def test_criterion_7_density_l1_threshold():
    rep, secs = report("density-oracle")
    l1, _ = _density_line(rep, secs)
    assert l1.passed


def test_criterion_8_gibbs_invariance():
    rep, secs = report("gibbs-invariance")
    marg = [t for t in rep.tests if "lam^" in t.name]
    assert len(marg) == 6
    ok = rep.passed
    record(8, "Gibbs resampling invariance", ok,
           f"min Bonferroni p={min(t.p_value for t in marg):.3g} over 6 marginals, {secs:.1f}s")
    assert ok


def test_criterion_9_structural():
    rep, secs = report("structural")
    counts = {t.name.split(" ")[0]: int(t.statistic) for t in rep.tests}
    ok = rep.passed
    record(9, "structural suite (10^4 applications)", ok,
           ", ".join(f"{k}={v}" for k, v in counts.items()) + f" violations, {secs:.1f}s")
    assert rep.tests[0].details["applications"] == 10_000
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
