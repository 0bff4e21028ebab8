"""Perturbed GUE corners, exponential swap operators and reflected Brownian motions.

The package samples the eigenvalues of all top-left corners of
``sqrt(t) G + t diag(a)``, applies exponential jump operators that permute
the perturbation parameters in law, simulates reflected Brownian motions
with drifts, and checks the resulting distributional identities by seeded
Monte Carlo experiments.
"""

__version__ = "0.1.0"

from .arrays import (
    InterlacingArray,
    InterlacingReport,
    ShapeError,
    check_perturbation,
    from_csv,
    interlacing_mask,
    level_sums,
    shift_array,
    to_csv,
    transpose_parameters,
    validate_interlacing,
)
from .gibbs import (
    ConfinedExponential,
    RepeatedParametersError,
    confined_exp_cdf,
    confined_exp_mean,
    confined_exp_quantile,
    confined_exp_sample,
    harmonic_fn_pert_gue,
    level_density_normalizer,
    level_intervals,
    log_conditional_gibbs,
    log_density_level_N,
    log_joint_density,
    normalize_by_quadrature,
    resample_level,
    vandermonde,
)
from .rbm import (
    RbmConfig,
    exponential_jump_map,
    simulate_edges,
    simulate_edges_coupled,
    simulate_reflected_system,
    simulate_trajectory,
)
from .rmt import EigensolverError, corners_eigenvalues, sample_corners_process, sample_perturbed_gue_matrix
from .rng import DEFAULT_SEED, RngStream
from .stats import TestResult, bonferroni, histogram_l1, ks_one_sample, ks_two_sample, moment_report
from .swaps import (
    SweepResult,
    arithmetic_parameters,
    compose_swaps,
    elementary_swap_left,
    elementary_swap_right,
    global_shift_sweep,
    level_swap,
)
from .experiments import ConfigError, ExperimentConfig, VerificationReport, run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]
