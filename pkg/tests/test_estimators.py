import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from corners_lab.arrays import InterlacingArray, validate_interlacing
from corners_lab.estimators import (
    ArrayShift,
    CornersSampler,
    ExponentialJumpMap,
    GibbsLevelResampler,
    GlobalShiftSweep,
    LevelSwap,
    check_interlacing_array,
)
from corners_lab.stats import ks_two_sample

A = (0.5, -0.2, 0.1)


@pytest.fixture
def X():
    return CornersSampler(depth=3, a=A, random_state=1).sample(2000)


def test_sampler_shape_and_validity(X):
    assert X.shape == (2000, 6)
    assert validate_interlacing(InterlacingArray.from_packed(X), 1e-8).ok


def test_params_round_trip():
    est = LevelSwap(k=2, a=A, random_state=3)
    assert est.get_params() == {"k": 2, "a": A, "random_state": 3}
    assert clone(est).get_params() == est.get_params()
    est.set_params(k=1)
    assert est.k == 1


def test_not_fitted(X):
    with pytest.raises(NotFittedError):
        LevelSwap(k=1, a=A).transform(X)


def test_reproducible(X):
    a = LevelSwap(k=1, a=A, random_state=4).fit_transform(X)
    b = LevelSwap(k=1, a=A, random_state=4).fit_transform(X)
    assert np.array_equal(a, b)


def test_level_swap_parameters_and_locality(X):
    est = LevelSwap(k=1, a=A, random_state=0).fit(X)
    Y = est.transform(X)
    assert est.parameters_.tolist() == [-0.2, 0.5, 0.1]
    assert np.array_equal(Y[:, 1:], X[:, 1:])
    assert np.all(Y[:, 0] <= X[:, 0])


def test_pipeline_double_swap_keeps_law(X):
    pipe = make_pipeline(LevelSwap(k=1, a=A, random_state=0), LevelSwap(k=1, a=(-0.2, 0.5, 0.1), random_state=1))
    Y = pipe.fit_transform(X)
    ref = CornersSampler(depth=3, a=A, random_state=9).sample(2000)
    assert ks_two_sample(Y[:, 0], ref[:, 0]).passed


def test_sweep_and_shift(X):
    Y = GlobalShiftSweep(alpha=0.4, random_state=0).fit_transform(X)
    assert np.array_equal(Y[:, 3:], X[:, 3:])
    shift = ArrayShift(-0.4).fit(X)
    np.testing.assert_allclose(shift.inverse_transform(shift.transform(X)), X, atol=1e-12)


def test_resampler(X):
    Y = GibbsLevelResampler(k=2, alpha=-0.3, random_state=0).fit_transform(X)
    assert np.array_equal(Y[:, [0, 3, 4, 5]], X[:, [0, 3, 4, 5]])
    assert validate_interlacing(InterlacingArray.from_packed(Y), 1e-8).ok


def test_jump_map(X):
    edges = InterlacingArray.from_packed(X).edge()
    Y = ExponentialJumpMap(alpha=0.5, random_state=0).fit_transform(edges)
    assert Y.shape == (2000, 2)
    assert np.all(Y <= edges[:, :-1]) and np.all(Y >= edges[:, 1:])


def test_validation_errors(X):
    with pytest.raises(ValueError):
        check_interlacing_array(np.zeros((3, 4)))
    bad = X.copy()
    bad[0, 0] = 100.0
    with pytest.raises(ValueError, match="level"):
        check_interlacing_array(bad)
    with pytest.raises(ValueError):
        LevelSwap(k=3, a=A).fit(X)
    with pytest.raises(ValueError):
        LevelSwap(k=1).fit(X)
    with pytest.raises(ValueError):
        GlobalShiftSweep(alpha=-1).fit(X)
    est = LevelSwap(k=1, a=A + (0.0,)).fit(X)
    with pytest.raises(ValueError):
        est.transform(np.zeros((2, 10)))
