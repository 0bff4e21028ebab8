import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import ndtr

from corners_lab.arrays import level_sums, validate_interlacing
from corners_lab.rmt import check_hermitian, corners_eigenvalues, sample_corners_process, sample_perturbed_gue_matrix
from corners_lab.rng import RngStream
from corners_lab.stats import ks_one_sample, ks_two_sample, moment_report


def char_poly_roots_by_bisection(H, tol=1e-12):
    """Eigenvalues of a Hermitian matrix as sign changes of det(H - x), found by bisection.

    Sturm-style count via the number of negative pivots of an LDL^H
    factorisation of H - x (Sylvester inertia), independent of any eigensolver.
    """
    n = H.shape[0]

    def count_below(x):
        A = H - x * np.eye(n)
        neg = 0
        A = A.astype(complex).copy()
        for i in range(n):
            piv = A[i, i].real
            if piv == 0.0:
                piv = 1e-300
            if piv < 0:
                neg += 1
            A[i + 1:, i + 1:] -= np.outer(A[i + 1:, i], A[i, i + 1:]) / piv
        return neg

    bound = np.abs(H).sum(axis=1).max() + 1.0
    roots = []
    for j in range(n):  # j-th smallest eigenvalue
        lo, hi = -bound, bound
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if count_below(mid) > j:
                hi = mid
            else:
                lo = mid
        roots.append(0.5 * (lo + hi))
    return np.sort(roots)[::-1]


class TestMatrix:
    def test_hermitian_exactly(self):
        H = sample_perturbed_gue_matrix(2, 3.0, [0.1, 0.2], RngStream(1))
        assert H[0, 1] == np.conj(H[1, 0])
        assert np.isreal(np.diag(H)).all()
        check_hermitian(H)

    def test_one_by_one_is_normal(self):
        H = sample_perturbed_gue_matrix(1, 1.0, [0.7], RngStream(2), size=100_000)
        x = H[..., 0, 0].real
        assert abs(x.mean() - 0.7) < 3 * 10 ** -2.5
        assert ks_one_sample(x, lambda v: ndtr(v - 0.7)).passed

    def test_off_diagonal_variance(self):
        H = sample_perturbed_gue_matrix(2, 4.0, [0.0, 0.0], RngStream(3), size=100_000)
        for part in (H[:, 0, 1].real, H[:, 0, 1].imag):
            m = moment_report(part)
            assert abs(m.variance - 2.0) < 3 * m.variance_stderr

    def test_validation(self):
        with pytest.raises(ValueError):
            sample_perturbed_gue_matrix(0, 1.0, [], RngStream())
        with pytest.raises(ValueError):
            sample_perturbed_gue_matrix(2, 0.0, [0, 0], RngStream())
        with pytest.raises(ValueError):
            sample_perturbed_gue_matrix(3, 1.0, [0, 0], RngStream())

    def test_reproducible_and_stream_separated(self):
        a = sample_perturbed_gue_matrix(3, 1.0, [0, 0, 0], RngStream(5, 1))
        b = sample_perturbed_gue_matrix(3, 1.0, [0, 0, 0], RngStream(5, 1))
        c = sample_perturbed_gue_matrix(3, 1.0, [0, 0, 0], RngStream(5, 2))
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestCornersEigenvalues:
    def test_diagonal(self):
        out = corners_eigenvalues(np.diag([2.0, -1.0]).astype(complex))
        assert out.tolist() == [[2.0], [2.0, -1.0]]

    def test_hand_computed(self):
        out = corners_eigenvalues(np.array([[0, 1], [1, 0]], dtype=complex))
        assert out.allclose(type(out).from_levels([[0.0], [1.0, -1.0]]), atol=1e-14)

    def test_bisection_oracle(self):
        H = sample_perturbed_gue_matrix(3, 1.3, [0.4, -0.1, 0.9], RngStream(11))
        roots = char_poly_roots_by_bisection(H)
        np.testing.assert_allclose(corners_eigenvalues(H).level(3), roots, atol=1e-8)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError):
            corners_eigenvalues(np.array([[0, 1], [2, 0]], dtype=complex))


class TestCornersProcess:
    def test_level_one_normal(self):
        x = sample_corners_process(1, 2.0, [0.5], RngStream(4), size=50_000).level(1)[:, 0]
        assert ks_one_sample(x, lambda v: ndtr((v - 1.0) / np.sqrt(2.0))).passed

    @given(st.integers(1, 8), st.floats(0.05, 5.0), st.integers(0, 2**31))
    def test_interlacing_and_trace(self, n, t, seed):
        rng = RngStream(seed)
        a = rng.generator.normal(size=n)
        H = sample_perturbed_gue_matrix(n, t, a, rng, size=5)
        arr = corners_eigenvalues(H)
        assert validate_interlacing(arr, 1e-8).ok
        traces = np.cumsum(np.einsum("...ii->...i", H).real, axis=-1)
        np.testing.assert_allclose(level_sums(arr), traces, atol=1e-8 * (1 + np.abs(traces).max()))

    def test_symmetric_in_parameters(self):
        n = 20_000
        x = sample_corners_process(3, 1.0, [0.5, -0.2, 0.1], RngStream(8, 0), size=n).level(3)
        y = sample_corners_process(3, 1.0, [0.1, 0.5, -0.2], RngStream(8, 1), size=n).level(3)
        for j in range(3):
            assert ks_two_sample(x[:, j], y[:, j]).passed
