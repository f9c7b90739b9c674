import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blocksvd.errors import InvalidInputError, InvalidParameterError
from blocksvd.linalg import (
    SvdFactors,
    canonical_sign,
    energy_rank,
    orthonormality_defect,
    reconstruct,
    thin_svd,
    truncate_rank,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
matrices = st.tuples(st.integers(1, 9), st.integers(1, 7)).flatmap(lambda s: arrays(np.float64, s, elements=finite))


def rel_fro(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a), 1e-300)


class TestThinSvd:
    def test_identity(self):
        f = thin_svd(np.eye(2))
        np.testing.assert_allclose(f.sigma, [1.0, 1.0])
        assert orthonormality_defect(f.u) <= 1e-10
        assert orthonormality_defect(f.v) <= 1e-10

    def test_diagonal(self):
        np.testing.assert_allclose(thin_svd([[3.0, 0.0], [0.0, 2.0]]).sigma, [3.0, 2.0])

    def test_rank_one_drops_null_direction(self):
        f = thin_svd([[1.0, 2.0], [2.0, 4.0]])
        assert f.k == 1
        np.testing.assert_allclose(f.sigma, [5.0])

    def test_zero_matrix_is_rank_zero(self):
        f = thin_svd(np.zeros((3, 2)))
        assert f.k == 0
        assert f.u.shape == (3, 0) and f.v.shape == (2, 0)

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(InvalidInputError):
            thin_svd([[1.0, bad]])

    def test_rejects_empty(self):
        with pytest.raises(InvalidInputError):
            thin_svd(np.zeros((0, 3)))

    @settings(max_examples=150, deadline=None)
    @given(matrices)
    def test_factor_invariants_and_round_trip(self, a):
        f = thin_svd(a)
        assert orthonormality_defect(f.u) <= 1e-10
        assert orthonormality_defect(f.v) <= 1e-10
        assert np.all(f.sigma >= 0) and np.all(np.diff(f.sigma) <= 0)
        assert f.k <= min(a.shape)
        assert np.linalg.norm(a - reconstruct(f)) <= 1e-8 * np.linalg.norm(a) + 1e-300

    @settings(max_examples=80, deadline=None)
    @given(matrices, st.randoms(use_true_random=False))
    def test_row_permutation_invariance(self, a, rnd):
        perm = list(range(a.shape[0]))
        rnd.shuffle(perm)
        s1, s2 = thin_svd(a).sigma, thin_svd(a[perm]).sigma
        n = max(s1.size, s2.size)
        s1, s2 = np.pad(s1, (0, n - s1.size)), np.pad(s2, (0, n - s2.size))
        np.testing.assert_allclose(s1, s2, atol=1e-10 * max(1.0, s1[:1].sum()), rtol=1e-10)

    @settings(max_examples=80, deadline=None)
    @given(matrices, st.integers(1, 4))
    def test_zero_rows_leave_sigma_unchanged(self, a, extra):
        s1 = thin_svd(a).sigma
        s2 = thin_svd(np.vstack([a, np.zeros((extra, a.shape[1]))])).sigma
        n = max(s1.size, s2.size)
        s1, s2 = np.pad(s1, (0, n - s1.size)), np.pad(s2, (0, n - s2.size))
        np.testing.assert_allclose(s1, s2, atol=1e-10 * max(1.0, s1[:1].sum()), rtol=1e-10)


class TestTruncateRank:
    def _factors(self, sigma):
        k = len(sigma)
        return SvdFactors(np.eye(k), np.asarray(sigma, float), np.eye(k))

    def test_energy_threshold_hand_example(self):
        # f(1) = 9 / (9 + 1) = 0.9 exactly meets the threshold
        assert truncate_rank(self._factors([3.0, 1.0]), 0.9).k == 1
        assert truncate_rank(self._factors([3.0, 1.0]), 0.91).k == 2

    def test_xi_one_keeps_everything(self):
        f = thin_svd(np.random.default_rng(0).standard_normal((6, 4)))
        assert truncate_rank(f, 1.0).k == f.k

    def test_zero_energy(self):
        assert truncate_rank(self._factors([0.0]), 0.98).k == 0

    @pytest.mark.parametrize("xi", [0.0, -0.1, 1.0001, np.nan])
    def test_bad_threshold(self, xi):
        with pytest.raises(InvalidParameterError):
            truncate_rank(self._factors([1.0]), xi)

    @settings(max_examples=150, deadline=None)
    @given(matrices, st.floats(0.01, 1.0))
    def test_minimality_and_error_bound(self, a, xi):
        f = thin_svd(a)
        k = energy_rank(f.sigma, xi)
        energy = np.cumsum((f.sigma / f.sigma[0]) ** 2) if f.k else None
        if f.k == 0:
            assert k == 0
            return
        ratios = energy / energy[-1]
        assert ratios[k - 1] >= xi - 1e-15
        if k > 1:
            assert ratios[k - 2] < xi
        scale = np.abs(a).max()
        err = np.linalg.norm((a - reconstruct(truncate_rank(f, xi))) / scale) ** 2 / np.linalg.norm(a / scale) ** 2
        assert err <= 1 - xi + 1e-12


class TestReconstruct:
    def test_round_trip(self):
        a = np.random.default_rng(3).standard_normal((5, 3))
        assert rel_fro(a, reconstruct(thin_svd(a))) <= 1e-8

    def test_empty_factors(self):
        np.testing.assert_array_equal(reconstruct(SvdFactors.empty(4, 2)), np.zeros((4, 2)))

    def test_rank_one_product(self):
        # explicit outer product of the leading pair, no matmul helpers
        f = thin_svd([[1.0, 2.0], [2.0, 4.0]])
        expected = np.array([[f.sigma[0] * f.u[i, 0] * f.v[j, 0] for j in range(2)] for i in range(2)])
        np.testing.assert_allclose(reconstruct(f), [[1.0, 2.0], [2.0, 4.0]], atol=1e-10)
        np.testing.assert_allclose(reconstruct(f), expected, atol=1e-14)


class TestOrthonormalityDefect:
    def test_identity(self):
        assert orthonormality_defect(np.eye(3)) == 0.0

    def test_scaled_column(self):
        # M^T M = diag(1, 4): largest deviation from I is 3
        assert orthonormality_defect([[1.0, 0.0], [0.0, 2.0]]) == pytest.approx(3.0)

    def test_no_columns(self):
        assert orthonormality_defect(np.zeros((4, 0))) == 0.0


class TestCanonicalSign:
    def test_flips_negative_leading_entry(self):
        f = SvdFactors(np.array([[1.0], [0.0]]), np.array([2.0]), np.array([[-1.0], [0.0]]))
        g = canonical_sign(f)
        np.testing.assert_array_equal(g.v, [[1.0], [0.0]])
        np.testing.assert_array_equal(g.u, [[-1.0], [0.0]])

    @settings(max_examples=60, deadline=None)
    @given(matrices)
    def test_idempotent_and_reconstruction_exact(self, a):
        f = thin_svd(a)
        g = canonical_sign(f)
        h = canonical_sign(g)
        np.testing.assert_array_equal(g.u, h.u)
        np.testing.assert_array_equal(g.v, h.v)
        np.testing.assert_array_equal(reconstruct(g), reconstruct(f))
