import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hdanova.errors import InvalidArgument
from hdanova.kernel import GAUSSIAN, KernelSpec, check_admissible, gram, gram_matrix, kernel_eval


class TestKernelEval:
    @pytest.mark.parametrize("x, expected", [
        (0.0, 1.0),
        (1.0, 0.6065306597),
        (2.0, math.exp(-2.0)),
        (-2.0, math.exp(-2.0)),
    ])
    def test_values(self, x, expected):
        assert kernel_eval(GAUSSIAN, x) == pytest.approx(expected, abs=1e-10)

    @pytest.mark.parametrize("x", [math.nan, math.inf, -math.inf])
    def test_non_finite(self, x):
        with pytest.raises(InvalidArgument):
            kernel_eval(GAUSSIAN, x)

    def test_unknown_kind(self):
        with pytest.raises(InvalidArgument):
            KernelSpec("bartlett")

    @given(st.floats(-50, 50))
    def test_bounded_and_symmetric(self, x):
        v = kernel_eval(GAUSSIAN, x)
        assert 0.0 <= v <= 1.0
        assert v == kernel_eval(GAUSSIAN, -x)


class TestGram:
    def test_single_point(self):
        g = gram(GAUSSIAN, 1, 3.0)
        assert g.matrix.tolist() == [[1.0]] and g.factor.tolist() == [[1.0]]

    def test_huge_bandwidth_is_rank_one(self):
        g = gram(GAUSSIAN, 3, 1e12)
        np.testing.assert_allclose(g.matrix, np.ones((3, 3)), atol=1e-12)
        np.testing.assert_allclose(g.factor @ g.factor.T, g.matrix + g.jitter * np.eye(3), atol=1e-8)

    def test_psd_against_eigensolver(self):
        g = gram(GAUSSIAN, 200, 50.0)
        assert np.linalg.eigvalsh(g.matrix)[0] >= -1e-8
        assert g.min_eigenvalue() == pytest.approx(float(np.linalg.eigvalsh(g.matrix)[0]))

    @pytest.mark.parametrize("T", [1, 2, 17, 64, 256])
    @pytest.mark.parametrize("Hkind", ["1", "5", "50", "T"])
    def test_psd_and_factor(self, T, Hkind):
        H = float(T) if Hkind == "T" else float(Hkind)
        g = gram(GAUSSIAN, T, H)
        assert np.linalg.eigvalsh(g.matrix)[0] >= -1e-8
        recon = g.factor @ g.factor.T
        np.testing.assert_allclose(recon, g.matrix + g.jitter * np.eye(T), rtol=0, atol=1e-8)

    def test_toeplitz_exact(self):
        G = gram(GAUSSIAN, 40, 7.0).matrix
        for i in range(40):
            for j in range(40):
                assert G[i, j] == G[abs(i - j), 0]

    def test_matches_direct_formula(self):
        G = gram_matrix(GAUSSIAN, 5, 2.0)
        expected = [[math.exp(-0.5 * ((i - j) / 2.0) ** 2) for j in range(5)] for i in range(5)]
        np.testing.assert_allclose(G, expected, rtol=1e-15)

    @pytest.mark.parametrize("T, H", [(0, 1.0), (3, 0.0), (3, -1.0), (3, math.inf), (2.5, 1.0)])
    def test_invalid(self, T, H):
        with pytest.raises(InvalidArgument):
            gram(GAUSSIAN, T, H)

    def test_cached(self):
        assert gram(GAUSSIAN, 30, 4.0) is gram(GAUSSIAN, 30, 4.0)

    def test_readonly(self):
        with pytest.raises(ValueError):
            gram(GAUSSIAN, 5, 1.0).factor[0, 0] = 2.0


class TestAdmissible:
    grid = np.arange(0, 10.05, 0.1)

    def test_gaussian(self):
        assert check_admissible(GAUSSIAN, self.grid)

    def test_wrong_origin(self):
        assert not check_admissible(lambda x: 0.5 * np.exp(-0.5 * np.square(x)), self.grid)

    def test_increasing(self):
        assert not check_admissible(lambda x: np.minimum(1.0, 0.5 + 0.5 * np.abs(x)) * (np.abs(x) > 0)
                                    + (np.abs(x) == 0), self.grid)

    def test_not_psd(self):
        # a box kernel is monotone and bounded but its Gram is indefinite
        assert not check_admissible(lambda x: (np.abs(x) <= 1.0).astype(float), self.grid)

    def test_asymmetric(self):
        assert not check_admissible(lambda x: np.exp(-0.5 * np.square(x)) * (1 + 0.1 * np.tanh(x)) /
                                    1.0, self.grid)
