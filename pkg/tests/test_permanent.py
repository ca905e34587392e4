import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import example2_seed
from permlab.errors import DomainError, SizeError
from permlab.permanent import build_block_matrix, permanent_naive, permanent_ryser
from permlab.scaling import PositiveBlockMatrix
from permlab.tables import block_permanent_ratio


def exact_ryser(a):
    """Ryser's formula in rational arithmetic, for a bit-exact reference."""
    n = len(a)
    rows = [[Fraction(x) for x in row] for row in a]
    total = Fraction(0)
    for k in range(1, n + 1):
        for cols in combinations(range(n), k):
            prod = Fraction(1)
            for row in rows:
                prod *= sum(row[j] for j in cols)
            total += (-1) ** (n - k) * prod
    return total


class TestBuildBlockMatrix:
    def test_example1(self):
        a = build_block_matrix(PositiveBlockMatrix.example1(2), 2).entries
        np.testing.assert_array_equal(a, np.full((4, 4), 0.5))

    def test_one_by_one(self):
        np.testing.assert_array_equal(np.asarray(build_block_matrix([[3.0]], 4)), np.full((4, 4), 3.0))

    def test_example2_pattern(self):
        b = example2_seed(0.5)
        a = build_block_matrix(b, 2).entries
        hi, lo = 0.75, 0.25
        expected = [[hi, hi, lo, lo], [hi, hi, lo, lo], [lo, lo, hi, hi], [lo, lo, hi, hi]]
        np.testing.assert_array_equal(a, expected)

    def test_zero_entries_allowed(self):
        assert build_block_matrix(np.eye(2), 3).entries.shape == (6, 6)

    def test_rejects_bad(self):
        with pytest.raises(SizeError):
            build_block_matrix([[1.0]], 0)
        with pytest.raises(DomainError):
            build_block_matrix([[-1.0]], 2)


class TestPermanentNaive:
    @pytest.mark.parametrize("a, expected", [
        (np.eye(3), 0.0),
        (np.ones((3, 3)), math.log(6)),
        (np.full((4, 4), 0.5), math.log(1.5)),
    ])
    def test_examples(self, a, expected):
        assert permanent_naive(a) == pytest.approx(expected, abs=1e-14)

    def test_zero_permanent(self):
        a = np.ones((3, 3))
        a[0] = 0.0
        assert permanent_naive(a) == -math.inf

    def test_guard(self):
        with pytest.raises(SizeError):
            permanent_naive(np.ones((13, 13)))

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            permanent_naive([[1.0, -1.0], [1.0, 1.0]])


class TestPermanentRyser:
    def test_identity(self, backend):
        assert permanent_ryser(np.eye(3), backend=backend) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_naive(self, seed, backend):
        a = np.random.default_rng(seed).uniform(0.0, 1.0, size=(8, 8))
        assert permanent_ryser(a, backend=backend) == pytest.approx(permanent_naive(a), rel=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 5, 11])
    def test_matches_rational_oracle(self, n, backend):
        a = np.random.default_rng(n).integers(1, 9, size=(n, n)).astype(float)
        ref = math.log(exact_ryser(a.tolist()))
        assert permanent_ryser(a, backend=backend) == pytest.approx(ref, rel=1e-13, abs=1e-13)

    def test_block_cross_module(self, backend):
        b = example2_seed(0.5)
        a = build_block_matrix(b, 3).entries
        ref = block_permanent_ratio(b, 3).log_ratio + math.lgamma(7)
        assert permanent_ryser(a, backend=backend) == pytest.approx(ref, rel=1e-10)

    def test_zero_row(self, backend):
        a = np.ones((4, 4))
        a[2] = 0.0
        assert permanent_ryser(a, backend=backend) == -math.inf

    def test_zero_permanent_structural(self, backend):
        a = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
        assert permanent_ryser(a, backend=backend) == -math.inf

    def test_guard(self):
        with pytest.raises(SizeError):
            permanent_ryser(np.ones((4, 4)), max_dim=3)

    @pytest.mark.parametrize("workers", [2, 4])
    def test_workers_bit_identical(self, workers, backend):
        a = np.random.default_rng(3).uniform(0.1, 1.0, size=(16, 16))
        assert permanent_ryser(a, workers=workers, backend=backend) == permanent_ryser(a, backend=backend)

    @given(arrays(np.float64, (7, 7), elements=st.floats(0.01, 5.0)), st.randoms(use_true_random=False))
    @settings(max_examples=30, deadline=None)
    def test_permutation_invariance(self, a, random):
        rows, cols = list(range(7)), list(range(7))
        random.shuffle(rows)
        random.shuffle(cols)
        assert permanent_ryser(a[rows][:, cols]) == pytest.approx(permanent_ryser(a), rel=1e-10)

    @given(arrays(np.float64, (5, 5), elements=st.floats(0.01, 5.0)), st.floats(0.1, 10.0))
    @settings(max_examples=30, deadline=None)
    def test_row_homogeneity(self, a, c):
        scaled = a.copy()
        scaled[0] *= c
        assert permanent_ryser(scaled) == pytest.approx(permanent_ryser(a) + math.log(c), rel=1e-12, abs=1e-12)
