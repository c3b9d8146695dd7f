"""
Unit tests for linear algebra over finite fields.
"""

import galois
import numpy as np
import pytest

from clubforge.error_handling import AmbientMismatchError, BasisExpansionFailureError
from clubforge.field import make_tower
from clubforge.fqlinalg import (
    FlatBasis,
    batch_rank,
    coefficient_grid,
    flatten,
    intersect,
    kernel,
    rank,
    rref,
    span_members,
    span_sum,
    unflatten,
)

GF2 = galois.GF(2)
GF3 = galois.GF(3)


class TestElimination:
    """Test cases for rref, rank and kernel."""

    def test_rref_full_rank(self):
        """Test that an invertible matrix reduces to the identity."""
        R, pivots = rref(GF3([[2, 1], [1, 1]]))
        assert np.array_equal(R, GF3.Identity(2))
        assert pivots == (0, 1)

    def test_rref_drops_zero_rows(self):
        """Test removal of dependent rows."""
        R, pivots = rref(GF2([[1, 1, 0], [0, 1, 1], [1, 0, 1]]))
        assert R.shape == (2, 3)
        assert pivots == (0, 1)

    def test_rank(self):
        """Test rank of a singular matrix."""
        assert rank(GF3([[1, 2, 0], [2, 1, 0]])) == 1

    def test_kernel(self):
        """Test that kernel vectors are annihilated."""
        M = GF3([[1, 2, 0, 1], [0, 1, 1, 2]])
        K = kernel(M)
        assert K.shape == (2, 4)
        assert np.all(M @ K.T == 0)

    def test_rank_nullity(self):
        """Test rank plus nullity on random matrices over F_3."""
        rng = np.random.default_rng(11)
        for _ in range(50):
            M = GF3(rng.integers(0, 3, size=(3, 5)))
            K = kernel(M)
            assert rank(M) + K.shape[0] == 5
            assert np.all(M @ K.T == 0)
            assert len(rref(M)[1]) == rank(M)

    def test_kernel_trivial(self):
        """Test the kernel of an invertible matrix."""
        assert kernel(GF2.Identity(3)).shape == (0, 3)

    def test_batch_rank(self):
        """Test that batch ranks match single ranks."""
        mats = GF3(np.random.default_rng(7).integers(0, 3, size=(40, 3, 4)))
        expected = [rank(m) for m in mats]
        assert batch_rank(mats).tolist() == expected


class TestFlatBasis:
    """Test cases for FlatBasis and subspace operations."""

    def test_canonical_equality(self):
        """Test that different bases of one space compare equal."""
        a = FlatBasis.from_matrix(GF2([[1, 1, 0], [0, 1, 1]]), 3)
        b = FlatBasis.from_matrix(GF2([[1, 0, 1], [1, 1, 0]]), 3)
        assert a == b
        assert hash(a) == hash(b)

    def test_contains(self):
        """Test membership."""
        basis = FlatBasis.from_matrix(GF2([[1, 1, 0]]), 3)
        assert basis.contains(GF2([[1, 1, 0], [1, 0, 0], [0, 0, 0]])).tolist() == [True, False, True]

    def test_zero_space(self):
        """Test the zero subspace."""
        zero = FlatBasis.zero(GF2, 3)
        assert zero.rank == 0
        assert zero.is_subspace_of(FlatBasis.from_matrix(GF2.Identity(3), 3))

    def test_intersection(self):
        """Test <e0, e1> ∩ <e1, e2> = <e1>."""
        a = FlatBasis.from_matrix(GF2([[1, 0, 0], [0, 1, 0]]), 3)
        b = FlatBasis.from_matrix(GF2([[0, 1, 0], [0, 0, 1]]), 3)
        meet = intersect(a, b)
        assert meet.rows == ((0, 1, 0),)
        assert span_sum(a, b).rank == 3

    def test_grassmann_identity(self):
        """Test dim(A ∩ B) = dim A + dim B - dim(A + B) on random subspaces of F_2^8."""
        rng = np.random.default_rng(2024)
        for _ in range(100):
            a = FlatBasis.from_matrix(GF2(rng.integers(0, 2, size=(5, 8))), 8)
            b = FlatBasis.from_matrix(GF2(rng.integers(0, 2, size=(5, 8))), 8)
            meet = intersect(a, b)
            assert meet.rank == a.rank + b.rank - span_sum(a, b).rank
            assert meet.is_subspace_of(a) and meet.is_subspace_of(b)

    def test_ambient_mismatch(self):
        """Test that different ambient dimensions are refused."""
        with pytest.raises(AmbientMismatchError):
            span_sum(FlatBasis.zero(GF2, 3), FlatBasis.zero(GF2, 4))

    def test_span_members(self):
        """Test that the row space is listed with zero first."""
        basis = FlatBasis.from_matrix(GF3([[1, 0, 2], [0, 1, 1]]), 3)
        members = span_members(basis)
        assert members.shape == (9, 3)
        assert not np.any(members[0])
        assert len({tuple(row) for row in members.tolist()}) == 9


class TestFlattening:
    """Test cases for flatten and unflatten."""

    def test_round_trip(self):
        """Test that unflatten inverts flatten."""
        tower = make_tower(3, 1, 2)
        vectors = np.array([[1, 5], [7, 0], [0, 8]])
        assert np.array_equal(unflatten(tower, flatten(tower, vectors), 2), vectors)

    def test_shape(self):
        """Test the flattened width."""
        tower = make_tower(2, 1, 3)
        assert flatten(tower, np.array([[1, 2, 3]])).shape == (1, 9)

    def test_wrong_width(self):
        """Test that a row of the wrong length is refused."""
        tower = make_tower(2, 1, 3)
        with pytest.raises(BasisExpansionFailureError):
            unflatten(tower, np.zeros((1, 5), dtype=np.int64), 2)


class TestHelpers:
    """Test cases for small helpers."""

    def test_coefficient_grid(self):
        """Test the grid of all coefficient vectors."""
        grid = coefficient_grid(GF3, 2)
        assert grid.shape == (9, 2)
        assert grid[0].tolist() == [0, 0]
        assert grid[1].tolist() == [0, 1]
        assert coefficient_grid(GF3, 0).shape == (1, 0)
