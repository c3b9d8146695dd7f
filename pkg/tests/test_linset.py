"""
Unit tests for linear sets.
"""

import numpy as np
import pytest

from clubforge.constructions import power_basis, trace_club
from clubforge.error_handling import (
    DependentBasisError,
    DimensionMismatchError,
    SizeBudgetExceededError,
    ValidationError,
)
from clubforge.field import make_tower
from clubforge.linset import (
    SubspaceU,
    all_points,
    analyze,
    choose_strategy,
    direct_sum,
    dual_perp,
    embed_coordinates,
    hyperplane_spectrum,
    hyperplane_weights,
    intersect_subspace,
    log_q,
    normalize,
    point_count,
    point_weight,
    restricted_dual,
    spans_full_space,
    sub_club,
    subspace_weight,
    verify_weight_identities,
)
from clubforge.models import ClubforgeConfig, set_cached_config


@pytest.fixture
def tower():
    return make_tower(2, 1, 3)


@pytest.fixture
def scattered(tower):
    """{(x, x^q)} in F_8^2."""
    xs = power_basis(tower)
    return SubspaceU.from_vectors(tower, 2, np.stack([xs, tower.pow_q(xs, 1)], axis=1))


@pytest.fixture
def first_axis(tower):
    """{(x, 0)}: the whole point <(1, 0)>."""
    xs = power_basis(tower)
    return SubspaceU.from_vectors(tower, 2, np.stack([xs, np.zeros_like(xs)], axis=1))


class TestSubspaceU:
    """Test cases for SubspaceU."""

    def test_rank_and_members(self, scattered):
        """Test rank and member count."""
        assert scattered.rank == 3
        members = scattered.members()
        assert members.shape == (8, 2)
        assert not np.any(members[0])

    def test_dependent_basis(self, tower):
        """Test that dependent vectors are refused unless allowed."""
        with pytest.raises(DependentBasisError):
            SubspaceU.from_vectors(tower, 2, [[1, 0], [1, 0]])
        assert SubspaceU.from_vectors(tower, 2, [[1, 0], [1, 0]], allow_dependent=True).rank == 1

    def test_out_of_range_entry(self, tower):
        """Test that an encoding outside the field is refused."""
        with pytest.raises(ValidationError):
            SubspaceU.from_vectors(tower, 2, [[8, 0]])

    def test_contains(self, scattered, tower):
        """Test membership of (x, x^q)."""
        x = tower.generator
        assert scattered.contains([[x, tower.pow_q(x, 1)], [x, x]]).tolist() == [True, False]

    def test_dict_round_trip(self, scattered):
        """Test to_dict / from_dict."""
        assert SubspaceU.from_dict(scattered.to_dict()) == scattered

    def test_from_dict_rejects_ragged(self, tower):
        """Test that basis rows of the wrong length are refused."""
        with pytest.raises(ValidationError):
            SubspaceU.from_dict({'field': tower.to_dict(), 'k': 2, 'basis': [[1]]})

    def test_whole(self, tower):
        """Test the whole space."""
        assert SubspaceU.whole(tower, 2).rank == 6


class TestAnalyze:
    """Test cases for weights, census and classification."""

    def test_log_q_is_exact(self):
        """Test exact logarithms of point counts, including large powers."""
        values = np.array([1, 3, 9, 3 ** 19], dtype=np.int64)
        assert log_q(values, 3, 19).tolist() == [0, 1, 2, 19]
        with pytest.raises(ValueError):
            log_q(np.array([3 ** 19 - 1], dtype=np.int64), 3, 19)
        with pytest.raises(ValueError):
            log_q(np.array([27], dtype=np.int64), 3, 2)

    def test_scattered(self, scattered):
        """Test that {(x, x^q)} is scattered of maximum size."""
        report = analyze(scattered)
        assert report.classification.label == 'Scattered'
        assert report.size == 7
        assert report.census == {1: 7}

    def test_club(self, first_axis):
        """Test that one point of weight m is an m-club."""
        report = analyze(first_axis)
        assert report.classification.label == 'Club(3)'
        assert report.classification.special_point == (1, 0)
        assert report.size == 1

    def test_other(self):
        """Test that the whole space of F_4^2 has five heavy points."""
        tower = make_tower(2, 1, 2)
        report = analyze(SubspaceU.whole(tower, 2))
        assert report.classification.label == 'Other'
        assert report.census == {2: 5}

    def test_zero_subspace(self, tower):
        """Test the empty linear set."""
        report = analyze(SubspaceU.from_vectors(tower, 2, np.zeros((0, 2))))
        assert report.size == 0
        assert report.classification.label == 'Scattered'

    def test_strategies_agree(self, scattered):
        """Test that both enumeration strategies give the same report."""
        by_vectors = analyze(scattered, strategy='vectors').to_dict()
        by_points = analyze(scattered, strategy='points').to_dict()
        assert by_vectors == by_points

    def test_weight_identities(self, scattered):
        """Test the census identities."""
        assert verify_weight_identities(analyze(scattered), 2, 3)

    def test_weight_identities_violation(self, scattered):
        """Test that a corrupted census is caught."""
        report = analyze(scattered)
        report.census = {1: 6}
        assert not verify_weight_identities(report, 2, 3)

    def test_point_weight(self, first_axis):
        """Test point weights."""
        assert point_weight(first_axis, [1, 0]) == 3
        assert point_weight(first_axis, [0, 1]) == 0
        with pytest.raises(ValueError):
            point_weight(first_axis, [0, 0])

    def test_point_weight_matches_intersection(self):
        """Test point weights against dim(U ∩ <P>) at every point of PG(1, 16)."""
        U = trace_club(make_tower(2, 1, 4))
        weights = [point_weight(U, P) for P in all_points(U.tower, 2)]
        assert weights == [subspace_weight(U, [P]) for P in all_points(U.tower, 2)]
        assert sorted(weights) == [0] * 8 + [1] * 8 + [3]

    def test_point_weight_of_whole_space(self, tower):
        """Test that every point of the whole space has weight m."""
        assert point_weight(SubspaceU.whole(tower, 2), [3, 5]) == 3

    def test_unknown_strategy(self, scattered):
        """Test that an unknown strategy is refused."""
        with pytest.raises(ValidationError):
            choose_strategy(scattered, 'guess')

    def test_auto_strategy(self, scattered):
        """Test that auto picks the cheaper enumeration."""
        assert choose_strategy(scattered) == 'vectors'

    def test_budget(self):
        """Test that an oversized enumeration is refused."""
        tower = make_tower(2, 1, 2)
        set_cached_config(ClubforgeConfig(iteration_budget=4))
        with pytest.raises(SizeBudgetExceededError):
            analyze(SubspaceU.whole(tower, 2))

    def test_normalize(self, tower):
        """Test that the first nonzero entry becomes 1."""
        out = normalize(tower, np.array([[0, 5], [3, 6]]))
        assert out[0].tolist() == [0, 1]
        assert out[1][0] == 1
        with pytest.raises(ValueError):
            normalize(tower, np.array([[0, 0]]))

    def test_point_count(self):
        """Test |PG(k-1, Q)|."""
        assert point_count(8, 2) == 9
        assert point_count(3, 3) == 13


class TestHyperplanes:
    """Test cases for hyperplane weights."""

    def test_spectrum_on_line(self, scattered):
        """Test that on a line hyperplanes are points."""
        assert hyperplane_spectrum(scattered) == {0: 2, 1: 7}

    def test_spectrum_with_report(self, first_axis):
        """Test the spectrum carried by analyze."""
        report = analyze(first_axis, with_hyperplanes=True)
        assert report.hyperplane_spectrum == {0: 8, 3: 1}

    def test_weights_in_normalized_order(self, first_axis):
        """Test that the normal <(0, 1)> comes last and meets U fully."""
        normals, weights = hyperplane_weights(first_axis)
        assert normals.shape == (9, 2)
        assert normals[-1].tolist() == [0, 1]
        assert weights[-1] == 3
        assert set(weights[:-1].tolist()) == {0}

    def test_subspace_weight(self, first_axis):
        """Test dim(U ∩ W)."""
        assert subspace_weight(first_axis, [[1, 0]]) == 3
        with pytest.raises(DependentBasisError):
            subspace_weight(first_axis, [[1, 0], [1, 0]])


class TestDuality:
    """Test cases for the trace duality."""

    def test_dual_rank(self, scattered):
        """Test dim U^perp = mk - n."""
        assert dual_perp(scattered).rank == 3

    def test_double_dual(self, scattered):
        """Test that dualizing twice returns U."""
        assert dual_perp(dual_perp(scattered)) == scattered

    def test_dual_of_zero(self, tower):
        """Test that the dual of the zero subspace is everything."""
        zero = SubspaceU.from_vectors(tower, 2, np.zeros((0, 2)))
        assert dual_perp(zero).rank == 6

    def test_restricted_dual(self, tower):
        """Test the complement of <1> inside the line <(1, 0)>."""
        U = SubspaceU.from_vectors(tower, 2, [[1, 0]])
        result = restricted_dual(U, [[1, 0]])
        assert result.rank == 2
        assert np.all(result.basis()[:, 1] == 0)

    def test_restricted_dual_outside(self, scattered):
        """Test that U must lie inside W."""
        with pytest.raises(DimensionMismatchError):
            restricted_dual(scattered, [[1, 0]])


class TestCombinations:
    """Test cases for sums, embeddings and sub-clubs."""

    def test_spans_full_space(self, scattered, first_axis):
        """Test the span check."""
        assert spans_full_space(scattered)
        assert not spans_full_space(first_axis)

    def test_direct_sum(self, tower, first_axis):
        """Test that two complementary axes fill the space."""
        xs = power_basis(tower)
        second = SubspaceU.from_vectors(tower, 2, np.stack([np.zeros_like(xs), xs], axis=1))
        assert direct_sum(first_axis, second) == SubspaceU.whole(tower, 2)

    def test_direct_sum_overlap(self, first_axis):
        """Test that overlapping spans are refused."""
        with pytest.raises(DimensionMismatchError):
            direct_sum(first_axis, first_axis)

    def test_embed_coordinates(self, scattered):
        """Test placement into a larger space."""
        placed = embed_coordinates(scattered, 3, [0, 2])
        assert placed.k == 3
        assert placed.rank == 3
        assert np.all(placed.basis()[:, 1] == 0)
        with pytest.raises(DimensionMismatchError):
            embed_coordinates(scattered, 3, [0, 0])

    def test_intersect_subspace(self, tower):
        """Test U ∩ <(1, 0)> for the whole space."""
        assert intersect_subspace(SubspaceU.whole(tower, 2), [[1, 0]]).rank == 3

    def test_sub_club(self, first_axis):
        """Test that dropping a vector lowers the club index."""
        smaller = sub_club(first_axis)
        assert smaller.rank == 2
        assert analyze(smaller).classification.label == 'Club(2)'
