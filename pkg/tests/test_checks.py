"""
Unit tests for the verification batteries.
"""

import numpy as np
import pytest

from clubforge.checks import (
    hyperplane_basis,
    verify_construction,
    verify_dual_weight_law,
    verify_hyperplane_section_bound,
    verify_max_m1_club,
)
from clubforge.constructions import (
    ConstructionSpec,
    build,
    builtin_max_scattered,
    power_basis,
    trace_club,
)
from clubforge.error_handling import ParameterViolationError
from clubforge.field import make_tower
from clubforge.fqlinalg import rank
from clubforge.linset import SubspaceU, embed_coordinates
from clubforge.models import ClubforgeConfig, set_cached_config


@pytest.fixture
def scattered():
    tower = make_tower(2, 1, 3)
    xs = power_basis(tower)
    return SubspaceU.from_vectors(tower, 2, np.stack([xs, tower.pow_q(xs, 1)], axis=1))


@pytest.fixture(scope='module')
def cone_club():
    U, _ = build(ConstructionSpec('Cone', {'m': 4, 'k': 3, 'i': 3}))
    return U


class TestDualWeightLaw:
    """Test cases for the dual weight relation."""

    def test_point(self, scattered):
        """Test the relation for a point."""
        assert verify_dual_weight_law(scattered, [[1, 0]])
        assert verify_dual_weight_law(scattered, [[1, 5]])

    def test_whole_and_zero(self, scattered):
        """Test the relation for the trivial subspaces."""
        assert verify_dual_weight_law(scattered, np.zeros((0, 2), dtype=np.int64))
        assert verify_dual_weight_law(scattered, [[1, 0], [0, 1]])

    def test_hyperplane_basis(self):
        """Test the basis of X_2 = 0."""
        tower = make_tower(2, 1, 2)
        basis = hyperplane_basis(tower, [0, 0, 1])
        assert basis.shape == (2, 3)
        assert np.all(basis[:, 2] == 0)

    def test_random_subspaces(self, cone_club):
        """Test the relation for 100 random subspaces W of every dimension."""
        tower, k = cone_club.tower, cone_club.k
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 100:
            s = int(rng.integers(0, k + 1))
            W = rng.integers(0, tower.order, size=(s, k))
            if s and rank(tower.elements(W)) < s:
                continue
            assert verify_dual_weight_law(cone_club, W)
            checked += 1


class TestSectionBound:
    """Test cases for the hyperplane-section bound."""

    def test_cone(self, cone_club):
        """Test the bound on a cone and its scattered part."""
        tower = cone_club.tower
        part = embed_coordinates(builtin_max_scattered(2, tower), 3, [0, 1])
        outcome = verify_hyperplane_section_bound(cone_club, part, 3, samples=20, seed=3)
        assert outcome.status == 'passed'
        assert outcome.detail['violations'] == []


class TestVerifyConstruction:
    """Test cases for verify_construction."""

    def test_trace_club(self):
        """Test the full battery on the trace club of F_8."""
        report = verify_construction(ConstructionSpec('TraceClub', {'m': 3}))
        assert report.passed
        names = [o.name for o in report.outcomes]
        assert names == ['self_check', 'code_roundtrip', 'macwilliams', 'club_dual_identities']
        assert report.outcome('club_dual_identities').detail['A'] == [1, 7, 28, 28]

    def test_keeps_subspace(self):
        """Test that the report carries the built subspace without serializing it."""
        report = verify_construction(ConstructionSpec('TraceClub', {'m': 3}))
        assert report.subspace == trace_club(make_tower(2, 1, 3))
        assert 'subspace' not in report.to_dict()

    def test_lift_odd_dual_identity(self):
        """Test that the predicted dual basis is confirmed."""
        report = verify_construction(ConstructionSpec('LiftOdd', {'m': 4, 'k': 3, 'i': 2}))
        assert report.outcome('dual_basis_identity').status == 'passed'
        assert report.outcome('club_dual_identities').status == 'passed'

    def test_budget_skips(self):
        """Test that budget refusals are skipped, not failed."""
        set_cached_config(ClubforgeConfig(iteration_budget=20))
        report = verify_construction(ConstructionSpec('TraceClub', {'m': 3}))
        assert report.outcome('self_check').status == 'passed'
        assert report.outcome('code_roundtrip').status == 'skipped'
        assert report.outcome('macwilliams').status == 'skipped'
        assert report.passed

    def test_bad_parameters_fail(self):
        """Test that an invalid construction fails the battery."""
        report = verify_construction(ConstructionSpec('Cone', {'m': 4, 'k': 3, 'i': 9}))
        assert not report.passed
        assert report.outcome('self_check').detail['error'] == 'ParameterViolationError'
        assert len(report.outcomes) == 1
        assert report.subspace is None

    @pytest.mark.slow
    def test_cone(self):
        """Test the battery on the rank-7 cone, including the shifted count."""
        report = verify_construction(ConstructionSpec('Cone', {'m': 4, 'k': 3, 'i': 3}))
        assert report.passed
        detail = report.outcome('club_dual_identities').detail
        assert detail['A'] == [1, 15, 0, 1800, 2280]
        assert not detail['shifted_formula_matches']
        assert report.outcome('hyperplane_section_bound').status == 'passed'


class TestMaxM1Club:
    """Test cases for verify_max_m1_club."""

    def test_rank_seven_cone(self, cone_club):
        """Test the consequences on the 3-club of rank 7 in PG(2, 16)."""
        report = verify_max_m1_club(cone_club)
        assert report.outcome('club_shape').status == 'passed'
        assert report.outcome('dual_scattered').status == 'passed'
        hyperplanes = report.outcome('club_hyperplanes')
        assert hyperplanes.status == 'passed'
        assert hyperplanes.detail['large_count'] == 31
        code = report.outcome('two_weight_code')
        assert code.status == 'passed'
        assert code.detail['A'][3] == 465

    def test_not_maximal(self):
        """Test that a smaller club stops after the shape check."""
        report = verify_max_m1_club(trace_club(make_tower(2, 1, 4)))
        assert report.outcome('club_shape').status == 'failed'
        assert len(report.outcomes) == 1

    def test_half_integer_rank(self):
        """Test that m(k+1)/2 must be an integer."""
        with pytest.raises(ParameterViolationError):
            verify_max_m1_club(trace_club(make_tower(2, 1, 3)))
