"""
Unit tests for finite-field towers.
"""

import numpy as np
import pytest

from clubforge.error_handling import (
    DivisionByZeroError,
    NotADivisorError,
    NotPrimeError,
    SizeBudgetExceededError,
    ValidationError,
)
from clubforge.field import FieldTower, int_digits, make_tower, smallest_irreducible
from clubforge.models import ClubforgeConfig, set_cached_config


class TestSmallestIrreducible:
    """Test cases for smallest_irreducible."""

    def test_quadratic_over_f2(self):
        """Test that x^2 + x + 1 is picked over F_2."""
        assert smallest_irreducible(2, 2) == (1, 1, 1)

    def test_cubic_over_f2(self):
        """Test that x^3 + x + 1 is picked over F_2."""
        assert smallest_irreducible(2, 3) == (1, 1, 0, 1)

    def test_deterministic(self):
        """Test that repeated calls agree."""
        assert smallest_irreducible(3, 4) == smallest_irreducible(3, 4)


class TestIntDigits:
    """Test cases for int_digits."""

    def test_little_endian(self):
        """Test digit order."""
        assert int_digits(np.array([6]), 2, 4).tolist() == [[0, 1, 1, 0]]

    def test_vectorized(self):
        """Test the trailing digit axis on a batch."""
        assert int_digits(np.arange(9), 3, 2).shape == (9, 2)


class TestMakeTower:
    """Test cases for make_tower."""

    def test_not_prime(self):
        """Test that a composite characteristic is refused."""
        with pytest.raises(NotPrimeError):
            make_tower(4, 1, 2)

    def test_budget(self):
        """Test that the field budget is enforced."""
        set_cached_config(ClubforgeConfig(field_budget=8))
        with pytest.raises(SizeBudgetExceededError):
            make_tower(2, 1, 4)

    def test_cached(self):
        """Test that the same parameters return the same tower."""
        assert make_tower(2, 1, 3) is make_tower(2, 1, 3)

    def test_non_positive_degree(self):
        """Test that m = 0 is refused."""
        with pytest.raises(ValidationError):
            make_tower(2, 1, 0)

    def test_dict_round_trip(self):
        """Test to_dict / from_dict."""
        tower = make_tower(3, 1, 2)
        assert FieldTower.from_dict(tower.to_dict()) is tower

    def test_wrong_modulus(self):
        """Test that a foreign modulus is refused."""
        data = make_tower(2, 1, 3).to_dict()
        data['modulus'] = [1, 0, 1, 1]
        with pytest.raises(ValidationError):
            FieldTower.from_dict(data)

    def test_missing_keys(self):
        """Test that an incomplete description is refused."""
        with pytest.raises(ValidationError):
            FieldTower.from_dict({'p': 2})


class TestArithmetic:
    """Test cases for field arithmetic and maps."""

    @pytest.fixture
    def tower(self):
        return make_tower(2, 1, 4)

    def test_arith(self, tower):
        """Test that multiplication and division invert each other."""
        a, b = 7, 11
        product = tower.arith(a, b, 'mul')
        assert tower.arith(product, b, 'div') == a
        assert tower.arith(a, a, 'sub') == 0

    def test_division_by_zero(self, tower):
        """Test division by zero."""
        with pytest.raises(DivisionByZeroError):
            tower.arith(3, 0, 'div')

    def test_unknown_operation(self, tower):
        """Test that an unknown operation name is refused."""
        with pytest.raises(ValueError):
            tower.arith(1, 1, 'pow')

    def test_frobenius_period(self, tower):
        """Test that a^(q^m) = a."""
        values = np.arange(tower.order)
        assert np.array_equal(tower.pow_q(values, tower.m), values)
        assert tower.pow_q(5, 0) == 5

    def test_trace_lands_in_base_field(self, tower):
        """Test that every trace value lies in F_q."""
        traces = tower.rel_trace(np.arange(tower.order), 1)
        assert set(traces.tolist()) <= set(tower.subfield_elements(1))

    def test_trace_of_one(self, tower):
        """Test Tr(1) = m mod p."""
        assert tower.rel_trace(1, 1) == 0
        assert make_tower(2, 1, 3).rel_trace(1, 1) == 1

    def test_trace_is_balanced(self, tower):
        """Test that each value of F_q is hit q^(m-1) times."""
        traces = tower.rel_trace(np.arange(tower.order), 1)
        assert np.bincount(traces).tolist() == [8, 8]

    def test_norm_is_multiplicative(self, tower):
        """Test N(ab) = N(a) N(b)."""
        a, b = 6, 13
        left = tower.rel_norm(tower.arith(a, b, 'mul'), 1)
        right = tower.arith(tower.rel_norm(a, 1), tower.rel_norm(b, 1), 'mul')
        assert left == right

    def test_intermediate_trace(self, tower):
        """Test a trace from F_{q^4} down to F_{q^2}."""
        values = tower.rel_trace(np.arange(tower.order), 2)
        assert set(values.tolist()) <= set(tower.subfield_elements(2))

    def test_trace_bad_degree(self, tower):
        """Test that a non-divisor degree is refused."""
        with pytest.raises(NotADivisorError):
            tower.rel_trace(1, 3)

    def test_subfields(self, tower):
        """Test the subfield sizes."""
        assert len(tower.subfield_elements(1)) == 2
        assert len(tower.subfield_elements(2)) == 4
        assert len(tower.subfield_elements(4)) == 16
        with pytest.raises(NotADivisorError):
            tower.subfield_elements(3)


class TestTables:
    """Test cases for coordinate and embedding tables."""

    def test_coordinates_invert(self):
        """Test that coord_table and uncoord_table are inverse maps."""
        tower = make_tower(3, 1, 2)
        index = tower.coord_table @ (tower.q ** np.arange(tower.m))
        assert np.array_equal(tower.uncoord_table[index], np.arange(tower.order))

    def test_one_has_unit_coordinates(self):
        """Test that 1 is the first power-basis element."""
        tower = make_tower(2, 1, 3)
        assert tower.coord_table[1].tolist() == [1, 0, 0]

    def test_embedding_fixed_by_frobenius(self):
        """Test that the embedded F_q is fixed by x -> x^q."""
        tower = make_tower(2, 2, 2)
        assert np.array_equal(tower.pow_q(tower.embed_table, 1), tower.embed_table)
        assert sorted(tower.embed_table.tolist()) == tower.subfield_elements(1)

    def test_small_round_trip(self):
        """Test to_small / from_small."""
        tower = make_tower(2, 2, 2)
        values = np.array(tower.subfield_elements(1))
        assert np.array_equal(tower.from_small(tower.to_small(values)), values)

    def test_to_small_rejects_outside(self):
        """Test that an element outside F_q is refused."""
        tower = make_tower(2, 2, 2)
        outside = next(v for v in range(tower.order) if v not in tower.subfield_elements(1))
        with pytest.raises(ValueError):
            tower.to_small([outside])
