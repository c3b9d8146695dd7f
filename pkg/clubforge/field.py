"""
Finite-field towers F_p < F_q = GF(p^e) < F_{q^m} = GF(p^(e*m)).

Elements are plain integers: the base-p digits of an integer are the
coefficients of the residue polynomial, lowest degree first. This is the
integer representation galois uses, so conversion to and from galois field
arrays is free.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import galois
import numpy as np

from .error_handling import (
    BasisExpansionFailureError,
    DivisionByZeroError,
    NotADivisorError,
    NotPrimeError,
    SizeBudgetExceededError,
    ValidationError,
)
from .logging_utils import get_logger
from .models import get_cached_config

logger = get_logger(__name__)

ElementLike = Union[int, Sequence[int], np.ndarray]

_OPS = ('add', 'sub', 'mul', 'div')


def smallest_irreducible(p: int, degree: int) -> Tuple[int, ...]:
    """
    Smallest monic irreducible polynomial of the given degree over F_p.

    Candidates are scanned by integer encoding (sum of c_i * p^i), so the
    result is deterministic. Coefficients are returned lowest degree first.
    """
    prime_field = galois.GF(p)
    for value in range(p ** degree, 2 * p ** degree):
        poly = galois.Poly.Int(value, field=prime_field)
        if poly.is_irreducible():
            return tuple(int(c) for c in reversed(poly.coeffs.view(np.ndarray).tolist()))
    raise BasisExpansionFailureError(f"no irreducible polynomial of degree {degree} over F_{p}")


def int_digits(values: np.ndarray, base: int, width: int) -> np.ndarray:
    """Little-endian base-`base` digits of each value, shape (..., width)."""
    values = np.asarray(values, dtype=np.int64)
    powers = base ** np.arange(width, dtype=np.int64)
    return (values[..., None] // powers) % base


def _galois_field(p: int, modulus: Tuple[int, ...]) -> Any:
    degree = len(modulus) - 1
    if degree == 1:
        return galois.GF(p)
    poly = galois.Poly(list(reversed(modulus)), field=galois.GF(p))
    return galois.GF(p ** degree, irreducible_poly=poly)


@dataclass(frozen=True)
class FieldTower:
    """
    The pair F_q < F_{q^m} realised inside GF(p^(e*m)).

    `big` is the galois class of F_{q^m}, `small` a standalone GF(p^e) used
    for F_q-linear algebra. The lookup tables translate between the two and
    between elements of F_{q^m} and their coordinates in the power basis
    {1, x, ..., x^(m-1)}.
    """

    p: int
    e: int
    m: int
    modulus: Tuple[int, ...]
    big: Any = field(init=False, repr=False, compare=False)
    small: Any = field(init=False, repr=False, compare=False)
    small_modulus: Tuple[int, ...] = field(init=False, repr=False, compare=False)
    embed_table: np.ndarray = field(init=False, repr=False, compare=False)
    unembed_table: np.ndarray = field(init=False, repr=False, compare=False)
    coord_table: np.ndarray = field(init=False, repr=False, compare=False)
    uncoord_table: np.ndarray = field(init=False, repr=False, compare=False)
    _cache: Dict[Any, Any] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        setattr_ = object.__setattr__
        setattr_(self, '_cache', {})
        setattr_(self, 'big', _galois_field(self.p, self.modulus))
        small_modulus = smallest_irreducible(self.p, self.e)
        setattr_(self, 'small_modulus', small_modulus)
        setattr_(self, 'small', _galois_field(self.p, small_modulus))
        setattr_(self, 'embed_table', self._build_embedding(small_modulus))
        unembed = np.full(self.order, -1, dtype=np.int64)
        unembed[self.embed_table] = np.arange(self.q, dtype=np.int64)
        setattr_(self, 'unembed_table', unembed)
        coord, uncoord = self._build_coordinates()
        setattr_(self, 'coord_table', coord)
        setattr_(self, 'uncoord_table', uncoord)

    @property
    def q(self) -> int:
        return self.p ** self.e

    @property
    def order(self) -> int:
        return self.q ** self.m

    @property
    def generator(self) -> int:
        """Encoding of the residue class x (1 when the power basis is {1})."""
        return self.p if self.e * self.m > 1 else 1

    def _build_embedding(self, small_modulus: Tuple[int, ...]) -> np.ndarray:
        if self.e == 1:
            return np.arange(self.p, dtype=np.int64)

        candidates = self.big(np.arange(self.order, dtype=np.int64))
        value = self.big.Zeros(self.order)
        for coeff in reversed(small_modulus):
            value = value * candidates + self.big(coeff)
        roots = np.nonzero(value.view(np.ndarray) == 0)[0]
        if roots.size == 0:
            raise BasisExpansionFailureError("subfield modulus has no root in F_{q^m}")
        root = self.big(int(roots[0]))

        digits = int_digits(np.arange(self.q), self.p, self.e)
        image = self.big.Zeros(self.q)
        power = self.big(1)
        for i in range(self.e):
            image = image + self.big(digits[:, i]) * power
            power = power * root
        return image.view(np.ndarray).astype(np.int64)

    def _build_coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        digits = int_digits(np.arange(self.order), self.q, self.m)
        embedded = self.embed_table[digits]
        x = self.big(self.generator)
        value = self.big.Zeros(self.order)
        power = self.big(1)
        for j in range(self.m):
            value = value + self.big(embedded[:, j]) * power
            power = power * x
        uncoord = value.view(np.ndarray).astype(np.int64)
        if np.unique(uncoord).size != self.order:
            raise BasisExpansionFailureError("power basis does not span F_{q^m} over F_q")
        coord = np.empty((self.order, self.m), dtype=np.int64)
        coord[uncoord] = digits
        return coord, uncoord

    def elements(self, values: ElementLike) -> Any:
        """Wrap integer encodings as a galois array over F_{q^m}."""
        return self.big(np.asarray(values, dtype=np.int64))

    @staticmethod
    def ints(array: Any) -> np.ndarray:
        """Integer encodings of a galois array."""
        return np.asarray(array.view(np.ndarray), dtype=np.int64)

    def _result(self, array: Any, scalar: bool) -> Any:
        values = self.ints(array)
        return int(values) if scalar else values

    def arith(self, a: int, b: int, op: str) -> int:
        """Exact field arithmetic on two encodings."""
        if op not in _OPS:
            raise ValueError(f"unknown operation {op!r}, expected one of {_OPS}")
        x, y = self.big(int(a)), self.big(int(b))
        if op == 'add':
            return int(x + y)
        if op == 'sub':
            return int(x - y)
        if op == 'mul':
            return int(x * y)
        if int(b) == 0:
            raise DivisionByZeroError("division by zero in F_{q^m}", divisor=0)
        return int(x / y)

    def pow_q(self, a: ElementLike, j: int) -> Any:
        """a^(q^j), by (j mod m)*e applications of the p-Frobenius."""
        scalar = np.ndim(a) == 0
        x = self.elements(a)
        for _ in range((j % self.m) * self.e):
            x = x ** self.p
        return self._result(x, scalar)

    def _check_degrees(self, l: int, from_degree: int) -> None:
        if l <= 0 or from_degree % l != 0:
            raise NotADivisorError(f"{l} does not divide {from_degree}", l=l, degree=from_degree)
        if self.m % from_degree != 0:
            raise NotADivisorError(f"{from_degree} does not divide m={self.m}",
                                   l=from_degree, degree=self.m)

    def rel_trace(self, a: ElementLike, l: int, from_degree: Optional[int] = None) -> Any:
        """Tr_{q^D/q^l}(a) with D = from_degree (default m)."""
        degree = self.m if from_degree is None else from_degree
        self._check_degrees(l, degree)
        scalar = np.ndim(a) == 0
        x = self.elements(a)
        total, term = x, x
        for _ in range(degree // l - 1):
            term = self.elements(self.pow_q(self.ints(term), l))
            total = total + term
        return self._result(total, scalar)

    def rel_norm(self, a: ElementLike, l: int, from_degree: Optional[int] = None) -> Any:
        """N_{q^D/q^l}(a) with D = from_degree (default m)."""
        degree = self.m if from_degree is None else from_degree
        self._check_degrees(l, degree)
        scalar = np.ndim(a) == 0
        x = self.elements(a)
        total, term = x, x
        for _ in range(degree // l - 1):
            term = self.elements(self.pow_q(self.ints(term), l))
            total = total * term
        return self._result(total, scalar)

    def subfield_elements(self, l: int) -> List[int]:
        """Elements of F_{q^l} inside F_{q^m}, ascending."""
        if l <= 0 or self.m % l != 0:
            raise NotADivisorError(f"{l} does not divide m={self.m}", l=l, degree=self.m)
        key = ('subfield', l)
        if key not in self._cache:
            everything = np.arange(self.order, dtype=np.int64)
            fixed = self.pow_q(everything, l) == everything
            self._cache[key] = [int(v) for v in everything[fixed]]
        return list(self._cache[key])

    def to_small(self, values: ElementLike) -> Any:
        """Map elements of the subfield F_q inside F_{q^m} to the standalone GF(q)."""
        images = self.unembed_table[np.asarray(values, dtype=np.int64)]
        if np.any(images < 0):
            raise ValueError("element does not lie in F_q")
        return self.small(images)

    def from_small(self, values: Any) -> np.ndarray:
        """Map GF(q) elements (array or ints) into F_{q^m} encodings."""
        raw = values.view(np.ndarray) if hasattr(values, 'view') else values
        return self.embed_table[np.asarray(raw, dtype=np.int64)]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {'p': self.p, 'e': self.e, 'm': self.m, 'modulus': list(self.modulus)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FieldTower':
        try:
            p, e, m = int(data['p']), int(data['e']), int(data['m'])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"field description needs integer p, e, m: {exc}")
        tower = make_tower(p, e, m)
        given = data.get('modulus')
        if given is not None and tuple(int(c) for c in given) != tower.modulus:
            raise ValidationError("modulus differs from the canonical one for these parameters",
                                  expected=list(tower.modulus), given=list(given))
        return tower


@lru_cache(maxsize=None)
def _build_tower(p: int, e: int, m: int) -> FieldTower:
    modulus = smallest_irreducible(p, e * m)
    logger.debug("Building field tower", p=p, e=e, m=m, modulus=list(modulus))
    return FieldTower(p=p, e=e, m=m, modulus=modulus)


def make_tower(p: int, e: int, m: int) -> FieldTower:
    """
    Build (or fetch) the tower for F_{p^e} < F_{p^(e*m)}.

    Raises:
        NotPrimeError: p is not prime
        SizeBudgetExceededError: p^(e*m) exceeds the configured field budget
    """
    if p < 2 or not galois.is_prime(p):
        raise NotPrimeError(f"{p} is not prime", p=p)
    if e < 1 or m < 1:
        raise ValidationError("e and m must be positive", e=e, m=m)
    budget = get_cached_config().field_budget
    if p ** (e * m) > budget:
        raise SizeBudgetExceededError(f"field of order {p}^{e * m} exceeds the budget {budget}",
                                      order=p ** (e * m), budget=budget)
    return _build_tower(p, e, m)
