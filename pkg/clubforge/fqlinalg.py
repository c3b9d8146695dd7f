"""
Exact linear algebra over GF(p^d) and the flattening F_{q^m}^k = F_q^(mk).

Matrices are galois field arrays of any field class. Subspaces of F_q^N are
kept as canonical RREF row bases (FlatBasis); two bases of the same space
always reduce to identical FlatBasis objects.
"""

from dataclasses import dataclass
from typing import Any, Tuple

import numpy as np

from .error_handling import AmbientMismatchError, BasisExpansionFailureError
from .field import FieldTower


def _ints(array: Any) -> np.ndarray:
    return np.asarray(array.view(np.ndarray), dtype=np.int64)


def rref(M: Any) -> Tuple[Any, Tuple[int, ...]]:
    """
    Reduced row echelon form with zero rows removed.

    Returns:
        (reduced matrix, pivot columns)
    """
    field_cls = type(M)
    if M.shape[0] == 0 or M.shape[1] == 0:
        return field_cls.Zeros((0, M.shape[1])), ()
    R = M.row_reduce()
    values = _ints(R)
    nonzero = values.any(axis=1)
    R = R[nonzero]
    pivots = tuple(int(c) for c in np.argmax(values[nonzero] != 0, axis=1))
    return R, pivots


def rank(M: Any) -> int:
    """Row rank of M."""
    if M.shape[0] == 0 or M.shape[1] == 0:
        return 0
    return int(np.linalg.matrix_rank(M))


def kernel(M: Any) -> Any:
    """
    Right null space {x : M x = 0} as an RREF row basis.
    """
    field_cls = type(M)
    cols = M.shape[1]
    if cols == 0:
        return field_cls.Zeros((0, 0))
    if M.shape[0] == 0:
        return field_cls.Identity(cols)
    N = M.null_space()
    if N.shape[0] == 0:
        return field_cls.Zeros((0, cols))
    return rref(N)[0]


def batch_rank(mats: Any) -> np.ndarray:
    """
    Ranks of a stack of matrices, shape (B, r, c), by vectorised elimination.
    """
    field_cls = type(mats)
    A = field_cls(_ints(mats).copy())
    count, rows, cols = A.shape
    ranks = np.zeros(count, dtype=np.int64)
    if count == 0 or rows == 0:
        return ranks
    row_index = np.arange(rows)
    for c in range(cols):
        nz = (_ints(A[:, :, c]) != 0) & (row_index[None, :] >= ranks[:, None])
        has = nz.any(axis=1)
        if not has.any():
            continue
        batch = np.nonzero(has)[0]
        pivot_rows = np.argmax(nz[batch], axis=1)
        target = ranks[batch]
        moving = A[batch, pivot_rows].copy()
        A[batch, pivot_rows] = A[batch, target]
        A[batch, target] = moving
        lead = A[batch, target, c]
        A[batch, target] = A[batch, target] / lead[:, None]
        factors = A[batch, :, c].copy()
        factors[np.arange(batch.size), target] = 0
        A[batch] = A[batch] - factors[:, :, None] * A[batch, target][:, None, :]
        ranks[batch] += 1
        if np.all(ranks >= rows):
            break
    return ranks


@dataclass(frozen=True)
class FlatBasis:
    """
    Canonical RREF basis of an F_q-subspace of F_q^dim.

    Rows are stored as a tuple of integer tuples so the object is hashable
    and compares by value.
    """

    field: Any
    dim: int
    rows: Tuple[Tuple[int, ...], ...]
    pivots: Tuple[int, ...]

    @classmethod
    def from_matrix(cls, M: Any, dim: int) -> 'FlatBasis':
        field_cls = type(M)
        if M.size == 0:
            return cls(field_cls, dim, (), ())
        R, pivots = rref(M.reshape(-1, dim))
        rows = tuple(tuple(int(v) for v in row) for row in _ints(R))
        return cls(field_cls, dim, rows, pivots)

    @classmethod
    def zero(cls, field_cls: Any, dim: int) -> 'FlatBasis':
        return cls(field_cls, dim, (), ())

    @property
    def rank(self) -> int:
        return len(self.rows)

    def matrix(self) -> Any:
        """Rows as a galois array, shape (rank, dim)."""
        if not self.rows:
            return self.field.Zeros((0, self.dim))
        return self.field(np.array(self.rows, dtype=np.int64))

    def _check(self, other: 'FlatBasis') -> None:
        if self.dim != other.dim or self.field is not other.field:
            raise AmbientMismatchError("subspaces live in different ambient spaces",
                                       dims=[self.dim, other.dim])

    def contains(self, vectors: Any) -> np.ndarray:
        """Membership of each row of `vectors` (shape (N, dim))."""
        V = self.field(_ints(vectors).reshape(-1, self.dim))
        if not self.rows:
            return np.all(_ints(V) == 0, axis=1)
        B = self.matrix()
        residual = V - V[:, list(self.pivots)] @ B
        return np.all(_ints(residual) == 0, axis=1)

    def is_subspace_of(self, other: 'FlatBasis') -> bool:
        self._check(other)
        return bool(np.all(other.contains(self.matrix()))) if self.rows else True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FlatBasis):
            return NotImplemented
        return (self.field is other.field and self.dim == other.dim and self.rows == other.rows)

    def __hash__(self) -> int:
        return hash((self.dim, self.rows))


def _stack(*matrices: Any) -> Any:
    field_cls = type(matrices[0])
    parts = [_ints(m) for m in matrices if m.shape[0] > 0]
    dim = matrices[0].shape[1]
    if not parts:
        return field_cls.Zeros((0, dim))
    return field_cls(np.vstack(parts))


def span_sum(A: FlatBasis, B: FlatBasis) -> FlatBasis:
    """A + B."""
    A._check(B)
    return FlatBasis.from_matrix(_stack(A.matrix(), B.matrix()), A.dim)


def intersect(A: FlatBasis, B: FlatBasis) -> FlatBasis:
    """
    A ∩ B, from the kernel of the stacked-basis system aA + bB = 0.
    """
    A._check(B)
    if A.rank == 0 or B.rank == 0:
        return FlatBasis.zero(A.field, A.dim)
    stacked = _stack(A.matrix(), B.matrix())
    relations = kernel(stacked.T)
    if relations.shape[0] == 0:
        return FlatBasis.zero(A.field, A.dim)
    vectors = relations[:, :A.rank] @ A.matrix()
    return FlatBasis.from_matrix(vectors, A.dim)


def flatten(tower: FieldTower, vectors: Any) -> Any:
    """
    F_q-coordinates of vectors over F_{q^m}.

    Accepts a vector of length k or an array of shape (..., k) of encodings
    and returns a GF(q) array of shape (..., m*k), coordinates of each entry
    in the power basis concatenated in entry order.
    """
    values = np.asarray(vectors, dtype=np.int64)
    coords = tower.coord_table[values]
    return tower.small(coords.reshape(values.shape[:-1] + (values.shape[-1] * tower.m,)))


def unflatten(tower: FieldTower, rows: Any, k: int) -> np.ndarray:
    """Inverse of flatten: integer encodings of shape (..., k)."""
    coords = _ints(rows) if hasattr(rows, 'view') else np.asarray(rows, dtype=np.int64)
    if coords.shape[-1] != k * tower.m:
        raise BasisExpansionFailureError("row length does not match m*k",
                                         length=int(coords.shape[-1]), expected=k * tower.m)
    blocks = coords.reshape(coords.shape[:-1] + (k, tower.m))
    index = blocks @ (tower.q ** np.arange(tower.m, dtype=np.int64))
    return tower.uncoord_table[index]


def coefficient_grid(field_cls: Any, n: int) -> Any:
    """All vectors of F_q^n in lexicographic order (first coordinate slowest)."""
    q = field_cls.order
    if n == 0:
        return field_cls.Zeros((1, 0))
    digits = np.indices((q,) * n).reshape(n, -1).T
    return field_cls(digits)


def span_members(basis: FlatBasis) -> Any:
    """All q^n members of the row space of `basis`, zero first."""
    coeffs = coefficient_grid(basis.field, basis.rank)
    if basis.rank == 0:
        return basis.field.Zeros((1, basis.dim))
    return coeffs @ basis.matrix()
