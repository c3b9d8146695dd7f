"""
Linear sets L_U in PG(k-1, q^m).

An F_q-subspace U of F_{q^m}^k is held as a SubspaceU whose canonical form
is the RREF of its flattened basis. Point weights, the census N_i, the
classification (scattered, i-club, other), hyperplane spectra and the
trace duality are computed here.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .error_handling import (
    AmbientMismatchError,
    DegenerateRestrictionError,
    DependentBasisError,
    DimensionMismatchError,
    ParameterViolationError,
    SizeBudgetExceededError,
    ValidationError,
)
from .field import FieldTower, int_digits
from .fqlinalg import (
    FlatBasis,
    intersect,
    kernel,
    rank,
    span_members,
    span_sum,
    flatten,
    unflatten,
)
from .logging_utils import get_logger, performance_timer
from .models import Classification, LinearSetReport, get_cached_config

logger = get_logger(__name__)

STRATEGIES = ('auto', 'vectors', 'points')


@dataclass(frozen=True)
class SubspaceU:
    """An F_q-subspace of F_{q^m}^k, compared by canonical form."""

    tower: FieldTower
    k: int
    flat: FlatBasis

    @classmethod
    def from_vectors(cls, tower: FieldTower, k: int, vectors: Any,
                     allow_dependent: bool = False) -> 'SubspaceU':
        """
        Build U from vectors of F_{q^m}^k given as integer encodings.

        Raises:
            DependentBasisError: vectors are F_q-dependent and allow_dependent is false
        """
        V = np.asarray(vectors, dtype=np.int64).reshape(-1, k)
        if V.size and (V.min() < 0 or V.max() >= tower.order):
            raise ValidationError("vector entries must be encodings in [0, q^m)",
                                  order=tower.order)
        dim = tower.m * k
        if V.shape[0] == 0:
            return cls(tower, k, FlatBasis.zero(tower.small, dim))
        flat = FlatBasis.from_matrix(flatten(tower, V), dim)
        if not allow_dependent and flat.rank != V.shape[0]:
            raise DependentBasisError("basis vectors are F_q-dependent",
                                      given=int(V.shape[0]), rank=flat.rank)
        return cls(tower, k, flat)

    @classmethod
    def from_flat(cls, tower: FieldTower, k: int, flat: FlatBasis) -> 'SubspaceU':
        if flat.dim != tower.m * k:
            raise AmbientMismatchError("flat basis has the wrong ambient dimension",
                                       dim=flat.dim, expected=tower.m * k)
        return cls(tower, k, flat)

    @classmethod
    def whole(cls, tower: FieldTower, k: int) -> 'SubspaceU':
        dim = tower.m * k
        return cls(tower, k, FlatBasis.from_matrix(tower.small.Identity(dim), dim))

    @property
    def rank(self) -> int:
        return self.flat.rank

    @property
    def dim(self) -> int:
        return self.tower.m * self.k

    def basis(self) -> np.ndarray:
        """Canonical F_q-basis as encodings, shape (rank, k)."""
        if self.rank == 0:
            return np.zeros((0, self.k), dtype=np.int64)
        return unflatten(self.tower, self.flat.matrix(), self.k)

    def members(self) -> np.ndarray:
        """All q^n vectors of U as encodings, zero vector first."""
        return unflatten(self.tower, span_members(self.flat), self.k)

    def contains(self, vectors: Any) -> np.ndarray:
        V = np.asarray(vectors, dtype=np.int64).reshape(-1, self.k)
        return self.flat.contains(flatten(self.tower, V))

    def same_ambient(self, other: 'SubspaceU') -> None:
        if self.tower != other.tower or self.k != other.k:
            raise AmbientMismatchError("subspaces live in different ambient spaces")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'field': self.tower.to_dict(),
            'k': self.k,
            'basis': [[int(v) for v in row] for row in self.basis()],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SubspaceU':
        from .field import FieldTower as _FieldTower

        if not isinstance(data, dict) or 'field' not in data or 'k' not in data:
            raise ValidationError("subspace document needs 'field', 'k' and 'basis'")
        tower = _FieldTower.from_dict(data['field'])
        k = int(data['k'])
        if k < 1:
            raise ValidationError("k must be positive", k=k)
        basis = data.get('basis', [])
        if any(len(row) != k for row in basis):
            raise ValidationError("every basis vector must have k entries", k=k)
        return cls.from_vectors(tower, k, np.array(basis, dtype=np.int64).reshape(-1, k))


def normalize(tower: FieldTower, vectors: Any) -> np.ndarray:
    """Scale each nonzero vector so that its first nonzero entry is 1."""
    V = np.asarray(vectors, dtype=np.int64)
    V = V.reshape(-1, V.shape[-1])
    nonzero = V != 0
    if not np.all(nonzero.any(axis=1)):
        raise ValueError("the zero vector does not define a projective point")
    lead = V[np.arange(V.shape[0]), np.argmax(nonzero, axis=1)]
    scaled = tower.elements(V) / tower.elements(lead)[:, None]
    return tower.ints(scaled)


def point_count(Q: int, k: int) -> int:
    """Number of points of PG(k-1, Q)."""
    return (Q ** k - 1) // (Q - 1)


def iter_points(tower: FieldTower, k: int, chunk: int) -> Iterator[np.ndarray]:
    """
    Normalized representatives of all points of PG(k-1, q^m), in order:
    leading position ascending, then the tail lexicographically.
    """
    Q = tower.order
    for lead in range(k):
        width = k - 1 - lead
        total = Q ** width
        for start in range(0, total, chunk):
            idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
            block = np.zeros((idx.size, k), dtype=np.int64)
            block[:, lead] = 1
            if width:
                block[:, lead + 1:] = int_digits(idx, Q, width)[:, ::-1]
            yield block


def all_points(tower: FieldTower, k: int) -> np.ndarray:
    return np.vstack(list(iter_points(tower, k, 1 << 16)))


def log_q(values: np.ndarray, q: int, limit: int) -> np.ndarray:
    powers = q ** np.arange(limit + 1, dtype=np.int64)
    exps = np.searchsorted(powers, values)
    if np.any(exps > limit) or np.any(powers[np.minimum(exps, limit)] != values):
        raise ValueError("count is not a power of q")
    return exps


def fq_span_flat(tower: FieldTower, k: int, W: Any) -> FlatBasis:
    """F_q-flattening of the F_{q^m}-span of the rows of W."""
    W = np.asarray(W, dtype=np.int64).reshape(-1, k)
    dim = tower.m * k
    if W.shape[0] == 0:
        return FlatBasis.zero(tower.small, dim)
    x = tower.elements(tower.generator)
    rows = []
    scalar = tower.elements(1)
    for _ in range(tower.m):
        rows.append(tower.ints(tower.elements(W) * scalar))
        scalar = scalar * x
    return FlatBasis.from_matrix(flatten(tower, np.vstack(rows)), dim)


def big_rank(tower: FieldTower, vectors: Any) -> int:
    """F_{q^m}-rank of a set of vectors."""
    V = np.asarray(vectors, dtype=np.int64)
    if V.size == 0:
        return 0
    return rank(tower.elements(V.reshape(V.shape[0], -1)))


def point_weight(U: SubspaceU, point: Sequence[int]) -> int:
    """
    dim_{F_q}{lambda : lambda * point in U}.

    lambda runs over the power basis of F_{q^m}; the weight is m minus the
    rank of the system that tests each lambda * point against the annihilator
    of U.
    """
    P = np.asarray(point, dtype=np.int64)
    if P.shape != (U.k,):
        raise AmbientMismatchError("point has the wrong length", length=int(P.size), k=U.k)
    if not np.any(P):
        raise ValueError("the zero vector does not define a projective point")
    tower = U.tower
    x = tower.elements(tower.generator)
    scalar = tower.elements(1)
    multiples = []
    for _ in range(tower.m):
        multiples.append(tower.ints(tower.elements(P) * scalar))
        scalar = scalar * x
    system = flatten(tower, np.vstack(multiples))
    annihilator = kernel(U.flat.matrix())
    return tower.m - rank(system @ annihilator.T)


def subspace_weight(U: SubspaceU, W: Any) -> int:
    """
    dim_{F_q}(U ∩ W) for the F_{q^m}-subspace spanned by the rows of W.

    Raises:
        DependentBasisError: the rows of W are F_{q^m}-dependent
    """
    W = np.asarray(W, dtype=np.int64).reshape(-1, U.k) if np.size(W) else np.zeros((0, U.k))
    if big_rank(U.tower, W) != W.shape[0]:
        raise DependentBasisError("subspace basis is F_{q^m}-dependent")
    flat = fq_span_flat(U.tower, U.k, W)
    return flat.rank + U.rank - span_sum(flat, U.flat).rank


def intersect_subspace(U: SubspaceU, W: Any) -> SubspaceU:
    """U ∩ W as a SubspaceU."""
    return SubspaceU.from_flat(U.tower, U.k, intersect(U.flat, fq_span_flat(U.tower, U.k, W)))


def _budget() -> int:
    return get_cached_config().iteration_budget


def _weights_by_vectors(U: SubspaceU) -> Tuple[np.ndarray, np.ndarray]:
    members = U.members()[1:]
    normalized = normalize(U.tower, members)
    points, counts = np.unique(normalized, axis=0, return_counts=True)
    return points, log_q(counts + 1, U.tower.q, U.tower.m)


def _weights_by_points(U: SubspaceU) -> Tuple[np.ndarray, np.ndarray]:
    tower = U.tower
    scalars = tower.elements(np.arange(1, tower.order))
    chunk = max(1, get_cached_config().chunk_size * 16 // max(1, tower.order))
    found_points: List[np.ndarray] = []
    found_weights: List[np.ndarray] = []
    for block in iter_points(tower, U.k, chunk):
        multiples = tower.elements(block)[:, None, :] * scalars[None, :, None]
        flat = flatten(tower, tower.ints(multiples))
        member = U.flat.contains(flat.reshape(-1, U.dim)).reshape(block.shape[0], -1)
        counts = member.sum(axis=1)
        hit = counts > 0
        if np.any(hit):
            found_points.append(block[hit])
            found_weights.append(log_q(counts[hit] + 1, tower.q, tower.m))
    if not found_points:
        return np.zeros((0, U.k), dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.vstack(found_points), np.concatenate(found_weights)


def choose_strategy(U: SubspaceU, strategy: str = 'auto') -> str:
    """Pick the enumeration strategy and enforce the iteration budget."""
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}", allowed=list(STRATEGIES))
    vectors = U.tower.q ** U.rank
    points = point_count(U.tower.order, U.k)
    budget = _budget()
    if vectors > budget and points > budget:
        raise SizeBudgetExceededError("both q^n and the point count exceed the iteration budget",
                                      vectors=vectors, points=points, budget=budget)
    if strategy == 'auto':
        return 'vectors' if vectors < points else 'points'
    chosen_cost = vectors if strategy == 'vectors' else points
    if chosen_cost > budget:
        raise SizeBudgetExceededError(f"{strategy} strategy exceeds the iteration budget",
                                      cost=chosen_cost, budget=budget)
    return strategy


def point_weights(U: SubspaceU, strategy: str = 'auto') -> Tuple[np.ndarray, np.ndarray]:
    """
    Points of L_U (normalized, sorted) and their weights.
    """
    if U.rank == 0:
        return np.zeros((0, U.k), dtype=np.int64), np.zeros(0, dtype=np.int64)
    chosen = choose_strategy(U, strategy)
    if chosen == 'vectors':
        points, weights = _weights_by_vectors(U)
    else:
        points, weights = _weights_by_points(U)
    order = np.lexsort(points.T[::-1])
    return points[order], weights[order]


def classify(points: np.ndarray, weights: np.ndarray) -> Classification:
    heavy = np.nonzero(weights >= 2)[0]
    if heavy.size == 0:
        return Classification('Scattered')
    if heavy.size == 1:
        idx = int(heavy[0])
        return Classification('Club', int(weights[idx]), tuple(int(v) for v in points[idx]))
    return Classification('Other')


def hyperplane_weights(U: SubspaceU) -> Tuple[np.ndarray, np.ndarray]:
    """
    Normals of all hyperplanes (normalized order) and dim_{F_q}(U ∩ H) for each.

    Raises:
        SizeBudgetExceededError: q^n times the hyperplane count exceeds the budget
    """
    tower = U.tower
    hyperplanes = point_count(tower.order, U.k)
    cost = tower.q ** U.rank * hyperplanes
    if cost > _budget():
        raise SizeBudgetExceededError("hyperplane scan exceeds the iteration budget",
                                      cost=cost, budget=_budget())
    members = tower.elements(U.members())
    chunk = max(1, (1 << 22) // members.shape[0])
    normals: List[np.ndarray] = []
    weights: List[np.ndarray] = []
    for block in iter_points(tower, U.k, chunk):
        products = members @ tower.elements(block).T
        zeros = (tower.ints(products) == 0).sum(axis=0)
        normals.append(block)
        weights.append(log_q(zeros, tower.q, U.rank))
    return np.vstack(normals), np.concatenate(weights)


def hyperplane_spectrum(U: SubspaceU) -> Dict[int, int]:
    """Multiset of hyperplane weights as {weight: count}."""
    _, weights = hyperplane_weights(U)
    return {int(w): int(c) for w, c in sorted(Counter(weights.tolist()).items())}


@performance_timer("analyze")
def analyze(U: SubspaceU, with_hyperplanes: bool = False,
            strategy: str = 'auto') -> LinearSetReport:
    """Full report of L_U: census, size, classification and optional spectrum."""
    points, weights = point_weights(U, strategy)
    census = {int(w): int(c) for w, c in sorted(Counter(weights.tolist()).items())}
    report = LinearSetReport(
        rank=U.rank,
        size=int(points.shape[0]),
        census=census,
        classification=classify(points, weights),
        hyperplane_spectrum=hyperplane_spectrum(U) if with_hyperplanes else None,
    )
    logger.debug("Linear set analysed", rank=report.rank, size=report.size,
                 classification=report.classification.label)
    return report


def trace_form(tower: FieldTower, X: Any, Y: Any) -> Any:
    """GF(q) matrix of Tr_{q^m/q}(x_i . y_j) for rows x_i of X and y_j of Y."""
    products = tower.elements(X) @ tower.elements(Y).T
    return tower.to_small(tower.rel_trace(tower.ints(products), 1))


def _unit_vectors(tower: FieldTower, k: int) -> np.ndarray:
    return unflatten(tower, tower.small.Identity(tower.m * k), k)


def dual_perp(U: SubspaceU) -> SubspaceU:
    """U^⊥' = {v : Tr(u . v) = 0 for all u in U}, of dimension mk - n."""
    tower = U.tower
    if U.rank == 0:
        return SubspaceU.whole(tower, U.k)
    T = trace_form(tower, U.basis(), _unit_vectors(tower, U.k))
    return SubspaceU.from_flat(tower, U.k, FlatBasis.from_matrix(kernel(T), U.dim))


def restricted_dual(U: SubspaceU, W: Any) -> SubspaceU:
    """
    Orthogonal complement of U inside the F_{q^m}-subspace W with respect to
    the trace form restricted to W.

    Raises:
        DimensionMismatchError: U is not contained in W
        DegenerateRestrictionError: the form restricted to W is degenerate
    """
    tower = U.tower
    W = np.asarray(W, dtype=np.int64).reshape(-1, U.k)
    s = W.shape[0]
    if big_rank(tower, W) != s:
        raise DependentBasisError("subspace basis is F_{q^m}-dependent")
    W_flat = fq_span_flat(tower, U.k, W)
    if not U.flat.is_subspace_of(W_flat):
        raise DimensionMismatchError("U is not contained in W")
    gram = tower.elements(W) @ tower.elements(W).T
    if rank(gram) != s:
        raise DegenerateRestrictionError("the trace form is degenerate on W")
    result = intersect(dual_perp(U).flat, W_flat)
    if result.rank != tower.m * s - U.rank:
        raise DegenerateRestrictionError("restricted dual has unexpected dimension",
                                         dim=result.rank, expected=tower.m * s - U.rank)
    return SubspaceU.from_flat(tower, U.k, result)


def spans_full_space(U: SubspaceU) -> bool:
    """True iff the F_{q^m}-span of U is F_{q^m}^k."""
    return big_rank(U.tower, U.basis()) == U.k


def verify_weight_identities(report: LinearSetReport, q: int, n: int) -> bool:
    """Check |L_U| = sum N_i and sum N_i (q^i - 1)/(q - 1) = (q^n - 1)/(q - 1)."""
    size_ok = report.size == sum(report.census.values())
    vectors = sum(count * (q ** w - 1) // (q - 1) for w, count in report.census.items())
    vectors_ok = vectors == (q ** n - 1) // (q - 1)
    if not (size_ok and vectors_ok):
        logger.warning("Weight identities violated", size=report.size,
                       census=report.census, rank=n, weighted=vectors,
                       expected=(q ** n - 1) // (q - 1))
    return size_ok and vectors_ok


def embed_coordinates(U: SubspaceU, k: int, positions: Sequence[int]) -> SubspaceU:
    """Place U (in F_{q^m}^{k'}) into the given coordinates of F_{q^m}^k."""
    positions = list(positions)
    if len(positions) != U.k or len(set(positions)) != U.k or max(positions, default=0) >= k:
        raise DimensionMismatchError("positions must be distinct coordinates, one per entry",
                                     positions=positions, k=k)
    basis = U.basis()
    out = np.zeros((basis.shape[0], k), dtype=np.int64)
    out[:, positions] = basis
    return SubspaceU.from_vectors(U.tower, k, out)


def direct_sum(U1: SubspaceU, U2: SubspaceU) -> SubspaceU:
    """
    U1 + U2 when their F_{q^m}-spans intersect trivially.

    Raises:
        DimensionMismatchError: the spans overlap
    """
    U1.same_ambient(U2)
    b1, b2 = U1.basis(), U2.basis()
    r1, r2 = big_rank(U1.tower, b1), big_rank(U1.tower, b2)
    if big_rank(U1.tower, np.vstack([b1, b2])) != r1 + r2:
        raise DimensionMismatchError("F_{q^m}-spans of the summands are not independent")
    return SubspaceU.from_flat(U1.tower, U1.k, span_sum(U1.flat, U2.flat))


def sub_club(U: SubspaceU, report: Optional[LinearSetReport] = None) -> SubspaceU:
    """
    (i-1)-club of rank n-1 inside an i-club: drop one vector of a basis of
    U ∩ <P> extended to a basis of U.
    """
    report = report or analyze(U)
    cls = report.classification
    if cls.kind != 'Club' or cls.special_point is None:
        raise ParameterViolationError("sub_club needs an i-club", got=cls.label)
    head = intersect(U.flat, fq_span_flat(U.tower, U.k, np.array([cls.special_point])))
    rows = [list(r) for r in head.rows]
    current = FlatBasis.from_matrix(head.matrix(), U.dim)
    extension: List[List[int]] = []
    for row in U.flat.rows:
        candidate = span_sum(current, FlatBasis.from_matrix(U.tower.small([list(row)]), U.dim))
        if candidate.rank > current.rank:
            extension.append(list(row))
            current = candidate
    kept = rows[1:] + extension
    if not kept:
        return SubspaceU.from_flat(U.tower, U.k, FlatBasis.zero(U.tower.small, U.dim))
    return SubspaceU.from_flat(U.tower, U.k,
                               FlatBasis.from_matrix(U.tower.small(kept), U.dim))
