"""
Rank-metric codes in the vector framework.

A code is an F_{q^m}-subspace of F_{q^m}^N given by a k×N generator matrix.
Its rank weights connect to the geometry of its system U (the F_q-span of
the columns of G) through w(xG) = dim U - dim(U ∩ x^⊥). This module
computes weight distributions both ways, dual codes, the MacWilliams
transform, and the club bounds built on top of it.
"""

import concurrent.futures
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .error_handling import (
    DegenerateSystemError,
    DependentBasisError,
    NegativeCoefficientError,
    NonIntegerSolutionError,
    ParameterViolationError,
    SizeBudgetExceededError,
    ValidationError,
)
from .field import FieldTower, int_digits, make_tower
from .fqlinalg import batch_rank, kernel, rank
from .linset import SubspaceU, analyze, dual_perp, hyperplane_weights, spans_full_space
from .logging_utils import get_logger, performance_timer
from .models import CodeClassification, WeightDistribution, get_cached_config

logger = get_logger(__name__)

METHODS = ('enumerate', 'geometric')


@dataclass(frozen=True)
class RankMetricCode:
    """[n, k] code over F_{q^m}/F_q with generator rows stored as encodings."""

    tower: FieldTower
    n: int
    k: int
    G: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_generator(cls, tower: FieldTower, G: Any) -> 'RankMetricCode':
        """
        Raises:
            DependentBasisError: the rows of G are F_{q^m}-dependent
        """
        M = np.asarray(G, dtype=np.int64)
        if M.ndim != 2:
            raise ValidationError("generator matrix must be two-dimensional")
        if M.size and (M.min() < 0 or M.max() >= tower.order):
            raise ValidationError("generator entries must be encodings in [0, q^m)")
        if M.shape[0] and rank(tower.elements(M)) != M.shape[0]:
            raise DependentBasisError("generator rows are F_{q^m}-dependent", rows=int(M.shape[0]))
        rows = tuple(tuple(int(v) for v in row) for row in M)
        return cls(tower, int(M.shape[1]), int(M.shape[0]), rows)

    @classmethod
    def from_system(cls, U: SubspaceU) -> 'RankMetricCode':
        """
        Code whose generator columns are the canonical F_q-basis of U.

        Raises:
            DegenerateSystemError: U does not span F_{q^m}^k
        """
        if not spans_full_space(U):
            raise DegenerateSystemError("the F_{q^m}-span of U is not the whole space",
                                        rank=U.rank, k=U.k)
        return cls.from_generator(U.tower, U.basis().T)

    def generator(self) -> Any:
        if not self.G:
            return self.tower.big.Zeros((0, self.n))
        return self.tower.elements(np.array(self.G, dtype=np.int64))

    def system(self) -> SubspaceU:
        """F_q-span of the columns of G."""
        columns = np.array(self.G, dtype=np.int64).reshape(self.k, self.n).T
        return SubspaceU.from_vectors(self.tower, self.k, columns, allow_dependent=True)

    @property
    def size(self) -> int:
        return self.tower.order ** self.k

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'field': self.tower.to_dict(),
            'n': self.n,
            'k': self.k,
            'G': [list(row) for row in self.G],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RankMetricCode':
        if not isinstance(data, dict) or 'field' not in data or 'G' not in data:
            raise ValidationError("code document needs 'field' and 'G'")
        tower = FieldTower.from_dict(data['field'])
        rows = data['G']
        width = len(rows[0]) if rows else int(data.get('n', 0))
        if any(len(row) != width for row in rows):
            raise ValidationError("generator rows must have equal length")
        code = cls.from_generator(tower, np.array(rows, dtype=np.int64).reshape(len(rows), width))
        for key in ('n', 'k'):
            if key in data and int(data[key]) != getattr(code, key):
                raise ValidationError(f"declared {key} does not match the generator",
                                      declared=int(data[key]), actual=getattr(code, key))
        return code


def codeword_weights(tower: FieldTower, codewords: Any) -> np.ndarray:
    """Rank weights of a batch of codewords, shape (B, n)."""
    C = np.asarray(codewords, dtype=np.int64)
    C = C.reshape(-1, C.shape[-1])
    if C.shape[1] == 0:
        return np.zeros(C.shape[0], dtype=np.int64)
    coords = tower.small(tower.coord_table[C])
    return batch_rank(coords)


def codeword_weight(tower: FieldTower, codeword: Sequence[int]) -> int:
    """dim_{F_q} of the span of the coordinates of one codeword."""
    return int(codeword_weights(tower, np.asarray(codeword, dtype=np.int64)[None, :])[0])


def _weights_in_range(p: int, e: int, m: int, G: List[List[int]],
                      start: int, stop: int) -> List[int]:
    tower = make_tower(p, e, m)
    k = len(G)
    M = tower.elements(np.array(G, dtype=np.int64))
    messages = int_digits(np.arange(start, stop, dtype=np.int64), tower.order, k)
    codewords = tower.ints(tower.elements(messages) @ M)
    weights = codeword_weights(tower, codewords)
    return np.bincount(weights, minlength=m + 1)[:m + 1].tolist()


def _enumerate_distribution(code: RankMetricCode) -> List[int]:
    tower = code.tower
    total = code.size
    config = get_cached_config()
    if total > config.iteration_budget:
        raise SizeBudgetExceededError("codeword enumeration exceeds the iteration budget",
                                      codewords=total, budget=config.iteration_budget)
    counts = [0] * (tower.m + 1)
    if code.k == 0:
        counts[0] = 1
        return counts
    G = [list(row) for row in code.G]
    step = max(1, config.chunk_size * 8 // max(1, code.n))
    ranges = [(s, min(total, s + step)) for s in range(0, total, step)]
    args = (tower.p, tower.e, tower.m, G)
    if config.jobs > 1 and len(ranges) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as executor:
            futures = [executor.submit(_weights_in_range, *args, s, t) for s, t in ranges]
            partials = [f.result() for f in futures]
    else:
        partials = [_weights_in_range(*args, s, t) for s, t in ranges]
    for part in partials:
        counts = [a + b for a, b in zip(counts, part)]
    return counts


def _geometric_distribution(code: RankMetricCode) -> List[int]:
    m = code.tower.m
    counts = [0] * (m + 1)
    counts[0] = 1
    if code.k == 0:
        return counts
    U = code.system()
    _, weights = hyperplane_weights(U)
    for w, c in zip(*np.unique(weights, return_counts=True)):
        counts[U.rank - int(w)] += int(c) * (code.tower.order - 1)
    return counts


@performance_timer("weight_distribution")
def weight_distribution(code: RankMetricCode, method: str = 'enumerate') -> WeightDistribution:
    """
    Rank-weight distribution A_0..A_m.

    `enumerate` walks every message x in F_{q^m}^k; `geometric` reads the
    counts off the hyperplane weights of the system.
    """
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}", allowed=list(METHODS))
    if method == 'enumerate':
        counts = _enumerate_distribution(code)
    else:
        counts = _geometric_distribution(code)
    return WeightDistribution(counts=counts, method=method)


def min_distance(code: RankMetricCode, distribution: Optional[WeightDistribution] = None) -> int:
    distribution = distribution or weight_distribution(code)
    return distribution.min_distance


def singleton_holds(m: int, n: int, k: int, d: int) -> Tuple[bool, bool]:
    """(bound satisfied, met with equality) for mk <= max(m,n)(min(m,n) - d + 1)."""
    lhs = m * k
    rhs = max(m, n) * (min(m, n) - d + 1)
    return lhs <= rhs, lhs == rhs


def is_mrd(code: RankMetricCode, distribution: Optional[WeightDistribution] = None) -> bool:
    if code.k == 0:
        return False
    d = min_distance(code, distribution)
    return singleton_holds(code.tower.m, code.n, code.k, d)[1]


def dual_code(code: RankMetricCode) -> RankMetricCode:
    """Right kernel of G as an [n, n-k] code."""
    if code.k == 0:
        return RankMetricCode.from_generator(code.tower, np.eye(code.n, dtype=np.int64))
    K = kernel(code.generator())
    return RankMetricCode.from_generator(code.tower, code.tower.ints(K).reshape(-1, code.n))


def qbinomial(s: int, t: int, q: int) -> int:
    """Gaussian binomial [s choose t]_q."""
    if s < 0 or t < 0 or t > s:
        return 0
    if t == 0:
        return 1
    num, den = 1, 1
    for i in range(t):
        num *= q ** (s - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def _transform(A: Sequence[int], N: int, k: int, m: int, q: int) -> List[Fraction]:
    A = list(A) + [0] * (m + 1 - len(A))
    size = Fraction(q) ** (m * k)
    B: List[Fraction] = []
    for nu in range(m + 1):
        lhs = sum(Fraction(A[i]) * qbinomial(m - i, nu, q) for i in range(m - nu + 1))
        value = lhs * Fraction(q) ** (N * nu) / size
        value -= sum(B[j] * qbinomial(m - j, nu - j, q) for j in range(nu))
        B.append(value)
    return B


def macwilliams_transform(A: Sequence[int], N: int, k: int, m: int, q: int) -> WeightDistribution:
    """
    Rank distribution of the dual of an [N, k] code over F_{q^m} with
    distribution A, from the MacWilliams identities solved top-down.

    Raises:
        NonIntegerSolutionError: some B_j is not an integer
        NegativeCoefficientError: some B_j is negative
    """
    if len(A) > m + 1 or any(a < 0 for a in A):
        raise ValidationError("distribution must have at most m+1 nonnegative entries", m=m)
    B = _transform(A, N, k, m, q)
    for j, value in enumerate(B):
        if value.denominator != 1:
            raise NonIntegerSolutionError("transform produced a non-integer coefficient",
                                          index=j, value=str(value))
        if value < 0:
            raise NegativeCoefficientError("transform produced a negative coefficient",
                                           index=j, value=int(value))
    return WeightDistribution(counts=[int(b) for b in B], method='macwilliams')


def _club_counts(q: int, m: int, k: int, i: int, n: int) -> List[int]:
    Q = q ** m
    counts = [0] * (m + 1)
    counts[0] = 1
    if i == 1:
        counts[m - 1] = (Q - 1) * ((q ** n - 1) // (q - 1))
    else:
        counts[m - i] = Q - 1
        counts[m - 1] = (Q - 1) * sum(q ** j for j in range(i, n))
    counts[m] = Q ** k - sum(counts)
    return counts


def club_code_prediction(q: int, m: int, k: int, i: int,
                         n: int) -> Tuple[Dict[str, int], WeightDistribution]:
    """
    Parameters [km-n, k, m-i] and the distribution of the code of U^⊥' for
    an i-club U of rank n: A_{m-i} = q^m - 1, A_{m-1} = (q^m - 1) N_1(U).
    """
    if not 1 <= i < m:
        raise ParameterViolationError("club codes need 1 <= i < m", i=i, m=m)
    if not i <= n <= (k - 1) * m:
        raise ParameterViolationError("rank must satisfy i <= n <= (k-1)m", n=n, k=k, m=m)
    counts = _club_counts(q, m, k, i, n)
    if counts[m] < 0:
        raise ParameterViolationError("predicted A_m is negative", A_m=counts[m])
    params = {'n': k * m - n, 'k': k, 'd': m - i}
    return params, WeightDistribution(counts=counts, method='predicted')


def shifted_a_m1(q: int, m: int, i: int, n: int) -> int:
    """(q^m - 1)(q^n + ... + q^i): the A_{m-1} count with the exponent range shifted by one."""
    return (q ** m - 1) * sum(q ** j for j in range(i, n + 1))


def b2_value(q: int, m: int, k: int, i: int, n: int) -> Fraction:
    """B_2 of the dual of an i-club's code: q^{km-2n}((q^m-1)[i,2] + [m,2]) - [m,2]."""
    head = Fraction(q) ** (k * m - 2 * n)
    return head * ((q ** m - 1) * qbinomial(i, 2, q) + qbinomial(m, 2, q)) - qbinomial(m, 2, q)


def b2_admissibility(q: int, m: int, k: int, i: int, n: int) -> bool:
    """q^{km-2n}(q^i-1)(q^{i-1}-1) + (q^{km-2n}-1)(q^{m-1}-1) >= 0."""
    if i < 2 or k < 2:
        raise ParameterViolationError("admissibility needs i >= 2 and k >= 2", i=i, k=k)
    t = Fraction(q) ** (k * m - 2 * n)
    return t * (q ** i - 1) * (q ** (i - 1) - 1) + (t - 1) * (q ** (m - 1) - 1) >= 0


def club_rank_bound(q: int, m: int, k: int, i: int) -> Tuple[int, str]:
    """Upper bound on the rank of an i-club in PG(k-1, q^m) and the case that applies."""
    if not 2 <= i <= m or k < 2:
        raise ParameterViolationError("bound needs 2 <= i <= m and k >= 2", i=i, m=m, k=k)
    if i == m and k == 2:
        return m + 1, 'i=m, k=2'
    if 2 * i <= m or (k == 2 and i <= m - 1):
        return (m * k) // 2, 'i<=m/2 or k=2, i<=m-1'
    return (m * (k - 1) + 2 * i) // 2, 'm/2<=i<=m, k>2'


def singleton_club_bound(m: int, k: int, i: int) -> Fraction:
    """kmi/(i+1)."""
    if not 1 <= i <= m - 1:
        raise ParameterViolationError("Singleton club bound needs 1 <= i <= m-1", i=i, m=m)
    return Fraction(k * m * i, i + 1)


def genbound(m: int, k: int) -> int:
    if k < 2:
        raise ParameterViolationError("k must be at least 2", k=k)
    return (k - 1) * m


def k2_club_bound(m: int, i: int) -> int:
    if not 2 <= i <= m:
        raise ParameterViolationError("need 2 <= i <= m", i=i, m=m)
    return m if i < m else m + 1


def m_club_bound(m: int, k: int) -> int:
    if k < 3:
        raise ParameterViolationError("m-club bound needs k >= 3", k=k)
    return (m * (k - 1)) // 2 + m


def three_weight_classify(code: RankMetricCode,
                          distribution: Optional[WeightDistribution] = None) -> CodeClassification:
    """
    Tag a code by its weight profile. A three-weight code with A_m, A_{m-1}
    nonzero and A_d = q^m - 1 is checked against the club its system is
    dual to.
    """
    distribution = distribution or weight_distribution(code)
    m = code.tower.m
    weights = distribution.nonzero_weights
    counts = distribution.counts
    if len(weights) == 2:
        return CodeClassification('TwoWeight', weights)
    if len(weights) != 3:
        return CodeClassification('General', weights)
    d = weights[0]
    club_profile = (counts[m] != 0 and counts[m - 1] != 0 and d <= m - 2
                    and counts[d] == code.tower.order - 1)
    if not club_profile:
        return CodeClassification('ThreeWeightOther', weights)
    i = m - d
    club = dual_perp(code.system())
    report = analyze(club)
    verified = (report.classification.kind == 'Club' and report.classification.index == i
                and club.rank == code.k * m - code.n)
    if not verified:
        logger.warning("Club-dual profile not confirmed by the dual system",
                       expected_index=i, measured=report.classification.label)
    return CodeClassification('DualOfClub', weights, club_index=i, verified=verified)
