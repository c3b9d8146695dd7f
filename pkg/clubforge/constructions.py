"""
Generators for clubs, scattered subspaces and three-weight systems.

Every generator returns a SubspaceU. `build` is the uniform entry point: it
resolves a ConstructionSpec, generates the subspace and measures it against
what the construction claims (classification, rank, size, hyperplane
spectrum, code weights).
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .error_handling import (
    ConditionViolatedError,
    DependentBasisError,
    DimensionMismatchError,
    GracefulErrorHandler,
    NotMaximumScatteredError,
    ParameterViolationError,
    UnsupportedShapeError,
    ValidationError,
)
from .field import FieldTower, make_tower
from .fqlinalg import FlatBasis, flatten
from .linset import (
    SubspaceU,
    analyze,
    direct_sum,
    dual_perp,
    embed_coordinates,
    hyperplane_spectrum,
    spans_full_space,
    subspace_weight,
    verify_weight_identities,
)
from .logging_utils import get_logger, performance_timer
from .models import ConstructionReport, get_cached_config
from .rmcode import RankMetricCode, weight_distribution
from .search import find_scattered

logger = get_logger(__name__)

CONSTRUCTIONS = (
    'TraceClub',
    'SubfieldTraceClub',
    'Cone',
    'LiftOdd',
    'LiftEven',
    'HalfClubK4',
    'MaxScattered',
    'PseudoregulusLines',
    'TwistedGabidulin',
    'RedeiScattered',
    'ComplementaryWeights',
)

S_MODES = ('TraceKernelExtension', 'ExplicitBasis', 'SeededRandom')


def canonical_name(name: str) -> str:
    """Accept 'trace-club', 'trace_club' or 'TraceClub'."""
    key = name.replace('-', '').replace('_', '').lower()
    for candidate in CONSTRUCTIONS:
        if candidate.lower() == key:
            return candidate
    raise ValidationError(f"unknown construction {name!r}", allowed=list(CONSTRUCTIONS))


def power_basis(tower: FieldTower) -> np.ndarray:
    """Encodings of 1, x, ..., x^(m-1)."""
    return tower.uncoord_table[tower.q ** np.arange(tower.m, dtype=np.int64)]


def _neg(tower: FieldTower, a: Any) -> np.ndarray:
    return tower.ints(-tower.elements(a))


def _add(tower: FieldTower, a: Any, b: Any) -> np.ndarray:
    return tower.ints(tower.elements(a) + tower.elements(b))


def _mul(tower: FieldTower, a: Any, b: Any) -> np.ndarray:
    return tower.ints(tower.elements(a) * tower.elements(b))


def _graph(tower: FieldTower, k: int, xs: np.ndarray,
           maps: Sequence[Tuple[int, Callable[[np.ndarray], np.ndarray]]]) -> np.ndarray:
    """Rows x -> (f_1(x), ..., f_r(x)) placed at the given positions of a length-k vector."""
    rows = np.zeros((len(xs), k), dtype=np.int64)
    for position, f in maps:
        rows[:, position] = f(np.asarray(xs, dtype=np.int64))
    return rows


def _unit(k: int, j: int) -> Tuple[int, ...]:
    return tuple(1 if t == j else 0 for t in range(k))


@dataclass
class SubspaceChoiceS:
    """How to pick the F_q-subspace S of F_{q^m}."""

    mode: str = 'TraceKernelExtension'
    dim: int = 1
    data: Any = None

    @classmethod
    def from_param(cls, value: Any) -> 'SubspaceChoiceS':
        if isinstance(value, int):
            return cls(dim=value)
        if isinstance(value, dict):
            mode = value.get('mode', 'TraceKernelExtension')
            data = value.get('data')
            dim = value.get('dim', len(data) if mode == 'ExplicitBasis' and data else 1)
            return cls(mode=mode, dim=int(dim), data=data)
        raise ValidationError("S must be an integer dimension or a choice object")


def make_S(choice: SubspaceChoiceS, tower: FieldTower) -> SubspaceU:
    """
    An i-dimensional F_q-subspace S of F_{q^m}, held as a SubspaceU with k = 1.

    TraceKernelExtension anchors at 1 and extends by elements of the trace
    kernel in encoding order; SeededRandom draws from numpy's seeded
    generator.

    Raises:
        DependentBasisError: an explicit basis is dependent
    """
    if choice.mode not in S_MODES:
        raise ValidationError(f"unknown S mode {choice.mode!r}", allowed=list(S_MODES))
    i = choice.dim
    if not 1 <= i <= tower.m:
        raise ParameterViolationError("S needs 1 <= dim <= m", dim=i, m=tower.m)

    if choice.mode == 'ExplicitBasis':
        basis = np.asarray(choice.data, dtype=np.int64).reshape(-1, 1)
        if basis.shape[0] != i:
            raise DimensionMismatchError("explicit basis size differs from dim",
                                         given=int(basis.shape[0]), dim=i)
        return SubspaceU.from_vectors(tower, 1, basis)

    if choice.mode == 'TraceKernelExtension':
        everything = np.arange(1, tower.order, dtype=np.int64)
        traces = tower.rel_trace(everything, 1)
        candidates = np.concatenate([[1], everything[traces == 0], everything])
    else:
        rng = np.random.default_rng(choice.data if choice.data is not None else 0)
        candidates = rng.integers(1, tower.order, size=64 * tower.m)

    flat = FlatBasis.zero(tower.small, tower.m)
    for value in candidates:
        if flat.rank == i:
            break
        row = flatten(tower, np.array([[int(value)]]))
        if not flat.contains(row)[0]:
            flat = FlatBasis.from_matrix(tower.small(np.vstack([flat.matrix().view(np.ndarray),
                                                                row.view(np.ndarray)])), tower.m)
    if flat.rank != i:
        raise DependentBasisError("could not extend S to the requested dimension", dim=i)
    return SubspaceU.from_flat(tower, 1, flat)


def trace_club(tower: FieldTower) -> SubspaceU:
    """{(x, Tr_{q^m/q}(x))}: an (m-1)-club of rank m in PG(1, q^m)."""
    if tower.m < 2:
        raise ParameterViolationError("trace club needs m >= 2", m=tower.m)
    rows = _graph(tower, 2, power_basis(tower), [
        (0, lambda x: x),
        (1, lambda x: tower.rel_trace(x, 1)),
    ])
    return SubspaceU.from_vectors(tower, 2, rows)


def subfield_trace_club(tower: FieldTower, n0: int, s: int = 1) -> SubspaceU:
    """{(x, Tr_{q^m/q^n0}(x^{q^s}))}: an n0(l-1)-club of rank m, m = l*n0."""
    if n0 < 1 or tower.m % n0 != 0 or tower.m // n0 < 2:
        raise ParameterViolationError("need m = l*n0 with l >= 2", m=tower.m, n0=n0)
    if math.gcd(s, n0) != 1:
        raise ParameterViolationError("need gcd(s, n0) = 1", s=s, n0=n0)
    rows = _graph(tower, 2, power_basis(tower), [
        (0, lambda x: x),
        (1, lambda x: tower.rel_trace(tower.pow_q(x, s), n0)),
    ])
    return SubspaceU.from_vectors(tower, 2, rows)


def builtin_max_scattered(k: int, tower: FieldTower) -> SubspaceU:
    """
    Maximum scattered subspace of rank km/2 in F_{q^m}^k: direct sum of
    {(x, x^q)} blocks for even k, the subgeometry F_q^k when m = 2.

    Raises:
        UnsupportedShapeError: k odd and m > 2
    """
    if k < 1:
        raise ParameterViolationError("k must be positive", k=k)
    if k % 2 == 0:
        blocks = [
            _graph(tower, k, power_basis(tower), [
                (2 * b, lambda x: x),
                (2 * b + 1, lambda x: tower.pow_q(x, 1)),
            ])
            for b in range(k // 2)
        ]
        return SubspaceU.from_vectors(tower, k, np.vstack(blocks))
    if tower.m == 2:
        return SubspaceU.from_vectors(tower, k, np.eye(k, dtype=np.int64))
    raise UnsupportedShapeError("no built-in maximum scattered subspace for odd k and m > 2",
                                k=k, m=tower.m)


def max_scattered_part(k: int, tower: FieldTower, seed: int = 0) -> SubspaceU:
    """
    builtin_max_scattered, or a seeded search for a scattered subspace of
    rank km/2 when no built-in one exists.

    Raises:
        UnsupportedShapeError: km is odd
    """
    try:
        return builtin_max_scattered(k, tower)
    except UnsupportedShapeError:
        if (k * tower.m) % 2:
            raise
    logger.info("Searching for a maximum scattered part", k=k, m=tower.m, seed=seed)
    return find_scattered(tower, k, k * tower.m // 2, seed=seed)


def check_max_scattered(U: SubspaceU) -> None:
    """
    Raises:
        NotMaximumScatteredError: U is not scattered of rank km/2
    """
    if (U.k * U.tower.m) % 2 != 0 or U.rank != U.k * U.tower.m // 2:
        raise NotMaximumScatteredError("rank is not km/2", rank=U.rank,
                                       expected=U.k * U.tower.m / 2)
    kind = analyze(U).classification.kind
    if kind != 'Scattered':
        raise NotMaximumScatteredError("linear set is not scattered", classification=kind)


def _s_line(S: SubspaceU, k: int, position: int) -> SubspaceU:
    rows = np.zeros((S.rank, k), dtype=np.int64)
    rows[:, position] = S.basis()[:, 0]
    return SubspaceU.from_vectors(S.tower, k, rows)


def cone(scattered_part: SubspaceU, S: SubspaceU) -> SubspaceU:
    """
    U' ⊕ S e_{k-1} for a maximum scattered U' inside X_{k-1} = 0.

    Raises:
        DimensionMismatchError: U' leaves the hyperplane
        NotMaximumScatteredError: U' is not maximum scattered in it
    """
    k = scattered_part.k
    basis = scattered_part.basis()
    if basis.size and np.any(basis[:, k - 1] != 0):
        raise DimensionMismatchError("scattered part must lie in the hyperplane X_{k-1} = 0")
    inner = SubspaceU.from_vectors(scattered_part.tower, k - 1, basis[:, :k - 1])
    check_max_scattered(inner)
    return direct_sum(scattered_part, _s_line(S, k, k - 1))


def _lift_head(tower: FieldTower, k: int) -> np.ndarray:
    return _graph(tower, k, power_basis(tower), [
        (0, lambda x: x),
        (1, lambda x: tower.pow_q(x, 1)),
        (2, lambda x: tower.pow_q(x, 2)),
    ])


def lift_odd(tower: FieldTower, k: int, S: SubspaceU) -> SubspaceU:
    """
    {(x_1 + z, x_1^q, x_1^{q^2}, x_2, x_2^q, ..., x_s, x_s^q) : z in S} for
    k = 2s + 1: an i-club of rank m(k-1)/2 + i with special point e_0.
    """
    if k < 3 or k % 2 == 0:
        raise ParameterViolationError("lifting construction needs odd k >= 3", k=k)
    rows = [_lift_head(tower, k), _s_line(S, k, 0).basis()]
    for j in range(2, (k - 1) // 2 + 1):
        first = 3 + 2 * (j - 2)
        rows.append(_graph(tower, k, power_basis(tower), [
            (first, lambda x: x),
            (first + 1, lambda x: tower.pow_q(x, 1)),
        ]))
    return SubspaceU.from_vectors(tower, k, np.vstack(rows))


def lift_odd_dual_prediction(tower: FieldTower, k: int, S: SubspaceU) -> SubspaceU:
    """
    {(z, -y^q, -z^{q^2} + y^{q^2}, y_2, -y_2^q, ...) : z in S^⊥}, the expected
    trace dual of lift_odd(tower, k, S).
    """
    if k < 3 or k % 2 == 0:
        raise ParameterViolationError("lifting construction needs odd k >= 3", k=k)
    perp = dual_perp(S).basis()[:, 0]
    rows = [
        _graph(tower, k, perp, [
            (0, lambda z: z),
            (2, lambda z: _neg(tower, tower.pow_q(z, 2))),
        ]),
        _graph(tower, k, power_basis(tower), [
            (1, lambda y: _neg(tower, tower.pow_q(y, 1))),
            (2, lambda y: tower.pow_q(y, 2)),
        ]),
    ]
    for j in range(2, (k - 1) // 2 + 1):
        first = 3 + 2 * (j - 2)
        rows.append(_graph(tower, k, power_basis(tower), [
            (first, lambda y: y),
            (first + 1, lambda y: _neg(tower, tower.pow_q(y, 1))),
        ]))
    return SubspaceU.from_vectors(tower, k, np.vstack(rows))


def lift_even(tower: FieldTower, k: int, S: SubspaceU,
              scattered_part: Optional[SubspaceU] = None) -> SubspaceU:
    """
    {(x + z, x^q, x^{q^2})} ⊕ U_2 with U_2 maximum scattered in
    X_0 = X_1 = X_2 = 0, for k, m even and k >= 6.

    Without a scattered part one is built in or searched for (seed 0).
    """
    if k < 6 or k % 2 or tower.m % 2:
        raise ParameterViolationError("need k >= 6 and both k and m even", k=k, m=tower.m)
    if scattered_part is None:
        scattered_part = max_scattered_part(k - 3, tower)
    if scattered_part.k != k - 3 or scattered_part.tower != tower:
        raise DimensionMismatchError("scattered part must live in F_{q^m}^(k-3)",
                                     given=scattered_part.k, expected=k - 3)
    check_max_scattered(scattered_part)
    head = np.vstack([_lift_head(tower, k), _s_line(S, k, 0).basis()])
    U1 = SubspaceU.from_vectors(tower, k, head)
    return direct_sum(U1, embed_coordinates(scattered_part, k, range(3, k)))


def half_club_k4(tower: FieldTower) -> SubspaceU:
    """
    {(x, Tr_{q^m/q^{m/2}}(x^q), y, y^q)}: an (m/2)-club of rank 2m in PG(3, q^m).

    Untwisted, the first block is F_{q^{m/2}}-linear: q^{m/2} + 1 points of
    weight m/2.
    """
    m = tower.m
    if m < 4 or m % 2:
        raise ParameterViolationError("need m even and m >= 4", m=m)
    rows = np.vstack([
        _graph(tower, 4, power_basis(tower), [
            (0, lambda x: x),
            (1, lambda x: tower.rel_trace(tower.pow_q(x, 1), m // 2)),
        ]),
        _graph(tower, 4, power_basis(tower), [
            (2, lambda y: y),
            (3, lambda y: tower.pow_q(y, 1)),
        ]),
    ])
    return SubspaceU.from_vectors(tower, 4, rows)


def pseudoregulus_lines(tower: FieldTower, k: int = 3) -> SubspaceU:
    """Blocks (x, x^q, x^{q^2}): rank km/3, scattered with respect to lines."""
    if k < 3 or k % 3:
        raise ParameterViolationError("k must be a positive multiple of 3", k=k)
    blocks = [
        _graph(tower, k, power_basis(tower), [
            (3 * b, lambda x: x),
            (3 * b + 1, lambda x: tower.pow_q(x, 1)),
            (3 * b + 2, lambda x: tower.pow_q(x, 2)),
        ])
        for b in range(k // 3)
    ]
    return SubspaceU.from_vectors(tower, k, np.vstack(blocks))


def _field_sign(tower: FieldTower, exponent: int) -> int:
    return int(tower.ints((-tower.elements(1)) ** exponent))


def _check_gcd(s: int, m: int) -> None:
    if s < 1 or math.gcd(s, m) != 1:
        raise ParameterViolationError("need gcd(s, m) = 1", s=s, m=m)


def _pick_delta(tower: FieldTower, delta: Optional[int], forbidden: int, condition: str) -> int:
    if delta is None:
        for candidate in range(tower.order):
            if int(tower.rel_norm(candidate, 1)) != forbidden:
                return candidate
        raise ConditionViolatedError("no delta satisfies the norm condition", condition=condition)
    if int(tower.rel_norm(int(delta), 1)) == forbidden:
        raise ConditionViolatedError(f"delta violates {condition}", condition=condition,
                                     delta=int(delta))
    return int(delta)


def twisted_gabidulin(tower: FieldTower, s: int = 1,
                      delta: Optional[int] = None) -> Tuple[SubspaceU, int]:
    """{(x - delta x^{q^{3s}}, x^{q^s}, x^{q^{2s}})} with N(delta) != (-1)^m."""
    _check_gcd(s, tower.m)
    d = _pick_delta(tower, delta, _field_sign(tower, tower.m), 'N(delta) != (-1)^m')
    rows = _graph(tower, 3, power_basis(tower), [
        (0, lambda x: _add(tower, x, _neg(tower, _mul(tower, d, tower.pow_q(x, 3 * s))))),
        (1, lambda x: tower.pow_q(x, s)),
        (2, lambda x: tower.pow_q(x, 2 * s)),
    ])
    return SubspaceU.from_vectors(tower, 3, rows), d


def redei_scattered(tower: FieldTower, s: int = 1,
                    delta: Optional[int] = None) -> Tuple[SubspaceU, int]:
    """{(x - delta x^{q^{2s}}, x^{q^s}, a) : a in F_q} with N(delta) != 1."""
    _check_gcd(s, tower.m)
    d = _pick_delta(tower, delta, 1, 'N(delta) != 1')
    rows = _graph(tower, 3, power_basis(tower), [
        (0, lambda x: _add(tower, x, _neg(tower, _mul(tower, d, tower.pow_q(x, 2 * s))))),
        (1, lambda x: tower.pow_q(x, s)),
    ])
    rows = np.vstack([rows, [_unit(3, 2)]])
    return SubspaceU.from_vectors(tower, 3, rows), d


def _complementary_ok(tower: FieldTower, t: int, xi: int, mus: Sequence[int]) -> Optional[str]:
    norms = [int(tower.rel_norm(mu, 1, from_degree=t)) for mu in mus]
    if len(set(norms)) != len(norms):
        return 'N(mu_i) pairwise distinct'
    sign = _field_sign(tower, t)
    head = _neg(tower, tower.rel_norm(xi, t))
    for a, b in itertools.combinations(mus, 2):
        value = int(_mul(tower, head, _mul(tower, a, b)))
        if int(tower.rel_norm(value, 1, from_degree=t)) == sign:
            return 'N(-xi^(q^t+1) mu_i mu_j) != (-1)^t'
    return None


def complementary_weights(tower: FieldTower, k: int = 2, xi: Optional[int] = None,
                          mu: Optional[Sequence[int]] = None) -> Tuple[SubspaceU, int, List[int]]:
    """
    {(u_1 + xi mu_1 u_1^q, ..., u_k + xi mu_k u_k^q) : u_j in F_{q^t}}, m = 2t:
    exactly k points of weight t.

    Raises:
        ConditionViolatedError: supplied xi, mu break a norm condition
    """
    m, q = tower.m, tower.q
    if m % 2 or m < 4:
        raise ParameterViolationError("need m = 2t with t >= 2", m=m)
    if q < k + 1 or k < 2:
        raise ParameterViolationError("need k >= 2 and q >= k + 1", q=q, k=k)
    t = m // 2
    small = tower.subfield_elements(t)
    small_set = set(small)

    if xi is not None and int(xi) in small_set:
        raise ConditionViolatedError("xi must lie outside F_{q^t}", condition='xi not in F_{q^t}')
    if mu is not None:
        if len(mu) != k or any(int(v) not in small_set or int(v) == 0 for v in mu):
            raise ConditionViolatedError("mu must be k nonzero elements of F_{q^t}",
                                         condition='mu_i in F_{q^t}^*')

    xis = [int(xi)] if xi is not None else [v for v in range(tower.order) if v not in small_set]
    mu_choices = ([tuple(int(v) for v in mu)] if mu is not None
                  else itertools.product([v for v in small if v != 0], repeat=k))
    mu_choices = list(mu_choices)
    chosen: Optional[Tuple[int, Tuple[int, ...]]] = None
    failure = None
    for candidate_xi in xis:
        for candidate_mu in mu_choices:
            failure = _complementary_ok(tower, t, candidate_xi, candidate_mu)
            if failure is None:
                chosen = (candidate_xi, candidate_mu)
                break
        if chosen:
            break
    if chosen is None:
        raise ConditionViolatedError("no admissible xi, mu", condition=failure)

    x, mus = chosen
    small_flat = SubspaceU.from_vectors(tower, 1, np.array(small, dtype=np.int64)[:, None],
                                        allow_dependent=True)
    ubasis = small_flat.basis()[:, 0]
    blocks = []
    for j, mu_j in enumerate(mus):
        coeff = int(_mul(tower, x, mu_j))
        blocks.append(_graph(tower, k, ubasis, [
            (j, lambda u, c=coeff: _add(tower, u, _mul(tower, c, tower.pow_q(u, 1)))),
        ]))
    return SubspaceU.from_vectors(tower, k, np.vstack(blocks)), x, list(mus)


@dataclass
class ConstructionSpec:
    """A named construction and its parameters."""

    name: str
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.name = canonical_name(self.name)

    def tower(self) -> FieldTower:
        if 'm' not in self.params:
            raise ValidationError("construction parameters need m")
        return make_tower(int(self.params.get('p', 2)), int(self.params.get('e', 1)),
                          int(self.params['m']))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {'name': self.name, 'params': self.params}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ConstructionSpec':
        if not isinstance(data, dict) or 'name' not in data:
            raise ValidationError("construction spec needs a name")
        return cls(name=data['name'], params=dict(data.get('params', {})))


def _size(q: int, n: int, i: int) -> int:
    if i <= 1:
        return (q ** n - 1) // (q - 1)
    return sum(q ** j for j in range(i, n)) + 1


def _club_claim(q: int, n: int, i: int, special: Tuple[int, ...]) -> Dict[str, Any]:
    if i >= 2:
        return {'classification': f'Club({i})', 'rank': n, 'size': _size(q, n, i),
                'special_point': list(special)}
    return {'classification': 'Scattered', 'rank': n, 'size': _size(q, n, 1)}


def cone_spectrum_claim(m: int, k: int, i: int) -> List[int]:
    """Possible hyperplane weights of a cone club."""
    top = m * (k - 1) // 2
    if 2 * i >= m:
        low = m * (k - 2) // 2
    else:
        low = m * (k - 3) // 2
    return sorted(set(range(low, low + i + 2)) | {top})


def _scattered_part(params: Dict[str, Any], tower: FieldTower, k: int) -> Optional[SubspaceU]:
    raw = params.get('scattered_part')
    if raw is None:
        return None
    part = SubspaceU.from_dict(raw)
    if part.tower != tower:
        raise DimensionMismatchError("scattered part lives over a different field")
    if part.k != k:
        raise DimensionMismatchError("scattered part has the wrong ambient dimension",
                                     given=part.k, expected=k)
    return part


def _generate(spec: ConstructionSpec) -> Tuple[SubspaceU, Dict[str, Any], Dict[str, Any]]:
    """Subspace, resolved parameters and claims for a spec."""
    p = spec.params
    tower = spec.tower()
    q, m = tower.q, tower.m
    resolved: Dict[str, Any] = {'p': tower.p, 'e': tower.e, 'm': m}
    name = spec.name

    if name == 'TraceClub':
        U = trace_club(tower)
        return U, resolved, _club_claim(q, m, m - 1, (1, 0))

    if name == 'SubfieldTraceClub':
        n0, s = int(p.get('n0', 1)), int(p.get('s', 1))
        resolved.update(n0=n0, s=s)
        U = subfield_trace_club(tower, n0, s)
        return U, resolved, _club_claim(q, m, m - n0, (1, 0))

    if name == 'MaxScattered':
        k = int(p.get('k', 2))
        resolved['k'] = k
        U = builtin_max_scattered(k, tower)
        return U, resolved, {'classification': 'Scattered', 'rank': U.rank,
                             'size': _size(q, U.rank, 1)}

    if name in ('Cone', 'LiftOdd', 'LiftEven'):
        k = int(p.get('k', 3))
        S = make_S(SubspaceChoiceS.from_param(p.get('S', p.get('i', 1))), tower)
        i = S.rank
        resolved.update(k=k, i=i, S=[int(v) for v in S.basis()[:, 0]])
        if name == 'Cone':
            part = _scattered_part(p, tower, k)
            if part is None:
                part = embed_coordinates(max_scattered_part(k - 1, tower, int(p.get('seed', 0))),
                                        k, range(k - 1))
            U = cone(part, S)
            claims = _club_claim(q, U.rank, i, _unit(k, k - 1))
            claims['spectrum_within'] = cone_spectrum_claim(m, k, i)
            claims['spectrum_contains'] = [m * (k - 1) // 2]
            return U, resolved, claims
        if name == 'LiftOdd':
            U = lift_odd(tower, k, S)
        else:
            U = lift_even(tower, k, S, _scattered_part(p, tower, k - 3))
        base = m * (k - 3) // 2 + i
        claims = _club_claim(q, m * (k - 1) // 2 + i, i, _unit(k, 0))
        claims['spans_full_space'] = True
        claims['spectrum_within'] = [base, base + 1, base + 2]
        if name == 'LiftOdd':
            claims['dual_prediction'] = True
        return U, resolved, claims

    if name == 'HalfClubK4':
        U = half_club_k4(tower)
        claims = _club_claim(q, 2 * m, m // 2, _unit(4, 0))
        claims['line_weight'] = m
        return U, resolved, claims

    if name == 'PseudoregulusLines':
        k = int(p.get('k', 3))
        resolved['k'] = k
        U = pseudoregulus_lines(tower, k)
        return U, resolved, {'classification': 'Scattered', 'rank': k * m // 3,
                             'size': _size(q, k * m // 3, 1),
                             'code_weights': [m - 2, m - 1, m], 'code_from': 'system'}

    if name == 'TwistedGabidulin':
        s = int(p.get('s', 1))
        U, delta = twisted_gabidulin(tower, s, p.get('delta'))
        resolved.update(s=s, delta=delta)
        return U, resolved, {'rank': m, 'max_line_weight': 2,
                             'code_weights': [m - 2, m - 1, m],
                             'code_from': 'system'}

    if name == 'RedeiScattered':
        s = int(p.get('s', 1))
        U, delta = redei_scattered(tower, s, p.get('delta'))
        resolved.update(s=s, delta=delta)
        return U, resolved, {'classification': 'Scattered', 'rank': m + 1,
                             'size': _size(q, m + 1, 1),
                             'code_weights': [1, m - 1, m], 'code_from': 'system'}

    if name == 'ComplementaryWeights':
        k = int(p.get('k', 2))
        U, xi, mus = complementary_weights(tower, k, p.get('xi'), p.get('mu'))
        t = m // 2
        resolved.update(k=k, xi=xi, mu=mus)
        return U, resolved, {'classification': 'Other', 'rank': k * t,
                             'heavy_points': {str(t): k},
                             'code_weights': [m - t, m - 1, m], 'code_from': 'dual'}

    raise ValidationError(f"unhandled construction {name!r}")


def _distribution_method(code: RankMetricCode) -> str:
    return 'enumerate' if code.size <= get_cached_config().iteration_budget else 'geometric'


@performance_timer("construction_self_check")
def self_check(name: str, params: Dict[str, Any], U: SubspaceU,
               claimed: Dict[str, Any]) -> ConstructionReport:
    """Measure U against the claims of its construction."""
    measured = analyze(U)
    report = ConstructionReport(name=name, params=params, claimed=claimed, measured=measured)
    checks = report.checks
    cls = measured.classification

    if 'classification' in claimed:
        checks['classification'] = cls.label == claimed['classification']
    checks['rank'] = measured.rank == claimed['rank']
    if 'size' in claimed:
        checks['size'] = measured.size == claimed['size']
    if 'special_point' in claimed:
        checks['special_point'] = (cls.special_point is not None
                                   and list(cls.special_point) == claimed['special_point'])
    checks['weight_identities'] = verify_weight_identities(measured, U.tower.q, U.rank)
    if 'heavy_points' in claimed:
        heavy = {str(w): c for w, c in measured.census.items() if w >= 2}
        checks['heavy_points'] = heavy == claimed['heavy_points']
    if 'spans_full_space' in claimed:
        checks['spans_full_space'] = spans_full_space(U) == claimed['spans_full_space']
    if 'line_weight' in claimed:
        line = np.array([_unit(U.k, 0), _unit(U.k, 1)], dtype=np.int64)
        checks['line_weight'] = subspace_weight(U, line) == claimed['line_weight']

    if {'spectrum_within', 'spectrum_contains', 'max_line_weight'} & set(claimed):
        with GracefulErrorHandler('hyperplane spectrum') as handler:
            spectrum = hyperplane_spectrum(U)
            report.extras['hyperplane_spectrum'] = [[w, c] for w, c in spectrum.items()]
            if 'spectrum_within' in claimed:
                checks['spectrum_within'] = set(spectrum) <= set(claimed['spectrum_within'])
            if 'spectrum_contains' in claimed:
                checks['spectrum_contains'] = set(claimed['spectrum_contains']) <= set(spectrum)
            # lines of PG(2, q^m) are its hyperplanes
            if 'max_line_weight' in claimed:
                checks['max_line_weight'] = max(spectrum) <= claimed['max_line_weight']
        if handler.error_occurred:
            report.notes.append(f"hyperplane spectrum skipped: {handler.error_details['message']}")

    if 'code_weights' in claimed:
        with GracefulErrorHandler('code weights') as handler:
            system = dual_perp(U) if claimed.get('code_from') == 'dual' else U
            code = RankMetricCode.from_system(system)
            distribution = weight_distribution(code, _distribution_method(code))
            report.extras['code'] = {'n': code.n, 'k': code.k, 'A': distribution.counts}
            checks['code_weights'] = distribution.nonzero_weights == claimed['code_weights']
        if handler.error_occurred:
            report.notes.append(f"code weights skipped: {handler.error_details['message']}")

    if claimed.get('dual_prediction'):
        S = SubspaceU.from_vectors(U.tower, 1, np.array(params['S'])[:, None])
        predicted = lift_odd_dual_prediction(U.tower, U.k, S)
        checks['dual_prediction'] = predicted == dual_perp(U)

    if not report.passed:
        failed = sorted(n for n, ok in checks.items() if not ok)
        logger.warning("Construction self-check failed", construction=name, failed=failed)
    return report


def build(spec: ConstructionSpec) -> Tuple[SubspaceU, ConstructionReport]:
    """Generate the subspace of a spec and its self-check report."""
    U, resolved, claimed = _generate(spec)
    logger.info("Construction generated", construction=spec.name, rank=U.rank, k=U.k)
    return U, self_check(spec.name, resolved, U, claimed)
