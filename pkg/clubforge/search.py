"""
Exhaustive enumeration of F_q-subspaces of F_{q^m}^k with classification.

Subspaces of F_q^N (N = mk) of dimension n are visited once each through
their canonical RREF bases: pivot-column profiles in lexicographic order,
then the free entries of each profile as base-q digits. Work is split into
(profile, start, stop) ranges that run independently, in-process or on a
process pool, and whose partial censuses are merged by summation in task
order, so the result does not depend on the number of workers.
"""

import concurrent.futures
import itertools
import re
import time
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .error_handling import (
    BudgetExceededError,
    DimensionMismatchError,
    ParameterMismatchError,
    ValidationError,
)
from .field import FieldTower, int_digits, make_tower
from .fqlinalg import FlatBasis, coefficient_grid, flatten, unflatten
from .linset import (
    SubspaceU,
    all_points,
    analyze,
    hyperplane_spectrum,
    log_q,
    normalize,
)
from .logging_utils import get_logger, performance_timer
from .models import SearchResult, SpectrumComparison, get_cached_config
from .rmcode import qbinomial

logger = get_logger(__name__)

TARGETS = ('AnyClub', 'Scattered', 'Census')
SEARCH_STRATEGIES = ('vectors', 'points')
_CLUB_TARGET = re.compile(r'^Club\((\d+)\)$')

Task = Tuple[Tuple[int, ...], int, int]


def pivot_profiles(N: int, n: int) -> Iterator[Tuple[int, ...]]:
    """Pivot-column sets of n-dimensional subspaces of F_q^N, lexicographic."""
    return itertools.combinations(range(N), n)


def free_positions(pivots: Sequence[int], N: int) -> List[Tuple[int, int]]:
    """(row, column) entries left free by an RREF pivot profile."""
    pivot_set = set(pivots)
    return [(r, c) for r, p in enumerate(pivots) for c in range(p + 1, N) if c not in pivot_set]


def profile_size(q: int, pivots: Sequence[int], N: int) -> int:
    return q ** len(free_positions(pivots, N))


def profile_bases(q: int, N: int, pivots: Sequence[int], start: int, stop: int) -> np.ndarray:
    """RREF bases number start..stop-1 of a profile, shape (B, n, N) over GF(q)."""
    n = len(pivots)
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.zeros((idx.size, n, N), dtype=np.int64)
    for r, p in enumerate(pivots):
        out[:, r, p] = 1
    free = free_positions(pivots, N)
    if free:
        rows, cols = zip(*free)
        out[:, list(rows), list(cols)] = int_digits(idx, q, len(free))
    return out


def _combine(small: Any, coeffs: np.ndarray, bases: np.ndarray) -> np.ndarray:
    """coeffs (M, r) times every basis in (B, r, N), as ints of shape (B, M, N)."""
    B, r, N = bases.shape
    if r == 0 or coeffs.shape[0] == 0:
        return np.zeros((B, coeffs.shape[0], N), dtype=np.int64)
    stacked = small(np.transpose(bases, (1, 0, 2)).reshape(r, B * N))
    product = (small(coeffs) @ stacked).view(np.ndarray).astype(np.int64)
    return product.reshape(-1, B, N).transpose(1, 0, 2)


def _membership(small: Any, vectors: np.ndarray, bases: np.ndarray,
                pivots: Sequence[int]) -> np.ndarray:
    """(M, B) table: is vectors[j] in the row space of bases[b]? Bases reduced at `pivots`."""
    projected = _combine(small, vectors[:, list(pivots)], bases)
    return np.all(projected == vectors[None, :, :], axis=2).T


@dataclass
class BatchProfile:
    """Per-subspace summary of a batch: point count, heavy points, top weight."""

    points: np.ndarray
    heavy: np.ndarray
    index: np.ndarray
    special: np.ndarray

    def labels(self) -> List[str]:
        out = []
        for heavy, index in zip(self.heavy.tolist(), self.index.tolist()):
            if heavy == 0:
                out.append('Scattered')
            elif heavy == 1:
                out.append(f'Club({index})')
            else:
                out.append('Other')
        return out


def _summarize(q: int, m: int, B: int, sub: np.ndarray, lengths: np.ndarray,
               codes: np.ndarray) -> BatchProfile:
    points = np.bincount(sub, minlength=B)
    heavy_mask = lengths > q - 1
    heavy = np.bincount(sub[heavy_mask], minlength=B)
    top = np.zeros(B, dtype=np.int64)
    np.maximum.at(top, sub, lengths)
    special = np.full(B, -1, dtype=np.int64)
    special[sub[heavy_mask]] = codes[heavy_mask]
    index = log_q(top + 1, q, m)
    return BatchProfile(points=points, heavy=heavy, index=index, special=special)


def _profile_by_vectors(tower: FieldTower, k: int, bases: np.ndarray) -> BatchProfile:
    B, n, _ = bases.shape
    grid = coefficient_grid(tower.small, n).view(np.ndarray)[1:]
    members = _combine(tower.small, grid, bases)
    encoded = unflatten(tower, members, k)
    codes = normalize(tower, encoded.reshape(-1, k)) @ (tower.order ** np.arange(k))
    codes = np.sort(codes.reshape(B, -1), axis=1)
    width = codes.shape[1]
    starts = np.ones_like(codes, dtype=bool)
    starts[:, 1:] = codes[:, 1:] != codes[:, :-1]
    flat_starts = np.flatnonzero(starts.ravel())
    lengths = np.diff(np.append(flat_starts, codes.size))
    return _summarize(tower.q, tower.m, B, flat_starts // width, lengths,
                      codes.ravel()[flat_starts])


@lru_cache(maxsize=8)
def _point_multiples(tower: FieldTower, k: int) -> Tuple[np.ndarray, np.ndarray]:
    points = all_points(tower, k)
    scalars = tower.elements(np.arange(1, tower.order))
    multiples = tower.ints(tower.elements(points)[:, None, :] * scalars[None, :, None])
    flat = flatten(tower, multiples).view(np.ndarray).astype(np.int64)
    codes = points @ (tower.order ** np.arange(k))
    return flat.reshape(-1, tower.m * k), codes


def _profile_by_points(tower: FieldTower, k: int, bases: np.ndarray,
                       pivots: Sequence[int]) -> BatchProfile:
    B = bases.shape[0]
    vectors, codes = _point_multiples(tower, k)
    member = _membership(tower.small, vectors, bases, pivots)
    counts = member.reshape(codes.size, tower.order - 1, B).sum(axis=1)
    pp, bb = np.nonzero(counts)
    return _summarize(tower.q, tower.m, B, bb, counts[pp, bb], codes[pp])


@dataclass
class SearchSpec:
    """What to enumerate and what to look for."""

    tower: FieldTower
    k: int
    n: int
    target: str = 'Census'
    anchor: Optional[SubspaceU] = None
    budget: Optional[int] = None
    jobs: Optional[int] = None
    strategy: str = 'vectors'
    big: bool = False

    def __post_init__(self) -> None:
        club_index(self.target)
        if self.strategy not in SEARCH_STRATEGIES:
            raise ValidationError(f"unknown strategy {self.strategy!r}",
                                  allowed=list(SEARCH_STRATEGIES))
        if not 1 <= self.n <= self.tower.m * self.k:
            raise DimensionMismatchError("need 1 <= n <= mk", n=self.n, mk=self.tower.m * self.k)
        if self.anchor is not None:
            if self.anchor.k != 1 or self.anchor.tower != self.tower:
                raise DimensionMismatchError("anchor must be a subspace of F_{q^m}")
            if not 1 <= self.anchor.rank <= self.n:
                raise DimensionMismatchError("anchor dimension must lie in [1, n]",
                                             dim=self.anchor.rank, n=self.n)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SearchSpec':
        try:
            tower = make_tower(int(data.get('p', 2)), int(data.get('e', 1)), int(data['m']))
            k, n = int(data['k']), int(data['n'])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"search spec needs integer m, k, n: {exc}")
        anchor = None
        if data.get('anchor') is not None:
            rows = np.asarray(data['anchor'], dtype=np.int64).reshape(-1, 1)
            anchor = SubspaceU.from_vectors(tower, 1, rows)
        return cls(tower=tower, k=k, n=n, target=data.get('target', 'Census'), anchor=anchor,
                   budget=data.get('budget'), jobs=data.get('jobs'),
                   strategy=data.get('strategy', 'vectors'), big=bool(data.get('big', False)))

    @property
    def N(self) -> int:
        return self.tower.m * self.k

    @property
    def free_dim(self) -> int:
        """Dimension of the part left to enumerate once the anchor is fixed."""
        return self.n - (self.anchor.rank if self.anchor is not None else 0)

    @property
    def space_dim(self) -> int:
        return self.N - (self.anchor.rank if self.anchor is not None else 0)

    def total(self) -> int:
        return qbinomial(self.space_dim, self.free_dim, self.tower.q)


def club_index(target: str) -> Optional[int]:
    """i for a 'Club(i)' target, None for the others."""
    match = _CLUB_TARGET.match(target)
    if match:
        return int(match.group(1))
    if target not in TARGETS:
        raise ValidationError(f"unknown target {target!r}",
                              allowed=list(TARGETS) + ['Club(i)'])
    return None


def _anchor_rows(spec: SearchSpec) -> Optional[np.ndarray]:
    if spec.anchor is None:
        return None
    rows = np.zeros((spec.anchor.rank, spec.k), dtype=np.int64)
    rows[:, 0] = spec.anchor.basis()[:, 0]
    return flatten(spec.tower, rows).view(np.ndarray).astype(np.int64)


def enumerate_subspaces(tower: FieldTower, k: int, n: int,
                        visitor: Optional[Callable[[np.ndarray], None]] = None,
                        budget: Optional[int] = None) -> int:
    """
    Visit every n-dimensional F_q-subspace of F_{q^m}^k once, as batches of
    RREF bases of shape (B, n, mk).

    Raises:
        BudgetExceededError: the Gaussian binomial exceeds the budget
    """
    N = tower.m * k
    total = qbinomial(N, n, tower.q)
    budget = budget if budget is not None else get_cached_config().iteration_budget
    if total > budget:
        raise BudgetExceededError("subspace count exceeds the budget", subspaces=total,
                                  budget=budget)
    chunk = get_cached_config().chunk_size
    count = 0
    for pivots in pivot_profiles(N, n):
        size = profile_size(tower.q, pivots, N)
        for start in range(0, size, chunk):
            batch = profile_bases(tower.q, N, pivots, start, min(size, start + chunk))
            if visitor is not None:
                visitor(batch)
            count += batch.shape[0]
    return count


def _batch_size(q: int, n: int, N: int, chunk_size: int) -> int:
    return max(1, chunk_size * 256 // max(1, q ** n * N))


def _tasks(spec: SearchSpec, chunk_size: int) -> List[Task]:
    q, N = spec.tower.q, spec.space_dim
    step = _batch_size(q, spec.n, spec.N, chunk_size) * 8
    tasks: List[Task] = []
    for pivots in pivot_profiles(N, spec.free_dim):
        size = profile_size(q, pivots, N)
        tasks.extend((pivots, s, min(size, s + step)) for s in range(0, size, step))
    return tasks


def _leading_columns(rows: np.ndarray) -> List[int]:
    return [int(np.flatnonzero(row)[0]) for row in rows]


def _anchored_bases(small: Any, anchor: np.ndarray, complement: List[int],
                    free: np.ndarray, pivots: Sequence[int]) -> Tuple[np.ndarray, List[int]]:
    """Lift complement-space bases and reduce the anchor rows against them."""
    B, r, _ = free.shape
    N = anchor.shape[1]
    lifted = np.zeros((B, r, N), dtype=np.int64)
    lifted[:, :, complement] = free
    lifted_pivots = [complement[p] for p in pivots]
    coef = anchor[:, lifted_pivots]
    reduced = (small(np.repeat(anchor[None, :, :], B, axis=0))
               - small(_combine(small, coef, lifted))).view(np.ndarray).astype(np.int64)
    anchor_pivots = _leading_columns(anchor)
    return np.concatenate([reduced, lifted], axis=1), anchor_pivots + lifted_pivots


def _scan_task(job: Dict[str, Any], task: Task) -> Dict[str, Any]:
    """Classify the subspaces of one (profile, start, stop) range."""
    tower = make_tower(job['p'], job['e'], job['m'])
    k, q = job['k'], tower.q
    pivots, start, stop = task
    anchor = None if job['anchor'] is None else np.asarray(job['anchor'], dtype=np.int64)
    N = tower.m * k
    space = N if anchor is None else N - anchor.shape[0]
    step = _batch_size(q, job['n'], N, job['chunk_size'])
    if anchor is not None:
        leading = set(_leading_columns(anchor))
        complement = [c for c in range(N) if c not in leading]

    census: Counter = Counter()
    profiles: Counter = Counter()
    hits: List[List[List[int]]] = []
    cross = 0
    for s in range(start, stop, step):
        bases = profile_bases(q, space, pivots, s, min(stop, s + step))
        full_pivots = list(pivots)
        if anchor is not None:
            bases, full_pivots = _anchored_bases(tower.small, anchor, complement, bases, pivots)
        if job['strategy'] == 'points':
            summary = _profile_by_points(tower, k, bases, full_pivots)
        else:
            summary = _profile_by_vectors(tower, k, bases)
        labels = summary.labels()
        census.update(labels)
        profiles.update(f"{label} size={size}"
                        for label, size in zip(labels, summary.points.tolist()))

        if job['cross_anchor'] is not None:
            rows = np.asarray(job['cross_anchor'], dtype=np.int64)
            contains = _membership(tower.small, rows, bases, full_pivots).all(axis=0)
            wanted = np.array([label == job['cross_label'] for label in labels])
            cross += int(np.sum(wanted & contains & (summary.special == 1)))

        if job['target'] != 'Census' and len(hits) < job['hit_cap']:
            for b, label in enumerate(labels):
                if len(hits) >= job['hit_cap']:
                    break
                if _matches(job['target'], label):
                    hits.append(bases[b].tolist())
    return {'scanned': stop - start, 'census': dict(census), 'profiles': dict(profiles),
            'hits': hits, 'cross': cross}


def _matches(target: str, label: str) -> bool:
    if target == 'AnyClub':
        return label.startswith('Club(')
    return label == target


def _run_tasks(job: Dict[str, Any], tasks: List[Task], jobs: int) -> List[Dict[str, Any]]:
    if jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = [executor.submit(_scan_task, job, task) for task in tasks]
            return [f.result() for f in futures]
    return [_scan_task(job, task) for task in tasks]


def _job(spec: SearchSpec, hit_cap: int, chunk_size: int,
         cross_anchor: Optional[np.ndarray] = None,
         cross_label: Optional[str] = None) -> Dict[str, Any]:
    anchor = _anchor_rows(spec)
    return {
        'p': spec.tower.p, 'e': spec.tower.e, 'm': spec.tower.m, 'k': spec.k, 'n': spec.n,
        'target': spec.target, 'strategy': spec.strategy, 'hit_cap': hit_cap,
        'chunk_size': chunk_size,
        'anchor': None if anchor is None else anchor.tolist(),
        'cross_anchor': None if cross_anchor is None else cross_anchor.tolist(),
        'cross_label': cross_label,
    }


def _verify_hit(spec: SearchSpec, rows: List[List[int]], target: str) -> Optional[SubspaceU]:
    tower = spec.tower
    flat = FlatBasis.from_matrix(tower.small(np.array(rows, dtype=np.int64)), spec.N)
    U = SubspaceU.from_flat(tower, spec.k, flat)
    label = analyze(U).classification.label
    if not _matches(target, label):
        logger.error("Search hit failed re-verification", target=target, measured=label)
        return None
    return U


def _check_budget(spec: SearchSpec, total: int) -> None:
    budget = spec.budget if spec.budget is not None else get_cached_config().iteration_budget
    if total > budget and not spec.big:
        raise BudgetExceededError("subspace count exceeds the budget; narrow the search, "
                                  "anchor it, or pass --big", subspaces=total, budget=budget)


@performance_timer("search")
def run_search(spec: SearchSpec) -> SearchResult:
    """
    Classify every subspace the spec describes and collect the hits.

    The census is always complete; the hit list stops at the configured cap
    and every hit is re-verified with `analyze`.

    Raises:
        BudgetExceededError: the subspace count exceeds the budget
    """
    config = get_cached_config()
    total = spec.total()
    _check_budget(spec, total)
    started = time.perf_counter()
    jobs = spec.jobs or config.jobs
    logger.info("Search started", k=spec.k, n=spec.n, target=spec.target, subspaces=total,
                anchored=spec.anchor is not None, jobs=jobs)

    job = _job(spec, config.hit_cap, config.chunk_size)
    partials = _run_tasks(job, _tasks(spec, config.chunk_size), jobs)

    census: Counter = Counter()
    profiles: Counter = Counter()
    raw_hits: List[List[List[int]]] = []
    scanned = 0
    for part in partials:
        scanned += part['scanned']
        census.update(part['census'])
        profiles.update(part['profiles'])
        raw_hits.extend(part['hits'])

    hit_total = sum(c for label, c in census.items() if _matches(spec.target, label))
    found = []
    for rows in raw_hits[:config.hit_cap]:
        U = _verify_hit(spec, rows, spec.target)
        if U is not None:
            found.append([[int(v) for v in row] for row in U.basis()])

    result = SearchResult(scanned=scanned, found=found, census=dict(census),
                          profiles=dict(profiles), wall_time=time.perf_counter() - started,
                          truncated=spec.target != 'Census' and hit_total > len(found))
    logger.info("Search finished", scanned=scanned, hits=len(found), census=result.census)
    return result


def anchored_cross_check(tower: FieldTower, k: int, n: int, S: SubspaceU,
                         jobs: Optional[int] = None) -> Dict[str, Any]:
    """
    Club(i) count of the anchored search against the unanchored count of
    Club(i) hits with special point <e_0> and U ∩ <e_0> = S (i = dim S).
    """
    i = S.rank
    label = f'Club({i})'
    config = get_cached_config()
    anchored = run_search(SearchSpec(tower, k, n, target=label, anchor=S, jobs=jobs))

    spec = SearchSpec(tower, k, n, target='Census', jobs=jobs)
    _check_budget(spec, spec.total())
    anchor_rows = _anchor_rows(SearchSpec(tower, k, n, anchor=S))
    job = _job(spec, 0, config.chunk_size, cross_anchor=anchor_rows, cross_label=label)
    partials = _run_tasks(job, _tasks(spec, config.chunk_size), jobs or config.jobs)
    unanchored = sum(part['cross'] for part in partials)
    count = anchored.census.get(label, 0)
    return {'label': label, 'anchored': count, 'unanchored': unanchored,
            'agree': count == unanchored}


@performance_timer("spectrum_compare")
def spectrum_compare(U1: SubspaceU, U2: SubspaceU) -> SpectrumComparison:
    """
    Compare the point-weight censuses, then the hyperplane-weight multisets.

    Raises:
        ParameterMismatchError: different (q, m, k, n)
    """
    if U1.tower != U2.tower or U1.k != U2.k or U1.rank != U2.rank:
        raise ParameterMismatchError("linear sets must share q, m, k and rank",
                                     left=[U1.tower.q, U1.tower.m, U1.k, U1.rank],
                                     right=[U2.tower.q, U2.tower.m, U2.k, U2.rank])
    left, right = analyze(U1), analyze(U2)
    if left.census != right.census:
        return SpectrumComparison(True, {
            'invariant': 'point_census',
            'left': sorted(left.census.items()),
            'right': sorted(right.census.items()),
        })
    spec_left, spec_right = hyperplane_spectrum(U1), hyperplane_spectrum(U2)
    if spec_left != spec_right:
        return SpectrumComparison(True, {
            'invariant': 'hyperplane_spectrum',
            'only_left': sorted(set(spec_left) - set(spec_right)),
            'only_right': sorted(set(spec_right) - set(spec_left)),
            'left': sorted(spec_left.items()),
            'right': sorted(spec_right.items()),
        })
    return SpectrumComparison(False)


def find_scattered(tower: FieldTower, k: int, n: int, seed: int = 0,
                   attempts: int = 2000) -> SubspaceU:
    """
    Scattered subspace of rank n by seeded greedy extension with restarts.

    Raises:
        BudgetExceededError: no scattered subspace reached within `attempts` draws
    """
    if not 1 <= n <= tower.m * k:
        raise DimensionMismatchError("need 1 <= n <= mk", n=n, mk=tower.m * k)
    rng = np.random.default_rng(seed)
    dim = tower.m * k
    current = SubspaceU(tower, k, FlatBasis.zero(tower.small, dim))
    stuck = 0
    for _ in range(attempts):
        if current.rank == n:
            break
        v = rng.integers(0, tower.order, size=(1, k))
        if not np.any(v) or current.contains(v)[0]:
            continue
        rows = np.vstack([current.basis(), v])
        candidate = SubspaceU.from_vectors(tower, k, rows)
        if analyze(candidate).classification.kind == 'Scattered':
            current, stuck = candidate, 0
            continue
        stuck += 1
        if stuck > 20 * tower.q ** 2:
            current, stuck = SubspaceU(tower, k, FlatBasis.zero(tower.small, dim)), 0
    if current.rank != n:
        raise BudgetExceededError("no scattered subspace found within the attempt budget",
                                  rank=n, attempts=attempts)
    logger.debug("Scattered subspace found", k=k, rank=n, seed=seed)
    return current
