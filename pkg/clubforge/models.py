"""
Data models for clubforge.

This module contains the configuration object and the result records that
flow between the library layers and out of the CLI as JSON.
"""

import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .logging_utils import get_logger

logger = get_logger(__name__)

_cached_config: Optional['ClubforgeConfig'] = None


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(float(raw)) if 'e' in raw.lower() else int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


@dataclass
class ClubforgeConfig:
    """Budgets and execution settings shared by every computation."""

    iteration_budget: int = 10_000_000
    field_budget: int = 2 ** 20
    hit_cap: int = 1000
    jobs: int = 1
    chunk_size: int = 4096

    @classmethod
    def from_environment(cls) -> 'ClubforgeConfig':
        """Create configuration from environment variables."""
        return cls(
            iteration_budget=_env_int('CLUBFORGE_BUDGET', 10_000_000),
            field_budget=_env_int('CLUBFORGE_FIELD_BUDGET', 2 ** 20),
            hit_cap=_env_int('CLUBFORGE_HIT_CAP', 1000),
            jobs=_env_int('CLUBFORGE_JOBS', os.cpu_count() or 1),
            chunk_size=_env_int('CLUBFORGE_CHUNK_SIZE', 4096),
        )

    def validate(self) -> None:
        """Validate configuration parameters."""
        if self.iteration_budget <= 0:
            raise ValueError("iteration_budget must be positive")

        if self.field_budget < 2:
            raise ValueError("field_budget must be at least 2")

        if self.hit_cap < 0:
            raise ValueError("hit_cap cannot be negative")

        if self.jobs <= 0:
            raise ValueError("jobs must be positive")

        if self.chunk_size <= 0:
            raise ValueError("chunk_size must be positive")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'iteration_budget': self.iteration_budget,
            'field_budget': self.field_budget,
            'hit_cap': self.hit_cap,
            'jobs': self.jobs,
            'chunk_size': self.chunk_size,
        }


def get_cached_config() -> ClubforgeConfig:
    """
    Get cached configuration or create a new one from environment variables.

    Returns:
        ClubforgeConfig: The cached or newly created configuration

    Raises:
        ValueError: If environment variables are invalid
    """
    global _cached_config

    if _cached_config is None:
        logger.debug("Creating configuration from environment")
        _cached_config = ClubforgeConfig.from_environment()
        _cached_config.validate()
        logger.info("Configuration created", **_cached_config.to_dict())

    return _cached_config


def set_cached_config(config: ClubforgeConfig) -> None:
    """Install an explicit configuration (CLI flags override the environment)."""
    global _cached_config
    config.validate()
    _cached_config = config


def reset_config_cache() -> None:
    """Forget the cached configuration so the environment is read again."""
    global _cached_config
    _cached_config = None


def _pairs(mapping: Dict[int, int]) -> List[List[int]]:
    return [[int(w), int(c)] for w, c in sorted(mapping.items())]


def _unpairs(pairs: List[List[int]]) -> Dict[int, int]:
    return {int(w): int(c) for w, c in pairs}


@dataclass(frozen=True)
class Classification:
    """Scattered, Club(i, special point) or Other."""

    kind: str
    index: Optional[int] = None
    special_point: Optional[Tuple[int, ...]] = None

    @property
    def label(self) -> str:
        if self.kind == 'Club':
            return f"Club({self.index})"
        return self.kind

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'kind': self.kind,
            'index': self.index,
            'special_point': list(self.special_point) if self.special_point is not None else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Classification':
        point = data.get('special_point')
        return cls(
            kind=data['kind'],
            index=data.get('index'),
            special_point=tuple(point) if point is not None else None,
        )


@dataclass
class LinearSetReport:
    """Rank, size, point-weight census, classification and optional spectrum."""

    rank: int
    size: int
    census: Dict[int, int]
    classification: Classification
    hyperplane_spectrum: Optional[Dict[int, int]] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'rank': self.rank,
            'size': self.size,
            'census': _pairs(self.census),
            'classification': self.classification.to_dict(),
            'hyperplane_spectrum': (_pairs(self.hyperplane_spectrum)
                                    if self.hyperplane_spectrum is not None else None),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'LinearSetReport':
        spectrum = data.get('hyperplane_spectrum')
        return cls(
            rank=int(data['rank']),
            size=int(data['size']),
            census=_unpairs(data['census']),
            classification=Classification.from_dict(data['classification']),
            hyperplane_spectrum=_unpairs(spectrum) if spectrum is not None else None,
        )


@dataclass
class WeightDistribution:
    """Rank-weight distribution A_0..A_m of a code."""

    counts: List[int]
    method: str = 'enumerate'

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def nonzero_weights(self) -> List[int]:
        return [w for w, c in enumerate(self.counts) if w > 0 and c > 0]

    @property
    def min_distance(self) -> int:
        weights = self.nonzero_weights
        return weights[0] if weights else 0

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {'A': list(self.counts)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'WeightDistribution':
        counts = data.get('A', data.get('B'))
        if counts is None:
            raise ValueError("weight distribution needs an 'A' or 'B' array")
        return cls(counts=[int(c) for c in counts], method='given')


@dataclass
class CodeClassification:
    """Three-weight profile tag of a rank-metric code."""

    tag: str
    weights: List[int]
    club_index: Optional[int] = None
    verified: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'tag': self.tag,
            'weights': self.weights,
            'club_index': self.club_index,
            'verified': self.verified,
        }


@dataclass
class ConstructionReport:
    """Claimed versus measured properties of a generated subspace."""

    name: str
    params: Dict[str, Any]
    claimed: Dict[str, Any]
    measured: LinearSetReport
    checks: Dict[str, bool] = field(default_factory=dict)
    extras: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'name': self.name,
            'params': self.params,
            'claimed': self.claimed,
            'measured': self.measured.to_dict(),
            'checks': dict(sorted(self.checks.items())),
            'extras': self.extras,
            'passed': self.passed,
            'notes': self.notes,
        }


@dataclass
class SearchResult:
    """Outcome of an exhaustive subspace enumeration."""

    scanned: int
    found: List[List[List[int]]]
    census: Dict[str, int]
    profiles: Dict[str, int] = field(default_factory=dict)
    wall_time: float = 0.0
    truncated: bool = False

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization (timing excluded)."""
        return {
            'scanned': self.scanned,
            'hits': len(self.found),
            'truncated': self.truncated,
            'census': dict(sorted(self.census.items())),
            'profiles': dict(sorted(self.profiles.items())),
        }


@dataclass
class SpectrumComparison:
    """Result of comparing two linear sets by their weight invariants."""

    distinguished: bool
    witness: Optional[Dict[str, Any]] = None

    @property
    def verdict(self) -> str:
        return 'Distinguished' if self.distinguished else 'Indistinguishable'

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        note = ('invariants differ, the linear sets are not equivalent'
                if self.distinguished else
                'invariants agree, which does not prove equivalence')
        return {'verdict': self.verdict, 'witness': self.witness, 'note': note}


@dataclass
class CheckOutcome:
    """One entry of a verification battery."""

    name: str
    status: str  # "passed" | "failed" | "skipped"
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {'name': self.name, 'status': self.status, 'detail': self.detail}


@dataclass
class VerificationReport:
    """Collected outcomes of a verification battery."""

    subject: str
    outcomes: List[CheckOutcome] = field(default_factory=list)
    # subspace the battery ran on; not serialized
    subspace: Optional[Any] = field(default=None, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return all(o.status != 'failed' for o in self.outcomes)

    def outcome(self, name: str) -> CheckOutcome:
        for item in self.outcomes:
            if item.name == name:
                return item
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'subject': self.subject,
            'passed': self.passed,
            'outcomes': [o.to_dict() for o in self.outcomes],
        }
