"""
clubforge - linear sets, i-clubs and rank-metric codes over finite fields.

This package builds F_q-subspaces of F_{q^m}^k from named constructions,
classifies the linear sets they define (scattered, i-club, other), moves
between subspaces and rank-metric codes, evaluates the MacWilliams
identities and the club rank bounds, and runs exhaustive subspace searches.
"""

__version__ = "1.0.0"

from .field import FieldTower, make_tower
from .linset import SubspaceU, analyze, dual_perp, hyperplane_spectrum
from .rmcode import (
    RankMetricCode,
    club_rank_bound,
    macwilliams_transform,
    weight_distribution,
)
from .constructions import ConstructionSpec, build
from .search import SearchSpec, run_search, spectrum_compare
from .checks import verify_construction, verify_max_m1_club
from .models import ClubforgeConfig, get_cached_config

__all__ = [
    "FieldTower",
    "make_tower",
    "SubspaceU",
    "analyze",
    "dual_perp",
    "hyperplane_spectrum",
    "RankMetricCode",
    "club_rank_bound",
    "macwilliams_transform",
    "weight_distribution",
    "ConstructionSpec",
    "build",
    "SearchSpec",
    "run_search",
    "spectrum_compare",
    "verify_construction",
    "verify_max_m1_club",
    "ClubforgeConfig",
    "get_cached_config",
]
