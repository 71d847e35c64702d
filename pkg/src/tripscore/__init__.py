"""Deterministic travel-itinerary evaluation engine."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    DEFAULT_WEIGHTS,
    Itinerary,
    Query,
    ReferenceCatalog,
    ScoreBreakdown,
    WeightConfig,
    haversine_km,
    period_window,
    resolve_activity_times,
)
from .engine import MODE_FULL, MODE_RULE_ONLY, breakdown_to_dict, score_plan  # noqa: F401
