"""Preference scoring.

Synthetic queries carry up to four structured preferences (budget, pacing,
attraction tags, physical effort), each scored by rule in [0, 1]; a
preference the query never stated scores 1 and is excluded from the
weighted mean entirely. Real-world queries are scored by a single
judge-rated request-fulfillment component.
"""

from __future__ import annotations

from typing import Optional

from .model import (
    KIND_HOTEL,
    KIND_POI,
    SOURCE_JUDGE,
    SOURCE_RULE_ONLY,
    Itinerary,
    PreferenceProfile,
    PrefVector,
    Query,
    ReferenceCatalog,
)
from .soft import _poi_hours

BUDGET_BANDS = {
    "costEffective": (0, 2),
    "comfortable": (3, 4),
    "highEnd": (5, 5),
}

# Daily attraction-hour bands per pacing level; outside the band the
# day-level compliance falls off linearly, hitting zero 4 hours out.
PACING_BANDS = {
    "relaxed": (0.0, 6.0),
    "moderate": (5.0, 9.0),
    "compact": (8.0, 24.0),
}
PACING_FALLOFF_HOURS = 4.0

EFFORT_CONTRIBUTION = {
    "hiking": 1.0,
    "themePark": 1.0,
    "mountainClimbing": 1.0,
    "cycling": 2.0,
    "other": 0.0,
}
STRENUOUS_THRESHOLD = 2.0


def score_budget(itinerary: Itinerary, catalog: ReferenceCatalog, pref: Optional[str]) -> float:
    """Fraction of hotel nights whose star rating sits in the preferred band."""
    if pref is None:
        return 1.0
    lo, hi = BUDGET_BANDS[pref]
    nights = []
    for day in itinerary.days:
        for act in day.iter_activities():
            if act.kind == KIND_HOTEL and act.id in catalog.hotels:
                nights.append(catalog.hotels[act.id])
    if not nights:
        return 1.0
    matched = sum(1 for hotel in nights if lo <= hotel.stars <= hi)
    return matched / len(nights)


def _pacing_compliance(hours: float, band: tuple[float, float]) -> float:
    lo, hi = band
    if lo <= hours <= hi:
        return 1.0
    distance = lo - hours if hours < lo else hours - hi
    return max(0.0, 1.0 - distance / PACING_FALLOFF_HOURS)


def score_pacing(resolved: Itinerary, pref: Optional[str]) -> float:
    if pref is None:
        return 1.0
    band = PACING_BANDS[pref]
    total = sum(_pacing_compliance(_poi_hours(day), band) for day in resolved.days)
    return total / len(resolved.days)


def score_attraction(itinerary: Itinerary, catalog: ReferenceCatalog, tags) -> float:
    """Fraction of visited attractions carrying at least one preferred tag."""
    if tags is None:
        return 1.0
    wanted = frozenset(tags)
    total = 0
    matched = 0
    for day in itinerary.days:
        for act in day.iter_activities():
            if act.kind != KIND_POI:
                continue
            total += 1
            poi = catalog.pois.get(act.id) if act.id else None
            if poi is not None and poi.tags & wanted:
                matched += 1
    if total == 0:
        return 1.0
    return matched / total


def day_effort_labels(itinerary: Itinerary, catalog: ReferenceCatalog) -> list[str]:
    """Label each day light/moderate/strenuous from attraction effort classes.

    Strenuous: exertion above 2, or the second of two consecutive days with
    any exertion. Light: no exertion and no exertion on adjacent days.
    Everything else is moderate. Labels partition the days.
    """
    exertion = []
    for day in itinerary.days:
        total = 0.0
        for act in day.iter_activities():
            if act.kind != KIND_POI:
                continue
            poi = catalog.pois.get(act.id) if act.id else None
            if poi is not None:
                total += EFFORT_CONTRIBUTION.get(poi.effort_class, 0.0)
        exertion.append(total)

    labels = []
    for i, load in enumerate(exertion):
        prev_load = exertion[i - 1] if i > 0 else 0.0
        next_load = exertion[i + 1] if i + 1 < len(exertion) else 0.0
        if load > STRENUOUS_THRESHOLD or (load > 0 and prev_load > 0):
            labels.append("strenuous")
        elif load == 0 and prev_load == 0 and next_load == 0:
            labels.append("light")
        else:
            labels.append("moderate")
    return labels


def score_effort(itinerary: Itinerary, catalog: ReferenceCatalog, pref: Optional[str]) -> float:
    if pref is None:
        return 1.0
    labels = day_effort_labels(itinerary, catalog)
    return sum(1 for label in labels if label == pref) / len(labels)


def score_user_request(itinerary_text: str, request_text: str, judge=None) -> tuple[float, str]:
    """0.2 x judge rating (0..5); neutral 0.5 without a judge."""
    if judge is None:
        return 0.5, SOURCE_RULE_ONLY
    result = judge.rate_user_request(request_text, itinerary_text)
    return 0.2 * result.final_score, SOURCE_JUDGE


def score_preferences(
    itinerary: Itinerary,
    resolved: Itinerary,
    query: Query,
    catalog: ReferenceCatalog,
    itinerary_text: str = "",
    judge=None,
) -> PrefVector:
    """Score the arm matching the query split; the other stays empty."""
    if query.split == "realWorld":
        value, source = score_user_request(itinerary_text, query.request_text, judge)
        return PrefVector(user_request=value, user_request_source=source)

    prefs: PreferenceProfile = query.preferences
    return PrefVector(
        budget=None if prefs.budget is None else score_budget(itinerary, catalog, prefs.budget),
        pacing=None if prefs.pacing is None else score_pacing(resolved, prefs.pacing),
        attraction=None
        if prefs.attraction_tags is None
        else score_attraction(itinerary, catalog, prefs.attraction_tags),
        effort=None if prefs.effort is None else score_effort(itinerary, catalog, prefs.effort),
    )
