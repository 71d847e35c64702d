"""Soft quality scoring: seven components, each normalized to [0, 1].

Five components (schedule density, hotel consistency, daytime utilization,
unique attractions, location clustering) are pure rules. Iconic landmarks
and attraction diversity come from the judge port; in rule-only mode both
take the neutral 0.5 default.
"""

from __future__ import annotations

import math
from datetime import date, datetime, time, timedelta
from typing import Optional

from .model import (
    KIND_HOTEL,
    KIND_POI,
    KIND_TRANSPORT,
    SOURCE_JUDGE,
    SOURCE_RULE_ONLY,
    Itinerary,
    ReferenceCatalog,
    SoftVector,
    day_date,
    haversine_km,
)

# Daily activity-hour bands; travel days (any transport present) get the
# looser band. Hours count attraction visits only, never transport.
FULL_DAY_HOURS = (4.0, 10.0)
TRAVEL_DAY_HOURS = (2.0, 10.0)

# A same-city hotel change only counts as an avoidable switch when the two
# properties sit within this distance.
SWITCH_RADIUS_KM = 100.0

# Transport filling at least this much of 08:00-18:00 exempts a day from
# the daytime-utilization rule.
DAYTIME_TRANSPORT_EXEMPT_HOURS = 6.0

DAYTIME_START = time(8, 0)
DAYTIME_END = time(18, 0)

# Below this many consecutive-pair distances the clustering rule abstains.
MIN_CLUSTER_PAIRS = 5


def _poi_hours(day) -> float:
    total = 0.0
    for act in day.iter_activities():
        if act.kind == KIND_POI and act.resolved_start and act.resolved_end:
            total += (act.resolved_end - act.resolved_start).total_seconds() / 3600.0
    return total


def _has_transport(day) -> bool:
    return any(act.kind == KIND_TRANSPORT for act in day.iter_activities())


def score_schedule_density(resolved: Itinerary) -> float:
    """1 - (days outside their activity-hour band) / D."""
    days = resolved.days
    violating = 0
    for day in days:
        lo, hi = TRAVEL_DAY_HOURS if _has_transport(day) else FULL_DAY_HOURS
        hours = _poi_hours(day)
        if not lo <= hours <= hi:
            violating += 1
    return 1.0 - violating / len(days)


def score_hotel_consistency(itinerary: Itinerary, catalog: ReferenceCatalog) -> float:
    """1 - switches/|H|: a switch is a night whose hotel differs from the
    previous night's while staying in the same city within 100 km."""
    nights = []
    for day in itinerary.days:
        hotel_act = None
        for act in day.iter_activities():
            if act.kind == KIND_HOTEL:
                hotel_act = act
        if hotel_act is not None:
            nights.append(hotel_act)
    if not nights:
        return 1.0
    switches = 0
    for prev, cur in zip(nights, nights[1:]):
        if prev.id == cur.id:
            continue
        h_prev = catalog.hotels.get(prev.id)
        h_cur = catalog.hotels.get(cur.id)
        if h_prev is None or h_cur is None:
            continue
        if h_prev.city != h_cur.city:
            continue
        if haversine_km((h_prev.lat, h_prev.lon), (h_cur.lat, h_cur.lon)) <= SWITCH_RADIUS_KM:
            switches += 1
    return 1.0 - switches / len(nights)


def _transport_daytime_hours(day) -> float:
    total = 0.0
    for act in day.iter_activities():
        if act.kind != KIND_TRANSPORT or act.resolved_start is None:
            continue
        day_start = datetime.combine(act.resolved_start.date(), DAYTIME_START)
        day_end = datetime.combine(act.resolved_start.date(), DAYTIME_END)
        start = max(act.resolved_start, day_start)
        end = min(act.resolved_end, day_end)
        if end > start:
            total += (end - start).total_seconds() / 3600.0
    return total


def score_daytime_utilization(resolved: Itinerary) -> float:
    """Penalize days whose morning and afternoon both hold no attraction,
    unless transport consumed most of the daytime."""
    violating = 0
    for day in resolved.days:
        has_daytime_poi = any(
            act.kind == KIND_POI
            for block in day.blocks
            if block.period in ("Morning", "Afternoon")
            for act in block.activities
        )
        if has_daytime_poi:
            continue
        if _transport_daytime_hours(day) >= DAYTIME_TRANSPORT_EXEMPT_HOURS:
            continue
        violating += 1
    return 1.0 - violating / len(resolved.days)


def _poi_occurrences(itinerary: Itinerary) -> list[str]:
    """Attraction keys in visit order, merging back-to-back repeats within
    a day into one continued visit."""
    merged: list[str] = []
    for day in itinerary.days:
        prev_key: Optional[str] = None
        for act in day.iter_activities():
            if act.kind != KIND_POI:
                continue
            key = act.id if act.id else f"ext::{act.name}"
            if key != prev_key:
                merged.append(key)
            prev_key = key
    return merged


def score_unique_attractions(itinerary: Itinerary) -> float:
    """max(0, 1 - |dup|/|total| - sum((n-1)^2 * 0.05)/|total|)."""
    occurrences = _poi_occurrences(itinerary)
    total = len(occurrences)
    if total == 0:
        return 1.0
    counts: dict[str, int] = {}
    for key in occurrences:
        counts[key] = counts.get(key, 0) + 1
    dup_count = sum(1 for n in counts.values() if n > 1)
    exp_penalty = sum((n - 1) ** 2 * 0.05 for n in counts.values() if n > 1)
    return max(0.0, 1.0 - dup_count / total - exp_penalty / total)


def score_location_clustering(itinerary: Itinerary, catalog: ReferenceCatalog) -> float:
    """Penalize consecutive same-day attraction pairs that land in the top
    20% farthest of all pairs (strictly above the nearest-rank 80th
    percentile). Fewer than five pairs, or no spread at all, scores 1."""
    distances = []
    total_pois = 0
    for day in itinerary.days:
        located = []
        for act in day.iter_activities():
            if act.kind != KIND_POI:
                continue
            total_pois += 1
            poi = catalog.pois.get(act.id) if act.id else None
            if poi is not None:
                located.append((poi.lat, poi.lon))
        for p, q in zip(located, located[1:]):
            distances.append(haversine_km(p, q))
    if len(distances) < MIN_CLUSTER_PAIRS or total_pois == 0:
        return 1.0
    ordered = sorted(distances)
    rank = math.ceil(0.8 * len(ordered))
    threshold = ordered[rank - 1]
    above = sum(1 for d in distances if d > threshold)
    return max(0.0, 1.0 - above / total_pois)


def likert_to_unit(rating: int) -> float:
    """Map a 1..5 rating onto [0, 1]."""
    return (rating - 1) / 4.0


def score_likert_subscores(itinerary_text: str, judge=None) -> tuple[float, float, str, str]:
    """(iconic, diversity, iconic_source, diversity_source).

    With no judge both components take the neutral 0.5 default.
    """
    if judge is None:
        return 0.5, 0.5, SOURCE_RULE_ONLY, SOURCE_RULE_ONLY
    iconic = judge.rate_iconic(itinerary_text)
    diversity = judge.rate_diversity(itinerary_text)
    return (
        likert_to_unit(iconic.rating),
        likert_to_unit(diversity.rating),
        SOURCE_JUDGE,
        SOURCE_JUDGE,
    )


def score_soft(
    itinerary: Itinerary,
    resolved: Itinerary,
    catalog: ReferenceCatalog,
    itinerary_text: str = "",
    judge=None,
) -> SoftVector:
    iconic, diversity, iconic_src, diversity_src = score_likert_subscores(itinerary_text, judge)
    return SoftVector(
        schedule=score_schedule_density(resolved),
        hotel=score_hotel_consistency(itinerary, catalog),
        daytime=score_daytime_utilization(resolved),
        unique=score_unique_attractions(itinerary),
        clustering=score_location_clustering(itinerary, catalog),
        iconic=iconic,
        diversity=diversity,
        iconic_source=iconic_src,
        diversity_source=diversity_src,
    )
