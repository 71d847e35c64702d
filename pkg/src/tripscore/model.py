"""Core domain types and time/geo primitives.

Everything here is immutable after construction, so values can be shared
freely across concurrent evaluators. Schema validation lives in
:mod:`tripscore.ingest`; these classes hold already-structured data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import date, datetime, time, timedelta
from typing import Optional

EARTH_RADIUS_KM = 6371.0088

PERIOD_MORNING = "Morning"
PERIOD_AFTERNOON = "Afternoon"
PERIOD_EVENING = "Evening"
PERIODS = (PERIOD_MORNING, PERIOD_AFTERNOON, PERIOD_EVENING)

KIND_POI = "poi"
KIND_HOTEL = "hotel"
KIND_TRANSPORT = "transportation"
ACTIVITY_KINDS = (KIND_POI, KIND_HOTEL, KIND_TRANSPORT)

TRANSPORT_MODES = ("train", "flight", "bus", "driving", "ferry", "ship")
EFFORT_CLASSES = ("hiking", "themePark", "mountainClimbing", "cycling", "other")

BUDGET_LEVELS = ("costEffective", "comfortable", "highEnd")
PACING_LEVELS = ("relaxed", "moderate", "compact")
EFFORT_LEVELS = ("light", "moderate", "strenuous")
SPLITS = ("synthetic", "realWorld")

# Visit length assumed when the catalog does not state one.
DEFAULT_POI_HOURS = 2.0

# Rule-checked constraint identifiers.
RESPONSE_FORMAT = "ResponseFormat"
INFORMATION_VERIFICATION = "InformationVerification"
INFORMATION_ACCURACY = "InformationAccuracy"
INFORMATION_RELEVANCE = "InformationRelevance"
FORMAT_CONSTRAINTS = (
    RESPONSE_FORMAT,
    INFORMATION_VERIFICATION,
    INFORMATION_ACCURACY,
    INFORMATION_RELEVANCE,
)

INFORMATION_COMPLETENESS = "InformationCompleteness"
CHRONOLOGICAL_ORDER = "ChronologicalOrder"
LOCATION_CONSISTENCY = "LocationConsistency"
OPERATING_HOURS = "OperatingHours"
TRAVEL_BLOCKOUT = "TravelBlockOut"
TRANSPORT_CONSISTENCY = "TransportConsistency"
COMMONSENSE_CONSTRAINTS = (
    INFORMATION_COMPLETENESS,
    CHRONOLOGICAL_ORDER,
    LOCATION_CONSISTENCY,
    OPERATING_HOURS,
    TRAVEL_BLOCKOUT,
    TRANSPORT_CONSISTENCY,
)

RULE_CONSTRAINTS = FORMAT_CONSTRAINTS + COMMONSENSE_CONSTRAINTS

SOFT_COMPONENTS = ("schedule", "hotel", "daytime", "unique", "clustering", "iconic", "diversity")
SYNTHETIC_PREF_COMPONENTS = ("budget", "pacing", "attraction", "effort")

SOURCE_JUDGE = "judge"
SOURCE_RULE_ONLY = "ruleOnlyDefault"


@dataclass(frozen=True)
class EntityLink:
    """One ``**[Name](id)**`` reference extracted from a block description.

    ``target_id`` is None for the external-attraction form ``**[Name]**``.
    """

    name: str
    target_id: Optional[str]


@dataclass(frozen=True)
class Activity:
    kind: str
    id: str
    name: str
    resolved_start: Optional[datetime] = None
    resolved_end: Optional[datetime] = None

    @property
    def is_external_poi(self) -> bool:
        return self.kind == KIND_POI and self.id == ""


@dataclass(frozen=True)
class PeriodBlock:
    period: str
    description: str
    activities: tuple[Activity, ...]
    links: tuple[EntityLink, ...] = ()


@dataclass(frozen=True)
class DayPlan:
    day_index: int
    schedule_title: str
    blocks: tuple[PeriodBlock, ...]

    def iter_activities(self):
        for block in self.blocks:
            yield from block.activities


@dataclass(frozen=True)
class Tips:
    title: str
    info: str


@dataclass(frozen=True)
class Itinerary:
    itinerary_name: str
    recommend_reason: str
    days: tuple[DayPlan, ...]
    tips: Optional[Tips] = None

    def iter_activities(self):
        for day in self.days:
            for block in day.blocks:
                for act in block.activities:
                    yield day, block, act


@dataclass(frozen=True)
class OpenRule:
    """Daily open window valid between two dates (inclusive)."""

    date_from: date
    date_to: date
    open_time: time
    close_time: time


@dataclass(frozen=True)
class Poi:
    id: str
    name: str
    city: str
    lat: float
    lon: float
    # None means the calendar is unknown, which is distinct from "closed":
    # unknown calendars can never produce an operating-hours violation.
    open_calendar: Optional[tuple[OpenRule, ...]] = None
    tags: frozenset[str] = frozenset()
    recommended_duration_hours: Optional[float] = None
    effort_class: str = "other"


@dataclass(frozen=True)
class Hotel:
    id: str
    name: str
    city: str
    stars: int
    lat: float
    lon: float


@dataclass(frozen=True)
class TransportLeg:
    id: str
    number: str
    mode: str
    origin_city: str
    destination_city: str
    depart_local: datetime
    arrive_local: datetime


@dataclass(frozen=True)
class ReferenceCatalog:
    pois: dict[str, Poi]
    hotels: dict[str, Hotel]
    transports: dict[str, TransportLeg]

    def lookup_city(self, activity: Activity) -> Optional[str]:
        """City an activity takes place in, or None when unresolvable."""
        if activity.kind == KIND_POI:
            poi = self.pois.get(activity.id)
            return poi.city if poi else None
        if activity.kind == KIND_HOTEL:
            hotel = self.hotels.get(activity.id)
            return hotel.city if hotel else None
        return None


@dataclass(frozen=True)
class PreferenceProfile:
    budget: Optional[str] = None
    pacing: Optional[str] = None
    attraction_tags: Optional[frozenset[str]] = None
    effort: Optional[str] = None


@dataclass(frozen=True)
class Query:
    query_id: str
    origin_city: str
    destinations: tuple[str, ...]
    start_date: date
    duration_days: int
    split: str = "synthetic"
    preferences: PreferenceProfile = field(default_factory=PreferenceProfile)
    request_text: str = ""


@dataclass(frozen=True)
class Violation:
    constraint_id: str
    day_index: Optional[int]
    detail: str


@dataclass(frozen=True)
class SoftVector:
    """Seven soft quality components, each in [0, 1].

    ``iconic`` and ``diversity`` come from a judge when one is configured,
    otherwise they hold the neutral 0.5 default and are tagged as such.
    """

    schedule: float
    hotel: float
    daytime: float
    unique: float
    clustering: float
    iconic: float
    diversity: float
    iconic_source: str = SOURCE_RULE_ONLY
    diversity_source: str = SOURCE_RULE_ONLY

    def as_array(self) -> tuple[float, ...]:
        return (
            self.schedule,
            self.hotel,
            self.daytime,
            self.unique,
            self.clustering,
            self.iconic,
            self.diversity,
        )


@dataclass(frozen=True)
class PrefVector:
    """Preference sub-scores; exactly one arm is populated per query split.

    Synthetic queries fill any of (budget, pacing, attraction, effort); a
    ``None`` slot means the query never stated that preference and the slot
    is excluded from the weighted mean. Real-world queries fill only
    ``user_request``.
    """

    budget: Optional[float] = None
    pacing: Optional[float] = None
    attraction: Optional[float] = None
    effort: Optional[float] = None
    user_request: Optional[float] = None
    user_request_source: str = SOURCE_RULE_ONLY

    def synthetic_items(self) -> list[tuple[str, float]]:
        out = []
        for name in SYNTHETIC_PREF_COMPONENTS:
            value = getattr(self, name if name != "attraction" else "attraction")
            if value is not None:
                out.append((name, value))
        return out


@dataclass(frozen=True)
class ScoreBreakdown:
    format_score: int
    commonsense_score: Optional[int]
    soft: Optional[SoftVector]
    pref: Optional[PrefVector]
    violations: tuple[Violation, ...]
    reward: float
    split: str = "synthetic"

    @property
    def format_passed(self) -> bool:
        return self.format_score == 1

    @property
    def commonsense_passed(self) -> bool:
        return self.commonsense_score == 1


@dataclass(frozen=True)
class WeightConfig:
    """Learnable aggregation weights.

    ``w1`` follows the soft component order (schedule, hotel, daytime,
    unique, clustering, iconic, diversity). ``w2_synthetic`` follows
    (budget, pacing, attraction, effort); real-world queries carry a single
    preference dimension. All weights must be strictly positive.
    """

    w1: tuple[float, ...]
    w2_synthetic: tuple[float, ...]
    w2_real: tuple[float, ...]
    w3: float
    w4_synthetic: float
    w4_real: float

    def __post_init__(self):
        if len(self.w1) != 7:
            raise ValueError("w1 must have 7 components")
        if len(self.w2_synthetic) != 4:
            raise ValueError("w2_synthetic must have 4 components")
        for w in (*self.w1, *self.w2_synthetic, *self.w2_real,
                  self.w3, self.w4_synthetic, self.w4_real):
            if not w > 0:
                raise ValueError("all weights must be > 0")

    def w2(self, split: str) -> tuple[float, ...]:
        return self.w2_synthetic if split == "synthetic" else self.w2_real

    def w4(self, split: str) -> float:
        return self.w4_synthetic if split == "synthetic" else self.w4_real


# Stock calibrated weights shipped with the engine.
DEFAULT_WEIGHTS = WeightConfig(
    w1=(0.70, 0.50, 0.40, 0.20, 0.70, 0.10, 0.20),
    w2_synthetic=(0.60, 0.60, 0.20, 0.60),
    w2_real=(1.0,),
    w3=1.0,
    w4_synthetic=0.10,
    w4_real=1.40,
)


@dataclass(frozen=True)
class AnnotationPair:
    pair_id: str
    query_id: str
    plan_a: Itinerary
    plan_b: Itinerary
    rater_labels: tuple[str, ...]
    majority_label: Optional[str] = None


def haversine_km(p: tuple[float, float], q: tuple[float, float]) -> float:
    """Great-circle distance in kilometres between two (lat, lon) points."""
    lat1, lon1 = math.radians(p[0]), math.radians(p[1])
    lat2, lon2 = math.radians(q[0]), math.radians(q[1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    a = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


_PERIOD_WINDOWS = {
    PERIOD_MORNING: (time(8, 0), time(12, 0)),
    PERIOD_AFTERNOON: (time(12, 0), time(18, 0)),
    PERIOD_EVENING: (time(18, 0), time(23, 0)),
}


def period_window(period: str) -> tuple[time, time]:
    """Clock bounds of a period block: Morning [08,12), Afternoon [12,18), Evening [18,23)."""
    return _PERIOD_WINDOWS[period]


def period_of_time(t: time) -> str:
    """Period a clock time belongs to, extended to cover the whole day."""
    if t < time(12, 0):
        return PERIOD_MORNING
    if t < time(18, 0):
        return PERIOD_AFTERNOON
    return PERIOD_EVENING


def day_date(start_date: date, day_index: int) -> date:
    return start_date + timedelta(days=day_index - 1)


def resolve_activity_times(
    itinerary: Itinerary,
    catalog: ReferenceCatalog,
    start_date: date,
) -> tuple[Itinerary, list[str]]:
    """Fill resolved start/end datetimes on every activity.

    Transport activities copy the catalog leg's clock times onto the day
    they are scheduled (arrivals earlier than the departure roll past
    midnight). POIs start at the later of the period opening and the
    running day cursor, lasting the catalog's recommended duration or the
    2-hour default. Hotel nights anchor as zero-length markers at the end
    of the day. Deterministic and idempotent; unknown non-empty ids are
    reported in the returned note list, never raised.
    """
    notes: list[str] = []
    new_days = []
    for day in itinerary.days:
        the_date = day_date(start_date, day.day_index)
        cursor = datetime.combine(the_date, time(0, 0))
        new_blocks = []
        for block in day.blocks:
            window_start, _ = period_window(block.period) if block.period in _PERIOD_WINDOWS else (time(8, 0), None)
            period_start = datetime.combine(the_date, window_start)
            new_acts = []
            for act in block.activities:
                if act.kind == KIND_TRANSPORT:
                    leg = catalog.transports.get(act.id)
                    if leg is None:
                        notes.append(f"unknown transportation id {act.id!r}")
                        new_acts.append(replace(act, resolved_start=None, resolved_end=None))
                        continue
                    start = datetime.combine(the_date, leg.depart_local.time())
                    end = datetime.combine(the_date, leg.arrive_local.time())
                    if end <= start:
                        end += timedelta(days=1)
                    cursor = max(cursor, end)
                    new_acts.append(replace(act, resolved_start=start, resolved_end=end))
                elif act.kind == KIND_HOTEL:
                    if act.id not in catalog.hotels:
                        notes.append(f"unknown hotel id {act.id!r}")
                    anchor = max(cursor, datetime.combine(the_date, time(23, 0)))
                    cursor = anchor
                    new_acts.append(replace(act, resolved_start=anchor, resolved_end=anchor))
                else:
                    poi = catalog.pois.get(act.id) if act.id else None
                    if act.id and poi is None:
                        notes.append(f"unknown poi id {act.id!r}")
                    hours = DEFAULT_POI_HOURS
                    if poi is not None and poi.recommended_duration_hours is not None:
                        hours = poi.recommended_duration_hours
                    start = max(period_start, cursor)
                    end = start + timedelta(hours=hours)
                    cursor = end
                    new_acts.append(replace(act, resolved_start=start, resolved_end=end))
            new_blocks.append(replace(block, activities=tuple(new_acts)))
        new_days.append(replace(day, blocks=tuple(new_blocks)))
    return replace(itinerary, days=tuple(new_days)), notes
