"""Loading, serialization, and synthetic fixture generation.

All on-disk formats are JSON (UTF-8, one document per file; annotation
pairs as JSON-lines). ``docs/formats.md`` documents each schema and ships
a golden file. Loaders validate at the boundary so the rest of the engine
can trust its inputs; serializers emit canonical key order so round trips
are byte-stable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from datetime import date, datetime, time, timedelta
from random import Random
from typing import Any, Optional

from .errors import (
    DuplicateId,
    InvalidCoordinate,
    ParseError,
    SchemaError,
    UnsupportedViolation,
)
from .model import (
    ACTIVITY_KINDS,
    BUDGET_LEVELS,
    CHRONOLOGICAL_ORDER,
    EFFORT_CLASSES,
    EFFORT_LEVELS,
    INFORMATION_ACCURACY,
    INFORMATION_COMPLETENESS,
    INFORMATION_RELEVANCE,
    INFORMATION_VERIFICATION,
    KIND_HOTEL,
    KIND_POI,
    KIND_TRANSPORT,
    LOCATION_CONSISTENCY,
    OPERATING_HOURS,
    PACING_LEVELS,
    PERIOD_AFTERNOON,
    PERIOD_EVENING,
    PERIOD_MORNING,
    PERIODS,
    RESPONSE_FORMAT,
    RULE_CONSTRAINTS,
    SPLITS,
    TRANSPORT_CONSISTENCY,
    TRANSPORT_MODES,
    TRAVEL_BLOCKOUT,
    Activity,
    AnnotationPair,
    DayPlan,
    EntityLink,
    Hotel,
    Itinerary,
    OpenRule,
    PeriodBlock,
    Poi,
    PreferenceProfile,
    Query,
    ReferenceCatalog,
    Tips,
    TransportLeg,
    WeightConfig,
    period_window,
    resolve_activity_times,
)

# Matches **[Name](id)** and the external-attraction form **[Name]**.
_LINK_RE = re.compile(r"\*\*\[([^\]]+)\](?:\(([^()]*)\))?\*\*")


def extract_links(description: str) -> tuple[EntityLink, ...]:
    links = []
    for m in _LINK_RE.finditer(description):
        target = m.group(2)
        links.append(EntityLink(name=m.group(1), target_id=target if target else None))
    return tuple(links)


def _require(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{path}{key}" if path.endswith(".") or not path else key, "missing field")
    return obj[key]


def _nonempty_str(value: Any, path: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(path, "expected non-empty string")
    return value


# ---------------------------------------------------------------------------
# Itinerary
# ---------------------------------------------------------------------------

def load_itinerary(text: str) -> Itinerary:
    """Parse and validate a plan document.

    Raises :class:`ParseError` for non-JSON input and :class:`SchemaError`
    naming the first offending field otherwise. Markdown entity links in
    block descriptions are extracted into per-block link lists.
    """
    try:
        raw = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return itinerary_from_dict(raw)


def itinerary_from_dict(raw: Any) -> Itinerary:
    if not isinstance(raw, dict):
        raise SchemaError("$", "expected top-level object")
    name = _nonempty_str(_require(raw, "itineraryName", ""), "itineraryName")
    reason = _nonempty_str(_require(raw, "recommendReason", ""), "recommendReason")
    day_infos = _require(raw, "dayInfos", "")
    if not isinstance(day_infos, list) or not day_infos:
        raise SchemaError("dayInfos", "expected non-empty list")

    days = []
    for i, day_raw in enumerate(day_infos):
        dp = f"dayInfos[{i}]"
        if not isinstance(day_raw, dict):
            raise SchemaError(dp, "expected object")
        day_num = _require(day_raw, "day", dp + ".")
        if isinstance(day_num, bool) or not isinstance(day_num, int):
            raise SchemaError(f"{dp}.day", "expected integer")
        if day_num != i + 1:
            raise SchemaError(f"{dp}.day", f"expected {i + 1}, days must run 1..D with no gaps")
        title = _nonempty_str(_require(day_raw, "scheduleTitle", dp + "."), f"{dp}.scheduleTitle")
        detail = _require(day_raw, "scheduleDetail", dp + ".")
        if not isinstance(detail, list) or not detail:
            raise SchemaError(f"{dp}.scheduleDetail", "expected non-empty list")

        blocks = []
        last_period = -1
        for j, block_raw in enumerate(detail):
            bp = f"{dp}.scheduleDetail[{j}]"
            if not isinstance(block_raw, dict):
                raise SchemaError(bp, "expected object")
            period = _require(block_raw, "period", bp + ".")
            if period not in PERIODS:
                raise SchemaError(f"{bp}.period", f"expected one of {'/'.join(PERIODS)}")
            idx = PERIODS.index(period)
            if idx <= last_period:
                raise SchemaError(
                    f"{bp}.period",
                    "periods must appear in Morning/Afternoon/Evening order, each at most once",
                )
            last_period = idx
            description = _nonempty_str(
                _require(block_raw, "description", bp + "."), f"{bp}.description"
            )
            detail_list = _require(block_raw, "detailList", bp + ".")
            if not isinstance(detail_list, list):
                raise SchemaError(f"{bp}.detailList", "expected list")
            activities = []
            for k, act_raw in enumerate(detail_list):
                ap = f"{bp}.detailList[{k}]"
                if not isinstance(act_raw, dict):
                    raise SchemaError(ap, "expected object")
                kind = _require(act_raw, "type", ap + ".")
                if kind not in ACTIVITY_KINDS:
                    raise SchemaError(f"{ap}.type", f"expected one of {'/'.join(ACTIVITY_KINDS)}")
                act_id = _require(act_raw, "id", ap + ".")
                if not isinstance(act_id, str):
                    raise SchemaError(f"{ap}.id", "expected string")
                act_name = _nonempty_str(_require(act_raw, "name", ap + "."), f"{ap}.name")
                if kind in (KIND_HOTEL, KIND_TRANSPORT) and not act_id:
                    raise SchemaError(f"{ap}.id", f"{kind} entries require a catalog id")
                activities.append(Activity(kind=kind, id=act_id, name=act_name))
            blocks.append(
                PeriodBlock(
                    period=period,
                    description=description,
                    activities=tuple(activities),
                    links=extract_links(description),
                )
            )
        days.append(DayPlan(day_index=day_num, schedule_title=title, blocks=tuple(blocks)))

    tips = None
    if raw.get("tips") is not None:
        tips_raw = raw["tips"]
        if not isinstance(tips_raw, dict):
            raise SchemaError("tips", "expected object")
        tips = Tips(
            title=_nonempty_str(_require(tips_raw, "title", "tips."), "tips.title"),
            info=_nonempty_str(_require(tips_raw, "info", "tips."), "tips.info"),
        )
    return Itinerary(itinerary_name=name, recommend_reason=reason, days=tuple(days), tips=tips)


def itinerary_to_dict(itin: Itinerary) -> dict:
    doc: dict[str, Any] = {
        "itineraryName": itin.itinerary_name,
        "recommendReason": itin.recommend_reason,
        "dayInfos": [
            {
                "day": day.day_index,
                "scheduleTitle": day.schedule_title,
                "scheduleDetail": [
                    {
                        "period": block.period,
                        "description": block.description,
                        "detailList": [
                            {"type": act.kind, "id": act.id, "name": act.name}
                            for act in block.activities
                        ],
                    }
                    for block in day.blocks
                ],
            }
            for day in itin.days
        ],
    }
    if itin.tips is not None:
        doc["tips"] = {"title": itin.tips.title, "info": itin.tips.info}
    return doc


def itinerary_to_json(itin: Itinerary, indent: int = 2) -> str:
    return json.dumps(itinerary_to_dict(itin), indent=indent, ensure_ascii=False)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

def _parse_date(value: Any, path: str) -> date:
    try:
        return date.fromisoformat(value)
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, f"expected YYYY-MM-DD date: {exc}") from exc


def _parse_time(value: Any, path: str) -> time:
    try:
        return time.fromisoformat(value)
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, f"expected HH:MM time: {exc}") from exc


def _parse_datetime(value: Any, path: str) -> datetime:
    try:
        return datetime.fromisoformat(value)
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, f"expected ISO datetime: {exc}") from exc


def _check_coords(lat: Any, lon: Any, path: str) -> tuple[float, float]:
    try:
        lat_f, lon_f = float(lat), float(lon)
    except (TypeError, ValueError) as exc:
        raise InvalidCoordinate(f"{path}: non-numeric coordinate") from exc
    if not (-90.0 <= lat_f <= 90.0 and -180.0 <= lon_f <= 180.0):
        raise InvalidCoordinate(f"{path}: lat={lat_f} lon={lon_f} outside valid range")
    return lat_f, lon_f


def load_catalog(path: str) -> ReferenceCatalog:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read catalog: {exc}") from exc
    return catalog_from_json(text)


def catalog_from_json(text: str) -> ReferenceCatalog:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid catalog JSON: {exc}") from exc
    return catalog_from_dict(raw)


def catalog_from_dict(raw: Any) -> ReferenceCatalog:
    if not isinstance(raw, dict):
        raise SchemaError("$", "expected top-level object")

    pois: dict[str, Poi] = {}
    for i, p in enumerate(raw.get("pois", [])):
        pp = f"pois[{i}]"
        pid = _nonempty_str(_require(p, "id", pp + "."), f"{pp}.id")
        if pid in pois:
            raise DuplicateId(f"duplicate poi id {pid!r}")
        lat, lon = _check_coords(_require(p, "lat", pp + "."), _require(p, "lon", pp + "."), pp)
        calendar_raw = p.get("openCalendar")
        calendar: Optional[tuple[OpenRule, ...]] = None
        if calendar_raw is not None:
            if not isinstance(calendar_raw, list):
                raise SchemaError(f"{pp}.openCalendar", "expected list or null")
            rules = []
            for j, rule in enumerate(calendar_raw):
                rp = f"{pp}.openCalendar[{j}]"
                open_t = _parse_time(_require(rule, "open", rp + "."), f"{rp}.open")
                close_t = _parse_time(_require(rule, "close", rp + "."), f"{rp}.close")
                if not open_t < close_t:
                    raise SchemaError(f"{rp}.close", "open window requires open < close")
                rules.append(
                    OpenRule(
                        date_from=_parse_date(_require(rule, "from", rp + "."), f"{rp}.from"),
                        date_to=_parse_date(_require(rule, "to", rp + "."), f"{rp}.to"),
                        open_time=open_t,
                        close_time=close_t,
                    )
                )
            calendar = tuple(rules)
        effort = p.get("effortClass", "other")
        if effort not in EFFORT_CLASSES:
            raise SchemaError(f"{pp}.effortClass", f"expected one of {'/'.join(EFFORT_CLASSES)}")
        duration = p.get("recommendedDurationHours")
        if duration is not None:
            duration = float(duration)
            if duration <= 0:
                raise SchemaError(f"{pp}.recommendedDurationHours", "expected positive number")
        pois[pid] = Poi(
            id=pid,
            name=_nonempty_str(_require(p, "name", pp + "."), f"{pp}.name"),
            city=_nonempty_str(_require(p, "city", pp + "."), f"{pp}.city"),
            lat=lat,
            lon=lon,
            open_calendar=calendar,
            tags=frozenset(p.get("tags", [])),
            recommended_duration_hours=duration,
            effort_class=effort,
        )

    hotels: dict[str, Hotel] = {}
    for i, h in enumerate(raw.get("hotels", [])):
        hp = f"hotels[{i}]"
        hid = _nonempty_str(_require(h, "id", hp + "."), f"{hp}.id")
        if hid in hotels:
            raise DuplicateId(f"duplicate hotel id {hid!r}")
        lat, lon = _check_coords(_require(h, "lat", hp + "."), _require(h, "lon", hp + "."), hp)
        stars = _require(h, "stars", hp + ".")
        if isinstance(stars, bool) or not isinstance(stars, int) or not 0 <= stars <= 5:
            raise SchemaError(f"{hp}.stars", "expected integer 0..5")
        hotels[hid] = Hotel(
            id=hid,
            name=_nonempty_str(_require(h, "name", hp + "."), f"{hp}.name"),
            city=_nonempty_str(_require(h, "city", hp + "."), f"{hp}.city"),
            stars=stars,
            lat=lat,
            lon=lon,
        )

    transports: dict[str, TransportLeg] = {}
    for i, t in enumerate(raw.get("transports", [])):
        tp = f"transports[{i}]"
        tid = _nonempty_str(_require(t, "id", tp + "."), f"{tp}.id")
        if tid in transports:
            raise DuplicateId(f"duplicate transport id {tid!r}")
        mode = _require(t, "mode", tp + ".")
        if mode not in TRANSPORT_MODES:
            raise SchemaError(f"{tp}.mode", f"expected one of {'/'.join(TRANSPORT_MODES)}")
        depart = _parse_datetime(_require(t, "departLocal", tp + "."), f"{tp}.departLocal")
        arrive = _parse_datetime(_require(t, "arriveLocal", tp + "."), f"{tp}.arriveLocal")
        if not depart < arrive:
            raise SchemaError(f"{tp}.arriveLocal", "departLocal must precede arriveLocal")
        transports[tid] = TransportLeg(
            id=tid,
            number=_nonempty_str(_require(t, "number", tp + "."), f"{tp}.number"),
            mode=mode,
            origin_city=_nonempty_str(_require(t, "originCity", tp + "."), f"{tp}.originCity"),
            destination_city=_nonempty_str(
                _require(t, "destinationCity", tp + "."), f"{tp}.destinationCity"
            ),
            depart_local=depart,
            arrive_local=arrive,
        )

    return ReferenceCatalog(pois=pois, hotels=hotels, transports=transports)


def catalog_to_dict(catalog: ReferenceCatalog) -> dict:
    return {
        "pois": [
            {
                "id": p.id,
                "name": p.name,
                "city": p.city,
                "lat": p.lat,
                "lon": p.lon,
                "openCalendar": None
                if p.open_calendar is None
                else [
                    {
                        "from": r.date_from.isoformat(),
                        "to": r.date_to.isoformat(),
                        "open": r.open_time.strftime("%H:%M"),
                        "close": r.close_time.strftime("%H:%M"),
                    }
                    for r in p.open_calendar
                ],
                "tags": sorted(p.tags),
                "recommendedDurationHours": p.recommended_duration_hours,
                "effortClass": p.effort_class,
            }
            for p in catalog.pois.values()
        ],
        "hotels": [
            {"id": h.id, "name": h.name, "city": h.city, "stars": h.stars, "lat": h.lat, "lon": h.lon}
            for h in catalog.hotels.values()
        ],
        "transports": [
            {
                "id": t.id,
                "number": t.number,
                "mode": t.mode,
                "originCity": t.origin_city,
                "destinationCity": t.destination_city,
                "departLocal": t.depart_local.strftime("%Y-%m-%dT%H:%M"),
                "arriveLocal": t.arrive_local.strftime("%Y-%m-%dT%H:%M"),
            }
            for t in catalog.transports.values()
        ],
    }


def catalog_to_json(catalog: ReferenceCatalog, indent: int = 2) -> str:
    return json.dumps(catalog_to_dict(catalog), indent=indent, ensure_ascii=False)


# ---------------------------------------------------------------------------
# Query
# ---------------------------------------------------------------------------

def query_from_dict(raw: Any) -> Query:
    if not isinstance(raw, dict):
        raise SchemaError("$", "expected object")
    split = raw.get("split", "synthetic")
    if split not in SPLITS:
        raise SchemaError("split", f"expected one of {'/'.join(SPLITS)}")
    dests = _require(raw, "destinations", "")
    if not isinstance(dests, list) or not dests:
        raise SchemaError("destinations", "expected non-empty list")
    duration = _require(raw, "durationDays", "")
    if isinstance(duration, bool) or not isinstance(duration, int) or duration < 1:
        raise SchemaError("durationDays", "expected positive integer")

    prefs_raw = raw.get("preferences") or {}
    budget = prefs_raw.get("budget")
    if budget is not None and budget not in BUDGET_LEVELS:
        raise SchemaError("preferences.budget", f"expected one of {'/'.join(BUDGET_LEVELS)}")
    pacing = prefs_raw.get("pacing")
    if pacing is not None and pacing not in PACING_LEVELS:
        raise SchemaError("preferences.pacing", f"expected one of {'/'.join(PACING_LEVELS)}")
    effort = prefs_raw.get("effort")
    if effort is not None and effort not in EFFORT_LEVELS:
        raise SchemaError("preferences.effort", f"expected one of {'/'.join(EFFORT_LEVELS)}")
    tags_raw = prefs_raw.get("attractionTags")
    tags = frozenset(tags_raw) if tags_raw is not None else None

    return Query(
        query_id=_nonempty_str(_require(raw, "queryId", ""), "queryId"),
        origin_city=_nonempty_str(_require(raw, "originCity", ""), "originCity"),
        destinations=tuple(dests),
        start_date=_parse_date(_require(raw, "startDate", ""), "startDate"),
        duration_days=duration,
        split=split,
        preferences=PreferenceProfile(
            budget=budget, pacing=pacing, attraction_tags=tags, effort=effort
        ),
        request_text=raw.get("requestText", ""),
    )


def query_to_dict(query: Query) -> dict:
    prefs: dict[str, Any] = {}
    if query.preferences.budget is not None:
        prefs["budget"] = query.preferences.budget
    if query.preferences.pacing is not None:
        prefs["pacing"] = query.preferences.pacing
    if query.preferences.attraction_tags is not None:
        prefs["attractionTags"] = sorted(query.preferences.attraction_tags)
    if query.preferences.effort is not None:
        prefs["effort"] = query.preferences.effort
    return {
        "queryId": query.query_id,
        "originCity": query.origin_city,
        "destinations": list(query.destinations),
        "startDate": query.start_date.isoformat(),
        "durationDays": query.duration_days,
        "split": query.split,
        "preferences": prefs,
        "requestText": query.request_text,
    }


def load_queries(path: str) -> dict[str, Query]:
    """Load a JSON array of queries keyed by queryId."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read queries: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid queries JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise SchemaError("$", "expected list of queries")
    out: dict[str, Query] = {}
    for item in raw:
        q = query_from_dict(item)
        if q.query_id in out:
            raise DuplicateId(f"duplicate queryId {q.query_id!r}")
        out[q.query_id] = q
    return out


# ---------------------------------------------------------------------------
# Annotation pairs (JSON-lines)
# ---------------------------------------------------------------------------

def pair_from_dict(raw: Any) -> AnnotationPair:
    if not isinstance(raw, dict):
        raise SchemaError("$", "expected object")
    labels = _require(raw, "raterLabels", "")
    if not isinstance(labels, list) or not labels:
        raise SchemaError("raterLabels", "expected non-empty list")
    for label in labels:
        if label not in ("A", "B", "neither"):
            raise SchemaError("raterLabels", "labels must be A, B, or neither")
    majority = raw.get("majorityLabel")
    if majority is not None and majority not in ("A", "B", "neither"):
        raise SchemaError("majorityLabel", "must be A, B, or neither")
    return AnnotationPair(
        pair_id=_nonempty_str(_require(raw, "pairId", ""), "pairId"),
        query_id=_nonempty_str(_require(raw, "queryId", ""), "queryId"),
        plan_a=itinerary_from_dict(_require(raw, "planA", "")),
        plan_b=itinerary_from_dict(_require(raw, "planB", "")),
        rater_labels=tuple(labels),
        majority_label=majority,
    )


def pair_to_dict(pair: AnnotationPair) -> dict:
    doc = {
        "pairId": pair.pair_id,
        "queryId": pair.query_id,
        "planA": itinerary_to_dict(pair.plan_a),
        "planB": itinerary_to_dict(pair.plan_b),
        "raterLabels": list(pair.rater_labels),
    }
    if pair.majority_label is not None:
        doc["majorityLabel"] = pair.majority_label
    return doc


def load_pairs(path: str) -> list[AnnotationPair]:
    pairs = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    raw = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"line {lineno}: invalid JSON: {exc}") from exc
                pairs.append(pair_from_dict(raw))
    except OSError as exc:
        raise ParseError(f"cannot read pairs: {exc}") from exc
    return pairs


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------

_W1_KEYS = ("schedule", "hotel", "daytime", "unique", "clustering", "iconic", "diversity")
_W2_KEYS = ("budget", "pacing", "attraction", "effort")


def weights_from_dict(raw: Any) -> WeightConfig:
    if not isinstance(raw, dict):
        raise SchemaError("$", "expected object")
    w1_raw = _require(raw, "w1", "")
    w2_raw = _require(raw, "w2", "")
    w4_raw = _require(raw, "w4", "")
    try:
        return WeightConfig(
            w1=tuple(float(w1_raw[k]) for k in _W1_KEYS),
            w2_synthetic=tuple(float(w2_raw["synthetic"][k]) for k in _W2_KEYS),
            w2_real=(float(w2_raw["realWorld"]["userRequest"]),),
            w3=float(_require(raw, "w3", "")),
            w4_synthetic=float(w4_raw["synthetic"]),
            w4_real=float(w4_raw["realWorld"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("weights", f"malformed weight config: {exc}") from exc


def weights_to_dict(w: WeightConfig) -> dict:
    return {
        "w1": dict(zip(_W1_KEYS, w.w1)),
        "w2": {
            "synthetic": dict(zip(_W2_KEYS, w.w2_synthetic)),
            "realWorld": {"userRequest": w.w2_real[0]},
        },
        "w3": w.w3,
        "w4": {"synthetic": w.w4_synthetic, "realWorld": w.w4_real},
    }


def load_weights(path: str) -> WeightConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read weights: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid weights JSON: {exc}") from exc
    return weights_from_dict(raw)


# ---------------------------------------------------------------------------
# Fixture generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixtureSpec:
    """Deterministic recipe for one synthetic fixture.

    The seed fully determines the output; identical specs serialize to
    byte-identical fixtures.
    """

    seed: int
    cities_count: int = 1
    pois_per_city: int = 8
    duration_days: int = 3
    planted: tuple[str, ...] = ()


_CITY_NAMES = (
    "Aurora", "Brightvale", "Cresthaven", "Duskfield", "Emberton",
    "Fernwick", "Gladebourne", "Hollowpine", "Islemoor", "Juniper Falls",
)
_POI_NOUNS = (
    "Museum", "Gallery", "Old Town Hall", "Botanic Garden", "Clock Tower",
    "Riverside Market", "Heritage House", "Science Centre", "Harbour Walk",
    "Observatory",
)
_ORIGIN = "Portby"
_OFF_CITY = "Farholt"


def _city_name(i: int) -> str:
    if i < len(_CITY_NAMES):
        return _CITY_NAMES[i]
    return f"{_CITY_NAMES[i % len(_CITY_NAMES)]} {i // len(_CITY_NAMES) + 2}"


def _poi_name(city: str, k: int) -> str:
    noun = _POI_NOUNS[k % len(_POI_NOUNS)]
    if k < len(_POI_NOUNS):
        return f"{city} {noun}"
    return f"{city} {noun} {k // len(_POI_NOUNS) + 2}"


def _fmt(dt: datetime) -> str:
    return dt.strftime("%H:%M")


def _render_block(block: PeriodBlock, catalog: ReferenceCatalog) -> PeriodBlock:
    sentences = []
    for act in block.activities:
        if act.kind == KIND_TRANSPORT:
            leg = catalog.transports.get(act.id)
            if leg is not None:
                sentences.append(
                    f"Take **[{act.name}]({act.id})** departing {_fmt(leg.depart_local)}, "
                    f"arriving {_fmt(leg.arrive_local)}."
                )
            else:
                sentences.append(f"Take **[{act.name}]({act.id})**.")
        elif act.kind == KIND_HOTEL:
            sentences.append(f"Check in at **[{act.name}]({act.id})** for the night.")
        elif act.is_external_poi:
            sentences.append(f"Visit **[{act.name}]**.")
        else:
            sentences.append(f"Visit **[{act.name}]({act.id})**.")
    description = " ".join(sentences) if sentences else "Free time to explore at leisure."
    return replace(block, description=description, links=extract_links(description))


def _day_city_allocation(cities: list[str], duration: int) -> list[str]:
    """City the traveler sleeps/tours in for each day, spread evenly."""
    n = len(cities)
    base, extra = divmod(duration, n)
    alloc = []
    for i, city in enumerate(cities):
        alloc.extend([city] * (base + (1 if i < extra else 0)))
    return alloc[:duration]


class _Builder:
    def __init__(self, spec: FixtureSpec):
        self.spec = spec
        self.rng = Random(spec.seed)
        self.manifest: list[dict] = []

    def build(self) -> tuple[Query, ReferenceCatalog, Itinerary]:
        spec = self.spec
        for cid in spec.planted:
            if cid not in RULE_CONSTRAINTS:
                raise UnsupportedViolation(f"cannot plant {cid!r}")
        cities = [_city_name(i) for i in range(spec.cities_count)]
        start = date(2025, 5, 1) + timedelta(days=self.rng.randrange(28))
        duration = spec.duration_days
        alloc = _day_city_allocation(cities, duration)
        if len(alloc) < duration:
            raise UnsupportedViolation("more cities than days")

        # Per-city visit schedule needs 3 POIs per day plus one reserved spare.
        per_city_days: dict[str, int] = {}
        for city in alloc:
            per_city_days[city] = per_city_days.get(city, 0) + 1
        pois_needed = {c: 3 * d + 1 for c, d in per_city_days.items()}

        catalog = self._build_catalog(cities, pois_needed, start, duration, alloc)
        query = Query(
            query_id=f"q-{spec.seed:08d}",
            origin_city=_ORIGIN,
            destinations=tuple(cities),
            start_date=start,
            duration_days=duration,
            split="synthetic",
            preferences=PreferenceProfile(
                budget="comfortable",
                pacing="moderate",
                attraction_tags=frozenset({"museum"}),
                effort="light",
            ),
            request_text=(
                f"{duration} day trip from {_ORIGIN} to {', '.join(cities)} with a "
                "comfortable hotel, moderate pacing and plenty of museums."
            ),
        )
        itinerary = self._build_itinerary(query, catalog, alloc)

        itinerary, catalog = self._apply_structural_mutations(itinerary, catalog, query)
        itinerary = self._render(itinerary, catalog)
        itinerary = self._apply_text_mutations(itinerary)
        return query, catalog, itinerary

    # -- catalog ------------------------------------------------------------

    def _build_catalog(self, cities, pois_needed, start, duration, alloc):
        cal_from = start - timedelta(days=1)
        cal_to = start + timedelta(days=duration + 1)
        wide = (OpenRule(cal_from, cal_to, time(6, 0), time(23, 0)),)

        pois: dict[str, Poi] = {}
        hotels: dict[str, Hotel] = {}
        transports: dict[str, TransportLeg] = {}

        all_cities = cities + [_OFF_CITY]
        for ci, city in enumerate(all_cities):
            lat = 30.0
            lon = 10.0 + 1.5 * (ci + 1)
            count = max(self.spec.pois_per_city, pois_needed.get(city, 0))
            for k in range(count):
                pid = f"P{ci + 1}-{k + 1}"
                spare = k == count - 1
                pois[pid] = Poi(
                    id=pid,
                    name=_poi_name(city, k),
                    city=city,
                    lat=lat,
                    lon=lon,
                    open_calendar=None if (spare or city == _OFF_CITY) else wide,
                    tags=frozenset({"museum", "history"} if k % 2 == 0 else {"museum"}),
                    recommended_duration_hours=None,
                    effort_class="other",
                )
            hotels[f"H{ci + 1}"] = Hotel(
                id=f"H{ci + 1}",
                name=f"{city} Grand Hotel",
                city=city,
                stars=4,
                lat=lat + 0.005,
                lon=lon,
            )
            hotels[f"H{ci + 1}b"] = Hotel(
                id=f"H{ci + 1}b",
                name=f"{city} Budget Inn",
                city=city,
                stars=2,
                lat=lat + 0.010,
                lon=lon,
            )

        leg_no = 0

        def add_leg(origin, dest, day_index, dep, arr):
            nonlocal leg_no
            leg_no += 1
            tid = f"T{leg_no}"
            d = start + timedelta(days=day_index - 1)
            transports[tid] = TransportLeg(
                id=tid,
                number=f"XX{100 + leg_no}",
                mode="train",
                origin_city=origin,
                destination_city=dest,
                depart_local=datetime.combine(d, dep),
                arrive_local=datetime.combine(d, arr),
            )
            return tid

        self._outbound = add_leg(_ORIGIN, cities[0], 1, time(9, 10), time(11, 0))
        self._transition_legs = {}
        for day_index in range(2, duration + 1):
            if alloc[day_index - 1] != alloc[day_index - 2]:
                tid = add_leg(alloc[day_index - 2], alloc[day_index - 1], day_index, time(9, 0), time(10, 30))
                self._transition_legs[day_index] = tid
        if duration == 1:
            self._return_leg = add_leg(cities[-1], _ORIGIN, 1, time(18, 30), time(20, 15))
        else:
            self._return_leg = add_leg(alloc[-1], _ORIGIN, duration, time(18, 30), time(20, 15))
        self._add_leg = add_leg
        return ReferenceCatalog(pois=pois, hotels=hotels, transports=transports)

    # -- clean plan ---------------------------------------------------------

    def _build_itinerary(self, query, catalog, alloc):
        spec = self.spec
        duration = query.duration_days
        # Visit order per city: shuffled, spare POI (last index) reserved.
        city_queue: dict[str, list[Poi]] = {}
        by_city: dict[str, list[Poi]] = {}
        for poi in catalog.pois.values():
            by_city.setdefault(poi.city, []).append(poi)
        for city, items in by_city.items():
            usable = items[:-1]
            self.rng.shuffle(usable)
            city_queue[city] = usable
        self._spare_poi = {city: items[-1] for city, items in by_city.items()}

        def take_poi(city):
            return city_queue[city].pop(0)

        def poi_act(poi: Poi) -> Activity:
            return Activity(kind=KIND_POI, id=poi.id, name=poi.name)

        def leg_act(tid: str) -> Activity:
            leg = catalog.transports[tid]
            return Activity(kind=KIND_TRANSPORT, id=tid, name=leg.number)

        def hotel_act(city: str) -> Activity:
            hid = next(h.id for h in catalog.hotels.values() if h.city == city and h.stars == 4)
            return Activity(kind=KIND_HOTEL, id=hid, name=catalog.hotels[hid].name)

        days = []
        for day_index in range(1, duration + 1):
            city = alloc[day_index - 1]
            is_last = day_index == duration
            blocks = []
            if duration == 1:
                blocks.append(PeriodBlock(PERIOD_MORNING, "-", (leg_act(self._outbound),)))
                blocks.append(
                    PeriodBlock(PERIOD_AFTERNOON, "-", (poi_act(take_poi(city)), poi_act(take_poi(city))))
                )
                blocks.append(PeriodBlock(PERIOD_EVENING, "-", (leg_act(self._return_leg),)))
            elif day_index == 1:
                blocks.append(PeriodBlock(PERIOD_MORNING, "-", (leg_act(self._outbound),)))
                blocks.append(
                    PeriodBlock(PERIOD_AFTERNOON, "-", (poi_act(take_poi(city)), poi_act(take_poi(city))))
                )
                blocks.append(
                    PeriodBlock(PERIOD_EVENING, "-", (poi_act(take_poi(city)), hotel_act(city)))
                )
            elif day_index in self._transition_legs:
                blocks.append(
                    PeriodBlock(PERIOD_MORNING, "-", (leg_act(self._transition_legs[day_index]),))
                )
                blocks.append(
                    PeriodBlock(PERIOD_AFTERNOON, "-", (poi_act(take_poi(city)), poi_act(take_poi(city))))
                )
                evening = [poi_act(take_poi(city))]
                if not is_last:
                    evening.append(hotel_act(city))
                else:
                    evening.append(leg_act(self._return_leg))
                blocks.append(PeriodBlock(PERIOD_EVENING, "-", tuple(evening)))
            elif is_last:
                blocks.append(
                    PeriodBlock(PERIOD_MORNING, "-", (poi_act(take_poi(city)), poi_act(take_poi(city))))
                )
                blocks.append(PeriodBlock(PERIOD_AFTERNOON, "-", (poi_act(take_poi(city)),)))
                blocks.append(PeriodBlock(PERIOD_EVENING, "-", (leg_act(self._return_leg),)))
            else:
                blocks.append(
                    PeriodBlock(PERIOD_MORNING, "-", (poi_act(take_poi(city)), poi_act(take_poi(city))))
                )
                blocks.append(PeriodBlock(PERIOD_AFTERNOON, "-", (poi_act(take_poi(city)),)))
                blocks.append(PeriodBlock(PERIOD_EVENING, "-", (hotel_act(city),)))
            days.append(
                DayPlan(
                    day_index=day_index,
                    schedule_title=f"Day {day_index}: {city}",
                    blocks=tuple(blocks),
                )
            )
        return Itinerary(
            itinerary_name=f"{duration} Days from {_ORIGIN} to {', '.join(query.destinations)}",
            recommend_reason=(
                "A steady museum-focused route with one comfortable hotel per city "
                "and all transfers pre-booked."
            ),
            days=tuple(days),
            tips=Tips(title="Good to know", info="Carry the booking ids; venues scan them at entry."),
        )

    # -- mutations ------------------------------------------------------------

    def _note(self, cid: str, day: Optional[int], detail: str):
        self.manifest.append({"constraintId": cid, "dayIndex": day, "detail": detail})

    def _apply_structural_mutations(self, itin, catalog, query):
        planted = set(self.spec.planted)
        duration = query.duration_days

        def replace_block(it, day_index, block_index, new_block):
            day = it.days[day_index - 1]
            blocks = list(day.blocks)
            blocks[block_index] = new_block
            new_day = replace(day, blocks=tuple(blocks))
            days = list(it.days)
            days[day_index - 1] = new_day
            return replace(it, days=tuple(days))

        def day_block(it, day_index, period):
            day = it.days[day_index - 1]
            for bi, block in enumerate(day.blocks):
                if block.period == period:
                    return bi, block
            return None, None

        if INFORMATION_COMPLETENESS in planted:
            if duration < 2:
                raise UnsupportedViolation("completeness plant needs >= 2 days")
            bi, block = day_block(itin, 1, PERIOD_EVENING)
            acts = tuple(a for a in block.activities if a.kind != KIND_HOTEL)
            itin = replace_block(itin, 1, bi, replace(block, activities=acts))
            self._note(INFORMATION_COMPLETENESS, 1, "removed the night-1 hotel entry")

        if LOCATION_CONSISTENCY in planted:
            off = self._spare_poi[_OFF_CITY]
            bi, block = day_block(itin, 1, PERIOD_EVENING)
            acts = list(block.activities)
            for ai, act in enumerate(acts):
                if act.kind == KIND_POI:
                    acts[ai] = Activity(kind=KIND_POI, id=off.id, name=off.name)
                    break
            else:
                raise UnsupportedViolation("location plant needs an evening attraction on day 1")
            itin = replace_block(itin, 1, bi, replace(block, activities=tuple(acts)))
            self._note(LOCATION_CONSISTENCY, 1, f"swapped an evening attraction for one in {_OFF_CITY}")

        if OPERATING_HOURS in planted:
            if duration < 2:
                raise UnsupportedViolation("operating-hours plant needs >= 2 days")
            bi, block = day_block(itin, duration, PERIOD_MORNING)
            target = next((a for a in block.activities if a.kind == KIND_POI), None)
            if target is None:
                raise UnsupportedViolation("operating-hours plant needs a morning attraction on the last day")
            poi = catalog.pois[target.id]
            narrow = tuple(
                OpenRule(r.date_from, r.date_to, time(11, 0), time(13, 0))
                for r in (poi.open_calendar or ())
            ) or (
                OpenRule(query.start_date - timedelta(days=1),
                         query.start_date + timedelta(days=duration + 1),
                         time(11, 0), time(13, 0)),
            )
            pois = dict(catalog.pois)
            pois[poi.id] = replace(poi, open_calendar=narrow)
            catalog = replace(catalog, pois=pois)
            self._note(OPERATING_HOURS, duration, f"narrowed {poi.id} opening window to 11:00-13:00")

        if CHRONOLOGICAL_ORDER in planted:
            if duration < 2:
                raise UnsupportedViolation("chronology plant needs >= 2 days")
            ebi, eblock = day_block(itin, duration, PERIOD_EVENING)
            leg = next((a for a in eblock.activities if a.kind == KIND_TRANSPORT), None)
            if leg is None:
                raise UnsupportedViolation("chronology plant needs the evening return leg")
            itin = replace_block(
                itin, duration, ebi,
                replace(eblock, activities=tuple(a for a in eblock.activities if a is not leg)),
            )
            abi, ablock = day_block(itin, duration, PERIOD_AFTERNOON)
            itin = replace_block(
                itin, duration, abi, replace(ablock, activities=ablock.activities + (leg,))
            )
            self._note(CHRONOLOGICAL_ORDER, duration,
                       "moved the evening return leg into the afternoon block")

        if TRANSPORT_CONSISTENCY in planted:
            if duration < 3 or 2 in self._transition_legs:
                raise UnsupportedViolation("transport plant needs a full in-city day 2")
            city = query.destinations[0]
            out_id = self._add_leg(city, _ORIGIN, 2, time(9, 0), time(10, 30))
            back_id = self._add_leg(_ORIGIN, city, 2, time(13, 0), time(14, 30))
            day = itin.days[1]
            keep_poi = next(a for a in day.iter_activities() if a.kind == KIND_POI)
            keep_hotel = next((a for a in day.iter_activities() if a.kind == KIND_HOTEL), None)
            evening = [keep_poi] + ([keep_hotel] if keep_hotel else [])
            legs = catalog.transports
            blocks = (
                PeriodBlock(PERIOD_MORNING, "-",
                            (Activity(KIND_TRANSPORT, out_id, legs[out_id].number),)),
                PeriodBlock(PERIOD_AFTERNOON, "-",
                            (Activity(KIND_TRANSPORT, back_id, legs[back_id].number),)),
                PeriodBlock(PERIOD_EVENING, "-", tuple(evening)),
            )
            days = list(itin.days)
            days[1] = replace(day, blocks=blocks)
            itin = replace(itin, days=tuple(days))
            self._note(TRANSPORT_CONSISTENCY, 2,
                       f"inserted a pointless day-2 shuttle {city}->{_ORIGIN}->{city}")

        if TRAVEL_BLOCKOUT in planted:
            resolved, _ = resolve_activity_times(itin, catalog, query.start_date)
            day = resolved.days[duration - 1]
            leg_pos = None
            for bi_, block in enumerate(day.blocks):
                for ai_, act in enumerate(block.activities):
                    if act.kind == KIND_TRANSPORT:
                        leg_pos = (bi_, ai_, act)
            if leg_pos is None:
                raise UnsupportedViolation("blockout plant needs the last-day return leg")
            bi, ai, leg = leg_pos
            the_date = day_date_of(query.start_date, duration)
            window_start = datetime.combine(the_date, period_window(day.blocks[bi].period)[0])
            cursor = datetime.combine(the_date, time(0, 0))
            for bi_, block in enumerate(day.blocks[: bi + 1]):
                upto = ai if bi_ == bi else len(block.activities)
                for act in block.activities[:upto]:
                    if act.resolved_end is not None:
                        cursor = max(cursor, act.resolved_end)
            spare_start = max(window_start, cursor)
            hours = max(0.75, (leg.resolved_start - spare_start).total_seconds() / 3600.0 + 0.5)
            spare = self._spare_poi[query.destinations[-1]]
            pois = dict(catalog.pois)
            pois[spare.id] = replace(spare, recommended_duration_hours=round(hours, 2))
            catalog = replace(catalog, pois=pois)
            target_day = itin.days[duration - 1]
            block = target_day.blocks[bi]
            acts = list(block.activities)
            acts.insert(ai, Activity(kind=KIND_POI, id=spare.id, name=spare.name))
            itin = replace_block(itin, duration, bi, replace(block, activities=tuple(acts)))
            self._note(TRAVEL_BLOCKOUT, duration,
                       f"scheduled {spare.id} over the return leg departure")

        if INFORMATION_VERIFICATION in planted:
            target = None
            for day in reversed(itin.days):
                for bi, block in enumerate(day.blocks):
                    for ai, act in enumerate(block.activities):
                        if act.kind == KIND_HOTEL:
                            target = (day.day_index, bi, ai, act)
                if target:
                    break
            if target is None:
                raise UnsupportedViolation("verification plant needs a hotel night")
            di, bi, ai, act = target
            block = itin.days[di - 1].blocks[bi]
            acts = list(block.activities)
            acts[ai] = replace(act, id="H-ghost")
            itin = replace_block(itin, di, bi, replace(block, activities=tuple(acts)))
            self._note(INFORMATION_VERIFICATION, di, "pointed a hotel entry at an id missing from the catalog")

        if INFORMATION_ACCURACY in planted:
            bi, block = day_block(itin, 1, PERIOD_AFTERNOON)
            acts = list(block.activities)
            for ai, act in enumerate(acts):
                if act.kind == KIND_POI and act.id:
                    acts[ai] = replace(act, name=act.name + " Annex")
                    self._note(INFORMATION_ACCURACY, 1, f"renamed {act.id} away from its catalog name")
                    break
            else:
                raise UnsupportedViolation("accuracy plant needs a catalog attraction on day 1")
            itin = replace_block(itin, 1, bi, replace(block, activities=tuple(acts)))

        if RESPONSE_FORMAT in planted:
            bi, block = day_block(itin, 1, PERIOD_AFTERNOON)
            itin = replace_block(itin, 1, bi, replace(block, period=PERIOD_MORNING))
            self._note(RESPONSE_FORMAT, 1, "duplicated the Morning period on day 1")

        return itin, catalog

    def _render(self, itin, catalog):
        days = []
        for day in itin.days:
            days.append(
                replace(day, blocks=tuple(_render_block(b, catalog) for b in day.blocks))
            )
        return replace(itin, days=tuple(days))

    def _apply_text_mutations(self, itin):
        if INFORMATION_RELEVANCE not in set(self.spec.planted):
            return itin
        if len(itin.days) < 2:
            raise UnsupportedViolation("relevance plant needs >= 2 days")
        foreign = None
        for block in itin.days[0].blocks:
            for act in block.activities:
                if act.kind == KIND_POI and act.id:
                    foreign = act
                    break
            if foreign:
                break
        if foreign is None:
            raise UnsupportedViolation("relevance plant needs a day-1 attraction")
        day = itin.days[1]
        block = day.blocks[0]
        description = f"{block.description} Also consider **[{foreign.name}]({foreign.id})**."
        new_block = replace(block, description=description, links=extract_links(description))
        blocks = (new_block,) + day.blocks[1:]
        days = (itin.days[0], replace(day, blocks=blocks)) + itin.days[2:]
        self._note(INFORMATION_RELEVANCE, 2, f"linked day-1 attraction {foreign.id} from a day-2 description")
        return replace(itin, days=days)


def day_date_of(start: date, day_index: int) -> date:
    return start + timedelta(days=day_index - 1)


def generate_fixture(spec: FixtureSpec) -> tuple[Query, ReferenceCatalog, Itinerary]:
    """Generate a deterministic (query, catalog, itinerary) triple.

    With no planted violations the itinerary passes every format and
    commonsense check; each planted constraint id is introduced by exactly
    one mutation, recorded in :func:`fixture_manifest`.
    """
    return _Builder(spec).build()


def fixture_manifest(spec: FixtureSpec) -> list[dict]:
    """Ground-truth record of the mutations a spec plants."""
    builder = _Builder(spec)
    builder.build()
    return builder.manifest
