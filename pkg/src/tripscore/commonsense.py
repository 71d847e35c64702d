"""Commonsense constraint family: completeness, chronology, location
consistency, operating hours, travel block-out, transport consistency.

Runs only on plans that already passed the format gate. The commonsense
gate is binary: +1 when all six checks pass, -1 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, time, timedelta

from .errors import PreconditionError
from .model import (
    CHRONOLOGICAL_ORDER,
    INFORMATION_COMPLETENESS,
    KIND_HOTEL,
    KIND_POI,
    KIND_TRANSPORT,
    LOCATION_CONSISTENCY,
    OPERATING_HOURS,
    TRANSPORT_CONSISTENCY,
    TRAVEL_BLOCKOUT,
    Itinerary,
    Query,
    ReferenceCatalog,
    Violation,
    day_date,
    period_of_time,
    resolve_activity_times,
)

COMMONSENSE_PASS = 1
COMMONSENSE_FAIL = -1

# A departure earlier than this forbids any same-day activity before it.
EARLY_DEPARTURE_CUTOFF = time(10, 0)


@dataclass(frozen=True)
class CommonsenseReport:
    passed: bool
    violations: tuple[Violation, ...]


def check_completeness(itinerary: Itinerary, query: Query, catalog: ReferenceCatalog) -> list[Violation]:
    """Hotel every night except the last; outbound and return legs present
    whenever the trip actually leaves the origin city."""
    violations = []
    duration = len(itinerary.days)
    for day in itinerary.days:
        if day.day_index == duration:
            continue
        if not any(act.kind == KIND_HOTEL for act in day.iter_activities()):
            violations.append(
                Violation(INFORMATION_COMPLETENESS, day.day_index,
                          f"no hotel arranged for night {day.day_index}")
            )

    first_destination = query.destinations[0] if query.destinations else query.origin_city
    if first_destination != query.origin_city:
        legs = [
            catalog.transports[act.id]
            for _, _, act in itinerary.iter_activities()
            if act.kind == KIND_TRANSPORT and act.id in catalog.transports
        ]
        if not any(leg.destination_city == first_destination for leg in legs):
            violations.append(
                Violation(INFORMATION_COMPLETENESS, None,
                          f"no outbound transportation into {first_destination}")
            )
        if not any(leg.destination_city == query.origin_city for leg in legs):
            violations.append(
                Violation(INFORMATION_COMPLETENESS, None,
                          f"no return transportation to {query.origin_city}")
            )
    return violations


def check_chronology(resolved: Itinerary) -> list[Violation]:
    """Within each day: starts non-decreasing in list order, and transport
    entries must sit in the period block containing their departure."""
    violations = []
    for day in resolved.days:
        last_start: datetime | None = None
        last_name = ""
        for block in day.blocks:
            for act in block.activities:
                if act.resolved_start is None:
                    continue
                if last_start is not None and act.resolved_start < last_start:
                    violations.append(
                        Violation(
                            CHRONOLOGICAL_ORDER, day.day_index,
                            f"{act.name!r} at {act.resolved_start:%H:%M} listed after "
                            f"{last_name!r} at {last_start:%H:%M}",
                        )
                    )
                last_start, last_name = act.resolved_start, act.name
                if act.kind == KIND_TRANSPORT:
                    expected = period_of_time(act.resolved_start.time())
                    if expected != block.period:
                        violations.append(
                            Violation(
                                CHRONOLOGICAL_ORDER, day.day_index,
                                f"transport departing {act.resolved_start:%H:%M} belongs in the "
                                f"{expected} block, found in {block.period}",
                            )
                        )
    return violations


def check_location_consistency(
    itinerary: Itinerary, query: Query, catalog: ReferenceCatalog
) -> list[Violation]:
    """Track the traveler's current city; it changes only at a transport leg
    departing from that city. Activities elsewhere are violations."""
    violations = []
    register = query.origin_city
    for day, _block, act in itinerary.iter_activities():
        if act.kind == KIND_TRANSPORT:
            leg = catalog.transports.get(act.id)
            if leg is None:
                continue
            if leg.origin_city == register:
                register = leg.destination_city
            else:
                violations.append(
                    Violation(
                        LOCATION_CONSISTENCY, day.day_index,
                        f"transport {act.id} departs {leg.origin_city} but traveler is in {register}",
                    )
                )
        else:
            city = catalog.lookup_city(act)
            if city is not None and city != register:
                violations.append(
                    Violation(
                        LOCATION_CONSISTENCY, day.day_index,
                        f"{act.kind} {act.name!r} is in {city} while traveler is in {register}",
                    )
                )
    return violations


def _open_on(poi, visit_date: date, start: datetime, end: datetime) -> bool:
    """Whether [start, end] fits an open window applicable on visit_date."""
    day_start = datetime.combine(visit_date, time(0, 0))
    start_h = (start - day_start).total_seconds() / 3600.0
    end_h = (end - day_start).total_seconds() / 3600.0
    for rule in poi.open_calendar:
        if rule.date_from <= visit_date <= rule.date_to:
            open_h = rule.open_time.hour + rule.open_time.minute / 60.0
            close_h = rule.close_time.hour + rule.close_time.minute / 60.0
            if open_h <= start_h and end_h <= close_h:
                return True
    return False


def check_operating_hours(resolved: Itinerary, catalog: ReferenceCatalog, start_date: date) -> list[Violation]:
    """Visits must fit a confirmed open window; unknown calendars never violate."""
    violations = []
    for day in resolved.days:
        visit_date = day_date(start_date, day.day_index)
        for block in day.blocks:
            for act in block.activities:
                if act.kind != KIND_POI or not act.id:
                    continue
                poi = catalog.pois.get(act.id)
                if poi is None or poi.open_calendar is None:
                    continue
                if act.resolved_start is None or act.resolved_end is None:
                    continue
                if not _open_on(poi, visit_date, act.resolved_start, act.resolved_end):
                    violations.append(
                        Violation(
                            OPERATING_HOURS, day.day_index,
                            f"{act.name!r} visited {act.resolved_start:%H:%M}-{act.resolved_end:%H:%M} "
                            "outside confirmed opening hours",
                        )
                    )
    return violations


def check_travel_blockout(resolved: Itinerary) -> list[Violation]:
    """No activity may overlap a same-day transport interval, and nothing may
    start before a same-day departure that leaves earlier than 10:00.

    Touching endpoints are allowed: overlap requires a positive-length
    intersection.
    """
    violations = []
    for day in resolved.days:
        legs = [
            act for act in day.iter_activities()
            if act.kind == KIND_TRANSPORT and act.resolved_start is not None
        ]
        if not legs:
            continue
        others = [
            act for act in day.iter_activities()
            if act.kind != KIND_TRANSPORT and act.resolved_start is not None
        ]
        for leg in legs:
            for act in others:
                if act.resolved_start < leg.resolved_end and leg.resolved_start < act.resolved_end:
                    violations.append(
                        Violation(
                            TRAVEL_BLOCKOUT, day.day_index,
                            f"{act.name!r} ({act.resolved_start:%H:%M}-{act.resolved_end:%H:%M}) "
                            f"overlaps transport {leg.name!r} "
                            f"({leg.resolved_start:%H:%M}-{leg.resolved_end:%H:%M})",
                        )
                    )
            if leg.resolved_start.time() < EARLY_DEPARTURE_CUTOFF:
                for act in others:
                    if act.resolved_start < leg.resolved_start:
                        violations.append(
                            Violation(
                                TRAVEL_BLOCKOUT, day.day_index,
                                f"{act.name!r} starts {act.resolved_start:%H:%M} before the "
                                f"{leg.resolved_start:%H:%M} early departure",
                            )
                        )
    return violations


def check_transport_consistency(
    itinerary: Itinerary, query: Query, catalog: ReferenceCatalog
) -> list[Violation]:
    """Legs must chain into a walk, never repeat a route, and enter the
    queried destinations in order without revisiting a completed one."""
    violations = []
    legs = []
    for day, _block, act in itinerary.iter_activities():
        if act.kind == KIND_TRANSPORT and act.id in catalog.transports:
            legs.append((day.day_index, catalog.transports[act.id]))

    for (_, prev), (day_index, nxt) in zip(legs, legs[1:]):
        if prev.destination_city != nxt.origin_city:
            violations.append(
                Violation(
                    TRANSPORT_CONSISTENCY, day_index,
                    f"route jump: arrived in {prev.destination_city} but next leg departs "
                    f"{nxt.origin_city}",
                )
            )

    seen_routes: dict[tuple[str, str], int] = {}
    for day_index, leg in legs:
        route = (leg.origin_city, leg.destination_city)
        seen_routes[route] = seen_routes.get(route, 0) + 1
    for (origin, dest), count in seen_routes.items():
        if count > 1:
            violations.append(
                Violation(
                    TRANSPORT_CONSISTENCY, None,
                    f"repetitive route {origin} -> {dest} taken {count} times",
                )
            )

    order = {city: i for i, city in enumerate(query.destinations)}
    progression = [order[leg.destination_city] for _, leg in legs if leg.destination_city in order]
    for prev, nxt in zip(progression, progression[1:]):
        if nxt < prev:
            violations.append(
                Violation(
                    TRANSPORT_CONSISTENCY, None,
                    f"destination order broken: returned to {query.destinations[nxt]} after "
                    f"{query.destinations[prev]}",
                )
            )
    return violations


def evaluate_commonsense(
    itinerary: Itinerary,
    query: Query,
    catalog: ReferenceCatalog,
    format_score: int = 1,
) -> tuple[int, CommonsenseReport]:
    """Run all six commonsense checks on a format-passing plan.

    Raises :class:`PreconditionError` when invoked for a plan that failed
    the format gate.
    """
    if format_score != 1:
        raise PreconditionError("commonsense evaluation requires a passing format gate")
    resolved, _notes = resolve_activity_times(itinerary, catalog, query.start_date)
    violations = []
    violations.extend(check_completeness(itinerary, query, catalog))
    violations.extend(check_chronology(resolved))
    violations.extend(check_location_consistency(itinerary, query, catalog))
    violations.extend(check_operating_hours(resolved, catalog, query.start_date))
    violations.extend(check_travel_blockout(resolved))
    violations.extend(check_transport_consistency(itinerary, query, catalog))
    score = COMMONSENSE_PASS if not violations else COMMONSENSE_FAIL
    return score, CommonsenseReport(passed=not violations, violations=tuple(violations))
