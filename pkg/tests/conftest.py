import sys
from datetime import date, datetime, time
from pathlib import Path
from random import Random

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tripscore.ingest import FixtureSpec, generate_fixture, itinerary_to_json
from tripscore.model import (
    Activity,
    DayPlan,
    Hotel,
    Itinerary,
    OpenRule,
    PeriodBlock,
    Poi,
    PreferenceProfile,
    Query,
    ReferenceCatalog,
    TransportLeg,
)

GOLDEN = Path(__file__).parent.parent / "docs" / "golden"


@pytest.fixture(scope="session")
def clean_fixture():
    query, catalog, itin = generate_fixture(FixtureSpec(seed=1, duration_days=3))
    return query, catalog, itin, itinerary_to_json(itin)


def make_poi(pid, city="Aurora", lat=30.0, lon=11.5, calendar="wide", tags=("museum",),
             duration=None, effort="other", start=date(2025, 5, 1)):
    if calendar == "wide":
        cal = (OpenRule(date(2025, 1, 1), date(2025, 12, 31), time(6, 0), time(23, 0)),)
    elif calendar is None:
        cal = None
    else:
        cal = calendar
    return Poi(id=pid, name=f"{city} Site {pid}", city=city, lat=lat, lon=lon,
               open_calendar=cal, tags=frozenset(tags),
               recommended_duration_hours=duration, effort_class=effort)


def make_leg(tid, origin, dest, day, dep, arr, start=date(2025, 5, 1)):
    from datetime import timedelta
    d = start + timedelta(days=day - 1)
    return TransportLeg(id=tid, number=f"XX{tid}", mode="train", origin_city=origin,
                        destination_city=dest,
                        depart_local=datetime.combine(d, dep),
                        arrive_local=datetime.combine(d, arr))


def make_hotel(hid, city="Aurora", stars=4, lat=30.005, lon=11.5):
    return Hotel(id=hid, name=f"{city} Hotel {hid}", city=city, stars=stars, lat=lat, lon=lon)


def block(period, activities, description=None):
    acts = tuple(activities)
    if description is None:
        parts = []
        for a in acts:
            if a.kind == "poi" and not a.id:
                parts.append(f"Visit **[{a.name}]**.")
            else:
                parts.append(f"See **[{a.name}]({a.id})**.")
        description = " ".join(parts) or "Free time."
    from tripscore.ingest import extract_links
    return PeriodBlock(period=period, description=description, activities=acts,
                       links=extract_links(description))


def poi_act(pid, name=None):
    return Activity(kind="poi", id=pid, name=name or f"Aurora Site {pid}")


def leg_act(tid):
    return Activity(kind="transportation", id=tid, name=f"XX{tid}")


def hotel_act(hid, city="Aurora"):
    return Activity(kind="hotel", id=hid, name=f"{city} Hotel {hid}")


def plan(days, name="Test Plan", reason="Covers the basics."):
    return Itinerary(itinerary_name=name, recommend_reason=reason, days=tuple(days), tips=None)


def day(index, blocks, title=None):
    return DayPlan(day_index=index, schedule_title=title or f"Day {index}", blocks=tuple(blocks))


def simple_query(destinations=("Aurora",), origin="Portby", days=3, split="synthetic",
                 prefs=None, start=date(2025, 5, 1)):
    return Query(query_id="q-test", origin_city=origin, destinations=tuple(destinations),
                 start_date=start, duration_days=days, split=split,
                 preferences=prefs or PreferenceProfile(), request_text="test request")


def catalog_of(pois=(), hotels=(), legs=()):
    return ReferenceCatalog(
        pois={p.id: p for p in pois},
        hotels={h.id: h for h in hotels},
        transports={t.id: t for t in legs},
    )


def random_generated_plan(rng: Random):
    """Random plan with soft-quality defects for fuzzing the soft scorers.

    Starts from a clean generated fixture and applies random benign
    degradations (duplicates, emptied daytime blocks, hotel flips,
    scattered coordinates, stretched visit durations) so soft scores vary
    across the whole [0, 1] range while the tree stays structurally valid.
    """
    from dataclasses import replace

    spec = FixtureSpec(
        seed=rng.randrange(1_000_000),
        cities_count=rng.choice((1, 1, 2)),
        duration_days=rng.choice((2, 3, 4, 5)),
        pois_per_city=rng.choice((6, 8, 12)),
    )
    query, catalog, itin = generate_fixture(spec)

    days = list(itin.days)
    # Duplicate attractions across or within days.
    for _ in range(rng.randrange(0, 4)):
        pois = [a for d in days for a in d.iter_activities() if a.kind == "poi"]
        if not pois:
            break
        dup = rng.choice(pois)
        di = rng.randrange(len(days))
        bi = rng.randrange(len(days[di].blocks))
        target = days[di].blocks[bi]
        pos = rng.randrange(len(target.activities) + 1)
        acts = target.activities[:pos] + (dup,) + target.activities[pos:]
        blocks = list(days[di].blocks)
        blocks[bi] = replace(target, activities=acts)
        days[di] = replace(days[di], blocks=tuple(blocks))
    # Strip daytime attractions from a day now and then.
    if rng.random() < 0.4 and days:
        di = rng.randrange(len(days))
        blocks = tuple(
            replace(b, activities=tuple(a for a in b.activities if a.kind != "poi"))
            if b.period in ("Morning", "Afternoon") else b
            for b in days[di].blocks
        )
        days[di] = replace(days[di], blocks=blocks)
    # Flip some nights to the 2-star inn (same-city switch candidates).
    if rng.random() < 0.5:
        for di, d in enumerate(days):
            if rng.random() < 0.4:
                blocks = []
                for b in d.blocks:
                    acts = []
                    for a in b.activities:
                        if a.kind == "hotel" and a.id in catalog.hotels:
                            alt = a.id + "b" if not a.id.endswith("b") else a.id[:-1]
                            if alt in catalog.hotels:
                                a = replace(a, id=alt, name=catalog.hotels[alt].name)
                        acts.append(a)
                    blocks.append(replace(b, activities=tuple(acts)))
                days[di] = replace(d, blocks=tuple(blocks))
    itin = replace(itin, days=tuple(days))

    # Scatter coordinates and stretch visit durations in the catalog.
    pois = {}
    for pid, poi in catalog.pois.items():
        changed = poi
        if rng.random() < 0.6:
            changed = replace(
                changed,
                lat=poi.lat + rng.uniform(-1.5, 1.5),
                lon=poi.lon + rng.uniform(-1.5, 1.5),
            )
        if rng.random() < 0.3:
            changed = replace(changed, recommended_duration_hours=rng.choice((0.5, 1.0, 3.0, 5.0)))
        pois[pid] = changed
    catalog = replace(catalog, pois=pois)
    return query, catalog, itin
