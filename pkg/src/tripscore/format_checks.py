"""Format constraint family: ResponseFormat, InformationVerification,
InformationAccuracy, InformationRelevance.

The format gate is binary: a clean plan scores +1, anything else -3.
Checks are stateless and collect every violation they can decide; an
unparseable document can only yield a ResponseFormat violation because the
other three checks need a parsed tree.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .errors import ParseError, SchemaError
from .ingest import load_itinerary
from .model import (
    INFORMATION_ACCURACY,
    INFORMATION_RELEVANCE,
    INFORMATION_VERIFICATION,
    KIND_HOTEL,
    KIND_POI,
    KIND_TRANSPORT,
    RESPONSE_FORMAT,
    Itinerary,
    ReferenceCatalog,
    Violation,
)

FORMAT_PASS = 1
FORMAT_FAIL = -3

_TIME_TOKEN_RE = re.compile(r"\b([01]?\d|2[0-3]):[0-5]\d\b")


@dataclass(frozen=True)
class FormatReport:
    passed: bool
    violations: tuple[Violation, ...]


def normalize_name(name: str) -> str:
    """NFC-normalize and collapse whitespace; matching stays otherwise exact."""
    return " ".join(unicodedata.normalize("NFC", name).split())


def check_response_format(raw_text: str) -> list[Violation]:
    try:
        load_itinerary(raw_text)
    except ParseError as exc:
        return [Violation(RESPONSE_FORMAT, None, f"not a parsable plan document: {exc}")]
    except SchemaError as exc:
        return [Violation(RESPONSE_FORMAT, None, f"schema violation at {exc.path}")]
    return []


def check_verification(itinerary: Itinerary, catalog: ReferenceCatalog) -> list[Violation]:
    """Every referenced id must exist in the catalog.

    Attractions with an empty id are declared external and exempt; hotels
    and transportation must always resolve.
    """
    violations = []
    for day, _block, act in itinerary.iter_activities():
        if act.kind == KIND_HOTEL and act.id not in catalog.hotels:
            violations.append(
                Violation(INFORMATION_VERIFICATION, day.day_index,
                          f"hotel id {act.id!r} not in catalog")
            )
        elif act.kind == KIND_TRANSPORT and act.id not in catalog.transports:
            violations.append(
                Violation(INFORMATION_VERIFICATION, day.day_index,
                          f"transportation id {act.id!r} not in catalog")
            )
        elif act.kind == KIND_POI and act.id and act.id not in catalog.pois:
            violations.append(
                Violation(INFORMATION_VERIFICATION, day.day_index,
                          f"attraction id {act.id!r} not in catalog")
            )
    return violations


def _catalog_name(act, catalog: ReferenceCatalog):
    if act.kind == KIND_POI:
        entry = catalog.pois.get(act.id)
    elif act.kind == KIND_HOTEL:
        entry = catalog.hotels.get(act.id)
    else:
        entry = catalog.transports.get(act.id)
        return entry.number if entry else None
    return entry.name if entry else None


def check_accuracy(itinerary: Itinerary, catalog: ReferenceCatalog) -> list[Violation]:
    """Names must match the catalog; transport times stated in descriptions
    must match the catalog's departure/arrival clock times."""
    violations = []
    for day, block, act in itinerary.iter_activities():
        if not act.id:
            continue
        expected = _catalog_name(act, catalog)
        if expected is None:
            continue  # verification owns unresolvable ids
        if normalize_name(act.name) != normalize_name(expected):
            violations.append(
                Violation(INFORMATION_ACCURACY, day.day_index,
                          f"{act.kind} {act.id} named {act.name!r}, catalog says {expected!r}")
            )

    # Clock times written next to a transport link must match the leg.
    for day in itinerary.days:
        for block in day.blocks:
            spans = []
            for m in re.finditer(r"\*\*\[([^\]]+)\]\(([^()]*)\)\*\*", block.description):
                spans.append((m.end(), m.group(2)))
            for idx, (start, target_id) in enumerate(spans):
                leg = catalog.transports.get(target_id)
                if leg is None:
                    continue
                end = spans[idx + 1][0] if idx + 1 < len(spans) else len(block.description)
                snippet = block.description[start:end]
                allowed = {leg.depart_local.strftime("%H:%M"), leg.arrive_local.strftime("%H:%M")}
                for m in _TIME_TOKEN_RE.finditer(snippet):
                    stated = m.group(0)
                    normalized = stated if len(stated) == 5 else "0" + stated
                    if normalized not in allowed:
                        violations.append(
                            Violation(
                                INFORMATION_ACCURACY, day.day_index,
                                f"description states {stated} for {target_id}, "
                                f"catalog has {sorted(allowed)}",
                            )
                        )
    return violations


def check_relevance(itinerary: Itinerary) -> list[Violation]:
    """Description links must stay inside their own block's entries, and
    every entry must be mentioned somewhere in its day."""
    violations = []
    for day in itinerary.days:
        day_linked_ids = set()
        day_external_names = set()
        for block in day.blocks:
            for link in block.links:
                if link.target_id is not None:
                    day_linked_ids.add(link.target_id)
                else:
                    day_external_names.add(normalize_name(link.name))
            block_ids = {act.id for act in block.activities if act.id}
            for link in block.links:
                if link.target_id is not None and link.target_id not in block_ids:
                    violations.append(
                        Violation(
                            INFORMATION_RELEVANCE, day.day_index,
                            f"description links {link.target_id!r} which is not in this block's detailList",
                        )
                    )
        for block in day.blocks:
            for act in block.activities:
                if act.id:
                    if act.id not in day_linked_ids:
                        violations.append(
                            Violation(
                                INFORMATION_RELEVANCE, day.day_index,
                                f"detailList entry {act.id!r} is never mentioned in this day's descriptions",
                            )
                        )
                elif normalize_name(act.name) not in day_external_names:
                    violations.append(
                        Violation(
                            INFORMATION_RELEVANCE, day.day_index,
                            f"external attraction {act.name!r} is never mentioned in this day's descriptions",
                        )
                    )
    return violations


def evaluate_format(raw_text: str, catalog: ReferenceCatalog) -> tuple[int, FormatReport]:
    """Run all four format checks and gate the plan.

    Returns (+1, empty report) only when every check passes; otherwise
    (-3, all collected violations). No short-circuiting happens once the
    document parses: every violation is collected for reporting.
    """
    violations = check_response_format(raw_text)
    if not violations:
        itinerary = load_itinerary(raw_text)
        violations.extend(check_verification(itinerary, catalog))
        violations.extend(check_accuracy(itinerary, catalog))
        violations.extend(check_relevance(itinerary))
    score = FORMAT_PASS if not violations else FORMAT_FAIL
    return score, FormatReport(passed=not violations, violations=tuple(violations))
