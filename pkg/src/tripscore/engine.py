"""End-to-end plan evaluation: format gate, commonsense gate, soft and
preference scoring, reward aggregation."""

from __future__ import annotations

from typing import Optional, Union

from .commonsense import evaluate_commonsense
from .format_checks import evaluate_format
from .ingest import itinerary_to_json, load_itinerary
from .model import (
    DEFAULT_WEIGHTS,
    Itinerary,
    Query,
    ReferenceCatalog,
    ScoreBreakdown,
    WeightConfig,
    resolve_activity_times,
)
from .preference import score_preferences
from .reward import aggregate
from .soft import score_soft

MODE_RULE_ONLY = "ruleOnly"
MODE_FULL = "full"


def score_plan(
    plan: Union[str, Itinerary],
    query: Query,
    catalog: ReferenceCatalog,
    weights: WeightConfig = DEFAULT_WEIGHTS,
    mode: str = MODE_RULE_ONLY,
    judge=None,
) -> ScoreBreakdown:
    """Evaluate one plan and return the full breakdown.

    ``plan`` may be raw document text or an already-parsed tree; trees are
    re-serialized so the format gate always judges the canonical document.
    In rule-only mode the judge is never consulted and the two judge-rated
    soft components plus the real-world preference take neutral defaults.
    """
    if isinstance(plan, Itinerary):
        raw_text = itinerary_to_json(plan)
    else:
        raw_text = plan

    active_judge = judge if mode == MODE_FULL else None

    format_score, format_report = evaluate_format(raw_text, catalog)
    if format_score != 1:
        return ScoreBreakdown(
            format_score=format_score,
            commonsense_score=None,
            soft=None,
            pref=None,
            violations=format_report.violations,
            reward=-3.0,
            split=query.split,
        )

    itinerary = load_itinerary(raw_text)
    commonsense_score, commonsense_report = evaluate_commonsense(
        itinerary, query, catalog, format_score=format_score
    )
    resolved, _notes = resolve_activity_times(itinerary, catalog, query.start_date)

    soft = score_soft(itinerary, resolved, catalog, itinerary_text=raw_text, judge=active_judge)
    pref = score_preferences(
        itinerary, resolved, query, catalog, itinerary_text=raw_text, judge=active_judge
    )

    reward = aggregate(format_score, commonsense_score, soft, pref, weights, query.split)
    return ScoreBreakdown(
        format_score=format_score,
        commonsense_score=commonsense_score,
        soft=soft,
        pref=pref,
        violations=commonsense_report.violations,
        reward=reward,
        split=query.split,
    )


def breakdown_to_dict(breakdown: ScoreBreakdown) -> dict:
    """JSON-ready view of a breakdown (used by the CLI and the service)."""
    soft = breakdown.soft
    pref = breakdown.pref
    doc: dict = {
        "reward": breakdown.reward,
        "formatScore": breakdown.format_score,
        "commonsenseScore": breakdown.commonsense_score,
        "split": breakdown.split,
        "violations": [
            {"constraintId": v.constraint_id, "dayIndex": v.day_index, "detail": v.detail}
            for v in breakdown.violations
        ],
    }
    if soft is not None:
        doc["softScores"] = {
            "schedule": soft.schedule,
            "hotel": soft.hotel,
            "daytime": soft.daytime,
            "unique": soft.unique,
            "clustering": soft.clustering,
            "iconic": soft.iconic,
            "diversity": soft.diversity,
        }
        doc["softSources"] = {"iconic": soft.iconic_source, "diversity": soft.diversity_source}
    else:
        doc["softScores"] = None
    if pref is not None:
        if breakdown.split == "realWorld":
            doc["prefScores"] = {"userRequest": pref.user_request}
            doc["prefSources"] = {"userRequest": pref.user_request_source}
        else:
            scores = {}
            for name in ("budget", "pacing", "attraction", "effort"):
                value = getattr(pref, name)
                if value is not None:
                    scores[name] = value
            doc["prefScores"] = scores
    else:
        doc["prefScores"] = None
    return doc
