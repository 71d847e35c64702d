"""Gated reward aggregation and corpus-level metrics.

The gate is lexicographic: a format failure pins the reward at -3; a
commonsense failure after a format pass pins it at 0. Only fully feasible
plans earn the soft and preference terms, so any positive reward implies
both gates passed and the reward lands in [2, 2 + w3 + w4].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import EmptyCorpus, InvalidGateState
from .model import PrefVector, ScoreBreakdown, SoftVector, WeightConfig


def weighted_mean(values: Sequence[float], weights: Sequence[float]) -> float:
    """Sum(w*v)/Sum(w); an empty set means nothing to penalize and scores 1."""
    if not values:
        return 1.0
    num = 0.0
    den = 0.0
    for v, w in zip(values, weights):
        num += w * v
        den += w
    return num / den


def pref_terms(pref: PrefVector, weights: WeightConfig, split: str) -> tuple[list[float], list[float]]:
    """Values and weights of the preference dimensions actually present."""
    if split == "realWorld":
        if pref.user_request is None:
            return [], []
        return [pref.user_request], [weights.w2_real[0]]
    values: list[float] = []
    picked: list[float] = []
    for value, weight in zip(
        (pref.budget, pref.pacing, pref.attraction, pref.effort), weights.w2_synthetic
    ):
        if value is not None:
            values.append(value)
            picked.append(weight)
    return values, picked


def aggregate(
    format_score: int,
    commonsense_score: Optional[int],
    soft: Optional[SoftVector],
    pref: Optional[PrefVector],
    weights: WeightConfig,
    split: str = "synthetic",
) -> float:
    if format_score not in (-3, 1):
        raise InvalidGateState(f"format score must be -3 or +1, got {format_score}")
    if format_score == -3:
        return -3.0
    if commonsense_score not in (-1, 1):
        raise InvalidGateState(f"commonsense score must be -1 or +1, got {commonsense_score}")
    if commonsense_score == -1:
        return 0.0
    if soft is None or pref is None:
        raise InvalidGateState("passing plans need soft and preference vectors")
    soft_mean = weighted_mean(soft.as_array(), weights.w1)
    values, picked = pref_terms(pref, weights, split)
    pref_mean = weighted_mean(values, picked)
    return (format_score + commonsense_score) + weights.w3 * soft_mean + weights.w4(split) * pref_mean


def reward_of(breakdown: ScoreBreakdown, weights: WeightConfig) -> float:
    return aggregate(
        breakdown.format_score,
        breakdown.commonsense_score,
        breakdown.soft,
        breakdown.pref,
        weights,
        breakdown.split,
    )


def pass_rate(passed_flags: Sequence[bool]) -> float:
    if not passed_flags:
        raise EmptyCorpus("pass rate over an empty corpus")
    return sum(1 for flag in passed_flags if flag) / len(passed_flags)


@dataclass(frozen=True)
class CorpusMetrics:
    delivery_rate: float
    commonsense_pass_rate: Optional[float]
    mean_reward: float
    cond_reward: Optional[float]
    n_total: int
    n_delivered: int
    n_feasible: int


def corpus_metrics(breakdowns: Sequence[ScoreBreakdown]) -> CorpusMetrics:
    """Delivery rate, commonsense pass rate among delivered plans, mean
    reward, and the conditional mean reward over fully feasible plans."""
    if not breakdowns:
        raise EmptyCorpus("metrics over an empty corpus")
    delivered = [b for b in breakdowns if b.format_passed]
    feasible = [b for b in delivered if b.commonsense_passed]
    return CorpusMetrics(
        delivery_rate=len(delivered) / len(breakdowns),
        commonsense_pass_rate=(len(feasible) / len(delivered)) if delivered else None,
        mean_reward=sum(b.reward for b in breakdowns) / len(breakdowns),
        cond_reward=(sum(b.reward for b in feasible) / len(feasible)) if feasible else None,
        n_total=len(breakdowns),
        n_delivered=len(delivered),
        n_feasible=len(feasible),
    )
