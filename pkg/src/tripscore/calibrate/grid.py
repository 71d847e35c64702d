"""Weight learning from labeled plan pairs.

Pairs are pre-scored once into fixed feature vectors (gate bases plus soft
and preference sub-scores); only the weights vary during search. Grid
search is exhaustive and deterministic: grid points are enumerated in
lexicographic weight-tuple order and ties resolve to the smallest tuple.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from random import Random
from typing import Optional, Sequence

import numpy as np

from ..engine import score_plan
from ..errors import NoPairs, TooFewPairs
from ..model import (
    AnnotationPair,
    Query,
    ReferenceCatalog,
    ScoreBreakdown,
    WeightConfig,
)
from . import kernels
from .stats import kendall_tau

LABEL_TO_SIGN = {"A": 1, "B": -1, "neither": 0}
MIN_CALIBRATION_PAIRS = 10


@dataclass(frozen=True)
class GridSpec:
    w1_grid: tuple[float, ...] = (0.1, 0.4, 0.7)
    w2_grid: tuple[float, ...] = (0.2, 0.6, 1.0)
    w3_grid: tuple[float, ...] = (0.8, 1.0, 1.2)
    w4_grid: tuple[float, ...] = (0.1, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4)

    def __post_init__(self):
        for grid in (self.w1_grid, self.w2_grid, self.w3_grid, self.w4_grid):
            if not grid or any(v <= 0 for v in grid):
                raise ValueError("grids must be non-empty and positive")

    def size(self) -> int:
        return (
            len(self.w1_grid) ** 7 * len(self.w2_grid) ** 4 * len(self.w3_grid) * len(self.w4_grid)
        )


@dataclass(frozen=True)
class ScoredPair:
    """One annotation pair reduced to weight-independent features.

    ``base`` is the gate contribution (-3, 0, or 2); inactive plans carry
    zeroed soft/preference vectors so their weighted terms vanish. The
    preference mask marks which of the four synthetic dimensions the query
    stated; real-world pairs use slot 0 for the request-fulfillment score.
    """

    pair_id: str
    split: str
    label: int
    base_a: float
    base_b: float
    active_a: bool
    active_b: bool
    soft_a: tuple[float, ...]
    soft_b: tuple[float, ...]
    pref_a: tuple[float, ...]
    pref_b: tuple[float, ...]
    pref_mask: tuple[float, ...]


def majority_label(rater_labels: Sequence[str]) -> Optional[str]:
    """Strict majority of {A, B, neither}; None when no label wins."""
    if not rater_labels:
        raise NoPairs("no rater labels")
    counts: dict[str, int] = {}
    for label in rater_labels:
        counts[label] = counts.get(label, 0) + 1
    best, best_count = max(counts.items(), key=lambda item: item[1])
    if best_count * 2 > len(rater_labels):
        return best
    return None


def _plan_features(breakdown: ScoreBreakdown) -> tuple[float, bool, tuple, tuple]:
    if not breakdown.format_passed:
        base, active = -3.0, False
    elif not breakdown.commonsense_passed:
        base, active = 0.0, False
    else:
        base, active = 2.0, True
    soft = breakdown.soft.as_array() if (active and breakdown.soft is not None) else (0.0,) * 7
    pref = [0.0, 0.0, 0.0, 0.0]
    if active and breakdown.pref is not None:
        if breakdown.split == "realWorld":
            pref[0] = breakdown.pref.user_request or 0.0
        else:
            for slot, name in enumerate(("budget", "pacing", "attraction", "effort")):
                value = getattr(breakdown.pref, name)
                if value is not None:
                    pref[slot] = value
    return base, active, tuple(soft), tuple(pref)


def _pref_mask(query: Query) -> tuple[float, ...]:
    if query.split == "realWorld":
        return (1.0, 0.0, 0.0, 0.0)
    prefs = query.preferences
    return (
        1.0 if prefs.budget is not None else 0.0,
        1.0 if prefs.pacing is not None else 0.0,
        1.0 if prefs.attraction_tags is not None else 0.0,
        1.0 if prefs.effort is not None else 0.0,
    )


def score_pairs(
    pairs: Sequence[AnnotationPair],
    queries: dict[str, Query],
    catalog: ReferenceCatalog,
    judge=None,
) -> list[ScoredPair]:
    """Evaluate both plans of every pair and keep majority-labeled ones."""
    scored = []
    for pair in pairs:
        label = pair.majority_label or majority_label(pair.rater_labels)
        if label is None:
            continue
        query = queries[pair.query_id]
        mode = "full" if judge is not None else "ruleOnly"
        bd_a = score_plan(pair.plan_a, query, catalog, mode=mode, judge=judge)
        bd_b = score_plan(pair.plan_b, query, catalog, mode=mode, judge=judge)
        base_a, active_a, soft_a, pref_a = _plan_features(bd_a)
        base_b, active_b, soft_b, pref_b = _plan_features(bd_b)
        scored.append(
            ScoredPair(
                pair_id=pair.pair_id,
                split=query.split,
                label=LABEL_TO_SIGN[label],
                base_a=base_a,
                base_b=base_b,
                active_a=active_a,
                active_b=active_b,
                soft_a=soft_a,
                soft_b=soft_b,
                pref_a=pref_a,
                pref_b=pref_b,
                pref_mask=_pref_mask(query),
            )
        )
    return scored


# -- feature matrices ---------------------------------------------------------


def _stack(pairs: Sequence[ScoredPair]):
    n = len(pairs)
    base = np.array([p.base_a - p.base_b for p in pairs])
    soft_diff = np.array([np.subtract(p.soft_a, p.soft_b) for p in pairs])  # [n, 7]
    pref_a = np.array([p.pref_a for p in pairs])
    pref_b = np.array([p.pref_b for p in pairs])
    mask = np.array([p.pref_mask for p in pairs])  # [n, 4]
    active_delta = np.array([float(p.active_a) - float(p.active_b) for p in pairs])
    labels = np.array([p.label for p in pairs], dtype=np.int64)
    return base, soft_diff, pref_a, pref_b, mask, active_delta, labels


def _soft_term_rows(soft_diff: np.ndarray, w1_combos: np.ndarray) -> np.ndarray:
    """ds[i, p]: weighted soft mean delta for each w1 combo."""
    sums = w1_combos.sum(axis=1)
    return (w1_combos @ soft_diff.T) / sums[:, None]


def _pref_term_rows(pref_a, pref_b, mask, active_delta, w2_combos) -> np.ndarray:
    """dp[j, p]: weighted preference mean delta for each w2 combo.

    Pairs whose query stated no preference dimension fall back to the
    neutral full score for active plans.
    """
    numer = w2_combos @ (pref_a - pref_b).T  # [n2, n]
    denom = w2_combos @ mask.T
    neutral = np.broadcast_to(active_delta, numer.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, numer / np.where(denom > 0, denom, 1.0), neutral)
    return ratio


def _w1_combos(grid: GridSpec) -> np.ndarray:
    return np.array(list(itertools.product(grid.w1_grid, repeat=7)))


def _w2_combos(grid: GridSpec) -> np.ndarray:
    return np.array(list(itertools.product(grid.w2_grid, repeat=4)))


# -- single-point evaluation ---------------------------------------------------


def _theta_rows(theta: WeightConfig, pairs: Sequence[ScoredPair]):
    base, soft_diff, pref_a, pref_b, mask, active_delta, labels = _stack(pairs)
    w1 = np.array(theta.w1)
    ds = (soft_diff @ w1) / w1.sum()
    # For synthetic pairs use the synthetic w2; a real-world pair carries a
    # single preference dimension, whose weighted mean is the value itself,
    # so the same expression serves both splits.
    w2 = np.array(theta.w2_synthetic)
    numer = (pref_a - pref_b) @ w2
    denom = mask @ w2
    real = np.array([p.split == "realWorld" for p in pairs])
    numer_r = (pref_a[:, 0] - pref_b[:, 0]) * theta.w2_real[0]
    denom_r = mask[:, 0] * theta.w2_real[0]
    numer = np.where(real, numer_r, numer)
    denom = np.where(real, denom_r, denom)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = np.where(denom > 0, numer / np.where(denom > 0, denom, 1.0), active_delta)
    w4 = np.array([theta.w4(p.split) for p in pairs])
    return base, ds, dp, w4, labels


def pair_predictions(theta: WeightConfig, pairs: Sequence[ScoredPair]) -> np.ndarray:
    if not pairs:
        raise NoPairs("no scored pairs")
    base, ds, dp, w4, _labels = _theta_rows(theta, pairs)
    return kernels.predictions(base, ds, dp, theta.w3, w4)


def pair_matches(theta: WeightConfig, pairs: Sequence[ScoredPair]) -> np.ndarray:
    preds = pair_predictions(theta, pairs)
    labels = np.array([p.label for p in pairs])
    return preds == labels


def pair_agreement(theta: WeightConfig, pairs: Sequence[ScoredPair]) -> float:
    """Fraction of pairs whose predicted winner matches the majority label."""
    return float(pair_matches(theta, pairs).mean())


def pair_deltas(theta: WeightConfig, pairs: Sequence[ScoredPair]) -> np.ndarray:
    base, ds, dp, w4, _labels = _theta_rows(theta, pairs)
    return (base + theta.w3 * ds) + w4 * dp


# -- grid search ---------------------------------------------------------------


def _theta_from_indices(grid: GridSpec, w1_combos, w2_combos, flat_index, shape) -> WeightConfig:
    i, j, k, m = np.unravel_index(flat_index, shape)
    w4 = grid.w4_grid[m]
    return WeightConfig(
        w1=tuple(float(v) for v in w1_combos[i]),
        w2_synthetic=tuple(float(v) for v in w2_combos[j]),
        w2_real=(1.0,),
        w3=float(grid.w3_grid[k]),
        w4_synthetic=float(w4),
        w4_real=float(w4),
    )


def grid_search(
    pairs: Sequence[ScoredPair],
    grid: GridSpec = GridSpec(),
    force_numpy: bool = False,
) -> tuple[WeightConfig, float]:
    """Exhaustively score every grid point; return the best weighting.

    Ties break to the lexicographically smallest weight tuple because the
    accuracy tensor is laid out in lexicographic enumeration order and
    argmax returns the first maximum.
    """
    if len(pairs) < MIN_CALIBRATION_PAIRS:
        raise NoPairs(f"grid search needs >= {MIN_CALIBRATION_PAIRS} labeled pairs, got {len(pairs)}")
    base, soft_diff, pref_a, pref_b, mask, active_delta, labels = _stack(pairs)
    w1_combos = _w1_combos(grid)
    w2_combos = _w2_combos(grid)
    ds = _soft_term_rows(soft_diff, w1_combos)
    dp = _pref_term_rows(pref_a, pref_b, mask, active_delta, w2_combos)
    acc = kernels.grid_accuracy(
        base, ds, dp, labels,
        np.array(grid.w3_grid), np.array(grid.w4_grid),
        force_numpy=force_numpy,
    )
    flat_index = int(np.argmax(acc))
    theta = _theta_from_indices(grid, w1_combos, w2_combos, flat_index, acc.shape)
    return theta, float(acc.flat[flat_index])


def cross_validate(
    pairs: Sequence[ScoredPair],
    grid: GridSpec = GridSpec(),
    k: int = 5,
    seed: int = 0,
    force_numpy: bool = False,
) -> list[float]:
    """Stratified k-fold accuracy with a nested grid search per fold."""
    if len(pairs) < k:
        raise TooFewPairs(f"{len(pairs)} pairs cannot fill {k} folds")
    rng = Random(seed)
    by_label: dict[int, list[int]] = {}
    for idx, pair in enumerate(pairs):
        by_label.setdefault(pair.label, []).append(idx)
    folds: list[list[int]] = [[] for _ in range(k)]
    position = 0
    for label in sorted(by_label):
        indices = by_label[label]
        rng.shuffle(indices)
        for idx in indices:
            folds[position % k].append(idx)
            position += 1
    accuracies = []
    for fold in folds:
        held = set(fold)
        train = [pairs[i] for i in range(len(pairs)) if i not in held]
        test = [pairs[i] for i in fold]
        theta, _ = grid_search(train, grid, force_numpy=force_numpy)
        accuracies.append(pair_agreement(theta, test) if test else float("nan"))
    return accuracies


def bootstrap_ci(
    pairs: Sequence[ScoredPair],
    theta: WeightConfig,
    iterations: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile bootstrap interval of the agreement at a fixed weighting."""
    if not pairs:
        raise NoPairs("bootstrap over no pairs")
    matches = pair_matches(theta, pairs).astype(float)
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, len(pairs), size=(iterations, len(pairs)))
    accuracies = matches[indices].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(accuracies, [100 * alpha, 100 * (1 - alpha)])
    return float(lo), float(hi)


@dataclass(frozen=True)
class CalibrationResult:
    best_theta: WeightConfig
    train_accuracy: float
    fold_accuracies: tuple[float, ...]
    fold_mean: float
    fold_std: float
    bootstrap_point: float
    bootstrap_low: float
    bootstrap_high: float
    kendall: float


def calibrate(
    pairs: Sequence[ScoredPair],
    grid: GridSpec = GridSpec(),
    cv_folds: int = 5,
    bootstrap_iterations: int = 1000,
    seed: int = 0,
    force_numpy: bool = False,
) -> CalibrationResult:
    theta, train_acc = grid_search(pairs, grid, force_numpy=force_numpy)
    folds = cross_validate(pairs, grid, k=cv_folds, seed=seed, force_numpy=force_numpy)
    lo, hi = bootstrap_ci(pairs, theta, iterations=bootstrap_iterations, seed=seed)
    deltas = pair_deltas(theta, pairs)
    labels = [p.label for p in pairs]
    try:
        tau = kendall_tau(deltas, labels)
    except Exception:
        tau = float("nan")
    folds_arr = np.array(folds, dtype=float)
    return CalibrationResult(
        best_theta=theta,
        train_accuracy=train_acc,
        fold_accuracies=tuple(folds),
        fold_mean=float(np.nanmean(folds_arr)),
        fold_std=float(np.nanstd(folds_arr)),
        bootstrap_point=pair_agreement(theta, pairs),
        bootstrap_low=lo,
        bootstrap_high=hi,
        kendall=tau,
    )


# -- sensitivity sweep ---------------------------------------------------------

MULTIPLIER_VARIANTS = ((0.5, 0.05), (1.0, 0.10), (1.5, 0.15), (2.0, 0.20))
SIMPLEX_TEMPERATURES = (0.5, 1.0, 2.0)


def _simplex(weights: tuple[float, ...], temperature: float) -> tuple[float, ...]:
    powered = [w ** (1.0 / temperature) for w in weights]
    total = sum(powered)
    return tuple(w / total for w in powered)


def sensitivity_sweep(
    pairs: Sequence[ScoredPair],
    theta: WeightConfig,
    val_pairs: Optional[Sequence[ScoredPair]] = None,
) -> list[dict]:
    """Agreement under multiplier rescalings and simplex-normalized weights."""
    if not pairs:
        raise NoPairs("sweep over no pairs")
    rows = []

    def add(name: str, variant: WeightConfig):
        rows.append(
            {
                "variant": name,
                "trainAccuracy": pair_agreement(variant, pairs),
                "valAccuracy": pair_agreement(variant, val_pairs) if val_pairs else None,
            }
        )

    add("baseline", theta)
    for w3, w4 in MULTIPLIER_VARIANTS:
        scale = w4 / 0.10
        add(
            f"multipliers w3={w3} w4={w4}",
            replace(theta, w3=w3, w4_synthetic=w4, w4_real=theta.w4_real * scale),
        )
    for temperature in SIMPLEX_TEMPERATURES:
        add(f"simplex w1 T={temperature}", replace(theta, w1=_simplex(theta.w1, temperature)))
        add(
            f"simplex w2 T={temperature}",
            replace(theta, w2_synthetic=_simplex(theta.w2_synthetic, temperature)),
        )
    return rows
