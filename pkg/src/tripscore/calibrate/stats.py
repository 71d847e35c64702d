"""Inter-annotator agreement and reliability statistics.

Covers chance-corrected agreement (Cohen's and Fleiss' kappa), rank
correlation (tie-corrected Kendall tau-b), raw agreement rates, and the
K-class symmetric-noise model that turns raw agreement into latent
reliability estimates.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from ..errors import DomainError, LengthMismatch, NoPairs


def cohen_kappa(ratings1: Sequence, ratings2: Sequence) -> float:
    """Chance-corrected agreement between two raters.

    Degenerate case: when chance agreement is already 1 (both raters stuck
    on a single shared category) perfect agreement maps to kappa 1.
    """
    if len(ratings1) != len(ratings2):
        raise LengthMismatch(f"{len(ratings1)} vs {len(ratings2)} ratings")
    if not ratings1:
        raise NoPairs("kappa over empty ratings")
    n = len(ratings1)
    categories = sorted(set(ratings1) | set(ratings2), key=str)
    index = {c: i for i, c in enumerate(categories)}
    observed = sum(1 for a, b in zip(ratings1, ratings2) if a == b) / n
    p1 = np.zeros(len(categories))
    p2 = np.zeros(len(categories))
    for a, b in zip(ratings1, ratings2):
        p1[index[a]] += 1
        p2[index[b]] += 1
    expected = float(np.dot(p1 / n, p2 / n))
    if expected == 1.0:
        return 1.0 if observed == 1.0 else 0.0
    return (observed - expected) / (1.0 - expected)


def fleiss_kappa(rating_matrix: np.ndarray) -> float:
    """Fleiss' kappa from an N x K matrix of per-subject category counts.

    Every subject must carry the same number of ratings, and at least two
    raters are required for the statistic to exist.
    """
    counts = np.asarray(rating_matrix, dtype=float)
    if counts.ndim != 2 or counts.size == 0:
        raise NoPairs("expected a non-empty N x K count matrix")
    row_totals = counts.sum(axis=1)
    if not np.all(row_totals == row_totals[0]):
        raise LengthMismatch("all subjects need the same number of ratings")
    n_raters = row_totals[0]
    if n_raters < 2:
        raise DomainError("Fleiss' kappa needs at least two raters")
    p_categories = counts.sum(axis=0) / counts.sum()
    p_subjects = (np.einsum("ij,ij->i", counts, counts) - n_raters) / (n_raters * (n_raters - 1))
    p_bar = float(p_subjects.mean())
    p_expected = float(np.dot(p_categories, p_categories))
    if p_expected == 1.0:
        return 1.0 if p_bar == 1.0 else 0.0
    return (p_bar - p_expected) / (1.0 - p_expected)


def labels_to_matrix(rater_vectors: Sequence[Sequence], categories: Sequence) -> np.ndarray:
    """Stack aligned per-rater label vectors into a count matrix."""
    if not rater_vectors:
        raise NoPairs("no rater vectors")
    n = len(rater_vectors[0])
    for vec in rater_vectors:
        if len(vec) != n:
            raise LengthMismatch("rater vectors differ in length")
    index = {c: i for i, c in enumerate(categories)}
    out = np.zeros((n, len(categories)), dtype=np.int64)
    for vec in rater_vectors:
        for subject, label in enumerate(vec):
            out[subject, index[label]] += 1
    return out


def kendall_tau(score_deltas: Sequence[float], labels: Sequence[int]) -> float:
    """Tie-corrected Kendall tau-b between reward deltas and sign labels.

    Labels use +1 (first plan preferred), -1 (second), 0 (neither).
    """
    if len(score_deltas) != len(labels):
        raise LengthMismatch(f"{len(score_deltas)} deltas vs {len(labels)} labels")
    n = len(score_deltas)
    if n < 2:
        raise NoPairs("tau needs at least two observations")
    x = np.asarray(score_deltas, dtype=float)
    y = np.asarray(labels, dtype=float)

    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    iu = np.triu_indices(n, k=1)
    products = dx[iu] * dy[iu]
    concordant = int(np.sum(products > 0))
    discordant = int(np.sum(products < 0))

    n0 = n * (n - 1) // 2
    n1 = sum(t * (t - 1) // 2 for t in _tie_counts(x))
    n2 = sum(t * (t - 1) // 2 for t in _tie_counts(y))
    denom = math.sqrt((n0 - n1) * (n0 - n2))
    if denom == 0.0:
        raise DomainError("tau-b undefined: one ranking is entirely tied")
    return (concordant - discordant) / denom


def _tie_counts(values: np.ndarray) -> list[int]:
    _, counts = np.unique(values, return_counts=True)
    return [int(c) for c in counts if c > 1]


def pairwise_agreement_rate(rater_vectors: Sequence[Sequence]) -> float:
    """Mean fraction of items on which a pair of raters agrees, averaged
    over all rater pairs."""
    if len(rater_vectors) < 2:
        raise DomainError("pairwise agreement needs at least two raters")
    rates = []
    for i in range(len(rater_vectors)):
        for j in range(i + 1, len(rater_vectors)):
            a, b = rater_vectors[i], rater_vectors[j]
            if len(a) != len(b):
                raise LengthMismatch("rater vectors differ in length")
            rates.append(sum(1 for x, y in zip(a, b) if x == y) / len(a))
    return float(np.mean(rates))


def three_rater_agreement_rate(rater_vectors: Sequence[Sequence]) -> float:
    """Fraction of items on which every rater picked the same label."""
    if len(rater_vectors) < 2:
        raise DomainError("all-agree rate needs at least two raters")
    n = len(rater_vectors[0])
    agree = 0
    for idx in range(n):
        labels = {vec[idx] for vec in rater_vectors}
        if len(labels) == 1:
            agree += 1
    return agree / n


# -- K-class symmetric-noise model -------------------------------------------


def latent_agreement_from_pairwise(a_pair: float, k: int) -> float:
    """Solve A_pair = r^2 + (1-r)^2/(K-1) for the annotator reliability r."""
    if k < 2:
        raise DomainError("noise model needs K >= 2")
    if not k * a_pair > 1.0:
        raise DomainError(f"pairwise agreement {a_pair} not above the 1/K chance floor")
    if a_pair > 1.0:
        raise DomainError("agreement cannot exceed 1")
    return (1.0 + math.sqrt((k - 1) * (k * a_pair - 1.0))) / k


def model_latent_agreement(a_model_h: float, r: float, k: int) -> float:
    """Latent-truth agreement of a model given its raw agreement with
    annotators of reliability r."""
    if k < 2:
        raise DomainError("noise model needs K >= 2")
    if k * r == 1.0:
        raise DomainError("annotator reliability at chance level; model reliability undefined")
    return (k * a_model_h - a_model_h + r - 1.0) / (k * r - 1.0)


def all_agree_rate(r: float, k: int) -> float:
    """Predicted probability that three independent annotators of
    reliability r all pick the same label.

    NOTE: the error term (1-r)^3 is deliberately not scaled by 1/(K-1)^2;
    downstream acceptance tolerances pin this exact arithmetic.
    """
    if k < 2:
        raise DomainError("noise model needs K >= 2")
    return r**3 + (1.0 - r) ** 3


def predicted_all_agree(a_pair: float, k: int) -> float:
    return all_agree_rate(latent_agreement_from_pairwise(a_pair, k), k)


def pairwise_from_latent(r: float, k: int) -> float:
    """Inverse of :func:`latent_agreement_from_pairwise` (round-trip check)."""
    return r * r + (1.0 - r) ** 2 / (k - 1)


def noise_model_report(
    a_pair: float,
    k: int,
    a_model_h: Optional[float] = None,
    observed_all_agree: Optional[float] = None,
) -> dict:
    """Bundle of the noise-model quantities used in calibration reports."""
    r = latent_agreement_from_pairwise(a_pair, k)
    out = {
        "k": k,
        "pairwiseAgreement": a_pair,
        "humanReliability": r,
        "predictedAllAgree": all_agree_rate(r, k),
    }
    if observed_all_agree is not None:
        out["observedAllAgree"] = observed_all_agree
    if a_model_h is not None:
        r_model = model_latent_agreement(a_model_h, r, k)
        out["modelAgreement"] = a_model_h
        out["modelReliability"] = r_model
        out["ceilingRatio"] = r_model / r
    return out
