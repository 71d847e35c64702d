"""Weight calibration from pairwise expert labels, plus the agreement and
reliability statistics that validate them."""

from .stats import (  # noqa: F401
    all_agree_rate,
    cohen_kappa,
    fleiss_kappa,
    kendall_tau,
    latent_agreement_from_pairwise,
    model_latent_agreement,
    pairwise_agreement_rate,
    predicted_all_agree,
    three_rater_agreement_rate,
)
from .grid import (  # noqa: F401
    CalibrationResult,
    GridSpec,
    ScoredPair,
    bootstrap_ci,
    cross_validate,
    grid_search,
    majority_label,
    pair_agreement,
    score_pairs,
    sensitivity_sweep,
)
