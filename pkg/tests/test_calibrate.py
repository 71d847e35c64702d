from random import Random

import numpy as np
import pytest

from tripscore.calibrate.grid import (
    GridSpec,
    ScoredPair,
    bootstrap_ci,
    calibrate,
    cross_validate,
    grid_search,
    majority_label,
    pair_agreement,
    pair_deltas,
    pair_predictions,
    score_pairs,
    sensitivity_sweep,
)
from tripscore.calibrate import kernels
from tripscore.errors import NoPairs, TooFewPairs
from tripscore.ingest import FixtureSpec, generate_fixture, load_pairs
from tripscore.model import DEFAULT_WEIGHTS, AnnotationPair, PrefVector, SoftVector, WeightConfig
from tripscore.reward import aggregate

from conftest import GOLDEN

SMALL_GRID = GridSpec(w1_grid=(0.1, 0.7), w2_grid=(0.2, 1.0), w3_grid=(0.8, 1.2), w4_grid=(0.1, 0.8))

PLANTED = WeightConfig(
    w1=(0.7, 0.4, 0.4, 0.1, 0.7, 0.1, 0.4),
    w2_synthetic=(0.6, 0.6, 0.2, 1.0),
    w2_real=(1.0,),
    w3=1.0,
    w4_synthetic=0.6,
    w4_real=0.6,
)


def synth_pairs(n, theta, noise, seed, gate_mix=0.0):
    """Random feature pairs labeled by theta, with optional label noise and
    a fraction of pairs where one plan is gated."""
    rng = Random(seed)
    out = []
    for i in range(n):
        active_a = active_b = True
        base_a = base_b = 2.0
        if rng.random() < gate_mix:
            if rng.random() < 0.5:
                base_a, active_a = (0.0, False) if rng.random() < 0.5 else (-3.0, False)
            else:
                base_b, active_b = (0.0, False) if rng.random() < 0.5 else (-3.0, False)
        soft_a = tuple(rng.random() for _ in range(7)) if active_a else (0.0,) * 7
        soft_b = tuple(rng.random() for _ in range(7)) if active_b else (0.0,) * 7
        pref_a = tuple(rng.random() for _ in range(4)) if active_a else (0.0,) * 4
        pref_b = tuple(rng.random() for _ in range(4)) if active_b else (0.0,) * 4
        mask = (1.0, 1.0, 1.0, 1.0)
        pair = ScoredPair(f"p{i}", "synthetic", 0, base_a, base_b, active_a, active_b,
                          soft_a, soft_b, pref_a, pref_b, mask)
        delta = float(pair_deltas(theta, [pair])[0])
        label = 1 if delta > 1e-9 else (-1 if delta < -1e-9 else 0)
        if rng.random() < noise:
            label = rng.choice([v for v in (1, -1, 0) if v != label])
        out.append(ScoredPair(f"p{i}", "synthetic", label, base_a, base_b, active_a, active_b,
                              soft_a, soft_b, pref_a, pref_b, mask))
    return out


class TestMajorityLabel:
    def test_simple_majority(self):
        assert majority_label(["A", "A", "B"]) == "A"

    def test_three_way_split_dropped(self):
        assert majority_label(["A", "B", "neither"]) is None

    def test_neither_majority(self):
        assert majority_label(["neither", "neither", "A"]) == "neither"

    def test_even_tie_dropped(self):
        assert majority_label(["A", "A", "B", "B"]) is None


class TestPairAgreement:
    def test_perfect_and_inverted(self):
        pairs = synth_pairs(50, PLANTED, 0.0, seed=1)
        assert pair_agreement(PLANTED, pairs) == 1.0
        flipped = [
            ScoredPair(p.pair_id, p.split, -p.label, p.base_a, p.base_b, p.active_a, p.active_b,
                       p.soft_a, p.soft_b, p.pref_a, p.pref_b, p.pref_mask)
            for p in pairs if p.label != 0
        ]
        assert pair_agreement(PLANTED, flipped) == 0.0

    def test_agrees_with_reward_aggregate(self):
        # The vectorized feature path and the reward module must predict the
        # same winners away from the tie band.
        pairs = synth_pairs(200, PLANTED, 0.0, seed=2, gate_mix=0.3)
        preds = pair_predictions(PLANTED, pairs)
        for pair, pred in zip(pairs, preds):
            def reward_of(base, active, soft, pref):
                if base == -3.0:
                    return -3.0
                if base == 0.0:
                    return 0.0
                return aggregate(1, 1, SoftVector(*soft),
                                 PrefVector(*pref), PLANTED, "synthetic")
            ra = reward_of(pair.base_a, pair.active_a, pair.soft_a, pair.pref_a)
            rb = reward_of(pair.base_b, pair.active_b, pair.soft_b, pair.pref_b)
            delta = ra - rb
            if abs(delta) < 1e-6:
                continue
            expected = 1 if delta > 0 else -1
            assert pred == expected

    def test_rescaling_w1_w2_leaves_agreement_unchanged(self):
        pairs = synth_pairs(100, PLANTED, 0.1, seed=3)
        scaled = WeightConfig(
            w1=tuple(w * 3.7 for w in PLANTED.w1),
            w2_synthetic=tuple(w * 0.21 for w in PLANTED.w2_synthetic),
            w2_real=PLANTED.w2_real,
            w3=PLANTED.w3,
            w4_synthetic=PLANTED.w4_synthetic,
            w4_real=PLANTED.w4_real,
        )
        assert pair_agreement(PLANTED, pairs) == pair_agreement(scaled, pairs)

    def test_empty_raises(self):
        with pytest.raises(NoPairs):
            pair_agreement(PLANTED, [])


class TestGridSearch:
    def test_recovers_planted_grid_point(self):
        pairs = synth_pairs(300, PLANTED, 0.0, seed=4)
        theta, acc = grid_search(pairs)
        assert acc >= pair_agreement(PLANTED, pairs) - 1e-12
        assert acc == 1.0
        assert theta.w1 == PLANTED.w1 and theta.w2_synthetic == PLANTED.w2_synthetic

    def test_with_noise_beats_planted(self):
        pairs = synth_pairs(300, PLANTED, 0.1, seed=5)
        theta, acc = grid_search(pairs)
        assert acc >= pair_agreement(PLANTED, pairs)

    def test_deterministic(self):
        pairs = synth_pairs(60, PLANTED, 0.2, seed=6)
        a = grid_search(pairs, SMALL_GRID)
        b = grid_search(pairs, SMALL_GRID)
        assert a == b

    def test_single_repeated_pair_no_crash(self):
        one = synth_pairs(1, PLANTED, 0.0, seed=7)[0]
        theta, acc = grid_search([one] * 10, SMALL_GRID)
        assert acc in (0.0, 1.0)

    def test_all_neither_labels_with_distinct_rewards(self):
        pairs = synth_pairs(30, PLANTED, 0.0, seed=8)
        neithered = [
            ScoredPair(p.pair_id, p.split, 0, p.base_a, p.base_b, p.active_a, p.active_b,
                       p.soft_a, p.soft_b, p.pref_a, p.pref_b, p.pref_mask)
            for p in pairs if p.label != 0
        ]
        if len(neithered) >= 10:
            _theta, acc = grid_search(neithered, SMALL_GRID)
            assert acc <= 0.2  # near-ties can sneak in; genuine wins are impossible to label

    def test_too_few_pairs(self):
        with pytest.raises(NoPairs):
            grid_search(synth_pairs(5, PLANTED, 0.0, seed=9), SMALL_GRID)

    def test_numpy_and_numba_paths_agree(self):
        pairs = synth_pairs(80, PLANTED, 0.15, seed=10)
        fast = grid_search(pairs, SMALL_GRID)
        slow = grid_search(pairs, SMALL_GRID, force_numpy=True)
        assert fast == slow


class TestCrossValidate:
    def test_separable_pairs_score_high(self):
        pairs = synth_pairs(120, PLANTED, 0.0, seed=11)
        folds = cross_validate(pairs, SMALL_GRID, k=5, seed=0)
        assert len(folds) == 5
        assert np.mean(folds) > 0.9

    def test_too_few(self):
        with pytest.raises(TooFewPairs):
            cross_validate(synth_pairs(3, PLANTED, 0.0, seed=12), SMALL_GRID, k=5)

    def test_deterministic_given_seed(self):
        pairs = synth_pairs(60, PLANTED, 0.3, seed=13)
        assert cross_validate(pairs, SMALL_GRID, seed=5) == cross_validate(pairs, SMALL_GRID, seed=5)

    def test_label_shuffled_pairs_near_marginal(self):
        rng = Random(14)
        pairs = synth_pairs(400, PLANTED, 0.0, seed=14)
        labels = [p.label for p in pairs]
        rng.shuffle(labels)
        shuffled = [
            ScoredPair(p.pair_id, p.split, label, p.base_a, p.base_b, p.active_a, p.active_b,
                       p.soft_a, p.soft_b, p.pref_a, p.pref_b, p.pref_mask)
            for p, label in zip(pairs, labels)
        ]
        folds = cross_validate(shuffled, SMALL_GRID, k=5, seed=0)
        counts = {v: labels.count(v) / len(labels) for v in (1, -1, 0)}
        marginal = max(counts.values())
        assert abs(np.mean(folds) - marginal) <= 0.1


class TestBootstrap:
    def test_constant_data_degenerate_interval(self):
        pairs = synth_pairs(40, PLANTED, 0.0, seed=15)
        lo, hi = bootstrap_ci(pairs, PLANTED, iterations=200, seed=0)
        assert lo == hi == 1.0

    def test_interval_contains_point(self):
        pairs = synth_pairs(150, PLANTED, 0.2, seed=16)
        point = pair_agreement(PLANTED, pairs)
        lo, hi = bootstrap_ci(pairs, PLANTED, iterations=500, seed=0)
        assert lo <= point <= hi

    def test_width_shrinks_with_n(self):
        small = synth_pairs(100, PLANTED, 0.2, seed=17)
        big = synth_pairs(2000, PLANTED, 0.2, seed=17)
        lo_s, hi_s = bootstrap_ci(small, PLANTED, iterations=400, seed=1)
        lo_b, hi_b = bootstrap_ci(big, PLANTED, iterations=400, seed=1)
        assert (hi_b - lo_b) < (hi_s - lo_s)

    def test_deterministic(self):
        pairs = synth_pairs(80, PLANTED, 0.2, seed=18)
        assert bootstrap_ci(pairs, PLANTED, seed=3) == bootstrap_ci(pairs, PLANTED, seed=3)


class TestSensitivity:
    def test_multiplier_scaling_preserves_winners_when_ungated(self):
        pairs = synth_pairs(200, PLANTED, 0.0, seed=19, gate_mix=0.0)
        base_preds = pair_predictions(PLANTED, pairs)
        for w3, w4 in ((0.5, 0.05), (1.0, 0.10), (1.5, 0.15), (2.0, 0.20)):
            from dataclasses import replace
            # joint scaling of the baseline (1.0, 0.1) multipliers
            variant = replace(PLANTED, w3=w3 * PLANTED.w3, w4_synthetic=w4 * PLANTED.w4_synthetic / 0.1,
                              w4_real=w4 * PLANTED.w4_real / 0.1)
            preds = pair_predictions(variant, pairs)
            assert (preds == base_preds).all()

    def test_simplex_normalization_identical_rewards(self):
        pairs = synth_pairs(50, PLANTED, 0.0, seed=20)
        from tripscore.calibrate.grid import _simplex
        from dataclasses import replace
        variant = replace(PLANTED, w1=_simplex(PLANTED.w1, 1.0))
        base = pair_deltas(PLANTED, pairs)
        scaled = pair_deltas(variant, pairs)
        assert np.allclose(base, scaled, atol=1e-12)

    def test_sweep_rows(self):
        pairs = synth_pairs(60, PLANTED, 0.1, seed=21)
        rows = sensitivity_sweep(pairs, PLANTED)
        names = [r["variant"] for r in rows]
        assert names[0] == "baseline"
        assert sum(1 for n in names if n.startswith("multipliers")) == 4
        assert sum(1 for n in names if n.startswith("simplex")) == 6
        baseline = rows[0]["trainAccuracy"]
        for row in rows:
            if row["variant"].startswith("simplex w1") or row["variant"].startswith("simplex w2 T=1"):
                pass  # temperature skews weights; only T=1 is exactly invariant
        t1_rows = [r for r in rows if r["variant"].endswith("T=1.0")]
        for row in t1_rows:
            assert row["trainAccuracy"] == pytest.approx(baseline, abs=1e-12)


class TestCalibrateEndToEnd:
    def test_full_calibration_on_golden_style_pairs(self):
        # Build 20 annotation pairs from generated fixtures and run the whole
        # calibration path on a reduced grid (each CV training fold must keep
        # at least the 10-pair minimum the grid search enforces).
        query, catalog, clean = generate_fixture(FixtureSpec(seed=1))
        _, _, broken = generate_fixture(FixtureSpec(seed=1, planted=("InformationCompleteness",)))
        pairs = []
        for i in range(20):
            if i % 2 == 0:
                pairs.append(AnnotationPair(f"pr{i}", query.query_id, clean, broken, ("A", "A", "B")))
            else:
                pairs.append(AnnotationPair(f"pr{i}", query.query_id, broken, clean, ("B", "B", "A")))
        scored = score_pairs(pairs, {query.query_id: query}, catalog)
        assert len(scored) == 20
        result = calibrate(scored, SMALL_GRID, cv_folds=3, bootstrap_iterations=100, seed=0)
        assert result.train_accuracy == 1.0
        assert result.bootstrap_low <= result.bootstrap_point <= result.bootstrap_high

    def test_golden_pairs_file_scores(self):
        from tripscore.ingest import load_catalog, query_from_dict
        import json

        pairs = load_pairs(str(GOLDEN / "pairs.jsonl"))
        catalog = load_catalog(str(GOLDEN / "catalog.json"))
        query = query_from_dict(json.loads((GOLDEN / "query.json").read_text()))
        scored = score_pairs(pairs, {query.query_id: query}, catalog)
        assert [p.label for p in scored] == [1, -1]
        assert pair_agreement(DEFAULT_WEIGHTS, scored) == 1.0
