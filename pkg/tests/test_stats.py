import math
from random import Random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from tripscore.calibrate.stats import (
    all_agree_rate,
    cohen_kappa,
    fleiss_kappa,
    kendall_tau,
    labels_to_matrix,
    latent_agreement_from_pairwise,
    model_latent_agreement,
    noise_model_report,
    pairwise_agreement_rate,
    pairwise_from_latent,
    three_rater_agreement_rate,
)
from tripscore.errors import DomainError, LengthMismatch, NoPairs


class TestCohenKappa:
    def test_identical_raters(self):
        labels = ["A", "B", "neither", "A", "B"]
        assert cohen_kappa(labels, labels) == 1.0

    def test_textbook_two_category_case(self):
        # observed agreement 0.7, chance 0.5 -> kappa = 0.4
        r1 = ["x"] * 10 + ["y"] * 10
        r2 = ["x"] * 7 + ["y"] * 3 + ["y"] * 7 + ["x"] * 3
        po = sum(1 for a, b in zip(r1, r2) if a == b) / 20
        assert po == 0.7
        assert cohen_kappa(r1, r2) == pytest.approx((0.7 - 0.5) / 0.5, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            cohen_kappa(["A"], ["A", "B"])

    def test_matches_oracle_on_random_instances(self):
        rng = Random(42)
        for _ in range(200):
            n = rng.randrange(2, 30)
            cats = ["A", "B", "neither"][: rng.randrange(2, 4)]
            r1 = [rng.choice(cats) for _ in range(n)]
            r2 = [rng.choice(cats) for _ in range(n)]
            assert cohen_kappa(r1, r2) == pytest.approx(
                oracles.cohen_kappa_oracle(r1, r2), abs=1e-9)

    def test_independent_raters_drive_kappa_to_zero(self):
        rng = Random(7)
        n = 10_000
        cats = ["A", "B", "neither"]
        r1 = [rng.choice(cats) for _ in range(n)]
        r2 = [rng.choice(cats) for _ in range(n)]
        assert abs(cohen_kappa(r1, r2)) < 0.05


class TestFleissKappa:
    def test_identical_raters_matrix(self):
        # three raters, all agreeing per subject
        matrix = np.array([[3, 0, 0], [0, 3, 0], [0, 0, 3], [3, 0, 0]])
        assert fleiss_kappa(matrix) == 1.0

    def test_matches_oracle_on_random_instances(self):
        rng = Random(3)
        for _ in range(200):
            subjects = rng.randrange(2, 20)
            raters = rng.randrange(2, 6)
            matrix = []
            for _ in range(subjects):
                row = [0, 0, 0]
                for _ in range(raters):
                    row[rng.randrange(3)] += 1
                matrix.append(row)
            ours = fleiss_kappa(np.array(matrix))
            ref = oracles.fleiss_kappa_oracle(matrix)
            assert ours == pytest.approx(ref, abs=1e-9)

    def test_single_rater_rejected(self):
        with pytest.raises(DomainError):
            fleiss_kappa(np.array([[1, 0], [0, 1]]))

    def test_labels_matrix_builder(self):
        raters = [["A", "B"], ["A", "neither"], ["A", "B"]]
        matrix = labels_to_matrix(raters, ["A", "B", "neither"])
        assert matrix.tolist() == [[3, 0, 0], [0, 2, 1]]


class TestKendallTau:
    def test_perfectly_concordant(self):
        deltas = [0.5, 1.5, 2.5, 3.5]
        labels = [1, 1, 1, 1]
        # all deltas positive and all labels +1: y entirely tied
        with pytest.raises(DomainError):
            kendall_tau(deltas, labels)

    def test_concordant_and_reversed(self):
        deltas = [-2.0, 0.1, 2.0]
        labels = [-1, 0, 1]
        assert kendall_tau(deltas, labels) == pytest.approx(1.0, abs=1e-12)
        assert kendall_tau(deltas, [1, 0, -1]) == pytest.approx(-1.0, abs=1e-12)

    def test_tied_labels_damp_tau(self):
        # With only three label values ties are inevitable at larger n and
        # tau-b corrects for them.
        deltas = [-2.0, -1.0, 1.0, 2.0]
        labels = [-1, -1, 1, 1]
        assert kendall_tau(deltas, labels) == pytest.approx(4 / (24 ** 0.5), abs=1e-12)

    def test_six_element_hand_case(self):
        deltas = [0.3, -0.2, 0.0, 0.8, -0.5, 0.1]
        labels = [1, 0, 0, 1, -1, -1]
        assert kendall_tau(deltas, labels) == pytest.approx(
            oracles.kendall_tau_oracle(deltas, labels), abs=1e-12)

    def test_matches_oracle_on_random_instances(self):
        rng = Random(11)
        for _ in range(200):
            n = rng.randrange(2, 25)
            deltas = [rng.uniform(-2, 2) for _ in range(n)]
            labels = [rng.choice((-1, 0, 1)) for _ in range(n)]
            if len(set(deltas)) < 2 or len(set(labels)) < 2:
                continue
            assert kendall_tau(deltas, labels) == pytest.approx(
                oracles.kendall_tau_oracle(deltas, labels), abs=1e-9)

    def test_empty_rejected(self):
        with pytest.raises(NoPairs):
            kendall_tau([], [])


class TestAgreementRates:
    def test_pairwise_rate(self):
        raters = [["A", "A", "B", "B"], ["A", "B", "B", "B"], ["A", "A", "B", "A"]]
        # pairs: (1,2): 3/4, (1,3): 3/4, (2,3): 2/4
        assert pairwise_agreement_rate(raters) == pytest.approx((0.75 + 0.75 + 0.5) / 3, abs=1e-12)

    def test_all_agree_rate(self):
        raters = [["A", "A", "B"], ["A", "B", "B"], ["A", "A", "B"]]
        assert three_rater_agreement_rate(raters) == pytest.approx(2 / 3, abs=1e-12)


class TestNoiseModel:
    def test_reference_values(self):
        r = latent_agreement_from_pairwise(0.7169, 3)
        assert r == pytest.approx(0.8390, abs=0.0005)
        r_model = model_latent_agreement(0.6075, r, 3)
        assert r_model == pytest.approx(0.695, abs=0.005)
        assert r_model / r == pytest.approx(0.828, abs=0.005)
        assert all_agree_rate(r, 3) == pytest.approx(0.594, abs=0.002)

    @given(st.floats(0.4, 1.0), st.integers(2, 6))
    @settings(max_examples=100)
    def test_round_trip(self, a_pair, k):
        if not k * a_pair > 1.0:
            return
        r = latent_agreement_from_pairwise(a_pair, k)
        assert pairwise_from_latent(r, k) == pytest.approx(a_pair, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            latent_agreement_from_pairwise(0.3, 3)  # 3*0.3 <= 1
        with pytest.raises(DomainError):
            latent_agreement_from_pairwise(0.5, 2)  # K*A == 1
        with pytest.raises(DomainError):
            model_latent_agreement(0.5, 1 / 3, 3)  # K*r == 1
        with pytest.raises(DomainError):
            latent_agreement_from_pairwise(1.2, 3)

    def test_report_bundle(self):
        report = noise_model_report(0.7169, 3, a_model_h=0.6075, observed_all_agree=0.59)
        assert set(report) >= {
            "humanReliability", "predictedAllAgree", "modelReliability", "ceilingRatio",
        }
        assert report["observedAllAgree"] == 0.59
