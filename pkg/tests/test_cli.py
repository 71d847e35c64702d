import json
import os

import pytest

from tripscore.cli import main
from tripscore.ingest import (
    FixtureSpec,
    catalog_to_json,
    generate_fixture,
    itinerary_to_json,
    pair_to_dict,
    query_to_dict,
)
from tripscore.model import AnnotationPair


@pytest.fixture()
def fixture_dir(tmp_path):
    query, catalog, itin = generate_fixture(FixtureSpec(seed=1))
    (tmp_path / "itinerary.json").write_text(itinerary_to_json(itin))
    (tmp_path / "catalog.json").write_text(catalog_to_json(catalog))
    (tmp_path / "query.json").write_text(json.dumps(query_to_dict(query)))
    (tmp_path / "queries.json").write_text(json.dumps([query_to_dict(query)]))
    return tmp_path, query, catalog, itin


class TestScoreCommand:
    def test_clean_fixture_exit_zero(self, fixture_dir, capsys):
        root, *_ = fixture_dir
        code = main([
            "score",
            "--itinerary", str(root / "itinerary.json"),
            "--query", str(root / "query.json"),
            "--catalog", str(root / "catalog.json"),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "reward" in out

    def test_json_mode_stdout_is_pure_json(self, fixture_dir, capsys):
        root, *_ = fixture_dir
        code = main([
            "score",
            "--itinerary", str(root / "itinerary.json"),
            "--query", str(root / "query.json"),
            "--catalog", str(root / "catalog.json"),
            "--format", "json",
        ])
        assert code == 0
        captured = capsys.readouterr()
        body = json.loads(captured.out)
        assert body["formatScore"] == 1

    def test_gated_plan_still_exits_zero(self, fixture_dir, capsys, tmp_path):
        root, query, catalog, _ = fixture_dir
        _q, _c, broken = generate_fixture(FixtureSpec(seed=1, planted=("InformationVerification",)))
        bad = tmp_path / "bad.json"
        bad.write_text(itinerary_to_json(broken))
        code = main([
            "score",
            "--itinerary", str(bad),
            "--query", str(root / "query.json"),
            "--catalog", str(root / "catalog.json"),
            "--format", "json",
        ])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["reward"] == -3.0

    def test_missing_file_exit_two(self, fixture_dir, capsys):
        root, *_ = fixture_dir
        code = main([
            "score",
            "--itinerary", str(root / "absent.json"),
            "--query", str(root / "query.json"),
            "--catalog", str(root / "catalog.json"),
        ])
        assert code == 2


class TestGenFixtures:
    def test_generates_and_rescoring_matches(self, tmp_path, capsys):
        out = tmp_path / "fx"
        code = main([
            "gen-fixtures", "--out", str(out), "--count", "2", "--seed", "9",
            "--plant", "OperatingHours",
        ])
        assert code == 0
        stems = json.loads(capsys.readouterr().out)
        assert len(stems) == 2
        for stem in stems:
            manifest = json.loads((out / f"{stem}.manifest.json").read_text())
            assert manifest["mutations"][0]["constraintId"] == "OperatingHours"

    def test_unknown_plant_exit_two(self, tmp_path):
        assert main(["gen-fixtures", "--out", str(tmp_path), "--plant", "Nonsense"]) == 2


class TestStats:
    def test_apair_noise_model(self, capsys):
        code = main([
            "stats", "--apair", "0.7169", "--k", "3", "--model-agreement", "0.6075",
            "--format", "json",
        ])
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert body["noiseModel"]["humanReliability"] == pytest.approx(0.8390, abs=0.0005)
        assert body["noiseModel"]["modelReliability"] == pytest.approx(0.695, abs=0.005)
        assert body["noiseModel"]["ceilingRatio"] == pytest.approx(0.828, abs=0.005)
        assert body["noiseModel"]["predictedAllAgree"] == pytest.approx(0.594, abs=0.002)

    def test_identical_raters_kappa_one(self, tmp_path, capsys):
        ratings = tmp_path / "ratings.json"
        ratings.write_text(json.dumps({"raters": [["A", "B", "A"], ["A", "B", "A"]]}))
        code = main(["stats", "--ratings", str(ratings), "--format", "json"])
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert body["meanCohenKappa"] == 1.0
        assert body["pairwiseAgreement"] == 1.0

    def test_single_rater_exit_two(self, tmp_path, capsys):
        ratings = tmp_path / "ratings.json"
        ratings.write_text(json.dumps({"raters": [["A", "B"]]}))
        assert main(["stats", "--ratings", str(ratings)]) == 2

    def test_no_input_exit_two(self):
        assert main(["stats"]) == 2


class TestReport:
    def test_histogram_conservation(self, tmp_path, capsys):
        from tripscore.engine import breakdown_to_dict, score_plan

        breakdowns = tmp_path / "bd"
        breakdowns.mkdir()
        total_violations = 0
        for seed, plant in [(1, None), (2, "OperatingHours"), (3, "TravelBlockOut")]:
            planted = (plant,) if plant else ()
            query, catalog, itin = generate_fixture(FixtureSpec(seed=seed, planted=planted))
            bd = score_plan(itinerary_to_json(itin), query, catalog)
            total_violations += len(bd.violations)
            (breakdowns / f"{seed}.json").write_text(json.dumps(breakdown_to_dict(bd)))
        code = main(["report", "--breakdowns", str(breakdowns), "--format", "json"])
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert sum(body["violationHistogram"].values()) == body["totalViolations"] == total_violations
        assert body["n"] == 3

    def test_all_pass_corpus(self, tmp_path, capsys):
        from tripscore.engine import breakdown_to_dict, score_plan

        breakdowns = tmp_path / "bd"
        breakdowns.mkdir()
        for seed in (1, 2):
            query, catalog, itin = generate_fixture(FixtureSpec(seed=seed))
            bd = score_plan(itinerary_to_json(itin), query, catalog)
            (breakdowns / f"{seed}.json").write_text(json.dumps(breakdown_to_dict(bd)))
        code = main(["report", "--breakdowns", str(breakdowns), "--format", "json"])
        body = json.loads(capsys.readouterr().out)
        assert code == 0 and body["commonsensePassRate"] == 1.0

    def test_empty_dir_exit_two(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["report", "--breakdowns", str(empty)]) == 2


class TestBatchScore:
    def test_directory_batch(self, fixture_dir, tmp_path, capsys):
        root, query, _catalog, _ = fixture_dir
        plans = tmp_path / "plans"
        plans.mkdir()
        for seed in range(4):
            _q, _c, itin = generate_fixture(FixtureSpec(seed=seed))
            (plans / f"plan-{seed}.json").write_text(itinerary_to_json(itin))
        out = tmp_path / "out.jsonl"
        code = main([
            "batch-score",
            "--itineraries", str(plans),
            "--queries", str(root / "queries.json"),
            "--catalog", str(root / "catalog.json"),
            "--query-id", query.query_id,
            "--out", str(out),
            "--format", "json",
        ])
        assert code == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(rows) == 4
        assert [r["file"] for r in rows] == sorted(r["file"] for r in rows)


class TestCalibrateCommand:
    def test_calibrate_small_grid(self, tmp_path, capsys):
        query, catalog, clean = generate_fixture(FixtureSpec(seed=1))
        _q, _c, broken = generate_fixture(FixtureSpec(seed=1, planted=("InformationCompleteness",)))
        pairs_path = tmp_path / "pairs.jsonl"
        with pairs_path.open("w") as fh:
            for i in range(20):
                if i % 2 == 0:
                    pair = AnnotationPair(f"pr{i}", query.query_id, clean, broken, ("A", "A", "B"))
                else:
                    pair = AnnotationPair(f"pr{i}", query.query_id, broken, clean, ("B", "B", "A"))
                fh.write(json.dumps(pair_to_dict(pair)) + "\n")
        (tmp_path / "catalog.json").write_text(catalog_to_json(catalog))
        (tmp_path / "queries.json").write_text(json.dumps([query_to_dict(query)]))
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps({"w1": [0.1, 0.7], "w2": [0.2, 1.0], "w3": [1.0], "w4": [0.1, 0.8]}))
        code = main([
            "calibrate",
            "--pairs", str(pairs_path),
            "--catalog", str(tmp_path / "catalog.json"),
            "--queries", str(tmp_path / "queries.json"),
            "--grid", str(grid),
            "--cv", "2",
            "--bootstrap", "50",
            "--seed", "7",
            "--format", "json",
        ])
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert body["trainAccuracy"] == 1.0
        assert len(body["foldAccuracies"]) == 2

    def test_too_few_pairs_exit_two(self, tmp_path):
        query, catalog, clean = generate_fixture(FixtureSpec(seed=1))
        pairs_path = tmp_path / "pairs.jsonl"
        pair = AnnotationPair("pr0", query.query_id, clean, clean, ("A", "A", "B"))
        pairs_path.write_text(json.dumps(pair_to_dict(pair)) + "\n")
        (tmp_path / "catalog.json").write_text(catalog_to_json(catalog))
        (tmp_path / "queries.json").write_text(json.dumps([query_to_dict(query)]))
        code = main([
            "calibrate",
            "--pairs", str(pairs_path),
            "--catalog", str(tmp_path / "catalog.json"),
            "--queries", str(tmp_path / "queries.json"),
        ])
        assert code == 2
