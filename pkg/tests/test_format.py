import json

from conftest import (
    GOLDEN,
    block,
    catalog_of,
    day,
    hotel_act,
    leg_act,
    make_hotel,
    make_leg,
    make_poi,
    plan,
    poi_act,
)
from datetime import time

from tripscore.format_checks import (
    check_accuracy,
    check_relevance,
    check_response_format,
    check_verification,
    evaluate_format,
)
from tripscore.ingest import FixtureSpec, generate_fixture, itinerary_to_json, load_itinerary
from tripscore.model import (
    INFORMATION_ACCURACY,
    INFORMATION_RELEVANCE,
    INFORMATION_VERIFICATION,
    RESPONSE_FORMAT,
)


def _catalog():
    return catalog_of(
        pois=[make_poi("P1"), make_poi("P2")],
        hotels=[make_hotel("H1")],
        legs=[make_leg("T1", "Portby", "Aurora", 1, time(9, 10), time(11, 0))],
    )


class TestResponseFormat:
    def test_golden_plan_ok(self):
        assert check_response_format((GOLDEN / "itinerary.json").read_text()) == []

    def test_invalid_kind_flagged(self):
        doc = json.loads((GOLDEN / "itinerary.json").read_text())
        doc["dayInfos"][0]["scheduleDetail"][0]["detailList"][0]["type"] = "restaurant"
        out = check_response_format(json.dumps(doc))
        assert [v.constraint_id for v in out] == [RESPONSE_FORMAT]

    def test_two_morning_blocks_flagged(self):
        doc = json.loads((GOLDEN / "itinerary.json").read_text())
        doc["dayInfos"][0]["scheduleDetail"][1]["period"] = "Morning"
        out = check_response_format(json.dumps(doc))
        assert [v.constraint_id for v in out] == [RESPONSE_FORMAT]


class TestVerification:
    def test_absent_transport_id(self):
        itin = plan([day(1, [block("Morning", [leg_act("T9")])])])
        out = check_verification(itin, _catalog())
        assert len(out) == 1 and out[0].constraint_id == INFORMATION_VERIFICATION

    def test_external_poi_exempt(self):
        ext = poi_act("", name="Hidden Grove")
        itin = plan([day(1, [block("Morning", [ext])])])
        assert check_verification(itin, _catalog()) == []

    def test_all_ids_resolve(self):
        itin = plan([day(1, [block("Morning", [poi_act("P1"), hotel_act("H1")])])])
        assert check_verification(itin, _catalog()) == []


class TestAccuracy:
    def test_wrong_name_flagged(self):
        bad = poi_act("P1", name="Completely Different Gallery")
        itin = plan([day(1, [block("Morning", [bad])])])
        out = check_accuracy(itin, _catalog())
        assert len(out) == 1 and out[0].constraint_id == INFORMATION_ACCURACY

    def test_matching_transport_time_ok(self):
        leg = leg_act("T1")
        itin = plan([day(1, [block(
            "Morning", [leg], description="Take **[XXT1](T1)** departing 09:10, arriving 11:00."
        )])])
        assert check_accuracy(itin, _catalog()) == []

    def test_wrong_stated_time_flagged(self):
        leg = leg_act("T1")
        itin = plan([day(1, [block(
            "Morning", [leg], description="Take **[XXT1](T1)** departing 10:00."
        )])])
        out = check_accuracy(itin, _catalog())
        assert len(out) == 1 and out[0].constraint_id == INFORMATION_ACCURACY

    def test_name_match_is_whitespace_insensitive(self):
        spaced = poi_act("P1", name="Aurora  Site   P1")
        itin = plan([day(1, [block("Morning", [spaced])])])
        assert check_accuracy(itin, _catalog()) == []


class TestRelevance:
    def test_link_to_other_days_entry_flagged(self):
        d1 = day(1, [block("Morning", [poi_act("P1")])])
        d2 = day(2, [block(
            "Morning", [poi_act("P2")],
            description="See **[Aurora Site P2](P2)**. Also **[Aurora Site P1](P1)**.",
        )])
        out = check_relevance(plan([d1, d2]))
        assert len(out) == 1
        assert out[0].constraint_id == INFORMATION_RELEVANCE and out[0].day_index == 2

    def test_unmentioned_entry_flagged(self):
        d1 = day(1, [block("Morning", [poi_act("P1"), poi_act("P2")],
                           description="See **[Aurora Site P1](P1)**.")])
        out = check_relevance(plan([d1]))
        assert len(out) == 1 and "P2" in out[0].detail

    def test_exact_correspondence_ok(self):
        d1 = day(1, [block("Morning", [poi_act("P1"), poi_act("P2")])])
        assert check_relevance(plan([d1])) == []


class TestEvaluateFormat:
    def test_clean_plan_passes(self, clean_fixture):
        query, catalog, _itin, text = clean_fixture
        score, report = evaluate_format(text, catalog)
        assert score == 1 and report.passed and report.violations == ()

    def test_hallucinated_hotel_gives_minus_three(self):
        _q, catalog, itin = generate_fixture(FixtureSpec(seed=3, planted=(INFORMATION_VERIFICATION,)))
        score, report = evaluate_format(itinerary_to_json(itin), catalog)
        assert score == -3
        assert [v.constraint_id for v in report.violations] == [INFORMATION_VERIFICATION]

    def test_unparseable_text(self):
        score, report = evaluate_format("not json at all", _catalog())
        assert score == -3
        assert [v.constraint_id for v in report.violations] == [RESPONSE_FORMAT]

    def test_pass_iff_no_violations(self, clean_fixture):
        _q, catalog, _itin, text = clean_fixture
        score, report = evaluate_format(text, catalog)
        assert (score == 1) == (len(report.violations) == 0)

    def test_mutation_monotone_over_planted_fixtures(self):
        from tripscore.model import FORMAT_CONSTRAINTS

        for cid in FORMAT_CONSTRAINTS:
            for seed in (0, 1):
                _q, catalog, itin = generate_fixture(FixtureSpec(seed=seed, planted=(cid,)))
                score, _ = evaluate_format(itinerary_to_json(itin), catalog)
                assert score == -3, cid
