import pytest
from hypothesis import given
from hypothesis import strategies as st

from adaptloop.control import (
    Level,
    SystemState,
    assess_risk,
    catalog_from_dict,
    cost_bucket,
    enact,
    feedback,
    load_catalog,
    measured_impact,
    recommend,
    risk_bucket,
    scale_excess,
)
from adaptloop.errors import InvalidArgument, NoRecommendation, NothingToMeasure, ParseError, UnknownEffect
from adaptloop.knowledge_base import KnowledgeBase, RecordKind
from adaptloop.monitor import Category

CAT = load_catalog()


def test_risk_extremes_and_buckets():
    assert assess_risk(1, 1).failure_risk == 0.0
    assert assess_risk(0, 0).failure_risk == 1.0
    assert risk_bucket(0.3333) is Level.LOW
    assert risk_bucket(1 / 3) is Level.MEDIUM
    assert risk_bucket(2 / 3) is Level.HIGH
    with pytest.raises(InvalidArgument):
        assess_risk(1.2, 0.5)


@given(st.floats(0, 1), st.floats(0, 1))
def test_risk_symmetric(a, b):
    assert assess_risk(a, b).failure_risk == assess_risk(b, a).failure_risk


@pytest.mark.parametrize("cost,level", [(0.0, "L"), (0.24, "L"), (0.25, "M"), (2.4, "M"), (2.5, "H")])
def test_cost_bucket(cost, level):
    assert cost_bucket(cost).short == level


def test_level_parse():
    assert Level.parse("m") is Level.MEDIUM and Level.parse("HIGH") is Level.HIGH
    with pytest.raises(InvalidArgument):
        Level.parse("X")


def test_scale_excess_keeps_baseline_fixed():
    assert scale_excess(23.5, 0.5) == 23.5
    assert scale_excess(20.0, 0.5) == 20.0
    assert scale_excess(43.5, 0.25) == pytest.approx(38.5)


def test_enact_a1_on_qoa():
    state = SystemState(latency=39.5, cpu=12.0)
    new, rec = enact(CAT["A1"], state, 10.0, category="QoA", session_end=3610.54, r_at=0.54)
    assert new.latency == pytest.approx(23.5 + 16.0 * (1 - 0.2643))
    assert new.cpu == 4.0
    assert rec.effective_at == pytest.approx(10.54)
    assert rec.cost_charged == pytest.approx(0.23)
    assert new.active_adaptations == {"A1"}
    again, rec2 = enact(CAT["A1"], new, 20.0, category="QoA", session_end=3610.54)
    assert rec2.cost_charged == 0.0 and again.accrued_cost == new.accrued_cost


def test_enact_effects():
    s, _ = enact(CAT["A4"], SystemState(packets_out=5000.0), 0.0, category="QoS")
    assert s.packets_out == 7280.0
    s, _ = enact(CAT["A7"], SystemState(packets_out=20000.0), 0.0, category="SecurityDoS")
    assert s.packets_out == 8000.0
    s, _ = enact(CAT["A8"], SystemState(login_attempts=9, latency=30.0), 0.0, category="Intrusion")
    assert s.login_attempts == 4
    assert s.latency == pytest.approx(23.5 + 6.5 * (1 - 0.207))
    with pytest.raises(UnknownEffect):
        enact(CAT["A3"], SystemState(), 0.0, category="QoA")


def test_a8_rat_scales_with_users():
    assert CAT["A8"].resolve_r_at(active_users=10) == pytest.approx(1.0)
    assert CAT["A8"].resolve_r_at(active_users=30) == pytest.approx(3.0)


def test_feedback_logs_impact():
    kb = KnowledgeBase()
    i = feedback(33.5, 28.5, CAT["A1"], kb, "QoA", timestamp=3.0)
    assert i == pytest.approx(0.5)
    rec = kb.records[-1]
    assert rec.record_kind is RecordKind.FEEDBACK_MEASURED and rec.impact_i == 0.5
    assert measured_impact(30.0, 20.0) == 1.0
    with pytest.raises(NothingToMeasure):
        measured_impact(23.5, 23.0)


@pytest.mark.parametrize(
    "anomaly,scenario,expected",
    [
        ("QoA", "increasing number of users", "A1"),
        ("QoS", "lower latency", "A4"),
        ("Intrusion", "only valid users", "A8"),
        ("SecurityDoS", "loss of content availability", "A1+A6"),
    ],
)
def test_recommend_then_branch(anomaly, scenario, expected):
    assert recommend(CAT, anomaly, scenario).adaptation == expected


def test_recommend_falls_back():
    assert recommend(CAT, "QoA", "increasing", unavailable=["A1"]).adaptation == "A2"
    assert recommend(CAT, "SecurityDoS", "availability", risk_cap="L").adaptation == "A1+A7"
    with pytest.raises(NoRecommendation):
        recommend(CAT, "QoA", "no such scenario")


def test_catalog_cost_and_enactment_values():
    got = {n: (CAT[n].cost_per_hour, CAT.r_at(n)) for n in ("A1", "A2", "A4", "A5", "A7")}
    assert got == {"A1": (0.23, 0.54), "A2": (2.4, 300.0), "A4": (0.1, 1.0), "A5": (0.1, 300.0), "A7": (0.33, 0.51)}
    assert CAT["A1+A4"].cost_per_hour == pytest.approx(0.33)
    assert CAT["A1+A6"].delta_cs_for(Category.DOS) == 0.361


def test_catalog_errors():
    with pytest.raises(ParseError):
        catalog_from_dict({"adaptations": {"C": {"parts": ["X"]}}})
    with pytest.raises(InvalidArgument):
        catalog_from_dict({"adaptations": {}, "candidates": {"QoA": ["Z"]}})
    with pytest.raises(InvalidArgument):
        catalog_from_dict({"adaptations": {"A": {"delta_cs": {"QoA": 1.5}}}})
