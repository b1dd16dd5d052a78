import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptloop.control import catalog_from_dict, load_catalog
from adaptloop.decision import (
    AdaptationTuple,
    DecisionUnit,
    build_decision_units,
    decision_likelihoods,
    rank,
    record_use,
    relative_impacts,
    select_adaptation,
    unit_risks,
)
from adaptloop.errors import InvalidArgument, NoCandidates, NotFound, UnknownAnomalyType
from adaptloop.knowledge_base import KbRecord, KnowledgeBase, RecordKind
from adaptloop.monitor import Category

CAT = load_catalog()


def test_seeded_defaults():
    units = build_decision_units(list(Category), None, CAT)
    picks = {u.anomaly_type: select_adaptation(u, CAT).an for u in units}
    assert picks == {
        Category.QOA: "A1",
        Category.QOS: "A4",
        Category.DOS: "A1+A6",
        Category.INTRUSION: "A8",
    }


def test_unit_contents_without_history():
    (u,) = build_decision_units(["QoA"], KnowledgeBase(), CAT)
    assert [(t.an, t.ct, t.i) for t in u.tuples] == [("A1", 0, 0.2643), ("A2", 0, 0.1346), ("A3", 0, 0.05)]


def test_history_overrides_defaults():
    kb = KnowledgeBase()
    for ts, i in [(1.0, 0.9), (2.0, 0.5)]:
        kb.append(KbRecord("s", ts, RecordKind.FEEDBACK_MEASURED, Category.QOA, adaptation="A3", impact_i=i, outcome_latency_ms=24.0))
    (u,) = build_decision_units(["QoA"], kb, CAT)
    a3 = next(t for t in u.tuples if t.an == "A3")
    assert a3.i == pytest.approx(0.7)
    assert select_adaptation(u, CAT).an == "A3"


def test_ties_break_on_use_count_then_speed_then_name():
    u = DecisionUnit(Category.QOA, (AdaptationTuple("A2", 1, 0.5), AdaptationTuple("A1", 1, 0.5), AdaptationTuple("A3", 2, 0.5)))
    assert [t.an for t in rank(u, CAT)] == ["A3", "A1", "A2"]
    assert [t.an for t in rank(u, CAT, ct_descending=False)] == ["A1", "A2", "A3"]


def test_errors():
    with pytest.raises(NoCandidates):
        select_adaptation(DecisionUnit(Category.QOA, ()), CAT)
    with pytest.raises(InvalidArgument):
        AdaptationTuple("A1", 0, 1.5)
    with pytest.raises(InvalidArgument):
        DecisionUnit(Category.QOA, (AdaptationTuple("A1", 0, 0.1), AdaptationTuple("A1", 1, 0.2)))
    with pytest.raises(NotFound):
        record_use("Z9", KnowledgeBase(), "QoA", CAT)
    small = catalog_from_dict({"adaptations": {"A1": {"delta_cs": {"QoA": 0.2}}}, "candidates": {"QoA": ["A1"]}})
    with pytest.raises(UnknownAnomalyType):
        build_decision_units(["Intrusion"], None, small)


def test_record_use_counts():
    kb = KnowledgeBase()
    assert record_use("A1", kb, "QoA", CAT, timestamp=1.0) == 1
    assert record_use("A1", kb, "QoA", CAT, timestamp=2.0) == 2
    assert kb.use_count("QoS", "A1") == 0
    rec = kb.records[-1]
    assert (rec.ct, rec.rat_s, rec.cost_per_hr) == (2, 0.54, 0.23)


def test_likelihood_and_risk():
    (u,) = build_decision_units(["QoS"], None, CAT)
    lik = decision_likelihoods(u, CAT)
    assert lik == {"A4": 1.0, "A1+A4": pytest.approx(2 / 3), "A5": pytest.approx(1 / 3)}
    assert relative_impacts(u)["A4"] == 1.0
    r = unit_risks(u, CAT)["A1+A4"]
    assert r.failure_risk == pytest.approx(1 - (2 / 3 + 0.2048 / 0.3028) / 2)


names = [f"A{k}" for k in range(1, 9)]
tuples = st.lists(
    st.builds(AdaptationTuple, st.sampled_from(names), st.integers(0, 3), st.sampled_from([0.0, 0.1, 0.25, 0.5, 1.0])),
    min_size=1,
    max_size=6,
    unique_by=lambda t: t.an,
)


def dominates(a, b):
    """True when ``a`` should be chosen over ``b`` by pairwise comparison."""
    if a.i != b.i:
        return a.i > b.i
    if a.ct != b.ct:
        return a.ct > b.ct
    ra, rb = CAT.sort_r_at(a.an), CAT.sort_r_at(b.an)
    if ra != rb:
        return ra < rb
    return a.an < b.an


@settings(max_examples=300, deadline=None)
@given(tuples)
def test_select_matches_pairwise_argmax(ts):
    unit = DecisionUnit(Category.QOA, tuple(ts))
    winners = [a for a in ts if all(a is b or dominates(a, b) for b in ts)]
    assert len(winners) == 1
    assert select_adaptation(unit, CAT) == winners[0]
    for a, b in itertools.pairwise(rank(unit, CAT)):
        assert dominates(a, b)
    assert math.isclose(max(decision_likelihoods(unit, CAT).values()), 1.0)
