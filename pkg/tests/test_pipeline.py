import itertools

import pytest

from adaptloop.config import ControlSection, QueueSection, ScenarioConfig, TelemetrySection
from adaptloop.knowledge_base import KnowledgeBase, RecordKind
from adaptloop.monitor import Category
from adaptloop.pipeline import run_session
from adaptloop.report import format_table, queue_table, write_report
from adaptloop.telemetry import AnomalyScenario


def config(*scenarios, **control):
    return ScenarioConfig(
        telemetry=TelemetrySection(seed=4, duration=120.0, scenarios=scenarios),
        control=ControlSection(**control),
    )


def test_kb_stream_is_ordered_and_complete():
    kb = KnowledgeBase()
    res = run_session(config(AnomalyScenario("PacketDropPlusLag", 10, 10, 10.0), AnomalyScenario("UnauthorizedAccess", 60, 5, 8)), kb)
    kinds = [r.record_kind for r in kb]
    assert kinds.count(RecordKind.ANOMALY_DETECTED) == len(res.events) == 3
    for k in (RecordKind.DECISION_MADE, RecordKind.ADAPTATION_ENACTED, RecordKind.FEEDBACK_MEASURED):
        assert kinds.count(k) == 3
    assert all(a.timestamp_s <= b.timestamp_s for a, b in itertools.pairwise(kb))
    assert {r.adaptation for r in res.ledger} == {"A1", "A4", "A8"}
    assert res.final_state.accrued_cost > 0


def test_history_feeds_the_next_decision():
    kb = KnowledgeBase()
    run_session(config(AnomalyScenario("PacketDropPlusLag", 10, 10, 10.0)), kb)
    (a1,) = [h for h in kb.history(Category.QOA) if h.an == "A1"]
    assert a1.ct == 1 and a1.i == pytest.approx(0.2643)
    res = run_session(config(AnomalyScenario("PacketDropPlusLag", 10, 10, 10.0)), kb)
    assert res.session_id == "session-0.2"
    assert [r.ct for r in res.ledger if r.adaptation == "A1"] == [2]


def test_no_adaptation_logs_detections_only():
    kb = KnowledgeBase()
    res = run_session(config(AnomalyScenario("DoSFlood", 10, 10, 3.0), adaptation=False), kb)
    assert res.ledger == [] and {r.record_kind for r in kb} == {RecordKind.ANOMALY_DETECTED}
    assert res.effective_latency == [s.latency for s in res.samples]


def test_study_rows(tmp_path):
    cfg = ScenarioConfig(queue=QueueSection(lam=0.5, study_events=(5, 50)))
    res = run_session(cfg, KnowledgeBase())
    rows = queue_table(res)
    assert [r[0] for r in rows] == ["session", "poisson", "poisson"]
    paths = write_report(res, tmp_path)
    assert sorted(p.name for p in paths) == sorted(
        [f"{n}.{ext}" for n in ("queue_metrics", "adaptation_ledger", "recommendations") for ext in ("txt", "csv")]
        + ["latency_trace.csv", "summary.txt"]
    )


def test_format_table_alignment():
    assert format_table(("a", "bb"), [["xyz", "1"]]) == "a    bb\n---  --\nxyz  1\n"
