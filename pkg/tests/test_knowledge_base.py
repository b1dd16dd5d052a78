import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptloop.errors import InvalidRecord, ParseError
from adaptloop.knowledge_base import HEADER, KbRecord, KnowledgeBase, RecordKind, read_csv
from adaptloop.monitor import Category


def detected(ts, sev=5.0, session="s"):
    return KbRecord(session, ts, RecordKind.ANOMALY_DETECTED, Category.QOA, severity_ms=sev)


def fb(ts, i, an="A1", cat=Category.QOA):
    return KbRecord("s", ts, RecordKind.FEEDBACK_MEASURED, cat, adaptation=an, impact_i=i, outcome_latency_ms=25.0)


def test_header_schema():
    assert ",".join(HEADER) == (
        "record_id,session_id,timestamp_s,record_kind,anomaly_category,severity_ms,adaptation,"
        "ct,impact_i,rat_s,cost_per_hr,risk_rf,outcome_latency_ms"
    )


def test_empty_store_exports_header_only(tmp_path):
    p = tmp_path / "kb.csv"
    KnowledgeBase(p)
    assert p.read_text() == ",".join(HEADER) + "\n"


def test_append_persists_and_reloads(tmp_path):
    p = tmp_path / "kb.csv"
    kb = KnowledgeBase(p)
    assert kb.append(detected(1.0)) == 1
    assert kb.append(fb(2.0, 0.25)) == 2
    again = KnowledgeBase(p)
    assert again.records == kb.records
    assert again.append(detected(3.0)) == 3


def test_ema_history():
    kb = KnowledgeBase()
    kb.append(KbRecord("s", 0.0, RecordKind.DECISION_MADE, Category.QOA, adaptation="A1", ct=1))
    kb.extend([fb(1.0, 0.5), fb(2.0, 0.0)])
    (h,) = kb.history("QoA")
    assert (h.an, h.ct, h.i) == ("A1", 1, 0.25)
    assert kb.history("QoS") == []


def test_validation():
    with pytest.raises(InvalidRecord):
        KbRecord("s", 0.0, RecordKind.ANOMALY_DETECTED).validate()
    with pytest.raises(InvalidRecord):
        KbRecord("s", 0.0, RecordKind.ANOMALY_DETECTED, Category.QOA, severity_ms=1.0, adaptation="A1").validate()
    with pytest.raises(InvalidRecord):
        fb(0.0, 1.5).validate()
    kb = KnowledgeBase()
    kb.append(detected(5.0))
    with pytest.raises(InvalidRecord):
        kb.append(detected(4.0))
    kb.append(detected(4.0, session="other"))


def test_parse_errors_carry_line(tmp_path):
    p = tmp_path / "bad.csv"
    good = KnowledgeBase()
    good.extend([detected(1.0), detected(2.0)])
    lines = good.to_csv_text().splitlines()
    lines[2] = lines[2].replace("AnomalyDetected", "Bogus")
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as exc:
        read_csv(p)
    assert exc.value.line == 3 and str(exc.value).startswith("line 3:")
    target = KnowledgeBase()
    with pytest.raises(ParseError):
        target.import_csv(p)
    assert len(target) == 0


def test_non_increasing_ids_rejected(tmp_path):
    kb = KnowledgeBase()
    kb.extend([detected(1.0), detected(2.0)])
    lines = kb.to_csv_text().splitlines()
    lines[2] = "1" + lines[2][1:]
    p = tmp_path / "dup.csv"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError, match="line 3"):
        read_csv(p)


floats = st.floats(0, 1e6, allow_nan=False, allow_infinity=False)
unit = st.floats(0, 1)
records = st.one_of(
    st.builds(lambda s: KbRecord("s", 0.0, RecordKind.ANOMALY_DETECTED, Category.QOS, severity_ms=s), floats),
    st.builds(
        lambda c, i, r: KbRecord("s", 0.0, RecordKind.DECISION_MADE, Category.DOS, adaptation="A1+A6", ct=c, impact_i=i, risk_rf=r),
        st.integers(0, 50),
        unit,
        unit,
    ),
    st.builds(
        lambda i, lat: KbRecord(
            "s", 0.0, RecordKind.FEEDBACK_MEASURED, Category.INTRUSION, adaptation="A8", impact_i=i, outcome_latency_ms=lat
        ),
        unit,
        floats,
    ),
)


@settings(max_examples=100, deadline=None)
@given(st.lists(records, max_size=30))
def test_round_trip_is_exact(tmp_path_factory, recs):
    d = tmp_path_factory.mktemp("rt")
    kb = KnowledgeBase()
    kb.extend(recs)
    kb.export_csv(d / "a.csv")
    back = KnowledgeBase()
    back.import_csv(d / "a.csv")
    assert back.records == kb.records
    back.export_csv(d / "b.csv")
    assert (d / "a.csv").read_bytes() == (d / "b.csv").read_bytes()


def test_import_is_all_or_nothing(tmp_path):
    src = KnowledgeBase()
    src.extend([detected(1.0), detected(9.0)])
    src.export_csv(tmp_path / "src.csv")
    target = KnowledgeBase()
    target.append(detected(5.0))
    with pytest.raises(InvalidRecord):
        target.import_csv(tmp_path / "src.csv")
    assert len(target) == 1
