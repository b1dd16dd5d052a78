import csv

import pytest

from adaptloop.cli import main
from adaptloop.config import config_from_dict, load_config
from adaptloop.errors import InvalidArgument, ParseError
from adaptloop.knowledge_base import HEADER, KbRecord, KnowledgeBase, RecordKind
from adaptloop.monitor import Category

LAG = """
[telemetry]
seed = 11
duration = 90

[[telemetry.scenarios]]
kind = "PacketDropPlusLag"
start = 20
duration = 15
intensity = 12.0

[paths]
report_dir = "report"
"""


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_benign_run_has_no_anomalies(write_config, tmp_path, capsys):
    cfg = write_config("[telemetry]\nseed = 1\nduration = 300\n")
    assert main(["run", str(cfg)]) == 0
    assert "anomalies: 0  adaptations: 0" in capsys.readouterr().out
    assert rows(tmp_path / "report" / "adaptation_ledger.csv") == []
    summary = (tmp_path / "report" / "summary.txt").read_text()
    assert "anomalies: 0" in summary and "adaptations: 0" in summary


def test_qoa_run_chooses_a1(write_config, tmp_path):
    cfg = write_config(LAG)
    assert main(["run", str(cfg)]) == 0
    ledger = rows(tmp_path / "report" / "adaptation_ledger.csv")
    qoa = [r for r in ledger if r["anomaly_issue"] == "QoA"]
    assert [(r["adaptation"], r["delta_cs_pct"], r["measured_i_pct"]) for r in qoa] == [("A1", "26.43", "26.43")]
    for name in ("queue_metrics", "adaptation_ledger", "recommendations"):
        assert (tmp_path / "report" / f"{name}.txt").exists()
        assert (tmp_path / "report" / f"{name}.csv").exists()


def test_no_adaptation_keeps_excess(write_config, tmp_path):
    cfg = write_config(LAG)
    assert main(["run", str(cfg), "--no-adaptation", "--out", str(tmp_path / "na")]) == 0
    assert rows(tmp_path / "na" / "adaptation_ledger.csv") == []
    trace = rows(tmp_path / "na" / "latency_trace.csv")
    window = [r for r in trace if 20 <= float(r["t_s"]) < 35]
    assert len(window) == 15
    assert all(float(r["effective_latency_ms"]) == float(r["latency_ms"]) > 23.5 + 9 for r in window)


def test_overrides_and_env_kb(write_config, tmp_path, monkeypatch):
    cfg = write_config(LAG)
    kb_path = tmp_path / "env_kb.csv"
    monkeypatch.setenv("ADAPTLOOP_KB", str(kb_path))
    assert main(["run", str(cfg), "--seed", "3", "--severe-threshold", "100"]) == 0
    kinds = [r.record_kind for r in KnowledgeBase(kb_path)]
    assert kinds.count(RecordKind.DECISION_MADE) == 2
    (q,) = [r for r in rows(tmp_path / "report" / "queue_metrics.csv") if r["source"] == "session"]
    assert q["severe_processed"] == "0"
    # a second run against the same KB gets a fresh session id
    assert main(["run", str(cfg), "--seed", "3"]) == 0
    assert {r.session_id for r in KnowledgeBase(kb_path)} == {"session-0", "session-0.2"}


def test_forced_adaptation(write_config, tmp_path):
    cfg = write_config(LAG + '\n[control]\nforce = { QoA = "A2", QoS = "A1+A4" }\n')
    assert main(["run", str(cfg)]) == 0
    got = {(r["anomaly_issue"], r["adaptation"], r["measured_i_pct"]) for r in rows(tmp_path / "report" / "adaptation_ledger.csv")}
    assert got == {("QoA", "A2", "13.46"), ("QoS", "A1+A4", "20.48")}


def test_config_errors(write_config, tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.toml")]) == 2
    assert "not found" in capsys.readouterr().err
    bad = write_config("[telemetry\n", "bad.toml")
    assert main(["run", str(bad)]) == 2
    with pytest.raises(ParseError):
        config_from_dict({"telemetry": {"sede": 1}})
    with pytest.raises(ParseError):
        config_from_dict({"extra": {}})
    with pytest.raises(InvalidArgument):
        config_from_dict({"queue": {"capacity_k": 0}})
    with pytest.raises(InvalidArgument):
        config_from_dict({"queue": {"overflow_policy": "Drop"}})


def test_config_paths_are_relative_to_file(write_config, tmp_path):
    cfg = load_config(write_config('[paths]\nkb = "kb/store.csv"\n'))
    assert cfg.kb_path == tmp_path / "kb" / "store.csv"
    assert cfg.with_overrides(seed=5).telemetry.seed == 5


def test_analyze_table(capsys):
    assert main(["analyze", "1", "10", "10", "10", "5"]) == 0
    out = capsys.readouterr().out
    assert "x_bar_s     0.3\n" in out and "rho         0.3\n" in out


def test_analyze_rho_one_uniform(capsys):
    assert main(["analyze", "2", "6", "6", "6", "3"]) == 0
    out = capsys.readouterr().out
    states = out.split("n  P_n")[1]
    assert states.count("0.25\n") == 4
    assert "rho         1\n" in out


def test_analyze_rejects_zero_capacity(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "1", "10", "10", "10", "0"])
    assert exc.value.code == 2


def test_kb_commands(tmp_path, capsys):
    kb_path = tmp_path / "kb.csv"
    assert main(["kb", "--path", str(kb_path), "export"]) == 0
    assert capsys.readouterr().out == ",".join(HEADER) + "\n"

    kb = KnowledgeBase(kb_path)
    kb.append(KbRecord("s", 1.0, RecordKind.DECISION_MADE, Category.QOA, adaptation="A1", ct=1))
    kb.append(KbRecord("s", 2.0, RecordKind.FEEDBACK_MEASURED, Category.QOA, adaptation="A1", impact_i=0.2643, outcome_latency_ms=30.0))
    assert main(["kb", "--path", str(kb_path), "history", "QoA"]) == 0
    assert capsys.readouterr().out == "adaptation,ct,i\nA1,1,0.2643\n"

    out = tmp_path / "exported.csv"
    assert main(["kb", "--path", str(kb_path), "export", str(out)]) == 0
    other = tmp_path / "other.csv"
    assert main(["kb", "--path", str(other), "import", str(out)]) == 0
    assert other.read_bytes() == kb_path.read_bytes()

    bad = tmp_path / "bad.csv"
    bad.write_text(",".join(HEADER) + "\n1,s,zero,AnomalyDetected,QoA,1,,,,,,,\n")
    assert main(["kb", "--path", str(other), "import", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert other.read_bytes() == kb_path.read_bytes()


def test_kb_needs_path(monkeypatch, capsys):
    monkeypatch.delenv("ADAPTLOOP_KB", raising=False)
    assert main(["kb", "history", "QoA"]) == 2
    assert "ADAPTLOOP_KB" in capsys.readouterr().err
