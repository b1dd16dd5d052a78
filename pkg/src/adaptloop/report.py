"""Plain-text report tables with CSV twins.

Every number is formatted with a fixed precision and nothing time- or
path-dependent is written, so identical sessions produce identical files.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

from .control import cost_bucket, recommend
from .decision import build_decision_units, unit_risks
from .knowledge_base import KnowledgeBase
from .pipeline import SessionResult, mean_enacted_r_at
from .queueing import MM1KMetrics, response_time_in_queue, system_response


def fmt(x, digits: int = 4) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.{digits}f}"
    return str(x)


def pct(x: float | None) -> str:
    return "-" if x is None else f"{100.0 * x:.2f}"


def format_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def to_csv(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    w.writerows(rows)
    return buf.getvalue()


QUEUE_HEADERS = ("source", "events_in_queue", "arrivals", "rejected", "wq_s", "x_bar_s", "rtq_s", "rat_s", "rs_s", "severe_processed")


def queue_table(result: SessionResult) -> list[list[str]]:
    rows = []
    st = result.queue_stats
    rat = mean_enacted_r_at(result)
    rtq = response_time_in_queue(st.mean_wq, st.mean_x_bar_empirical)
    rows.append(
        [
            "session",
            str(st.processed_total),
            str(st.arrivals),
            str(st.rejected),
            fmt(st.mean_wq, 6),
            fmt(st.mean_x_bar_empirical, 6),
            fmt(rtq, 6),
            fmt(rat),
            fmt(None if rat is None else system_response(rtq, rat), 6),
            str(st.processed_severe),
        ]
    )
    q = result.config.queue
    for row in result.study:
        s = row.stats
        rows.append(
            [
                "poisson",
                str(row.target_events),
                str(s.arrivals),
                str(s.rejected),
                fmt(s.mean_wq, 6),
                fmt(s.mean_x_bar_empirical, 6),
                fmt(s.mean_rtq, 6),
                fmt(q.study_r_at),
                fmt(s.mean_rs, 6),
                str(s.processed_severe),
            ]
        )
    return rows


LEDGER_HEADERS = (
    "event_id",
    "anomaly_issue",
    "detected_s",
    "decided_s",
    "adaptation",
    "ct",
    "cost_per_hr",
    "cost_level",
    "threshold_effect",
    "rat_s",
    "effective_s",
    "risk_rf",
    "risk_level",
    "delta_cs_pct",
    "pre_latency_ms",
    "post_latency_ms",
    "measured_i_pct",
    "cost_charged",
)


def ledger_table(result: SessionResult) -> list[list[str]]:
    rows = []
    for r in result.ledger:
        rec = r.enactment
        entry = result.catalog[r.adaptation]
        rows.append(
            [
                str(r.event.id),
                str(r.event.category),
                fmt(r.event.arrival_time, 3),
                fmt(r.decided_at, 3),
                r.adaptation,
                str(r.ct),
                fmt(entry.cost_per_hour, 2),
                "-" if entry.cost_per_hour is None else cost_bucket(entry.cost_per_hour).short,
                entry.threshold_effect or "-",
                fmt(rec.r_at, 2),
                fmt(rec.effective_at, 3),
                "-" if r.risk is None else fmt(r.risk.failure_risk),
                "-" if r.risk is None else r.risk.bucket.short,
                pct(rec.delta_cs),
                fmt(rec.pre_latency, 3),
                fmt(rec.post_latency, 3),
                pct(r.measured_i),
                fmt(rec.cost_charged, 6),
            ]
        )
    return rows


RECOMMEND_HEADERS = (
    "anomaly",
    "scenario",
    "then_adaptation",
    "then_risk",
    "then_cost",
    "then_delta_cs_pct",
    "else_adaptation",
    "else_risk",
    "else_cost",
    "else_delta_cs_pct",
    "computed_then_risk",
    "computed_else_risk",
    "recommended",
)


def recommendation_table(result: SessionResult, kb: KnowledgeBase | None) -> list[list[str]]:
    catalog = result.catalog
    ctl = result.config.control
    rows = []
    for rule in catalog.rules:
        unit = build_decision_units([rule.anomaly], kb, catalog)[0]
        risks = unit_risks(unit, catalog)
        th, el = rule.then_branch, rule.else_branch
        chosen = recommend(catalog, rule.anomaly, rule.scenario, ctl.risk_cap, ctl.cost_cap)
        rows.append(
            [
                str(rule.anomaly),
                rule.scenario,
                th.adaptation,
                th.risk.short,
                th.cost.short,
                pct(th.delta_cs),
                el.adaptation,
                el.risk.short,
                el.cost.short,
                pct(el.delta_cs),
                risks[th.adaptation].bucket.short if th.adaptation in risks else "-",
                risks[el.adaptation].bucket.short if el.adaptation in risks else "-",
                chosen.adaptation,
            ]
        )
    return rows


TRACE_HEADERS = ("t_s", "packets_out", "cpu_pct", "login_attempts", "latency_ms", "effective_latency_ms", "alarms")


def trace_table(result: SessionResult) -> list[list[str]]:
    return [
        [
            fmt(s.timestamp, 3),
            str(s.packets_out),
            fmt(s.cpu_utilization, 3),
            str(s.login_attempts),
            fmt(s.latency, 3),
            fmt(eff, 3),
            ";".join(str(c) for c in cats),
        ]
        for s, eff, cats in zip(result.samples, result.effective_latency, result.alarms)
    ]


def summary_text(result: SessionResult) -> str:
    st = result.queue_stats
    lines = [
        f"session: {result.session_id}",
        f"samples: {len(result.samples)}",
        f"anomalies: {len(result.events)}",
        f"processed: {st.processed_total}",
        f"rejected: {st.rejected}",
        f"adaptations: {result.adaptations}",
        f"adaptation_enabled: {str(result.config.control.adaptation).lower()}",
        f"accrued_cost: {fmt(result.final_state.accrued_cost, 6)}",
        f"active: {', '.join(sorted(result.final_state.active_adaptations)) or '-'}",
    ]
    return "\n".join(lines) + "\n"


def write_report(result: SessionResult, out_dir: str | Path, kb: KnowledgeBase | None = None) -> list[Path]:
    """Write every report file into ``out_dir``; returns the paths in write order."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = {
        "queue_metrics": (QUEUE_HEADERS, queue_table(result)),
        "adaptation_ledger": (LEDGER_HEADERS, ledger_table(result)),
        "recommendations": (RECOMMEND_HEADERS, recommendation_table(result, kb)),
    }
    written = []
    for stem, (headers, rows) in tables.items():
        for suffix, text in ((".txt", format_table(headers, rows)), (".csv", to_csv(headers, rows))):
            p = out / f"{stem}{suffix}"
            p.write_text(text, encoding="utf-8", newline="")
            written.append(p)
    p = out / "latency_trace.csv"
    p.write_text(to_csv(TRACE_HEADERS, trace_table(result)), encoding="utf-8", newline="")
    written.append(p)
    p = out / "summary.txt"
    p.write_text(summary_text(result), encoding="utf-8", newline="")
    written.append(p)
    return written


ANALYTICS_HEADERS = ("metric", "value")


def analytics_table(m: MM1KMetrics, x_bar: float) -> str:
    rows = [
        ["lambda", f"{m.lam:.6g}"],
        ["x_bar_s", f"{x_bar:.6g}"],
        ["mu_eff", f"{m.mu:.6g}"],
        ["K", str(m.capacity_k)],
        ["rho", f"{m.rho:.6g}"],
        ["P_block", f"{m.blocking_prob:.6g}"],
        ["L", f"{m.L:.6g}"],
        ["Lq", f"{m.Lq:.6g}"],
        ["lambda_eff", f"{m.effective_lambda:.6g}"],
        ["W_s", f"{m.W:.6g}"],
        ["Wq_s", f"{m.Wq:.6g}"],
    ]
    states = [[str(n), f"{p:.6g}"] for n, p in enumerate(m.state_probs)]
    return format_table(ANALYTICS_HEADERS, rows) + "\n" + format_table(("n", "P_n"), states)


__all__ = [
    "analytics_table",
    "format_table",
    "ledger_table",
    "queue_table",
    "recommendation_table",
    "summary_text",
    "to_csv",
    "trace_table",
    "write_report",
]
