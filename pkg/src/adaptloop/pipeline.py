"""End-to-end session: telemetry, alarms, queue, decision, enactment, feedback."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from statistics import fmean

from .config import ScenarioConfig
from .control import Catalog, EnactmentRecord, SystemState, enact, feedback, load_catalog, scale_excess
from .control.risk import RiskAssessment
from .decision import build_decision_units, record_use, select_adaptation, unit_risks
from .errors import NothingToMeasure
from .knowledge_base import KbRecord, KnowledgeBase, RecordKind
from .monitor import AnomalyEvent, Category, ThresholdMonitor, violations
from .queueing import QueueConfig, SimStats, simulate
from .telemetry import BASELINE_LATENCY_MS, MetricSample, generate_baseline, inject_all


@dataclass(frozen=True)
class LedgerRow:
    event: AnomalyEvent
    decided_at: float
    adaptation: str
    ct: int
    risk: RiskAssessment | None
    enactment: EnactmentRecord
    measured_i: float | None


@dataclass(frozen=True)
class StudyRow:
    target_events: int
    stats: SimStats


@dataclass
class SessionResult:
    config: ScenarioConfig
    session_id: str
    catalog: Catalog
    samples: tuple[MetricSample, ...]
    events: list[AnomalyEvent]
    queue_stats: SimStats
    ledger: list[LedgerRow] = field(default_factory=list)
    study: list[StudyRow] = field(default_factory=list)
    effective_latency: list[float] = field(default_factory=list)
    alarms: list[tuple[Category, ...]] = field(default_factory=list)
    final_state: SystemState = field(default_factory=SystemState)

    @property
    def adaptations(self) -> int:
        return len(self.ledger)


def _fresh_session_id(kb: KnowledgeBase, base: str) -> str:
    if kb.last_timestamp(base) is None:
        return base
    k = 2
    while kb.last_timestamp(f"{base}.{k}") is not None:
        k += 1
    return f"{base}.{k}"


def _choose(unit, catalog: Catalog, forced: str | None) -> tuple[str, float, RiskAssessment | None]:
    risks = unit_risks(unit, catalog) if unit.tuples else {}
    if forced is not None:
        i = next((t.i for t in unit.tuples if t.an == forced), None)
        if i is None:
            i = catalog.default_impact_for(forced, unit.anomaly_type)
        return forced, i, risks.get(forced)
    best = select_adaptation(unit, catalog)
    return best.an, best.i, risks[best.an]


def run_session(config: ScenarioConfig, kb: KnowledgeBase | None = None) -> SessionResult:
    """Run one configured session and log it to ``kb`` (in-memory if None)."""
    tel = config.telemetry
    catalog = load_catalog(config.catalog_path)
    if config.control.active_users is not None:
        catalog = replace(catalog, active_users=int(config.control.active_users))
    if kb is None:
        kb = KnowledgeBase(config.kb_path)
    session = _fresh_session_id(kb, tel.session_id)

    baseline = generate_baseline(tel.seed, tel.duration, tel.step, session)
    samples = inject_all(baseline, tel.scenarios)
    monitor = ThresholdMonitor.from_rules(config.monitor).fit(baseline)
    median = monitor.baseline_packets_median_
    events = monitor.scan(samples, edge_triggered=True)
    by_time = {s.timestamp: s for s in samples}

    q = config.queue
    qconf = QueueConfig(len(events) / tel.duration, q.rates, q.capacity_k, q.overflow_policy)
    stats = simulate(
        qconf,
        horizon=tel.duration,
        seed=tel.seed,
        severe_threshold=q.severe_threshold,
        event_source=events,
        record=True,
        engine="python",
    )

    # (time, phase, seq, payload); detections precede decisions precede effects at equal times
    agenda: list = []
    seq = 0
    for e in events:
        agenda.append((e.arrival_time, 0, seq, e))
        seq += 1
    if config.control.adaptation:
        for d in stats.departures:
            agenda.append((d.end, 1, seq, d))
            seq += 1
    heapq.heapify(agenda)

    state = SystemState()
    ledger: list[LedgerRow] = []
    while agenda:
        t, phase, _, payload = heapq.heappop(agenda)
        if phase == 0:
            kb.append(
                KbRecord(
                    session_id=session,
                    timestamp_s=t,
                    record_kind=RecordKind.ANOMALY_DETECTED,
                    anomaly_category=payload.category,
                    severity_ms=payload.severity,
                )
            )
        elif phase == 1:
            ev = payload.event
            unit = build_decision_units([ev.category], kb, catalog)[0]
            name, impact, risk = _choose(unit, catalog, config.control.force.get(ev.category))
            ct = record_use(
                name,
                kb,
                ev.category,
                catalog,
                timestamp=t,
                session_id=session,
                impact=impact,
                risk_rf=None if risk is None else risk.failure_risk,
            )
            trigger = by_time[ev.arrival_time]
            pre = replace(
                state,
                latency=BASELINE_LATENCY_MS + ev.severity,
                cpu=trigger.cpu_utilization,
                packets_out=float(trigger.packets_out),
                login_attempts=trigger.login_attempts,
            )
            post, rec = enact(
                catalog[name],
                pre,
                t,
                category=ev.category,
                session_end=tel.duration,
                r_at=catalog.r_at(name),
            )
            state = replace(state, accrued_cost=post.accrued_cost, active_adaptations=post.active_adaptations)
            heapq.heappush(agenda, (rec.effective_at, 2, seq, (ev, t, name, ct, risk, rec)))
            seq += 1
        else:
            ev, decided, name, ct, risk, rec = payload
            kb.append(
                KbRecord(
                    session_id=session,
                    timestamp_s=t,
                    record_kind=RecordKind.ADAPTATION_ENACTED,
                    anomaly_category=ev.category,
                    adaptation=name,
                    rat_s=rec.r_at,
                    cost_per_hr=rec.cost_per_hour,
                    risk_rf=None if risk is None else risk.failure_risk,
                    outcome_latency_ms=rec.post_latency,
                )
            )
            try:
                i = feedback(
                    rec.pre_latency, rec.post_latency, catalog[name], kb, ev.category, timestamp=t, session_id=session
                )
            except NothingToMeasure:
                i = None
            ledger.append(LedgerRow(ev, decided, name, ct, risk, rec, i))

    ledger.sort(key=lambda r: (r.decided_at, r.event.id))
    effective, alarms = _latency_trace(samples, ledger, config, median)

    study = []
    if q.lam is not None:
        qstudy = QueueConfig(q.lam, q.rates, q.capacity_k, q.overflow_policy)
        for n in q.study_events:
            s = simulate(
                qstudy,
                horizon=n / q.lam,
                seed=tel.seed,
                severe_threshold=q.severe_threshold,
                r_at=q.study_r_at,
            )
            study.append(StudyRow(n, s))

    return SessionResult(
        config=config,
        session_id=session,
        catalog=catalog,
        samples=samples,
        events=events,
        queue_stats=stats,
        ledger=ledger,
        study=study,
        effective_latency=effective,
        alarms=alarms,
        final_state=state,
    )


def _latency_trace(samples, ledger, config, median):
    """Observed latency with the strongest active reduction for each alarmed category applied."""
    effective, alarms = [], []
    for s in samples:
        cats = tuple(dict.fromkeys(c for c, _, _ in violations(s, config.monitor, median)))
        best = 0.0
        for row in ledger:
            rec = row.enactment
            if rec.category in cats and rec.effective_at <= s.timestamp and rec.delta_cs is not None:
                best = max(best, rec.delta_cs)
        effective.append(scale_excess(s.latency, best))
        alarms.append(cats)
    return effective, alarms


def mean_enacted_r_at(result: SessionResult) -> float | None:
    rats = [r.enactment.r_at for r in result.ledger]
    return fmean(rats) if rats else None
