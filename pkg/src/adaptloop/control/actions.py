"""Enacting adaptations on the system state and measuring their effect."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

from ..errors import InvalidArgument, NoRecommendation, NothingToMeasure, UnknownEffect
from ..knowledge_base import KbRecord, KnowledgeBase, RecordKind
from ..monitor import Category
from ..telemetry import BASELINE_LATENCY_MS
from .catalog import AdaptationCatalogEntry, Catalog, EcaBranch, EcaRule
from .risk import Level


@dataclass(frozen=True)
class SystemState:
    latency: float = BASELINE_LATENCY_MS
    cpu: float = 4.0
    packets_out: float = 7280.0
    login_attempts: int = 0
    accrued_cost: float = 0.0
    active_adaptations: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.latency >= 0:
            raise InvalidArgument(f"latency must be non-negative: {self.latency}")
        if not self.accrued_cost >= 0:
            raise InvalidArgument("accrued_cost must be non-negative")


@dataclass(frozen=True)
class EnactmentRecord:
    adaptation: str
    category: Category
    requested_at: float
    effective_at: float
    r_at: float
    cost_per_hour: float | None
    cost_charged: float
    delta_cs: float | None
    pre_latency: float
    post_latency: float


def scale_excess(latency: float, reduction: float, baseline: float = BASELINE_LATENCY_MS) -> float:
    """Shrink the part of ``latency`` above ``baseline`` by ``reduction``."""
    if latency <= baseline:
        return latency
    return baseline + (latency - baseline) * (1.0 - reduction)


def enact(
    entry: AdaptationCatalogEntry,
    state: SystemState,
    clock: float,
    *,
    category: Category | str | None = None,
    session_end: float | None = None,
    r_at: float | None = None,
    baseline: float = BASELINE_LATENCY_MS,
) -> tuple[SystemState, EnactmentRecord]:
    """Apply ``entry`` to ``state``, taking effect ``r_at`` seconds after ``clock``.

    The cybersickness reduction for ``category`` (default: the entry's first
    targeted issue) scales the latency excess; threshold effects overwrite the
    matching state fields. Cost is charged from the effective time until
    ``session_end``; with no session end nothing is charged yet. An
    adaptation that is already active is not charged again.
    """
    cat = Category.parse(category) if category is not None else (entry.anomaly_issue or (None,))[0]
    delta = entry.delta_cs_for(cat) if cat is not None else None
    if delta is None and not entry.effects:
        raise UnknownEffect(f"{entry.name} has neither a cybersickness reduction for {cat} nor a threshold effect")
    if r_at is None:
        r_at = entry.resolve_r_at(default=0.0)
    effective = clock + r_at
    latency = scale_excess(state.latency, delta, baseline) if delta is not None else state.latency

    cpu, packets, logins = state.cpu, state.packets_out, state.login_attempts
    fx = entry.effects
    if "cpu_set" in fx:
        cpu = fx["cpu_set"]
    if "packets_floor" in fx:
        packets = max(packets, fx["packets_floor"])
    if "packets_ceiling" in fx:
        packets = min(packets, fx["packets_ceiling"])
    if "logins_max" in fx:
        logins = min(logins, int(fx["logins_max"]))

    hours = 0.0
    if session_end is not None and entry.name not in state.active_adaptations:
        hours = max(0.0, session_end - effective) / 3600.0
    charged = (entry.cost_per_hour or 0.0) * hours
    new_state = replace(
        state,
        latency=latency,
        cpu=cpu,
        packets_out=packets,
        login_attempts=logins,
        accrued_cost=state.accrued_cost + charged,
        active_adaptations=state.active_adaptations | {entry.name},
    )
    rec = EnactmentRecord(
        adaptation=entry.name,
        category=cat,
        requested_at=clock,
        effective_at=effective,
        r_at=r_at,
        cost_per_hour=entry.cost_per_hour,
        cost_charged=charged,
        delta_cs=delta,
        pre_latency=state.latency,
        post_latency=latency,
    )
    return new_state, rec


def measured_impact(pre_latency: float, post_latency: float, baseline: float = BASELINE_LATENCY_MS) -> float:
    """Fraction of the pre-adaptation latency excess that was removed, in [0, 1]."""
    pre_excess = pre_latency - baseline
    if not pre_excess > 0:
        raise NothingToMeasure(f"latency {pre_latency} ms is not above the {baseline} ms baseline")
    post_excess = max(0.0, post_latency - baseline)
    return min(1.0, max(0.0, (pre_excess - post_excess) / pre_excess))


def feedback(
    pre_latency: float,
    post_latency: float,
    entry: AdaptationCatalogEntry,
    kb: KnowledgeBase | None,
    category: Category | str | None = None,
    *,
    timestamp: float | None = None,
    session_id: str = "session-0",
    baseline: float = BASELINE_LATENCY_MS,
) -> float:
    """Measure the impact of an enacted adaptation and log it to ``kb``.

    The KB smooths successive measurements into the adaptation's impact.
    """
    i = measured_impact(pre_latency, post_latency, baseline)
    if kb is not None:
        cat = Category.parse(category) if category is not None else entry.anomaly_issue[0]
        if timestamp is None:
            timestamp = kb.last_timestamp(session_id) or 0.0
        kb.append(
            KbRecord(
                session_id=session_id,
                timestamp_s=timestamp,
                record_kind=RecordKind.FEEDBACK_MEASURED,
                anomaly_category=cat,
                adaptation=entry.name,
                impact_i=i,
                outcome_latency_ms=post_latency,
            )
        )
    return i


def find_rule(rules: Iterable[EcaRule], anomaly: Category | str, scenario_key: str) -> EcaRule:
    cat = Category.parse(anomaly)
    key = " ".join(scenario_key.lower().split())
    for rule in rules:
        if rule.anomaly is cat and key in " ".join(rule.scenario.lower().split()):
            return rule
    raise NoRecommendation(f"no rule for {cat} / {scenario_key!r}")


def recommend(
    catalog: Catalog | Iterable[EcaRule],
    anomaly: Category | str,
    scenario_key: str,
    risk_cap: Level | str = Level.HIGH,
    cost_cap: Level | str = Level.HIGH,
    unavailable: Iterable[str] = (),
) -> EcaBranch:
    """IF anomaly/scenario THEN preferred adaptation ELSE fallback.

    The THEN branch is returned when its risk and cost levels sit within the
    caps and its adaptation is not listed in ``unavailable``. Otherwise the
    ELSE branch is returned, whatever its levels.
    """
    rules = catalog.rules if isinstance(catalog, Catalog) else catalog
    rule = find_rule(rules, anomaly, scenario_key)
    risk_cap, cost_cap = Level.parse(risk_cap), Level.parse(cost_cap)
    then = rule.then_branch
    if then.adaptation not in set(unavailable) and then.risk <= risk_cap and then.cost <= cost_cap:
        return then
    return rule.else_branch
