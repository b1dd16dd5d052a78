"""Threshold alarms that turn telemetry samples into classified anomaly events."""
from __future__ import annotations

import enum
import statistics
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import InvalidArgument
from .telemetry import BASELINE_LATENCY_MS, MetricSample
from .validation import check_samples


class Category(str, enum.Enum):
    QOA = "QoA"
    QOS = "QoS"
    DOS = "SecurityDoS"
    INTRUSION = "Intrusion"

    @classmethod
    def parse(cls, value: "str | Category") -> "Category":
        if isinstance(value, Category):
            return value
        key = str(value).strip()
        hit = _ALIASES.get(key.lower())
        if hit is None:
            raise InvalidArgument(f"unknown anomaly category: {value!r}")
        return hit

    def __str__(self) -> str:
        return self.value


_ALIASES = {
    "qoa": Category.QOA,
    "qos": Category.QOS,
    "securitydos": Category.DOS,
    "dos": Category.DOS,
    "security": Category.DOS,
    "intrusion": Category.INTRUSION,
    "ua": Category.INTRUSION,
    "unauthorizedaccess": Category.INTRUSION,
    "unauthorized access": Category.INTRUSION,
}

# column order of ThresholdMonitor.transform
CATEGORIES = (Category.QOA, Category.QOS, Category.DOS, Category.INTRUSION)

DEFAULT_SEVERITY_MS = {
    Category.QOA: 10.0,
    Category.QOS: 12.0,
    Category.DOS: 15.0,
    Category.INTRUSION: 8.0,
}


@dataclass(frozen=True, slots=True)
class AnomalyEvent:
    id: int
    arrival_time: float
    category: Category
    severity: float
    trigger_metric: str = ""
    trigger_value: float = 0.0
    session_id: str = "session-0"

    def __post_init__(self):
        if not self.severity >= 0:
            raise InvalidArgument(f"severity must be non-negative: {self.severity}")
        if not isinstance(self.category, Category):
            object.__setattr__(self, "category", Category.parse(self.category))


@dataclass(frozen=True)
class ThresholdRuleSet:
    qos_min_packets_out: float = 7280
    qoa_max_cpu: float = 8.0
    intrusion_max_logins: float = 5
    dos_packet_surge_factor: float = 2.0
    default_severity_ms: Mapping[Category, float] = field(
        default_factory=lambda: dict(DEFAULT_SEVERITY_MS)
    )

    def __post_init__(self):
        for name in ("qos_min_packets_out", "qoa_max_cpu", "intrusion_max_logins", "dos_packet_surge_factor"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be strictly positive")
        sev = {Category.parse(k): float(v) for k, v in self.default_severity_ms.items()}
        missing = set(CATEGORIES) - set(sev)
        for c in missing:
            sev[c] = DEFAULT_SEVERITY_MS[c]
        if any(v < 0 for v in sev.values()):
            raise InvalidArgument("default severities must be non-negative")
        object.__setattr__(self, "default_severity_ms", sev)


def estimate_severity(sample: MetricSample, baseline_latency: float = BASELINE_LATENCY_MS) -> float:
    """Latency excess over the baseline in ms, clamped at zero."""
    if not baseline_latency > 0:
        raise InvalidArgument(f"baseline_latency must be positive: {baseline_latency}")
    return max(0.0, sample.latency - baseline_latency)


def violations(
    sample: MetricSample, rules: ThresholdRuleSet, baseline_median: float | None = None
) -> list[tuple[Category, str, float]]:
    """(category, metric, observed value) for each rule the sample breaks.

    All comparisons are strict, so a value sitting exactly on a threshold is
    benign. The DoS rule is inactive until a baseline median is known.
    """
    out = []
    if sample.cpu_utilization > rules.qoa_max_cpu:
        out.append((Category.QOA, "cpu_utilization", float(sample.cpu_utilization)))
    if sample.packets_out < rules.qos_min_packets_out:
        out.append((Category.QOS, "packets_out", float(sample.packets_out)))
    if sample.tampered_packets > 0:
        out.append((Category.DOS, "tampered_packets", float(sample.tampered_packets)))
    elif baseline_median is not None and sample.packets_out > rules.dos_packet_surge_factor * baseline_median:
        out.append((Category.DOS, "packets_out", float(sample.packets_out)))
    if sample.login_attempts > rules.intrusion_max_logins:
        out.append((Category.INTRUSION, "login_attempts", float(sample.login_attempts)))
    return out


def evaluate(
    sample: MetricSample,
    rules: ThresholdRuleSet | None = None,
    baseline_median: float | None = None,
    *,
    first_id: int = 0,
    baseline_latency: float = BASELINE_LATENCY_MS,
) -> list[AnomalyEvent]:
    """One :class:`AnomalyEvent` per violated rule, ids counting from ``first_id``."""
    rules = rules or ThresholdRuleSet()
    excess = estimate_severity(sample, baseline_latency)
    events = []
    for k, (cat, metric, value) in enumerate(violations(sample, rules, baseline_median)):
        events.append(
            AnomalyEvent(
                id=first_id + k,
                arrival_time=sample.timestamp,
                category=cat,
                severity=excess if excess > 0 else rules.default_severity_ms[cat],
                trigger_metric=metric,
                trigger_value=value,
                session_id=sample.session_id,
            )
        )
    return events


class ThresholdMonitor(TransformerMixin, BaseEstimator):
    """Stateful alarm engine with an sklearn-compatible surface.

    ``fit`` learns the median benign packet rate, which anchors the DoS surge
    rule. ``evaluate`` consumes a live stream: it numbers events and keeps a
    rolling median over the last ``median_window`` samples that did not trip
    the DoS rule. ``transform``/``predict`` are pure and use the fitted median.

    Parameters
    ----------
    qos_min_packets_out, qoa_max_cpu, intrusion_max_logins, dos_packet_surge_factor
        Alarm thresholds (see :class:`ThresholdRuleSet`).
    median_window : int
        Length of the rolling packet-rate window.
    baseline_latency : float
        Latency in ms above which a sample counts as inducing cybersickness.
    default_severity : mapping, optional
        Severity (ms) for events whose sample shows no latency excess.
    """

    def __init__(
        self,
        qos_min_packets_out=7280,
        qoa_max_cpu=8.0,
        intrusion_max_logins=5,
        dos_packet_surge_factor=2.0,
        median_window=60,
        baseline_latency=BASELINE_LATENCY_MS,
        default_severity=None,
    ):
        self.qos_min_packets_out = qos_min_packets_out
        self.qoa_max_cpu = qoa_max_cpu
        self.intrusion_max_logins = intrusion_max_logins
        self.dos_packet_surge_factor = dos_packet_surge_factor
        self.median_window = median_window
        self.baseline_latency = baseline_latency
        self.default_severity = default_severity

    @classmethod
    def from_rules(cls, rules: ThresholdRuleSet, **kwargs: Any) -> "ThresholdMonitor":
        return cls(
            qos_min_packets_out=rules.qos_min_packets_out,
            qoa_max_cpu=rules.qoa_max_cpu,
            intrusion_max_logins=rules.intrusion_max_logins,
            dos_packet_surge_factor=rules.dos_packet_surge_factor,
            default_severity=dict(rules.default_severity_ms),
            **kwargs,
        )

    @property
    def rules(self) -> ThresholdRuleSet:
        return ThresholdRuleSet(
            qos_min_packets_out=self.qos_min_packets_out,
            qoa_max_cpu=self.qoa_max_cpu,
            intrusion_max_logins=self.intrusion_max_logins,
            dos_packet_surge_factor=self.dos_packet_surge_factor,
            default_severity_ms=self.default_severity or DEFAULT_SEVERITY_MS,
        )

    def fit(self, X, y=None):
        samples = check_samples(X)
        if not samples:
            raise InvalidArgument("fit needs at least one baseline sample")
        if int(self.median_window) < 1:
            raise InvalidArgument("median_window must be >= 1")
        self.rules_ = self.rules
        packets = [s.packets_out for s in samples]
        self.baseline_packets_median_ = float(statistics.median(packets))
        self.n_features_in_ = 5
        self._window = deque(packets[-int(self.median_window):], maxlen=int(self.median_window))
        self._next_id = 0
        return self

    def _ensure_state(self):
        if not hasattr(self, "_window"):
            self.rules_ = self.rules
            self._window = deque(maxlen=int(self.median_window))
            self._next_id = 0

    @property
    def rolling_median(self) -> float | None:
        self._ensure_state()
        return float(statistics.median(self._window)) if self._window else None

    def evaluate(self, sample: MetricSample) -> list[AnomalyEvent]:
        self._ensure_state()
        events = evaluate(
            sample,
            self.rules_,
            self.rolling_median,
            first_id=self._next_id,
            baseline_latency=self.baseline_latency,
        )
        self._next_id += len(events)
        if not any(e.category is Category.DOS for e in events):
            self._window.append(sample.packets_out)
        return events

    def scan(self, stream: Iterable[MetricSample], edge_triggered: bool = True) -> list[AnomalyEvent]:
        """Evaluate a whole stream.

        With ``edge_triggered`` only the first sample of each contiguous alarm
        run raises an event per category, the way an alarm fires on its
        OK -> ALARM transition rather than on every breaching datapoint.
        """
        self._ensure_state()
        out: list[AnomalyEvent] = []
        active: set[Category] = set()
        for sample in stream:
            median = self.rolling_median
            hits = violations(sample, self.rules_, median)
            now = {c for c, _, _ in hits}
            if Category.DOS not in now:
                self._window.append(sample.packets_out)
            fresh = [h for h in hits if not edge_triggered or h[0] not in active]
            active = now
            excess = estimate_severity(sample, self.baseline_latency)
            for cat, metric, value in fresh:
                out.append(
                    AnomalyEvent(
                        id=self._next_id,
                        arrival_time=sample.timestamp,
                        category=cat,
                        severity=excess if excess > 0 else self.rules_.default_severity_ms[cat],
                        trigger_metric=metric,
                        trigger_value=value,
                        session_id=sample.session_id,
                    )
                )
                self._next_id += 1
        return out

    def transform(self, X) -> np.ndarray:
        """Alarm indicator matrix, one column per category in :data:`CATEGORIES`."""
        check_is_fitted(self, "baseline_packets_median_")
        samples = check_samples(X)
        out = np.zeros((len(samples), len(CATEGORIES)), dtype=np.int64)
        for i, s in enumerate(samples):
            for cat, _, _ in violations(s, self.rules_, self.baseline_packets_median_):
                out[i, CATEGORIES.index(cat)] = 1
        return out

    def predict(self, X) -> np.ndarray:
        """1 where any alarm fires, else 0."""
        return self.transform(X).any(axis=1).astype(np.int64)
