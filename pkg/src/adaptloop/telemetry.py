"""Synthetic session telemetry with injectable anomaly scenarios.

Baseline streams stay strictly inside the monitor's benign bands so that every
alarm raised downstream can be traced to an injected scenario.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument

BASELINE_LATENCY_MS = 23.5

# benign generator bands
PACKETS_LOW, PACKETS_HIGH = 7280, 8000
CPU_LOW, CPU_HIGH = 2.0, 8.0
LATENCY_SPREAD = 0.10


@dataclass(frozen=True, slots=True)
class MetricSample:
    timestamp: float
    packets_out: int
    cpu_utilization: float
    latency: float
    login_attempts: int
    session_id: str = "session-0"
    # only set by DuplicationPlusTampering, read by the monitor's security rule
    tampered_packets: int = 0

    def __post_init__(self):
        if not 0.0 <= self.cpu_utilization <= 100.0:
            raise InvalidArgument(f"cpu_utilization out of [0, 100]: {self.cpu_utilization}")
        if self.packets_out < 0 or self.login_attempts < 0 or self.tampered_packets < 0:
            raise InvalidArgument("packet and login counts must be non-negative")
        if not self.latency >= 0.0:
            raise InvalidArgument(f"latency must be non-negative: {self.latency}")


class ScenarioKind(str, enum.Enum):
    PACKET_DROP = "PacketDrop"
    PACKET_DROP_PLUS_LAG = "PacketDropPlusLag"
    DOS_FLOOD = "DoSFlood"
    DUPLICATION_PLUS_TAMPERING = "DuplicationPlusTampering"
    UNAUTHORIZED_ACCESS = "UnauthorizedAccess"

    @classmethod
    def parse(cls, value: "str | ScenarioKind") -> "ScenarioKind":
        try:
            return cls(value)
        except ValueError:
            raise InvalidArgument(f"unknown scenario kind: {value!r}") from None


@dataclass(frozen=True)
class AnomalyScenario:
    """One injected anomaly window.

    ``intensity`` depends on ``kind``:

    ========================  ==========================================
    PacketDrop                fraction of packets dropped, in [0, 1]
    PacketDropPlusLag         added latency in ms, >= 0
    DoSFlood                  packet-rate multiplier, >= 1
    DuplicationPlusTampering  duplicated fraction, in (0, 1]
    UnauthorizedAccess        login attempts per window, integer >= 0
    ========================  ==========================================

    ``drop_fraction`` and ``cpu_load`` only affect PacketDropPlusLag: the lag
    scenario is an application-level issue, so it also pins CPU at
    ``cpu_load`` percent (never lowering it).
    """

    kind: ScenarioKind
    start: float
    duration: float
    intensity: float
    drop_fraction: float = 0.1
    cpu_load: float = 12.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind.parse(self.kind))
        if not self.start >= 0:
            raise InvalidArgument(f"scenario start must be >= 0: {self.start}")
        if not self.duration > 0:
            raise InvalidArgument(f"scenario duration must be positive: {self.duration}")
        lo, hi = _INTENSITY_RANGE[self.kind]
        if not lo <= self.intensity <= hi:
            raise InvalidArgument(
                f"{self.kind.value} intensity {self.intensity} outside [{lo}, {hi}]"
            )
        if self.kind is ScenarioKind.DUPLICATION_PLUS_TAMPERING and self.intensity == 0:
            raise InvalidArgument("DuplicationPlusTampering intensity must be > 0")
        if self.kind is ScenarioKind.UNAUTHORIZED_ACCESS and self.intensity != int(self.intensity):
            raise InvalidArgument("UnauthorizedAccess intensity must be an integer")
        if not 0.0 <= self.drop_fraction <= 1.0:
            raise InvalidArgument(f"drop_fraction outside [0, 1]: {self.drop_fraction}")
        if not 0.0 <= self.cpu_load <= 100.0:
            raise InvalidArgument(f"cpu_load outside [0, 100]: {self.cpu_load}")

    @property
    def end(self) -> float:
        return self.start + self.duration

    def covers(self, t: float) -> bool:
        return self.start <= t < self.end


_INTENSITY_RANGE = {
    ScenarioKind.PACKET_DROP: (0.0, 1.0),
    ScenarioKind.PACKET_DROP_PLUS_LAG: (0.0, math.inf),
    ScenarioKind.DOS_FLOOD: (1.0, math.inf),
    ScenarioKind.DUPLICATION_PLUS_TAMPERING: (0.0, 1.0),
    ScenarioKind.UNAUTHORIZED_ACCESS: (0.0, math.inf),
}


def generate_baseline(
    seed: int, duration: float, step: float = 1.0, session_id: str = "session-0"
) -> tuple[MetricSample, ...]:
    """Benign telemetry sampled every ``step`` seconds over ``[0, duration)``."""
    if not duration > 0:
        raise InvalidArgument(f"duration must be positive: {duration}")
    if not step > 0:
        raise InvalidArgument(f"step must be positive: {step}")
    n = math.ceil(duration / step - 1e-9)
    rng = np.random.default_rng(seed)
    packets = rng.integers(PACKETS_LOW, PACKETS_HIGH, size=n, endpoint=True)
    cpu = rng.uniform(CPU_LOW, CPU_HIGH, size=n)
    latency = rng.uniform(
        BASELINE_LATENCY_MS * (1 - LATENCY_SPREAD), BASELINE_LATENCY_MS * (1 + LATENCY_SPREAD), size=n
    )
    logins = rng.integers(0, 1, size=n, endpoint=True)
    return tuple(
        MetricSample(
            timestamp=i * step,
            packets_out=int(packets[i]),
            cpu_utilization=float(cpu[i]),
            latency=float(latency[i]),
            login_attempts=int(logins[i]),
            session_id=session_id,
        )
        for i in range(n)
    )


def _perturb(sample: MetricSample, sc: AnomalyScenario) -> MetricSample:
    kind = sc.kind
    if kind is ScenarioKind.PACKET_DROP:
        return replace(sample, packets_out=math.floor(sample.packets_out * (1.0 - sc.intensity)))
    if kind is ScenarioKind.PACKET_DROP_PLUS_LAG:
        return replace(
            sample,
            packets_out=math.floor(sample.packets_out * (1.0 - sc.drop_fraction)),
            latency=sample.latency + sc.intensity,
            cpu_utilization=max(sample.cpu_utilization, sc.cpu_load),
        )
    if kind is ScenarioKind.DOS_FLOOD:
        return replace(
            sample,
            packets_out=math.ceil(sample.packets_out * sc.intensity),
            cpu_utilization=min(100.0, sample.cpu_utilization * sc.intensity),
        )
    if kind is ScenarioKind.DUPLICATION_PLUS_TAMPERING:
        dup = max(1, round(sample.packets_out * sc.intensity))
        return replace(
            sample,
            packets_out=sample.packets_out + dup,
            tampered_packets=sample.tampered_packets + dup,
        )
    if kind is ScenarioKind.UNAUTHORIZED_ACCESS:
        return replace(sample, login_attempts=int(sc.intensity))
    raise InvalidArgument(f"unknown scenario kind: {kind!r}")  # pragma: no cover


def inject(
    stream: Sequence[MetricSample], scenario: AnomalyScenario
) -> tuple[MetricSample, ...]:
    """Perturb the samples whose timestamp falls in ``[start, start + duration)``.

    Samples outside the window are returned as the same objects.
    """
    if not isinstance(scenario, AnomalyScenario):
        raise InvalidArgument(f"not an AnomalyScenario: {scenario!r}")
    return tuple(_perturb(s, scenario) if scenario.covers(s.timestamp) else s for s in stream)


def inject_all(
    stream: Sequence[MetricSample], scenarios: Iterable[AnomalyScenario]
) -> tuple[MetricSample, ...]:
    out = tuple(stream)
    for sc in scenarios:
        out = inject(out, sc)
    return out
