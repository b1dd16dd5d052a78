"""Scenario-runner configuration (TOML).

Example::

    [telemetry]
    seed = 7
    duration = 120        # seconds
    step = 1
    session_id = "session-0"

    [[telemetry.scenarios]]
    kind = "PacketDropPlusLag"
    start = 30
    duration = 20
    intensity = 16.5      # meaning depends on kind, see AnomalyScenario

    [monitor]             # ThresholdRuleSet overrides
    qoa_max_cpu = 8.0
    default_severity = { QoA = 10.0 }

    [queue]
    mu1 = 50.0
    mu2 = 2000.0
    mu3 = 2000.0
    capacity_k = 20
    overflow_policy = "RejectArrival"
    severe_threshold = 15.0
    lambda = 0.01                 # optional: Poisson queue study
    study_events = [10, 20, 30, 40]
    study_r_at = 0.54

    [control]
    adaptation = true
    active_users = 10
    force = { QoA = "A2" }        # bypass selection per category
    risk_cap = "H"
    cost_cap = "H"

    [paths]                       # relative to the config file
    catalog = "catalog.toml"      # default: packaged catalog
    kb = "kb.csv"                 # default: in-memory
    report_dir = "report"
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .control.risk import Level
from .errors import InvalidArgument, ParseError
from .monitor import Category, ThresholdRuleSet
from .queueing import DEFAULT_SEVERE_THRESHOLD_MS, OverflowPolicy, StageRates
from .telemetry import AnomalyScenario

KB_ENV_VAR = "ADAPTLOOP_KB"


@dataclass(frozen=True)
class TelemetrySection:
    seed: int = 0
    duration: float = 120.0
    step: float = 1.0
    session_id: str = "session-0"
    scenarios: tuple[AnomalyScenario, ...] = ()


@dataclass(frozen=True)
class QueueSection:
    rates: StageRates = field(default_factory=lambda: StageRates(50.0, 2000.0, 2000.0))
    capacity_k: int = 20
    overflow_policy: OverflowPolicy = OverflowPolicy.REJECT_ARRIVAL
    severe_threshold: float = DEFAULT_SEVERE_THRESHOLD_MS
    lam: float | None = None
    study_events: tuple[int, ...] = (10, 20, 30, 40)
    study_r_at: float = 0.54


@dataclass(frozen=True)
class ControlSection:
    adaptation: bool = True
    active_users: int | None = None
    force: Mapping[Category, str] = field(default_factory=dict)
    risk_cap: Level = Level.HIGH
    cost_cap: Level = Level.HIGH


@dataclass(frozen=True)
class ScenarioConfig:
    telemetry: TelemetrySection = field(default_factory=TelemetrySection)
    monitor: ThresholdRuleSet = field(default_factory=ThresholdRuleSet)
    queue: QueueSection = field(default_factory=QueueSection)
    control: ControlSection = field(default_factory=ControlSection)
    catalog_path: Path | None = None
    kb_path: Path | None = None
    report_dir: Path = Path("report")

    def with_overrides(
        self,
        seed: int | None = None,
        no_adaptation: bool = False,
        severe_threshold: float | None = None,
        kb_path: Path | None = None,
        report_dir: Path | None = None,
    ) -> "ScenarioConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, telemetry=replace(cfg.telemetry, seed=int(seed)))
        if no_adaptation:
            cfg = replace(cfg, control=replace(cfg.control, adaptation=False))
        if severe_threshold is not None:
            cfg = replace(cfg, queue=replace(cfg.queue, severe_threshold=float(severe_threshold)))
        if kb_path is not None:
            cfg = replace(cfg, kb_path=Path(kb_path))
        if report_dir is not None:
            cfg = replace(cfg, report_dir=Path(report_dir))
        return cfg


_SECTIONS = {"telemetry", "monitor", "queue", "control", "paths"}


def _take(section: Mapping[str, Any], allowed: set[str], where: str) -> dict:
    unknown = set(section) - allowed
    if unknown:
        raise ParseError(f"unknown key(s) in [{where}]: {', '.join(sorted(unknown))}")
    return dict(section)


def config_from_dict(doc: Mapping[str, Any], base_dir: Path | None = None) -> ScenarioConfig:
    base_dir = base_dir or Path.cwd()
    unknown = set(doc) - _SECTIONS
    if unknown:
        raise ParseError(f"unknown config section(s): {', '.join(sorted(unknown))}")
    try:
        t = _take(doc.get("telemetry", {}), {"seed", "duration", "step", "session_id", "scenarios"}, "telemetry")
        scenarios = tuple(
            AnomalyScenario(
                **_take(s, {"kind", "start", "duration", "intensity", "drop_fraction", "cpu_load"}, "telemetry.scenarios")
            )
            for s in t.pop("scenarios", [])
        )
        telemetry = TelemetrySection(scenarios=scenarios, **t)

        m = _take(
            doc.get("monitor", {}),
            {"qos_min_packets_out", "qoa_max_cpu", "intrusion_max_logins", "dos_packet_surge_factor", "default_severity"},
            "monitor",
        )
        sev = m.pop("default_severity", {})
        monitor = ThresholdRuleSet(default_severity_ms=sev, **m)

        q = _take(
            doc.get("queue", {}),
            {"mu1", "mu2", "mu3", "capacity_k", "overflow_policy", "severe_threshold", "lambda", "study_events", "study_r_at"},
            "queue",
        )
        default_q = QueueSection()
        rates = StageRates(
            float(q.pop("mu1", default_q.rates.mu1)),
            float(q.pop("mu2", default_q.rates.mu2)),
            float(q.pop("mu3", default_q.rates.mu3)),
        )
        lam = q.pop("lambda", None)
        policy = q.pop("overflow_policy", default_q.overflow_policy.value)
        try:
            policy = OverflowPolicy(policy)
        except ValueError:
            raise InvalidArgument(f"unknown overflow_policy {policy!r}") from None
        capacity = q.pop("capacity_k", default_q.capacity_k)
        if isinstance(capacity, bool) or not isinstance(capacity, int) or capacity < 1:
            raise InvalidArgument(f"capacity_k must be an integer >= 1: {capacity!r}")
        if lam is not None and not float(lam) > 0:
            raise InvalidArgument(f"queue lambda must be positive: {lam}")
        queue = QueueSection(
            rates=rates,
            capacity_k=capacity,
            overflow_policy=policy,
            severe_threshold=float(q.pop("severe_threshold", default_q.severe_threshold)),
            lam=None if lam is None else float(lam),
            study_events=tuple(int(n) for n in q.pop("study_events", default_q.study_events)),
            study_r_at=float(q.pop("study_r_at", default_q.study_r_at)),
        )

        c = _take(doc.get("control", {}), {"adaptation", "active_users", "force", "risk_cap", "cost_cap"}, "control")
        control = ControlSection(
            adaptation=bool(c.get("adaptation", True)),
            active_users=c.get("active_users"),
            force={Category.parse(k): str(v) for k, v in c.get("force", {}).items()},
            risk_cap=Level.parse(c.get("risk_cap", "H")),
            cost_cap=Level.parse(c.get("cost_cap", "H")),
        )

        p = _take(doc.get("paths", {}), {"catalog", "kb", "report_dir"}, "paths")
    except TypeError as exc:
        raise ParseError(f"bad config value: {exc}") from None

    def resolve(key: str) -> Path | None:
        v = p.get(key)
        return None if v is None else (base_dir / v)

    return ScenarioConfig(
        telemetry=telemetry,
        monitor=monitor,
        queue=queue,
        control=control,
        catalog_path=resolve("catalog"),
        kb_path=resolve("kb"),
        report_dir=resolve("report_dir") or base_dir / "report",
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"invalid TOML in {path}: {exc}") from None
    return config_from_dict(doc, base_dir=path.parent)
