"""Adaptation catalog, per-category candidate lists and ECA rules, loaded from TOML."""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from ..errors import InvalidArgument, NotFound, ParseError, UnknownAnomalyType
from ..monitor import Category
from .risk import Level

EFFECT_KEYS = ("cpu_set", "packets_floor", "packets_ceiling", "logins_max")


@dataclass(frozen=True)
class AdaptationCatalogEntry:
    name: str
    description: str = ""
    anomaly_issue: tuple[Category, ...] = ()
    cost_per_hour: float | None = None
    r_at: float | None = None
    r_at_per_user: float | None = None
    delta_cs: Mapping[Category, float] = field(default_factory=dict)
    effects: Mapping[str, float] = field(default_factory=dict)
    threshold_effect: str = ""
    parts: tuple[str, ...] = ()

    def __post_init__(self):
        if self.cost_per_hour is not None and not self.cost_per_hour >= 0:
            raise InvalidArgument(f"{self.name}: cost_per_hour must be >= 0")
        if self.r_at is not None and not self.r_at >= 0:
            raise InvalidArgument(f"{self.name}: r_at must be >= 0")
        for cat, d in self.delta_cs.items():
            if not 0.0 <= d <= 1.0:
                raise InvalidArgument(f"{self.name}: delta_cs[{cat}] outside [0, 1]")
        unknown = set(self.effects) - set(EFFECT_KEYS)
        if unknown:
            raise InvalidArgument(f"{self.name}: unknown effects {sorted(unknown)}")

    @property
    def r_at_varies(self) -> bool:
        return self.r_at_per_user is not None

    def delta_cs_for(self, category: Category | str) -> float | None:
        return self.delta_cs.get(Category.parse(category))

    def resolve_r_at(self, active_users: int = 10, default: float | None = None) -> float | None:
        """Enactment time in seconds; per-user entries scale with ``active_users``."""
        if self.r_at_per_user is not None:
            return self.r_at_per_user * active_users
        return self.r_at if self.r_at is not None else default


@dataclass(frozen=True)
class EcaBranch:
    adaptation: str
    risk: Level
    cost: Level
    delta_cs: float | None = None


@dataclass(frozen=True)
class EcaRule:
    anomaly: Category
    scenario: str
    then_branch: EcaBranch
    else_branch: EcaBranch


@dataclass
class Catalog:
    entries: dict[str, AdaptationCatalogEntry]
    candidates: dict[Category, list[str]]
    rules: list[EcaRule] = field(default_factory=list)
    default_impact: float = 0.05
    default_r_at: float = 300.0
    active_users: int = 10

    def __post_init__(self):
        for cat, names in self.candidates.items():
            for n in names:
                if n not in self.entries:
                    raise InvalidArgument(f"candidate {n!r} for {cat} is not in the catalog")
        for rule in self.rules:
            for br in (rule.then_branch, rule.else_branch):
                if br.adaptation not in self.entries:
                    raise InvalidArgument(f"rule adaptation {br.adaptation!r} is not in the catalog")

    def __getitem__(self, name: str) -> AdaptationCatalogEntry:
        try:
            return self.entries[name]
        except KeyError:
            raise NotFound(f"unknown adaptation {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def candidates_for(self, category: Category | str) -> list[str]:
        cat = Category.parse(category)
        names = self.candidates.get(cat)
        if not names:
            raise UnknownAnomalyType(f"no catalog adaptations for anomaly type {cat}")
        return list(names)

    def r_at(self, name: str) -> float | None:
        return self[name].resolve_r_at(self.active_users, self.default_r_at)

    def sort_r_at(self, name: str) -> float:
        """Enactment time for ranking; unreported values rank last."""
        entry = self[name]
        r = entry.resolve_r_at(self.active_users)
        return math.inf if r is None else r

    def default_impact_for(self, name: str, category: Category | str) -> float:
        d = self[name].delta_cs_for(category)
        return self.default_impact if d is None else d


def _entry_from_toml(name: str, raw: Mapping[str, Any], known: Mapping[str, AdaptationCatalogEntry]) -> AdaptationCatalogEntry:
    parts = tuple(raw.get("parts", ()))
    missing = [p for p in parts if p not in known]
    if missing:
        raise ParseError(f"{name}: parts {missing} must be defined before the combination")
    r_at: Any = raw.get("r_at_s")
    per_user = raw.get("r_at_per_user_s")
    if r_at == "varies":
        if per_user is None:
            raise ParseError(f"{name}: r_at_s = 'varies' needs r_at_per_user_s")
        r_at = None
    cost = raw.get("cost_per_hour")
    effects = dict(raw.get("effects", {}))
    if parts:
        part_entries = [known[p] for p in parts]
        # combination: costs add, enactment takes the slowest part
        if cost is None and all(p.cost_per_hour is not None for p in part_entries):
            cost = math.fsum(p.cost_per_hour for p in part_entries)
        if r_at is None and per_user is None and all(p.r_at is not None for p in part_entries):
            r_at = max(p.r_at for p in part_entries)
        for p in part_entries:
            for k, v in p.effects.items():
                effects.setdefault(k, v)
    return AdaptationCatalogEntry(
        name=name,
        description=raw.get("description", " + ".join(known[p].description for p in parts)),
        anomaly_issue=tuple(Category.parse(c) for c in raw.get("anomaly_issue", ())),
        cost_per_hour=None if cost is None else float(cost),
        r_at=None if r_at is None else float(r_at),
        r_at_per_user=None if per_user is None else float(per_user),
        delta_cs={Category.parse(k): float(v) for k, v in raw.get("delta_cs", {}).items()},
        effects={k: float(v) for k, v in effects.items()},
        threshold_effect=raw.get("threshold_effect", ""),
        parts=parts,
    )


def _branch(raw: Mapping[str, Any]) -> EcaBranch:
    d = raw.get("delta_cs")
    return EcaBranch(
        adaptation=raw["adaptation"],
        risk=Level.parse(raw["risk"]),
        cost=Level.parse(raw["cost"]),
        delta_cs=None if d is None else float(d),
    )


def catalog_from_dict(doc: Mapping[str, Any]) -> Catalog:
    try:
        entries: dict[str, AdaptationCatalogEntry] = {}
        for name, raw in doc.get("adaptations", {}).items():
            entries[name] = _entry_from_toml(name, raw, entries)
        candidates = {Category.parse(k): list(v) for k, v in doc.get("candidates", {}).items()}
        rules = [
            EcaRule(
                anomaly=Category.parse(r["anomaly"]),
                scenario=r["scenario"],
                then_branch=_branch(r["then_branch"]),
                else_branch=_branch(r["else_branch"]),
            )
            for r in doc.get("rules", [])
        ]
        return Catalog(
            entries=entries,
            candidates=candidates,
            rules=rules,
            default_impact=float(doc.get("default_impact", 0.05)),
            default_r_at=float(doc.get("default_r_at_s", 300.0)),
            active_users=int(doc.get("active_users", 10)),
        )
    except KeyError as exc:
        raise ParseError(f"catalog is missing field {exc.args[0]!r}") from None


def load_catalog(path: str | Path | None = None) -> Catalog:
    """Load a catalog file, or the packaged default when ``path`` is None."""
    if path is None:
        text = resources.files("adaptloop.data").joinpath("catalog.toml").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"invalid catalog TOML: {exc}") from None
    return catalog_from_dict(doc)
