"""Decision units: per-anomaly candidate adaptations ranked by impact, history and speed."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .control.catalog import Catalog
from .control.risk import RiskAssessment, assess_risk
from .errors import InvalidArgument, NoCandidates, NotFound
from .knowledge_base import KbRecord, KnowledgeBase, RecordKind
from .monitor import Category
from .validation import check_unit_interval


@dataclass(frozen=True)
class AdaptationTuple:
    an: str
    ct: int
    i: float

    def __post_init__(self):
        check_unit_interval("i", self.i)
        if isinstance(self.ct, bool) or int(self.ct) != self.ct or self.ct < 0:
            raise InvalidArgument(f"ct must be a non-negative integer: {self.ct!r}")


@dataclass(frozen=True)
class DecisionUnit:
    anomaly_type: Category
    tuples: tuple[AdaptationTuple, ...]

    def __post_init__(self):
        names = [t.an for t in self.tuples]
        if len(set(names)) != len(names):
            raise InvalidArgument(f"duplicate adaptation names in unit: {names}")

    def __len__(self) -> int:
        return len(self.tuples)


def build_decision_units(
    anomaly_types: Iterable[Category | str],
    kb: KnowledgeBase | None,
    catalog: Catalog,
) -> list[DecisionUnit]:
    """One decision unit per anomaly type, in input order.

    Candidates come from the catalog, followed by any other adaptation the
    knowledge base has history for under that type. Use counts and impacts
    come from history when present; otherwise the count is 0 and the impact is
    the catalog's reduction for that type, or the catalog's floor when none
    was measured.
    """
    units = []
    for raw in anomaly_types:
        cat = Category.parse(raw)
        names = catalog.candidates_for(cat)
        hist = {h.an: h for h in kb.history(cat)} if kb is not None else {}
        names += [n for n in hist if n not in names and n in catalog]
        tuples = []
        for n in names:
            h = hist.get(n)
            i = h.i if h is not None and h.i is not None else catalog.default_impact_for(n, cat)
            tuples.append(AdaptationTuple(n, h.ct if h is not None else 0, i))
        units.append(DecisionUnit(cat, tuple(tuples)))
    return units


def sort_key(t: AdaptationTuple, catalog: Catalog, ct_descending: bool = True) -> tuple:
    """Ranking key: impact desc, use count desc, enactment time asc, then name."""
    return (-t.i, -t.ct if ct_descending else t.ct, catalog.sort_r_at(t.an), t.an)


def rank(unit: DecisionUnit, catalog: Catalog, ct_descending: bool = True) -> list[AdaptationTuple]:
    return sorted(unit.tuples, key=lambda t: sort_key(t, catalog, ct_descending))


def select_adaptation(unit: DecisionUnit, catalog: Catalog, ct_descending: bool = True) -> AdaptationTuple:
    if not unit.tuples:
        raise NoCandidates(f"decision unit for {unit.anomaly_type} has no candidates")
    return min(unit.tuples, key=lambda t: sort_key(t, catalog, ct_descending))


def decision_likelihoods(unit: DecisionUnit, catalog: Catalog, ct_descending: bool = True) -> dict[str, float]:
    """Rank score ``1 - (rank - 1) / n`` of every candidate, head scoring 1."""
    ordered = rank(unit, catalog, ct_descending)
    n = len(ordered)
    return {t.an: 1.0 - k / n for k, t in enumerate(ordered)}


def relative_impacts(unit: DecisionUnit) -> dict[str, float]:
    """Impacts rescaled so the most effective candidate in the unit scores 1."""
    top = max((t.i for t in unit.tuples), default=0.0)
    return {t.an: (t.i / top if top > 0 else 0.0) for t in unit.tuples}


def record_use(
    an: str,
    kb: KnowledgeBase,
    anomaly_type: Category | str,
    catalog: Catalog | None = None,
    *,
    timestamp: float | None = None,
    session_id: str = "session-0",
    impact: float | None = None,
    risk_rf: float | None = None,
) -> int:
    """Append a DecisionMade record and return the updated use count."""
    cat = Category.parse(anomaly_type)
    known_to_kb = any(h.an == an for h in kb.history(cat))
    if not known_to_kb and (catalog is None or an not in catalog):
        raise NotFound(f"unknown adaptation {an!r}")
    ct = kb.use_count(cat, an) + 1
    if timestamp is None:
        timestamp = kb.last_timestamp(session_id) or 0.0
    rat = cost = None
    if catalog is not None and an in catalog:
        rat = catalog.r_at(an)
        cost = catalog[an].cost_per_hour
    kb.append(
        KbRecord(
            session_id=session_id,
            timestamp_s=timestamp,
            record_kind=RecordKind.DECISION_MADE,
            anomaly_category=cat,
            adaptation=an,
            ct=ct,
            impact_i=impact,
            rat_s=rat,
            cost_per_hr=cost,
            risk_rf=risk_rf,
        )
    )
    return ct


def unit_risks(unit: DecisionUnit, catalog: Catalog, ct_descending: bool = True) -> dict[str, RiskAssessment]:
    """Failure risk of every candidate from its rank score and relative impact."""
    likelihood = decision_likelihoods(unit, catalog, ct_descending)
    impact = relative_impacts(unit)
    return {an: assess_risk(likelihood[an], impact[an]) for an in likelihood}
