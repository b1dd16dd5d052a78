"""Risk/cost-aware enactment of adaptations and the ECA recommendation table."""
from .actions import (
    EnactmentRecord,
    SystemState,
    enact,
    feedback,
    find_rule,
    measured_impact,
    recommend,
    scale_excess,
)
from .catalog import AdaptationCatalogEntry, Catalog, EcaBranch, EcaRule, catalog_from_dict, load_catalog
from .risk import Level, RiskAssessment, assess_risk, cost_bucket, risk_bucket

__all__ = [
    "AdaptationCatalogEntry",
    "Catalog",
    "EcaBranch",
    "EcaRule",
    "EnactmentRecord",
    "Level",
    "RiskAssessment",
    "SystemState",
    "assess_risk",
    "catalog_from_dict",
    "cost_bucket",
    "enact",
    "feedback",
    "find_rule",
    "load_catalog",
    "measured_impact",
    "recommend",
    "risk_bucket",
    "scale_excess",
]
