"""Failure-risk scoring and three-level risk/cost buckets."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from ..errors import InvalidArgument
from ..validation import check_unit_interval

COST_LOW_CEILING = 0.25  # $/hr
COST_MEDIUM_CEILING = 2.5


class Level(enum.IntEnum):
    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @property
    def short(self) -> str:
        return "LMH"[self.value]

    @classmethod
    def parse(cls, value: "str | Level") -> "Level":
        if isinstance(value, Level):
            return value
        key = str(value).strip().upper()
        for lvl in cls:
            if key in (lvl.short, lvl.name):
                return lvl
        raise InvalidArgument(f"unknown level {value!r}")

    def __str__(self) -> str:
        return self.name.capitalize()


@dataclass(frozen=True)
class RiskAssessment:
    likelihood: float
    impact: float
    failure_risk: float
    bucket: Level


def risk_bucket(failure_risk: float) -> Level:
    if failure_risk < 1 / 3:
        return Level.LOW
    if failure_risk < 2 / 3:
        return Level.MEDIUM
    return Level.HIGH


def assess_risk(likelihood: float, impact: float) -> RiskAssessment:
    """Failure risk as one minus the mean of decision likelihood and impact."""
    likelihood = check_unit_interval("likelihood", likelihood)
    impact = check_unit_interval("impact", impact)
    rf = 1.0 - (likelihood + impact) / 2.0
    return RiskAssessment(likelihood, impact, rf, risk_bucket(rf))


def cost_bucket(cost_per_hour: float) -> Level:
    if not cost_per_hour >= 0:
        raise InvalidArgument(f"cost must be non-negative: {cost_per_hour}")
    if cost_per_hour < COST_LOW_CEILING:
        return Level.LOW
    if cost_per_hour < COST_MEDIUM_CEILING:
        return Level.MEDIUM
    return Level.HIGH
