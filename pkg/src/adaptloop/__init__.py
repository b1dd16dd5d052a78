"""Closed-loop 3QS anomaly adaptation: telemetry, alarms, priority queue, decisions, control."""
from .config import ScenarioConfig, load_config
from .knowledge_base import KnowledgeBase
from .monitor import AnomalyEvent, Category, ThresholdMonitor
from .pipeline import run_session

__version__ = "0.1.0"

__all__ = [
    "AnomalyEvent",
    "Category",
    "KnowledgeBase",
    "ScenarioConfig",
    "ThresholdMonitor",
    "load_config",
    "run_session",
]
