"""Priority anomaly queue: binary heap, closed-form metrics and simulation."""
from .analytics import (
    MM1KMetrics,
    StageRates,
    mean_service_time,
    mm1k_analytics,
    response_time_in_queue,
    system_response,
    wq_from_lq,
)
from .heap import AnomalyHeap, priority_key
from .simulation import (
    DEFAULT_SEVERE_THRESHOLD_MS,
    Departure,
    OverflowPolicy,
    QueueConfig,
    SimStats,
    poisson_source,
    simulate,
)

__all__ = [
    "AnomalyHeap",
    "DEFAULT_SEVERE_THRESHOLD_MS",
    "Departure",
    "MM1KMetrics",
    "OverflowPolicy",
    "QueueConfig",
    "SimStats",
    "StageRates",
    "mean_service_time",
    "mm1k_analytics",
    "poisson_source",
    "priority_key",
    "response_time_in_queue",
    "simulate",
    "system_response",
    "wq_from_lq",
]
