"""Input coercion helpers shared by the estimator-style entry points."""
from __future__ import annotations

import math
from typing import Any, Sequence

import numpy as np
from sklearn.utils.validation import check_array

from .errors import InvalidArgument
from .telemetry import MetricSample

FEATURES = ("packets_out", "cpu_utilization", "latency", "login_attempts", "tampered_packets")


def check_samples(X: Any, session_id: str = "session-0") -> list[MetricSample]:
    """Return ``X`` as a list of :class:`MetricSample`.

    Accepts a sequence of samples or a 2-D array whose columns follow
    :data:`FEATURES` (the last column may be omitted). Rows of an array get
    their index as timestamp.
    """
    if isinstance(X, MetricSample):
        return [X]
    if isinstance(X, (list, tuple)) and X and all(isinstance(s, MetricSample) for s in X):
        return list(X)
    if isinstance(X, (list, tuple)) and not X:
        return []
    arr = check_array(X, dtype=np.float64, ensure_min_samples=0)
    if arr.shape[1] not in (len(FEATURES) - 1, len(FEATURES)):
        raise InvalidArgument(
            f"expected {len(FEATURES) - 1} or {len(FEATURES)} feature columns, got {arr.shape[1]}"
        )
    out = []
    for i, row in enumerate(arr):
        tampered = row[4] if arr.shape[1] == len(FEATURES) else 0.0
        out.append(
            MetricSample(
                timestamp=float(i),
                packets_out=_as_count(row[0], "packets_out"),
                cpu_utilization=float(row[1]),
                latency=float(row[2]),
                login_attempts=_as_count(row[3], "login_attempts"),
                session_id=session_id,
                tampered_packets=_as_count(tampered, "tampered_packets"),
            )
        )
    return out


def samples_to_array(samples: Sequence[MetricSample]) -> np.ndarray:
    return np.array([[getattr(s, f) for f in FEATURES] for s in samples], dtype=np.float64).reshape(
        -1, len(FEATURES)
    )


def _as_count(value: float, name: str) -> int:
    if value != math.floor(value):
        raise InvalidArgument(f"{name} must be an integer count, got {value}")
    return int(value)


def check_positive(name: str, value: float) -> float:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise InvalidArgument(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_unit_interval(name: str, value: float) -> float:
    if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
        raise InvalidArgument(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)
