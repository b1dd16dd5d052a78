"""Closed-form response-time arithmetic and M/M/1/K steady-state metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InvalidArgument
from ..validation import check_positive


@dataclass(frozen=True)
class StageRates:
    """Service rates (events/s) of the collect, categorize and push stages."""

    mu1: float
    mu2: float
    mu3: float

    def __post_init__(self):
        for name in ("mu1", "mu2", "mu3"):
            check_positive(name, getattr(self, name))

    def __iter__(self):
        return iter((self.mu1, self.mu2, self.mu3))

    @classmethod
    def split(cls, x_bar: float, fractions=(1 / 3, 1 / 3, 1 / 3)) -> "StageRates":
        """Rates whose stage means are ``fractions`` of a total mean ``x_bar``."""
        check_positive("x_bar", x_bar)
        if len(fractions) != 3 or any(f <= 0 for f in fractions) or not math.isclose(sum(fractions), 1.0):
            raise InvalidArgument(f"fractions must be three positive shares summing to 1: {fractions}")
        return cls(*(1.0 / (f * x_bar) for f in fractions))


def mean_service_time(rates: StageRates) -> float:
    """Total mean service time over the three sequential stages."""
    return 1.0 / rates.mu1 + 1.0 / rates.mu2 + 1.0 / rates.mu3


def wq_from_lq(lq: float, lam: float) -> float:
    """Mean wait in queue from mean queue length (Little's law on the queue)."""
    if not lam > 0:
        raise InvalidArgument(f"arrival rate must be positive: {lam}")
    if not lq >= 0:
        raise InvalidArgument(f"queue length must be non-negative: {lq}")
    return lq / lam


def response_time_in_queue(wq: float, x_bar: float) -> float:
    if wq < 0 or x_bar < 0:
        raise InvalidArgument("wq and x_bar must be non-negative")
    return wq + x_bar


def system_response(rtq: float, r_at: float) -> float:
    """Overall response: time through the queue plus adaptation enactment time."""
    if rtq < 0 or r_at < 0:
        raise InvalidArgument("rtq and r_at must be non-negative")
    return rtq + r_at


@dataclass(frozen=True)
class MM1KMetrics:
    lam: float
    mu: float
    capacity_k: int
    rho: float
    state_probs: tuple[float, ...]
    blocking_prob: float
    L: float
    Lq: float
    effective_lambda: float
    W: float
    Wq: float


def mm1k_analytics(lam: float, mu_eff: float, capacity_k: int) -> MM1KMetrics:
    """Steady-state M/M/1/K metrics.

    ``P_n`` is proportional to ``rho**n``; it is normalised numerically so that
    large ``K`` with ``rho > 1`` does not overflow. ``rho == 1`` yields the
    uniform distribution exactly.
    """
    check_positive("lambda", lam)
    check_positive("mu_eff", mu_eff)
    if isinstance(capacity_k, bool) or int(capacity_k) != capacity_k or capacity_k < 1:
        raise InvalidArgument(f"capacity_k must be an integer >= 1, got {capacity_k!r}")
    k = int(capacity_k)
    rho = lam / mu_eff
    if rho == 1.0:
        probs = [1.0 / (k + 1)] * (k + 1)
    else:
        if rho < 1.0:
            w = [rho**n for n in range(k + 1)]
        else:
            w = [(1.0 / rho) ** (k - n) for n in range(k + 1)]
        total = math.fsum(w)
        probs = [x / total for x in w]
    L = math.fsum(n * p for n, p in enumerate(probs))
    Lq = max(0.0, L - (1.0 - probs[0]))
    lam_eff = lam * (1.0 - probs[k])
    return MM1KMetrics(
        lam=lam,
        mu=mu_eff,
        capacity_k=k,
        rho=rho,
        state_probs=tuple(probs),
        blocking_prob=probs[k],
        L=L,
        Lq=Lq,
        effective_lambda=lam_eff,
        W=L / lam_eff,
        Wq=Lq / lam_eff,
    )
