"""Discrete-event simulation of the single-server, three-stage priority queue."""
from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

from ..errors import InvalidArgument
from ..monitor import CATEGORIES, AnomalyEvent, Category
from .analytics import StageRates, mean_service_time, response_time_in_queue, system_response
from .heap import AnomalyHeap, priority_key

DEFAULT_SEVERE_THRESHOLD_MS = 15.0


class OverflowPolicy(str, enum.Enum):
    REJECT_ARRIVAL = "RejectArrival"
    EVICT_LOWEST_SEVERITY = "EvictLowestSeverity"


@dataclass(frozen=True)
class QueueConfig:
    lam: float
    rates: StageRates
    capacity_k: int
    overflow_policy: OverflowPolicy = OverflowPolicy.REJECT_ARRIVAL

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise InvalidArgument(f"arrival rate must be finite and >= 0: {self.lam}")
        if not isinstance(self.rates, StageRates):
            raise InvalidArgument("rates must be a StageRates")
        if isinstance(self.capacity_k, bool) or int(self.capacity_k) != self.capacity_k or self.capacity_k < 1:
            raise InvalidArgument(f"capacity_k must be an integer >= 1: {self.capacity_k!r}")
        try:
            object.__setattr__(self, "overflow_policy", OverflowPolicy(self.overflow_policy))
        except ValueError:
            raise InvalidArgument(f"unknown overflow policy {self.overflow_policy!r}") from None

    @property
    def x_bar(self) -> float:
        return mean_service_time(self.rates)


@dataclass(frozen=True, slots=True)
class Departure:
    event: AnomalyEvent
    start: float
    end: float

    @property
    def wait(self) -> float:
        return self.start - self.event.arrival_time


@dataclass
class SimStats:
    horizon: float
    arrivals: int = 0
    processed_total: int = 0
    processed_severe: int = 0
    rejected: int = 0
    evicted: int = 0
    in_system_at_horizon: int = 0
    mean_wq: float = 0.0
    mean_lq: float = 0.0
    mean_l: float = 0.0
    mean_x_bar_empirical: float = 0.0
    effective_lambda: float = 0.0
    blocking_prob: float = 0.0
    full_time_fraction: float = 0.0
    mean_rs: float | None = None
    departures: list[Departure] = field(default_factory=list, repr=False)

    @property
    def mean_rtq(self) -> float:
        return response_time_in_queue(self.mean_wq, self.mean_x_bar_empirical)


def poisson_source(
    lam: float,
    seed: int,
    severity_max: float = 30.0,
    categories: tuple[Category, ...] = CATEGORIES,
) -> Iterator[AnomalyEvent]:
    """Unbounded Poisson stream with uniform severities on ``[0, severity_max]``."""
    if lam <= 0:
        return
    rng = random.Random(seed)
    t = 0.0
    i = 0
    while True:
        t += rng.expovariate(lam)
        yield AnomalyEvent(
            id=i,
            arrival_time=t,
            category=categories[rng.randrange(len(categories))],
            severity=rng.uniform(0.0, severity_max),
        )
        i += 1


def _ordered(events: Iterable[AnomalyEvent]) -> Iterator[AnomalyEvent]:
    last = -math.inf
    for e in events:
        if e.arrival_time < last:
            raise InvalidArgument("event source must be ordered by arrival_time")
        last = e.arrival_time
        yield e


def simulate(
    config: QueueConfig,
    horizon: float,
    seed: int = 0,
    severe_threshold: float = DEFAULT_SEVERE_THRESHOLD_MS,
    event_source: Iterable[AnomalyEvent] | None = None,
    r_at: float | None = None,
    warmup: float = 0.0,
    record: bool = False,
    service_sampler: Callable[[random.Random], float] | None = None,
    severity_max: float = 30.0,
    engine: str = "auto",
) -> SimStats:
    """Run the queue from empty until ``horizon``.

    Arrivals come from ``event_source`` (ordered by ``arrival_time``) or, when
    it is None, from a Poisson stream at ``config.lam`` with severities uniform
    on ``[0, severity_max]``. Each admitted event passes the three exponential
    stages back to back on one server; the next event is taken off the heap
    only after the previous one leaves. Capacity counts the event in service.

    Time averages and waits cover ``[warmup, horizon]``; counters cover the
    whole run, so ``arrivals == processed_total + rejected +
    in_system_at_horizon`` always holds. With a fixed seed a longer horizon
    replays the shorter run as a prefix.

    ``engine`` is ``"python"``, ``"compiled"`` or ``"auto"``. The compiled
    engine handles Poisson sources only, without ``record`` or a custom
    ``service_sampler``; "auto" picks it whenever it can.
    """
    if not (math.isfinite(horizon) and horizon > 0):
        raise InvalidArgument(f"horizon must be positive and finite: {horizon}")
    if not 0 <= warmup < horizon:
        raise InvalidArgument(f"warmup must lie in [0, horizon): {warmup}")
    if r_at is not None and r_at < 0:
        raise InvalidArgument("r_at must be non-negative")
    if engine not in ("auto", "python", "compiled"):
        raise InvalidArgument(f"unknown engine {engine!r}")
    compilable = event_source is None and not record and service_sampler is None
    if engine == "compiled" and not compilable:
        raise InvalidArgument("compiled engine needs a Poisson source, record=False and no service_sampler")
    use_compiled = engine == "compiled" or (engine == "auto" and compilable)

    stats = SimStats(horizon=horizon)
    if use_compiled:
        from ._kernel import poisson_kernel

        out = poisson_kernel(
            float(config.lam),
            *(float(m) for m in config.rates),
            int(config.capacity_k),
            config.overflow_policy is OverflowPolicy.EVICT_LOWEST_SEVERITY,
            float(horizon),
            float(warmup),
            float(severity_max),
            float(severe_threshold),
            int(np.random.SeedSequence(seed).generate_state(1)[0]),
        )
        (
            stats.arrivals,
            stats.processed_total,
            stats.processed_severe,
            stats.rejected,
            stats.evicted,
            stats.in_system_at_horizon,
        ) = (int(v) for v in out[:6])
        acc = _Accumulators(*out[6:])
    else:
        acc = _run_python(
            config, horizon, seed, severe_threshold, event_source, warmup, record, service_sampler, severity_max, stats
        )
    _finish(stats, acc, config, horizon - warmup, r_at)
    return stats


@dataclass
class _Accumulators:
    admitted_window: int = 0
    area_q: float = 0.0
    area_sys: float = 0.0
    area_full: float = 0.0
    wait_sum: float = 0.0
    wait_n: int = 0
    service_sum: float = 0.0


def _finish(stats: SimStats, acc: _Accumulators, config: QueueConfig, span: float, r_at: float | None) -> None:
    stats.mean_lq = acc.area_q / span
    stats.mean_l = acc.area_sys / span
    stats.mean_wq = acc.wait_sum / acc.wait_n if acc.wait_n else 0.0
    stats.mean_x_bar_empirical = acc.service_sum / stats.processed_total if stats.processed_total else 0.0
    stats.effective_lambda = acc.admitted_window / span
    stats.blocking_prob = stats.rejected / stats.arrivals if stats.arrivals else 0.0
    stats.full_time_fraction = acc.area_full / span
    if r_at is not None:
        x_bar = stats.mean_x_bar_empirical if stats.processed_total else config.x_bar
        stats.mean_rs = system_response(response_time_in_queue(stats.mean_wq, x_bar), r_at)


def _run_python(
    config, horizon, seed, severe_threshold, event_source, warmup, record, service_sampler, severity_max, stats
) -> _Accumulators:
    arrival_seed, service_seed = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(2))
    if event_source is None:
        source = poisson_source(config.lam, arrival_seed, severity_max)
    else:
        source = _ordered(event_source)
    srng = random.Random(service_seed)
    mu1, mu2, mu3 = config.rates
    expo = srng.expovariate
    if service_sampler is None:

        def draw_service() -> float:
            return expo(mu1) + expo(mu2) + expo(mu3)

    else:

        def draw_service() -> float:
            return service_sampler(srng)

    capacity = int(config.capacity_k)
    evict = config.overflow_policy is OverflowPolicy.EVICT_LOWEST_SEVERITY
    queue = AnomalyHeap()

    in_service: AnomalyEvent | None = None
    service_start = 0.0
    depart_at = math.inf
    nxt = next(source, None)
    inf = math.inf

    t = 0.0
    area_q = 0.0
    area_sys = 0.0
    area_full = 0.0
    wait_sum = 0.0
    wait_n = 0
    service_sum = 0.0
    admitted_window = 0

    while True:
        ta = nxt.arrival_time if nxt is not None else inf
        t_next = depart_at if depart_at <= ta else ta
        if t_next >= horizon:
            break
        # integrate queue lengths over [t, t_next] clipped to the window
        lo = t if t > warmup else warmup
        if t_next > lo:
            nq = len(queue)
            dt = t_next - lo
            area_q += nq * dt
            ns = nq + (in_service is not None)
            area_sys += ns * dt
            if ns >= capacity:
                area_full += dt
        t = t_next

        if depart_at <= ta:
            ev = in_service
            stats.processed_total += 1
            if ev.severity > severe_threshold:
                stats.processed_severe += 1
            service_sum += t - service_start
            if record:
                stats.departures.append(Departure(ev, service_start, t))
            in_service = None
            depart_at = inf
        else:
            ev = nxt
            nxt = next(source, None)
            stats.arrivals += 1
            in_system = len(queue) + (in_service is not None)
            if in_system >= capacity:
                victim = queue.least_severe() if (evict and queue) else None
                if victim is not None and priority_key(ev) < priority_key(victim):
                    queue.remove(victim.id)
                    stats.evicted += 1
                    stats.rejected += 1
                    queue.insert(ev)
                    if ev.arrival_time >= warmup:
                        admitted_window += 1
                else:
                    stats.rejected += 1
                    continue
            else:
                queue.insert(ev)
                if ev.arrival_time >= warmup:
                    admitted_window += 1

        if in_service is None and queue:
            in_service = queue.extract_max()
            service_start = t
            depart_at = t + draw_service()
            if in_service.arrival_time >= warmup:
                wait_sum += t - in_service.arrival_time
                wait_n += 1

    # close the window at the horizon
    lo = t if t > warmup else warmup
    if horizon > lo:
        ns = len(queue) + (in_service is not None)
        area_q += len(queue) * (horizon - lo)
        area_sys += ns * (horizon - lo)
        if ns >= capacity:
            area_full += horizon - lo

    stats.in_system_at_horizon = len(queue) + (in_service is not None)
    return _Accumulators(admitted_window, area_q, area_sys, area_full, wait_sum, wait_n, service_sum)
