"""Compiled event loop for Poisson-driven runs.

Mirrors the Python loop in :mod:`.simulation` (same heap order, same window
accounting) but keeps the heap in flat arrays so numba can compile it. It
draws from numba's own generator, so a given seed produces a different sample
path than the Python engine.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _before(sev, arr, ids, i, j):
    if sev[i] != sev[j]:
        return sev[i] > sev[j]
    if arr[i] != arr[j]:
        return arr[i] < arr[j]
    return ids[i] < ids[j]


@njit(cache=True)
def _swap(sev, arr, ids, i, j):
    sev[i], sev[j] = sev[j], sev[i]
    arr[i], arr[j] = arr[j], arr[i]
    ids[i], ids[j] = ids[j], ids[i]


@njit(cache=True)
def _sift_up(sev, arr, ids, i):
    while i > 0:
        p = (i - 1) >> 1
        if not _before(sev, arr, ids, i, p):
            break
        _swap(sev, arr, ids, i, p)
        i = p


@njit(cache=True)
def _sift_down(sev, arr, ids, i, n):
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and _before(sev, arr, ids, c + 1, c):
            c += 1
        if not _before(sev, arr, ids, c, i):
            break
        _swap(sev, arr, ids, i, c)
        i = c


@njit(cache=True)
def _remove_at(sev, arr, ids, i, n):
    """Remove slot ``i`` from a heap of size ``n``; returns the new size."""
    n -= 1
    if i < n:
        sev[i] = sev[n]
        arr[i] = arr[n]
        ids[i] = ids[n]
        if i > 0 and _before(sev, arr, ids, i, (i - 1) >> 1):
            _sift_up(sev, arr, ids, i)
        else:
            _sift_down(sev, arr, ids, i, n)
    return n


@njit(cache=True)
def poisson_kernel(lam, mu1, mu2, mu3, capacity, evict, horizon, warmup, severity_max, severe_threshold, seed):
    np.random.seed(seed)
    size = capacity + 1
    sev = np.empty(size)
    arr = np.empty(size)
    ids = np.empty(size, dtype=np.int64)
    n = 0

    busy = False
    cur_sev = 0.0
    service_start = 0.0
    depart_at = np.inf
    next_arr = np.random.exponential(1.0 / lam) if lam > 0 else np.inf
    next_id = 0

    arrivals = 0
    processed = 0
    severe = 0
    rejected = 0
    evicted = 0
    admitted_window = 0
    area_q = 0.0
    area_sys = 0.0
    area_full = 0.0
    wait_sum = 0.0
    wait_n = 0
    service_sum = 0.0
    t = 0.0

    while True:
        t_next = depart_at if depart_at <= next_arr else next_arr
        if t_next >= horizon:
            break
        lo = t if t > warmup else warmup
        if t_next > lo:
            dt = t_next - lo
            ns = n + (1 if busy else 0)
            area_q += n * dt
            area_sys += ns * dt
            if ns >= capacity:
                area_full += dt
        t = t_next

        if depart_at <= next_arr:
            processed += 1
            if cur_sev > severe_threshold:
                severe += 1
            service_sum += t - service_start
            busy = False
            depart_at = np.inf
        else:
            arrivals += 1
            s_new = np.random.uniform(0.0, severity_max)
            a_new = t
            i_new = next_id
            next_id += 1
            next_arr = t + np.random.exponential(1.0 / lam)
            ns = n + (1 if busy else 0)
            admit = True
            if ns >= capacity:
                admit = False
                if evict and n > 0:
                    # least severe waiting event sits among the leaves
                    j = n // 2
                    for k in range(n // 2 + 1, n):
                        if _before(sev, arr, ids, j, k):
                            j = k
                    beats = s_new > sev[j] or (
                        s_new == sev[j] and (a_new < arr[j] or (a_new == arr[j] and i_new < ids[j]))
                    )
                    if beats:
                        n = _remove_at(sev, arr, ids, j, n)
                        evicted += 1
                        admit = True
                # either the arrival or the evicted event counts as lost
                rejected += 1
            if admit:
                sev[n] = s_new
                arr[n] = a_new
                ids[n] = i_new
                n += 1
                _sift_up(sev, arr, ids, n - 1)
                if a_new >= warmup:
                    admitted_window += 1

        if not busy and n > 0:
            cur_sev = sev[0]
            a0 = arr[0]
            n = _remove_at(sev, arr, ids, 0, n)
            busy = True
            service_start = t
            depart_at = (
                t
                + np.random.exponential(1.0 / mu1)
                + np.random.exponential(1.0 / mu2)
                + np.random.exponential(1.0 / mu3)
            )
            if a0 >= warmup:
                wait_sum += t - a0
                wait_n += 1

    lo = t if t > warmup else warmup
    if horizon > lo:
        ns = n + (1 if busy else 0)
        area_q += n * (horizon - lo)
        area_sys += ns * (horizon - lo)
        if ns >= capacity:
            area_full += horizon - lo

    in_system = n + (1 if busy else 0)
    return (
        arrivals,
        processed,
        severe,
        rejected,
        evicted,
        in_system,
        admitted_window,
        area_q,
        area_sys,
        area_full,
        wait_sum,
        wait_n,
        service_sum,
    )
