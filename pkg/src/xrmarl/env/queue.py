"""Tail-drop FIFO transmit buffer served at a per-UE link rate.

The server is the base station's air interface: the head-of-line packet is
transmitted at the rate of the UE it belongs to (full-band time sharing).
A UE in outage (rate 0) blocks the head of the queue until its rate
recovers in a later window.
"""
from __future__ import annotations

import numba
import numpy as np

QUEUED, DEPARTED, DROPPED, PENDING = 1, 2, 3, 0


@numba.njit(cache=True)
def serve_window(t0, t1, arr_time, arr_size, arr_ue, n_queued, head_finish, rates, capacity):
    """Simulate the buffer over ``[t0, t1)``.

    Entries ``[0, n_queued)`` are already buffered, in FIFO order; the rest
    are arrivals sorted by time.  ``head_finish`` is the completion time of
    a transmission carried over from the previous window, or -1.

    Returns (depart time per entry, status per entry, indices still queued,
    new head_finish, time-averaged occupancy in bytes, peak occupancy).
    """
    n = arr_time.size
    depart = np.full(n, np.nan)
    status = np.zeros(n, np.int8)
    queue = np.empty(n, np.int64)
    qh = 0
    qt = 0
    occupied = 0
    for j in range(n_queued):
        queue[qt] = j
        qt += 1
        occupied += arr_size[j]
        status[j] = QUEUED
    peak = occupied
    finish = head_finish
    if qt > qh and finish < 0:
        r = rates[arr_ue[queue[qh]]]
        finish = t0 + arr_size[queue[qh]] * 8.0 / r if r > 0 else -1.0

    t = t0
    area = 0.0
    i = n_queued
    while True:
        next_arr = arr_time[i] if i < n else np.inf
        next_dep = finish if (qt > qh and finish >= 0) else np.inf
        ev = min(next_arr, next_dep)
        if ev >= t1:
            break
        area += occupied * (ev - t)
        t = ev
        if next_dep <= next_arr:
            h = queue[qh]
            qh += 1
            depart[h] = t
            status[h] = DEPARTED
            occupied -= arr_size[h]
            finish = -1.0
            if qt > qh:
                r = rates[arr_ue[queue[qh]]]
                finish = t + arr_size[queue[qh]] * 8.0 / r if r > 0 else -1.0
        else:
            j = i
            i += 1
            if occupied + arr_size[j] <= capacity:
                queue[qt] = j
                qt += 1
                occupied += arr_size[j]
                status[j] = QUEUED
                if occupied > peak:
                    peak = occupied
                if qt - qh == 1:
                    r = rates[arr_ue[j]]
                    finish = t + arr_size[j] * 8.0 / r if r > 0 else -1.0
            else:
                status[j] = DROPPED
    area += occupied * (t1 - t)
    remaining = queue[qh:qt].copy()
    if qt == qh:
        finish = -1.0
    return depart, status, remaining, finish, area / (t1 - t0), peak

