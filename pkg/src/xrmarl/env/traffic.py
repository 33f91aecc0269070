"""Parametric XR frame generator and packetiser."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import FlowSpec

# tolerance for float round-off when checking rates against codec bounds
_RATE_TOL = 1e-9


@dataclass
class Frames:
    flow: np.ndarray      # index of the flow within its traffic type
    time: np.ndarray      # generation instant, s
    size: np.ndarray      # bytes (float; rounded at packetisation)


def truncated_normal(rng: np.random.Generator, n: int, limit: float = 2.0) -> np.ndarray:
    z = rng.standard_normal(n)
    bad = np.abs(z) > limit
    while bad.any():
        z[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(z) > limit
    return z


def generate_frames(flow: FlowSpec, rate_mbps: float, window_s: float, rng: np.random.Generator,
                    t0: float = 0.0, phases: np.ndarray | None = None,
                    jitter_frac: float = 0.105) -> Frames:
    """Frames for every flow of one traffic type over ``[t0, t0 + window_s)``.

    The selected codec rate is split evenly across the type's flows.  Frame
    sizes carry a multiplicative Gaussian jitter truncated at two standard
    deviations; arrivals are periodic at ``1/fps`` after a per-flow phase.
    """
    if not (flow.min_rate_mbps - _RATE_TOL <= rate_mbps <= flow.max_rate_mbps + _RATE_TOL):
        raise ValueError(
            f"{flow.traffic_type} rate {rate_mbps} Mbps outside "
            f"[{flow.min_rate_mbps}, {flow.max_rate_mbps}]"
        )
    n_frames = int(round(flow.fps * window_s))
    period = 1.0 / flow.fps
    if phases is None:
        phases = rng.uniform(0.0, period, flow.n_flows)
    mean_size = rate_mbps * 1e6 / (8.0 * flow.fps * flow.n_flows)

    k = np.arange(n_frames)
    flows = np.repeat(np.arange(flow.n_flows), n_frames)
    times = t0 + np.repeat(phases, n_frames) + np.tile(k * period, flow.n_flows)
    if jitter_frac > 0:
        sizes = mean_size * (1.0 + jitter_frac * truncated_normal(rng, flows.size))
    else:
        sizes = np.full(flows.size, mean_size)
    return Frames(flows, times, sizes)


@dataclass
class Packets:
    time: np.ndarray     # arrival at the RLC buffer, s
    size: np.ndarray     # bytes, int64
    frame: np.ndarray    # index into the Frames it came from


def packetize(frames: Frames, packet_bytes: int, ingress_rate_bps: float) -> Packets:
    """Split frames into SDUs of at most ``packet_bytes`` arriving back to back."""
    sizes = np.maximum(np.rint(frames.size).astype(np.int64), 1)
    counts = -(-sizes // packet_bytes)
    frame_idx = np.repeat(np.arange(sizes.size), counts)
    starts = np.cumsum(counts) - counts
    pos = np.arange(frame_idx.size) - np.repeat(starts, counts)
    last = pos == np.repeat(counts - 1, counts)
    psize = np.where(last, sizes[frame_idx] - (counts[frame_idx] - 1) * packet_bytes, packet_bytes)
    ptime = frames.time[frame_idx] + pos * (packet_bytes * 8.0 / ingress_rate_bps)
    return Packets(ptime, psize.astype(np.int64), frame_idx)
