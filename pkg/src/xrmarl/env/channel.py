"""Distance-dependent link capacity and UE mobility inside a ring."""
from __future__ import annotations

import math

import numpy as np

from .config import LinkConfig

THERMAL_NOISE_DBM_HZ = -174.0


def pathloss_uma_nlos(distance_m: float, fc_ghz: float = 4.0, ue_height_m: float = 1.5) -> float:
    """Dominant term of the 3GPP TR 38.901 UMa NLoS pathloss, in dB."""
    if not distance_m > 0:
        raise ValueError(f"distance must be positive, got {distance_m}")
    return (13.54 + 39.08 * math.log10(distance_m) + 20.0 * math.log10(fc_ghz)
            - 0.6 * (ue_height_m - 1.5))


def noise_floor_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def snr_db(link: LinkConfig, distance_m: float, shadowing_db: float = 0.0) -> float:
    pl = pathloss_uma_nlos(distance_m, link.fc_ghz, link.ue_height_m)
    noise = noise_floor_dbm(link.bandwidth_hz, link.ue_noise_figure_db)
    return link.tx_power_dbm + link.antenna_gain_db - pl - shadowing_db - noise


def capacity_from_snr(link: LinkConfig, snr: float, window_s: float) -> float:
    """Bits deliverable in one window at a given SNR (dB)."""
    if snr < link.outage_snr_db:
        return 0.0
    se = min(math.log2(1.0 + 10.0 ** (snr / 10.0)), link.se_cap)
    return link.bandwidth_hz * se * window_s


def window_capacity(link: LinkConfig, distance_m: float, rng: np.random.Generator | None,
                    window_s: float = 0.5) -> float:
    """Capacity in bits for one window with a fresh log-normal shadowing draw.

    Pass ``rng=None`` to disable shadowing.
    """
    shadow = 0.0 if rng is None else float(rng.normal(0.0, link.shadowing_std_db))
    return capacity_from_snr(link, snr_db(link, distance_m, shadow), window_s)


def sample_in_annulus(rng: np.random.Generator, inner: float, outer: float) -> np.ndarray:
    # area-uniform radius
    r = math.sqrt(rng.uniform(inner ** 2, outer ** 2))
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return np.array([r * math.cos(theta), r * math.sin(theta)])


class RandomWaypoint:
    """Random-waypoint walk confined to an annulus centred on the base station."""

    def __init__(self, rng: np.random.Generator, ring: tuple[float, float], speed_mps: float):
        self.rng = rng
        self.inner, self.outer = ring
        self.speed = speed_mps
        self.position = sample_in_annulus(rng, self.inner, self.outer)
        self.waypoint = sample_in_annulus(rng, self.inner, self.outer)

    @property
    def distance(self) -> float:
        return float(np.hypot(*self.position))

    def advance(self, dt: float) -> None:
        remaining = self.speed * dt
        while remaining > 0:
            delta = self.waypoint - self.position
            gap = float(np.hypot(*delta))
            if gap <= remaining:
                self.position = self.waypoint
                remaining -= gap
                self.waypoint = sample_in_annulus(self.rng, self.inner, self.outer)
                if gap == 0.0 and remaining > 0:
                    continue
            else:
                self.position = self.position + delta * (remaining / gap)
                remaining = 0.0
        # a chord can cut inside the inner radius; project back onto the ring
        r = self.distance
        if r < self.inner or r > self.outer:
            self.position = self.position * (min(max(r, self.inner), self.outer) / max(r, 1e-9))
