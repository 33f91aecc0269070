"""Adjust-packet-size loopback controller: multiplicative rate steps keyed on packet loss."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..env.simulator import KpiWindow


@dataclass(frozen=True)
class ApsConfig:
    """Thresholds and multipliers; the defaults are implementation choices."""

    l_inc: float = 0.01
    l_dec_soft: float = 0.05
    l_dec_quick: float = 0.20
    alpha_dec_soft: float = 0.9
    alpha_dec_quick: float = 0.5
    alpha_inc: float = 1.1
    a_min: float = 0.5
    a_max: float = 10.0
    # feed PDR instead of loss ratio into the thresholds (literal reading, for comparison)
    literal_pdr: bool = False

    def __post_init__(self):
        if not 0.0 <= self.l_inc <= self.l_dec_soft < self.l_dec_quick <= 1.0:
            raise ValueError("need 0 <= l_inc <= l_dec_soft < l_dec_quick <= 1")
        if not 0.0 < self.alpha_dec_quick <= self.alpha_dec_soft <= 1.0 <= self.alpha_inc:
            raise ValueError("need 0 < alpha_dec_quick <= alpha_dec_soft <= 1 <= alpha_inc")
        if not 0.0 < self.a_min <= self.a_max:
            raise ValueError("need 0 < a_min <= a_max")


def aps_step(p: float, a_prev: float, cfg: ApsConfig) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"loss observation must lie in [0, 1], got {p}")
    if cfg.l_dec_soft < p < cfg.l_dec_quick:
        return max(a_prev * cfg.alpha_dec_soft, cfg.a_min)
    if p >= cfg.l_dec_quick:
        return max(a_prev * cfg.alpha_dec_quick, cfg.a_min)
    if p < cfg.l_inc:
        return min(a_prev * cfg.alpha_inc, cfg.a_max)
    return a_prev


class ApsController:
    """One APS loop per traffic type, driven by the previous window's KPIs."""

    def __init__(self, base: ApsConfig, rate_min, rate_max):
        self.configs = [replace(base, a_min=float(lo), a_max=float(hi))
                        for lo, hi in zip(rate_min, rate_max)]
        self.rates = np.array([c.a_max for c in self.configs])

    def reset(self, initial_rates) -> np.ndarray:
        self.rates = np.asarray(initial_rates, float).copy()
        return self.rates.copy()

    def act(self, kpi: KpiWindow) -> np.ndarray:
        p = kpi.type_pdr if self.configs[0].literal_pdr else kpi.type_plr
        p = np.clip(p, 0.0, 1.0)
        self.rates = np.array([aps_step(float(pi), float(a), c)
                               for pi, a, c in zip(p, self.rates, self.configs)])
        return self.rates.copy()
