"""Success rate and Student-t confidence intervals."""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import stats


def success_rate(flags: Sequence[bool]) -> float:
    """Fraction of episodes that ran their full length without a done event."""
    flags = list(flags)
    if not flags:
        raise ValueError("success rate of zero episodes")
    return float(np.mean(np.asarray(flags, dtype=bool)))


def mean_ci(values: Sequence[float], level: float = 0.95) -> tuple[float, float]:
    """(mean, half-width) of a two-sided t interval with n - 1 degrees of freedom.

    NaN entries are dropped; a single value gives a zero-width interval.
    """
    x = np.asarray(values, dtype=float)
    x = x[~np.isnan(x)]
    if x.size == 0:
        return float("nan"), float("nan")
    m = float(x.mean())
    if x.size == 1:
        return m, 0.0
    sem = float(x.std(ddof=1)) / np.sqrt(x.size)
    return m, float(stats.t.ppf(0.5 + level / 2.0, x.size - 1) * sem)
