"""Log-log rate regression."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    ci95: tuple[float, float]

    def within(self, target: float, slack: float) -> bool:
        return abs(self.slope - target) <= slack


def rate_fit(ns, values) -> RateFit:
    """Least-squares fit of ``ln(values)`` on ``ln(ns)`` with a t-based 95% interval for the slope."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if ns.shape != values.shape or ns.ndim != 1:
        raise DomainError("ns and values must be 1-D arrays of equal length")
    if ns.size < 4:
        raise DomainError("a rate fit needs at least 4 points")
    if np.any(values <= 0) or np.any(ns <= 0):
        raise DomainError("rate fit needs positive values")
    x = np.log(ns)
    y = np.log(values)
    res = stats.linregress(x, y)
    half = stats.t.ppf(0.975, x.size - 2) * res.stderr
    r2 = min(1.0, max(0.0, res.rvalue ** 2))
    return RateFit(float(res.slope), float(res.intercept), float(r2),
                   (float(res.slope - half), float(res.slope + half)))
