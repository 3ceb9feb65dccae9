"""Monte Carlo replicates of ``F_n`` and the moment estimators used to check the exact law."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import stats

from .simulate import mix64, plan_circulant, sample_paths
from .spectra import CovSequence, WeightFourier
from .statistic import integrated_statistic_batch


def simulate_statistics(cov: CovSequence, wf: WeightFourier, n: int, count: int, seed: int,
                        chunk: int = 8192) -> np.ndarray:
    """``count`` independent draws of ``F_n``; chunk ``c`` is seeded with ``mix64(seed, c)``."""
    plan = plan_circulant(cov, n)
    out = np.empty(count)
    for c, start in enumerate(range(0, count, chunk)):
        rows = min(chunk, count - start)
        paths = sample_paths(plan, mix64(seed, c), rows)
        out[start:start + rows] = integrated_statistic_batch(paths, cov, wf)
    return out


def variance_with_se(x: np.ndarray) -> tuple[float, float]:
    """Sample variance and its large-sample standard error ``sqrt((m4 - s^4) / m)``."""
    x = np.asarray(x, dtype=float)
    m = x.size
    c = x - x.mean()
    s2 = float(c @ c / (m - 1))
    m4 = float(np.mean(c ** 4))
    return s2, math.sqrt(max(m4 - s2 * s2, 0.0) / m)


def fourth_cumulant(x: np.ndarray) -> float:
    """Unbiased k-statistic ``k_4``."""
    return float(stats.kstat(np.asarray(x, dtype=float), 4))


def jackknife(x: np.ndarray, stat: Callable[[np.ndarray], float], groups: int = 100) -> tuple[float, float]:
    """Delete-a-group jackknife: full-sample statistic and its standard error."""
    x = np.asarray(x, dtype=float)
    parts = np.array_split(x, groups)
    full = stat(x)
    loo = np.array([stat(np.concatenate(parts[:g] + parts[g + 1:])) for g in range(groups)])
    se = math.sqrt((groups - 1) / groups * float(np.sum((loo - loo.mean()) ** 2)))
    return full, se
