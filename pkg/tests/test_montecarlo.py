import math

import numpy as np
import pytest

from quadclt.montecarlo import fourth_cumulant, jackknife, simulate_statistics, variance_with_se
from quadclt.oracle import kappa4_exact, variance_exact
from quadclt.spectra import PowerLawWeight, farima_autocov, weight_fourier


def test_moment_estimators_on_gaussian():
    rng = np.random.Generator(np.random.PCG64(0))
    x = 2.0 * rng.standard_normal(400_000)
    v, se = variance_with_se(x)
    assert se == pytest.approx(math.sqrt(2 * 16 / x.size), rel=0.02)
    assert abs(v - 4.0) < 4 * se
    k4, k4_se = jackknife(x, fourth_cumulant)
    assert abs(k4) < 4 * k4_se


def test_jackknife_of_mean():
    rng = np.random.Generator(np.random.PCG64(1))
    x = rng.standard_normal(10_000)
    full, se = jackknife(x, np.mean, groups=50)
    assert full == pytest.approx(x.mean())
    assert se == pytest.approx(1 / math.sqrt(x.size), rel=0.3)


def test_simulated_statistics_match_exact_law():
    n = 32
    cov = farima_autocov(0.2, 1.0, n - 1)
    wf = weight_fourier(PowerLawWeight(0.2), n - 1)
    f = simulate_statistics(cov, wf, n, 200_000, seed=5)
    np.testing.assert_array_equal(simulate_statistics(cov, wf, n, 1000, seed=5),
                                  simulate_statistics(cov, wf, n, 1000, seed=5))
    assert abs(f.mean()) < 4 * f.std() / math.sqrt(f.size)
    v, se = variance_with_se(f)
    assert abs(v - variance_exact(cov, wf, n)) < 4 * se
    k4, k4_se = jackknife(f, fourth_cumulant)
    assert abs(k4 - kappa4_exact(cov, wf, n)) < 5 * k4_se
