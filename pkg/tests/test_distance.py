import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from quadclt.distance import (ImhofCdf, cdf_curve, imhof_cdf, wasserstein_empirical, wasserstein_exact,
                              write_distance_csv)
from quadclt.errors import DomainError, NonConvergence
from quadclt.montecarlo import simulate_statistics
from quadclt.oracle import chisquare_weights, variance_exact
from quadclt.spectra import (Farima, PowerLawWeight, UnitWeight, covariance_sequence, farima_autocov,
                             weight_fourier)


def test_single_weight_closed_form(derived):
    assert imhof_cdf([1.0], 0.0) == pytest.approx(derived["chi2_1_cdf_at_1"], rel=1e-14)
    assert imhof_cdf([-1.0], 0.0) == pytest.approx(1 - derived["chi2_1_cdf_at_1"], rel=1e-13)
    assert imhof_cdf([0.0, 0.0], -0.1) == 0.0
    assert imhof_cdf([0.0], 0.0) == 1.0


def test_symmetric_weights_median_zero():
    assert imhof_cdf([0.7, -0.7], 0.0, tol=1e-4) == pytest.approx(0.5, abs=1e-4)


def test_chi2_16(derived):
    assert imhof_cdf(np.full(16, 0.25), 0.0, tol=1e-9) == pytest.approx(derived["chi2_16_cdf_at_16"], abs=1e-9)


def test_inversion_matches_chi2_grid():
    lam = np.full(6, 0.5)
    xs = np.linspace(-2.5, 8.0, 23)
    cdf = ImhofCdf(lam, tol=1e-8, x_scale=10.0)
    np.testing.assert_allclose(cdf(xs), stats.chi2.cdf(2 * xs + 6, 6), atol=1e-8)


def test_mixed_signs_against_monte_carlo():
    lam = np.array([0.9, -0.5, 0.3])
    rng = np.random.Generator(np.random.PCG64(4))
    q = (rng.standard_normal((1_000_000, 3)) ** 2 - 1) @ lam
    for x in (-1.0, 0.0, 0.7, 2.5):
        p = imhof_cdf(lam, x, tol=1e-4)
        emp = np.mean(q <= x)
        se = math.sqrt(emp * (1 - emp) / q.size)
        assert abs(p - emp) < 5 * se + 1e-4


def test_unreachable_tolerance_raises():
    with pytest.raises(NonConvergence):
        imhof_cdf([1.0, -1.0], 0.0, tol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0).filter(lambda v: abs(v) > 0.05), min_size=3, max_size=12))
def test_cdf_curve_monotone_and_bounded(w):
    curve = cdf_curve(w, tol=1e-5, points=201)
    assert np.all(np.diff(curve.ps) >= 0)
    assert curve.ps.min() >= 0 and curve.ps.max() <= 1
    assert curve.tail_bound < 1e-5


def test_degenerate_point_mass():
    assert wasserstein_exact(np.zeros(5), 1.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-15)
    assert wasserstein_exact([], 2.0) == pytest.approx(2 * math.sqrt(2 / math.pi), rel=1e-15)
    with pytest.raises(DomainError):
        wasserstein_exact([1.0], 0.0)


def test_w1_chi2_16(derived):
    val = wasserstein_exact(np.full(16, 0.25), math.sqrt(2.0), tol=1e-7)
    assert val == pytest.approx(derived["w1_whitenoise_n16_sigma_sqrt2"], abs=2e-7)


def test_w1_four_weights(derived):
    val = wasserstein_exact(np.full(4, 1 / math.sqrt(8)), 1.0, tol=1e-4)
    assert val == pytest.approx(derived["w1_four_equal_weights_sigma1"], abs=2e-4)


def test_w1_near_gaussian_limit():
    n = 4096
    val = wasserstein_exact(np.full(n, 1 / math.sqrt(n)), math.sqrt(2.0), tol=1e-7)
    assert 0 < val < 0.02


def test_empirical_closed_forms():
    assert wasserstein_empirical(np.zeros(10), 1.5).value == pytest.approx(1.5 * math.sqrt(2 / math.pi), rel=1e-14)
    rng = np.random.Generator(np.random.PCG64(9))
    s = 1.7
    res = wasserstein_empirical(s * rng.standard_normal(1_000_000), s)
    assert res.value < 0.005
    assert res.samples == 1_000_000


def test_empirical_matches_scipy(rng):
    # scipy's W1 between samples and a fine Gaussian quantile grid is a consistent cross-check
    x = rng.standard_normal(2000) * 0.8 + 0.3
    q = stats.norm.ppf((np.arange(200_000) + 0.5) / 200_000)
    assert wasserstein_empirical(x, 1.0).value == pytest.approx(stats.wasserstein_distance(x, q), abs=2e-4)


CASES = [
    (Farima(0.0), UnitWeight(), 16),
    (Farima(0.0), UnitWeight(), 64),
    (Farima(0.2), UnitWeight(), 32),
    (Farima(0.1), PowerLawWeight(0.2), 48),
    (Farima(0.2), PowerLawWeight(0.1, sign=-1), 24),
]


@pytest.mark.parametrize("model,weight,n", CASES, ids=[f"case{i}" for i in range(len(CASES))])
def test_exact_vs_empirical(model, weight, n):
    cov = covariance_sequence(model, n - 1)
    wf = weight_fourier(weight, n - 1)
    sigma0 = math.sqrt(variance_exact(cov, wf, n)) * 1.1
    tol = 1e-6
    exact = wasserstein_exact(chisquare_weights(cov, wf, n), sigma0, tol=tol)
    emp = wasserstein_empirical(simulate_statistics(cov, wf, n, 200_000, seed=n), sigma0)
    assert abs(exact - emp.value) < 3 * (emp.se + tol)


def test_write_distance_csv(tmp_path):
    dest = tmp_path / "d.csv"
    write_distance_csv([(16, 0.5, float("nan"), 1.0)], dest)
    assert dest.read_text().splitlines() == ["n,dW_exact,dW_empirical,stein_bound", "16,0.5,nan,1"]
