import math

import numpy as np
import pytest

from quadclt.errors import ConfigError, DomainError
from quadclt.rates import rate_fit
from quadclt.simulate import mix64, plan_circulant, sample_path
from quadclt.spectra import Constant, Farima, farima_autocov
from quadclt.whittle import (WhittleConfig, candidate_variances, contrast, fit, hessian, mc_normality,
                             population_data, prepare, score, write_alpha_hats, write_mc_csv)

FARIMA_CFG = WhittleConfig(L=Farima(0.2).factor)
WN_CFG = WhittleConfig(L=Constant(1 / (2 * math.pi)))


def farima_path(n, seed, d=0.2):
    return sample_path(plan_circulant(farima_autocov(d, 1.0, n - 1), n), seed)


def test_config_validation():
    with pytest.raises(ConfigError):
        WhittleConfig(a=0.5, b=0.4)
    with pytest.raises(ConfigError):
        WhittleConfig(b=1.0)
    with pytest.raises(ConfigError):
        WhittleConfig(minimizer_tol=0.0)


def test_population_score_and_hessian(derived):
    data = population_data(Farima(0.2), FARIMA_CFG)
    assert abs(score(data, 0.4, FARIMA_CFG)) < 1e-10
    assert hessian(data, 0.4, FARIMA_CFG) == pytest.approx(derived["whittle_population_hessian"], rel=1e-9)
    assert fit(data, FARIMA_CFG).alpha_hat == pytest.approx(0.4, abs=1e-7)


def test_candidate_variances(derived):
    l2 = derived["log_square_integral"]
    c4, c8 = candidate_variances()
    assert c4 == pytest.approx(4 * math.pi / l2, rel=1e-14)
    assert c8 == pytest.approx(8 * math.pi / l2, rel=1e-14)
    assert c4 == pytest.approx(1.9590, abs=1e-4)


def test_finite_differences():
    data = prepare(farima_path(512, 3), FARIMA_CFG)
    h = 1e-4
    for a in (0.2, 0.4, 0.7):
        fd_score = (contrast(data, a + h, FARIMA_CFG) - contrast(data, a - h, FARIMA_CFG)) / (2 * h)
        fd_hess = (score(data, a + h, FARIMA_CFG) - score(data, a - h, FARIMA_CFG)) / (2 * h)
        assert fd_score == pytest.approx(score(data, a, FARIMA_CFG), rel=1e-4, abs=1e-9)
        assert fd_hess == pytest.approx(hessian(data, a, FARIMA_CFG), rel=1e-4)


def test_contrast_domain():
    with pytest.raises(DomainError):
        contrast(np.ones(8), 1.2, FARIMA_CFG)


def test_hessian_positive_on_random_paths():
    plan = plan_circulant(farima_autocov(0.2, 1.0, 127), 128)
    for r in range(100):
        data = prepare(sample_path(plan, mix64(77, r)), FARIMA_CFG)
        assert all(hessian(data, a, FARIMA_CFG) > 0 for a in (0.0, 0.5, 0.99))
        assert np.isfinite(contrast(data, 0.3, FARIMA_CFG))


def test_fit_first_order_condition_and_sign_change():
    cfg = FARIMA_CFG
    data = prepare(farima_path(2048, 11), cfg)
    res = fit(data, cfg)
    assert not res.at_boundary
    assert abs(score(data, res.alpha_hat, cfg)) < 10 * cfg.minimizer_tol * abs(hessian(data, res.alpha_hat, cfg))
    assert score(data, res.alpha_hat - 0.05, cfg) < 0 < score(data, res.alpha_hat + 0.05, cfg)
    grid = np.linspace(cfg.a, cfg.b, 41)
    assert res.q_value <= min(contrast(data, a, cfg) for a in grid) + 1e-12


def test_white_noise_recovers_zero():
    plan = plan_circulant(farima_autocov(0.0, 1.0, 4095), 4096)
    hats = np.array([fit(sample_path(plan, mix64(5, r)), WN_CFG).alpha_hat for r in range(200)])
    assert np.mean(hats < 0.05) >= 0.9
    assert hats.min() >= 0


def test_fourier_grid_variant_close():
    x = farima_path(4096, 21)
    a = fit(x, FARIMA_CFG).alpha_hat
    b = fit(x, WhittleConfig(L=Farima(0.2).factor, fourier_grid=True)).alpha_hat
    assert abs(a - b) < 0.05


def test_rmse_rate():
    ns = [1024, 2048, 4096, 8192]
    rmse = []
    for n in ns:
        plan = plan_circulant(farima_autocov(0.2, 1.0, n - 1), n)
        hats = np.array([fit(sample_path(plan, mix64(n, r)), FARIMA_CFG).alpha_hat for r in range(100)])
        rmse.append(math.sqrt(np.mean((hats - 0.4) ** 2)))
    assert rate_fit(ns, rmse).within(-0.5, 0.2)


def test_mc_normality_small(tmp_path):
    with pytest.raises(DomainError):
        mc_normality(FARIMA_CFG, Farima(0.2), 0.4, 256, 50, 1)
    s = mc_normality(FARIMA_CFG, Farima(0.2), 0.4, 256, 100, 1)
    assert s.replicates == 100 and s.failures == 0
    assert s.var_scaled > 0 and s.alpha_hats.size == 100
    assert s.adjudicated in {"4pi/L2", "8pi/L2", "both", "none"}
    again = mc_normality(FARIMA_CFG, Farima(0.2), 0.4, 256, 100, 1)
    np.testing.assert_array_equal(s.alpha_hats, again.alpha_hats)
    write_mc_csv([s], tmp_path / "mc.csv", {"seed": 1})
    write_alpha_hats(s, tmp_path / "hats.csv")
    assert (tmp_path / "mc.csv").read_text().splitlines()[0].endswith("boundary_hits,seed")
    assert len((tmp_path / "hats.csv").read_text().splitlines()) == 101
