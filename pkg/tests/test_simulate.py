import math

import numpy as np
import pytest
from scipy import stats

from quadclt.errors import DomainError, NegativeEmbedding
from quadclt.simulate import mix64, plan_circulant, sample_path, sample_paths, write_path_csv
from quadclt.spectra import CovSequence, farima_autocov


def white(n):
    r = np.zeros(n)
    r[0] = 1.0
    return CovSequence(r, "closed-form")


def test_white_noise_plan():
    plan = plan_circulant(white(8), 8)
    assert plan.m == 16
    np.testing.assert_allclose(plan.circ_eigs, 1.0, atol=1e-15)


def test_farima_embedding_nonnegative(derived):
    plan = plan_circulant(farima_autocov(0.2, 1.0, 1024), 1024)
    assert plan.m == 2048
    assert plan.circ_eigs.min() >= 0
    rel = plan.circ_eigs.min() / plan.circ_eigs.max()
    assert rel == pytest.approx(derived["farima_d02_n1024_embed_min_rel_eig"], rel=1e-10)


def test_non_extendable_sequence_rejected():
    r = np.zeros(4)
    r[:2] = [1.0, 0.9]
    with pytest.raises(NegativeEmbedding):
        plan_circulant(CovSequence(r), 4)


def test_short_sequence_rejected():
    with pytest.raises(DomainError):
        plan_circulant(white(3), 8)


def test_same_seed_identical():
    plan = plan_circulant(farima_autocov(0.2, 1.0, 63), 64)
    a = sample_path(plan, 99)
    b = sample_path(plan, 99)
    np.testing.assert_array_equal(a.x, b.x)
    assert a.plan_ref == plan.cov_hash
    assert not np.array_equal(a.x, sample_path(plan, 100).x)
    np.testing.assert_array_equal(sample_paths(plan, 5, 10), sample_paths(plan, 5, 10))


def test_mix64_distinct_and_deterministic():
    seeds = {mix64(7, i) for i in range(10_000)}
    assert len(seeds) == 10_000
    assert mix64(7, 3) == mix64(7, 3)
    assert all(0 <= s < 2 ** 64 for s in seeds)


def test_white_noise_variance():
    plan = plan_circulant(white(1), 1)
    x = sample_paths(plan, 2024, 100_000)[:, 0]
    assert abs(x.var() - 1.0) < 3 * math.sqrt(2 / 1e5)


def test_exact_covariance():
    n = 32
    cov = farima_autocov(0.3, 1.0, n - 1)
    x = sample_paths(plan_circulant(cov, n), 3, 200_000)
    emp = x.T @ x / x.shape[0]
    target = np.array([[cov.r[abs(i - j)] for j in range(n)] for i in range(n)])
    se = np.sqrt((target ** 2 + np.outer(np.diag(target), np.diag(target))) / x.shape[0])
    assert np.max(np.abs(emp - target) / se) < 5.0


def test_gaussian_marginals():
    cov = farima_autocov(0.2, 1.0, 15)
    x = sample_paths(plan_circulant(cov, 16), 11, 100_000)[:, 7] / math.sqrt(cov.r[0])
    assert abs(stats.skew(x)) < 0.05
    assert abs(stats.kurtosis(x)) < 0.1


def test_seed_independence():
    plan = plan_circulant(farima_autocov(0.2, 1.0, 7), 8)
    a = np.array([sample_path(plan, mix64(1, 2 * i)).x[0] for i in range(4000)])
    b = np.array([sample_path(plan, mix64(1, 2 * i + 1)).x[0] for i in range(4000)])
    corr = np.corrcoef(a, b)[0, 1]
    assert abs(corr) < 5 / math.sqrt(a.size)


def test_write_path_csv(tmp_path):
    plan = plan_circulant(white(4), 4)
    p = sample_path(plan, 1)
    dest = tmp_path / "path.csv"
    write_path_csv(p, dest)
    back = np.loadtxt(dest, delimiter=",", skiprows=1, ndmin=1)
    np.testing.assert_allclose(back, p.x, rtol=1e-14)
