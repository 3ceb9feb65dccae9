import numpy as np
import pytest

from quadclt.errors import DomainError
from quadclt.rates import rate_fit

NS = np.array([64, 128, 256, 512, 1024, 2048])


def test_exact_power():
    fit = rate_fit(NS, NS ** -0.5)
    assert fit.slope == pytest.approx(-0.5, abs=1e-13)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.within(-0.5, 1e-12)


def test_scaled_power():
    fit = rate_fit(NS, 3 * NS ** -0.1)
    assert abs(fit.slope + 0.1) < 1e-12
    assert fit.intercept == pytest.approx(np.log(3))


def test_ci_coverage():
    rng = np.random.Generator(np.random.PCG64(2))
    hits = 0
    for _ in range(100):
        vals = NS ** -0.3 * np.exp(0.05 * rng.standard_normal(NS.size))
        lo, hi = rate_fit(NS, vals).ci95
        hits += lo <= -0.3 <= hi
    assert hits >= 90


def test_errors():
    with pytest.raises(DomainError):
        rate_fit([1, 2, 3], [1, 2, 3])
    with pytest.raises(DomainError):
        rate_fit([1, 2, 3, 4], [1, 0, 3, 4])
    with pytest.raises(DomainError):
        rate_fit([1, 2, 3, 4], [1, 2, 3])
